"""Mobius-weighted correlation sums along skew-product orbits.

The headline quantity is S = sum of mu(n) e(<b, T^n x>) over a short segment
(N - M, N].  The pairing phase is assembled algebraically instead of
materializing orbits: the base term b_1 n alpha and every e(m n alpha) come
from exact snapshot residues advanced incrementally, the mean of h turns into
an exact dyadic drift, and each remaining coefficient contributes through the
closed geometric kernel.  Terms are added in ascending n with compensated
summation, so every record is reproducible bit for bit.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from hashlib import sha256
from math import ceil, log
from typing import Iterable, List, Optional, Sequence, Tuple

from mpmath import mp

from .contfrac import PrecisionFloorError, signed_residue
from .flow import (
    DIRECT_STEP_LIMIT,
    FlowConfig,
    FrequencyVector,
    TorusPoint,
    _check_point,
    _coord_bases,
    _seed_of,
    birkhoff_avg,
)
from .moebius import MuTable, sieve_segment, twisted_sum
from .phases import cis, cis_minus_one, frac_dyadic
from .summation import KahanComplex

CSV_HEADER = "N,M,theta,b,re_S,im_S,norm,runtime_ms"
THETA_FLOOR = 0.625  # short intervals below N^(5/8) are outside the window


@dataclass(frozen=True)
class CorrelationRecord:
    n_top: int
    length: int
    theta: float
    b: FrequencyVector
    x: TorusPoint
    value: complex
    runtime_ms: float

    @property
    def normalized(self) -> float:
        return abs(self.value) / self.length

    @property
    def in_window(self) -> bool:
        return THETA_FLOOR < self.theta <= 1.0

    def csv_row(self) -> str:
        return (
            f"{self.n_top},{self.length},{self.theta!r},{self.b.label()},"
            f"{self.value.real!r},{self.value.imag!r},"
            f"{self.normalized!r},{self.runtime_ms!r}"
        )


def records_to_csv(records: Iterable[CorrelationRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(rec.csv_row() for rec in records)
    return "\n".join(lines) + "\n"


def records_digest(records: Iterable[CorrelationRecord]) -> str:
    """Reproducibility hash over everything except wall-clock noise."""
    h = sha256()
    for rec in records:
        h.update(
            (
                f"{rec.n_top},{rec.length},{rec.theta!r},{rec.b.label()},"
                f"{','.join(repr(c) for c in rec.x.coords)},"
                f"{rec.value.real!r},{rec.value.imag!r}\n"
            ).encode()
        )
    return h.hexdigest()[:16]


def _theta_of(n_top: int, length: int) -> float:
    if n_top <= 1:
        return 1.0
    return log(length) / log(n_top)


def _modes_mp(modes, num: int, den: int):
    """Sum of Re(c e(m num/den)) under the ambient mp precision.

    Drift slopes get multiplied by the segment index, so one ulp here would
    cost 1e-11 of phase at n = 1e5; evaluating the constant once in extended
    precision and splitting it hi + lo keeps that amplification out of reach.
    """
    tot = mp.mpf(0)
    two_pi = 2 * mp.pi
    for m, c in modes:
        if m == 0:
            tot += c.real
            continue
        theta = two_pi * (mp.mpf((m * num) % den) / den)
        tot += c.real * mp.cos(theta) - c.imag * mp.sin(theta)
    return tot


def _dd_split(value) -> Tuple[float, float]:
    hi = float(value)
    return hi, float(value - hi)


def _record(b, x, n_top, length, theta, value, t0) -> CorrelationRecord:
    return CorrelationRecord(
        n_top=n_top,
        length=length,
        theta=theta,
        b=b,
        x=x,
        value=value,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )


def correlation_sum(
    cfg: FlowConfig,
    b: FrequencyVector,
    x: TorusPoint,
    n_top: int,
    length: int,
    *,
    table: Optional[MuTable] = None,
    theta: Optional[float] = None,
) -> CorrelationRecord:
    """S = sum of mu(n) e(<b, T^n x>) for n in (n_top - length, n_top].

    The zero vector collapses to the exact integer Mertens difference; a
    driving series without coefficients collapses to the twisted rotation sum
    times the constant phase of the starting point.  Everything else runs the
    kernel expansion with one exact residue stream per active frequency.
    """
    _check_point(cfg, x)
    if b.top_index > cfg.v:
        raise ValueError(f"vector touches coordinate {b.top_index}, config has {cfg.v}")
    if not 1 <= length <= n_top:
        raise ValueError("need 1 <= length <= n_top")
    t0 = time.perf_counter()
    theta = _theta_of(n_top, length) if theta is None else float(theta)
    if table is None:
        table = sieve_segment(n_top, length)
    n_lo = n_top - length + 1

    if b.is_zero:
        total = sum(table.mu(n) for n in range(n_lo, n_top + 1))
        return _record(b, x, n_top, length, theta, complex(total, 0.0), t0)

    b1 = b.entries[0] if b.entries else 0
    const = sum(
        bv * xv for bv, xv in zip(b.entries, x.coords) if bv != 0
    )

    if len(cfg.h) == 0:
        twisted = twisted_sum(
            n_top, length, 1, 0, cfg.alpha, table=table, mult=b1
        )
        value = cis(const % 1.0) * twisted.value
        return _record(b, x, n_top, length, theta, value, t0)

    seed, start = _seed_of(cfg, x)
    l, q = cfg.alpha.snapshot
    h0 = cfg.h.coeff(0).real
    active = [
        (nu, b.entries[nu - 1])
        for nu in range(2, cfg.v + 1)
        if nu - 1 < len(b.entries) and b.entries[nu - 1] != 0
    ]
    m_big = max(
        [abs(b1)] + [abs(m) for m in cfg.h.support() if m != 0]
    )
    if not cfg.alpha.exact and m_big * n_top << 60 >= q * q:
        raise PrecisionFloorError(
            f"multiple {m_big}*{n_top} exceeds the faithful range of the snapshot"
        )

    # per-frequency kernel constants and residue streams
    freqs: List[Tuple[int, int, int]] = []  # (m, step, residue at n_lo)
    weights = [[] for _ in active]  # Z constants per active coordinate
    drift = [(h0, 0.0) for _ in active]  # per-step slope, hi + lo
    if active:
        nums, den = _coord_bases(cfg, seed, start)
        resonant = []
        for m, c in cfg.h.items():
            if m == 0:
                continue
            rs = signed_residue(m, cfg.alpha)
            if rs == 0:
                # the snapshot makes e(m alpha) = 1: n identical terms per step
                resonant.append((m, c))
                continue
            zden = cis_minus_one(rs, q)
            if zden == 0:
                raise PrecisionFloorError(
                    f"small divisor at m = {m} underflows double precision"
                )
            step = (m * l) % q
            freqs.append((m, step, (n_lo * m * l) % q))
            for i, (nu, _) in enumerate(active):
                zu = cis(((m * nums[nu - 2]) % den) / den)
                weights[i].append(c * zu / zden)
        if resonant:
            with mp.workdps(50):
                for i, (nu, _) in enumerate(active):
                    tot = mp.mpf(h0) + _modes_mp(resonant, nums[nu - 2], den)
                    drift[i] = _dd_split(tot)

    # assembled constant part: b.x minus the kernel offsets sum Z
    base_phase = const - sum(
        bv * sum(w.real for w in weights[i]) for i, (_, bv) in enumerate(active)
    )
    b1_step = (b1 * l) % q
    b1_res = (n_lo * b1 * l) % q

    residues = [f[2] for f in freqs]
    steps = [f[1] for f in freqs]
    acc = KahanComplex()
    for n in range(n_lo, n_top + 1):
        mu = table.mu(n)
        if mu != 0:
            phase = base_phase
            if b1 != 0:
                phase += b1_res / q
            if active:
                amn = [cis(r / q) for r in residues]
                for i, (_, bv) in enumerate(active):
                    dhi, dlo = drift[i]
                    s = frac_dyadic(dhi, n) + n * dlo if dhi or dlo else 0.0
                    wrow = weights[i]
                    for k in range(len(wrow)):
                        z = wrow[k] * amn[k]
                        s += z.real
                    phase += bv * s
            z = cis(phase % 1.0)
            if mu == 1:
                acc.add_parts(z.real, z.imag)
            else:
                acc.add_parts(-z.real, -z.imag)
        # advance every residue stream exactly
        if b1 != 0:
            b1_res += b1_step
            if b1_res >= q:
                b1_res -= q
        for k in range(len(residues)):
            residues[k] += steps[k]
            if residues[k] >= q:
                residues[k] -= q
    return _record(b, x, n_top, length, theta, acc.value, t0)


def sweep(
    cfg: FlowConfig,
    b: FrequencyVector,
    x: TorusPoint,
    theta: float,
    n_list: Sequence[int],
) -> List[CorrelationRecord]:
    """One record per N with M = ceil(N^theta)."""
    if theta <= THETA_FLOOR:
        warnings.warn(
            f"theta = {theta} is at or below the 5/8 window floor; "
            "running anyway",
            RuntimeWarning,
            stacklevel=2,
        )
    if list(n_list) != sorted(set(int(n) for n in n_list)):
        raise ValueError("n_list must be strictly ascending")
    records = []
    for n_top in n_list:
        length = min(int(n_top), ceil(n_top**theta))
        records.append(correlation_sum(cfg, b, x, n_top, length, theta=theta))
    return records


def rational_case(
    cfg: FlowConfig,
    b: FrequencyVector,
    x: TorusPoint,
    n_top: int,
    length: int,
) -> CorrelationRecord:
    """Correlation over a rational angle via the residue-class closed form.

    For alpha = l/q the h argument cycles with period q, so the orbit sum
    splits into gamma1 (the partial cycle below the residue) plus whole
    cycles of gamma1 + gamma2, and each residue class r mod q carries a
    constant phase plus an arithmetic progression in (n - r)/q.
    """
    if not cfg.alpha.exact:
        raise ValueError("rational_case needs an angle with an exact snapshot")
    _check_point(cfg, x)
    if b.top_index > cfg.v:
        raise ValueError(f"vector touches coordinate {b.top_index}, config has {cfg.v}")
    if not 1 <= length <= n_top:
        raise ValueError("need 1 <= length <= n_top")
    t0 = time.perf_counter()
    theta = _theta_of(n_top, length)
    l, q = cfg.alpha.snapshot
    table = sieve_segment(n_top, length)
    n_lo = n_top - length + 1
    seed, start = _seed_of(cfg, x)
    b1 = b.entries[0] if b.entries else 0
    active = [
        (nu, b.entries[nu - 1])
        for nu in range(2, cfg.v + 1)
        if nu - 1 < len(b.entries) and b.entries[nu - 1] != 0
    ]
    const = sum(bv * xv for bv, xv in zip(b.entries, x.coords) if bv != 0)

    # h along one full cycle of the rational rotation, per active coordinate;
    # the full-period slope gets multiplied by (n - r)/q, so it is evaluated
    # in extended precision and split hi + lo
    prefix = [[0.0] for _ in active]  # prefix[i][j] = h summed over j cycle points
    modes = list(cfg.h.items())
    with mp.workdps(50):
        slope_mp = mp.mpf(0)
        for j in range(q):
            nums, den = _coord_bases(cfg, seed, start + j)
            for i, (nu, bv) in enumerate(active):
                prefix[i].append(prefix[i][-1] + cfg.h.eval(nums[nu - 2] / den))
                slope_mp += bv * _modes_mp(modes, nums[nu - 2], den)
        slope_hi, slope_lo = _dd_split(slope_mp)

    acc = KahanComplex()
    for r in range(q):
        # constant phase of the class: b1 r alpha + sum b_nu gamma1(r)
        c_r = const + b1 * (((r * l) % q) / q)
        c_r += sum(bv * prefix[i][r] for i, (_, bv) in enumerate(active))
        first = n_lo + (r - n_lo) % q
        for n in range(first, n_top + 1, q):
            mu = table.mu(n)
            if mu == 0:
                continue
            k = (n - r) // q
            phase = (c_r + frac_dyadic(slope_hi, k) + k * slope_lo) % 1.0
            z = cis(phase)
            if mu == 1:
                acc.add_parts(z.real, z.imag)
            else:
                acc.add_parts(-z.real, -z.imag)
    return _record(b, x, n_top, length, theta, acc.value, t0)


@dataclass(frozen=True)
class IrregularityTable:
    rows: Tuple[Tuple[str, int, complex], ...]
    spread: float

    def to_json(self) -> dict:
        return {
            "rows": [
                {"label": lab, "n": n, "re": v.real, "im": v.imag, "abs": abs(v)}
                for lab, n, v in self.rows
            ],
            "spread": self.spread,
        }


def irregularity_demo(
    cfg: FlowConfig,
    x: TorusPoint,
    k_range: Iterable[int] = (1, 2, 3),
    dyadic: Iterable[int] = tuple(2**j for j in range(7, 14)),
) -> IrregularityTable:
    """Birkhoff averages of e(x_2) at denominator times and dyadic times.

    Averages along the denominator subsequence hug different limit points
    than generic times; the table records the raw values and the spread of
    the moduli over the denominator rows.  Nothing is asserted beyond shape:
    the interesting behaviour is asymptotic and desk scale only sketches it.
    """
    if cfg.alpha.kind != "exp-type":
        raise ValueError("the demonstration needs an exp-type angle")
    b = FrequencyVector.unit(2, cfg.v)
    rows = []
    moduli = []
    for k in sorted(set(int(k) for k in k_range)):
        n = cfg.alpha.q(k)
        if n > DIRECT_STEP_LIMIT:
            raise ValueError(f"q_{k} = {n} is past desk scale; stop at a smaller k")
        avg = birkhoff_avg(cfg, b, x, n)
        rows.append((f"q_{k}", n, avg))
        moduli.append(abs(avg))
    for n in sorted(set(int(n) for n in dyadic)):
        rows.append((f"2^{n.bit_length() - 1}", n, birkhoff_avg(cfg, b, x, n)))
    spread = max(moduli) - min(moduli) if moduli else 0.0
    return IrregularityTable(rows=tuple(rows), spread=spread)
