"""Skew products on a truncated torus over a rigid base rotation.

The map sends x_1 to x_1 + alpha and every higher coordinate nu to
x_nu + h(x_1 + (nu - 2) beta), so coordinate nu never feeds back into any
lower one.  Truncating at dimension V is therefore exact, not an
approximation, and all the interesting arithmetic lives in the base
coordinate: x_1 flows through the angle's exact rational snapshot, while the
h arguments are carried as double-double floats seeded from that snapshot so
a 10^7-step orbit drifts by well under an ulp.

beta only needs to be irrational; the default is the golden fraction stored
as a 128-fractional-bit integer, so j * beta mod 1 stays exact in fixed
point for any j we can iterate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import fsum, isqrt
from typing import Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .contfrac import (
    AngleCF,
    PrecisionFloorError,
    ResourceBudgetError,
    angle_digest,
    signed_residue,
)
from .harmonic import (
    FINITE,
    CoboundaryFunction,
    FourierSeries,
    series_from_json,
    solve_coboundary,
    split_tau,
)
from .phases import TWO_PI, cis, cis_minus_one, frac_dyadic
from .summation import KahanComplex, KahanSum

BETA_BITS = 128
BETA_SCALE = 1 << BETA_BITS
# floor(beta * 2^128) for beta = (sqrt(5) - 1) / 2
BETA_FIX = isqrt(5 << (2 * BETA_BITS - 2)) - (1 << (BETA_BITS - 1))

DIRECT_STEP_LIMIT = 10**7
BLOCK_STEPS = 1 << 14
FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class TorusPoint:
    """Point on the truncated torus, coordinates in [0, 1).

    The base tag, when present, pins the first coordinate exactly:
    x_1 = {base_seed + base_steps * alpha} for the angle whose digest is
    base_angle.  Orbit operations create and advance the tag so that repeated
    stepping never accumulates rounding in the base coordinate; points built
    by hand carry no tag and seed the exact arithmetic from their float x_1.
    """

    coords: Tuple[float, ...]
    base_seed: Optional[float] = None
    base_steps: int = 0
    base_angle: Optional[str] = None

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) < 2:
            raise ValueError("need at least two coordinates")
        for c in coords:
            if not 0.0 <= c < 1.0:
                raise ValueError(f"coordinate {c!r} outside [0, 1)")
        object.__setattr__(self, "coords", coords)

    @property
    def v(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class FrequencyVector:
    """Integer pairing vector b_1..b_V, finitely supported.

    rho and norm follow the convention that the base coordinate does not
    count: rho = sum of b_nu and norm = sum of |b_nu| over nu >= 2 only.
    """

    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(b) for b in self.entries)
        if not entries:
            entries = (0,)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def unit(cls, nu: int, size: Optional[int] = None) -> "FrequencyVector":
        if nu < 1:
            raise ValueError("coordinate index starts at 1")
        size = max(nu, size or 0)
        return cls(tuple(1 if i == nu else 0 for i in range(1, size + 1)))

    @property
    def rho(self) -> int:
        return sum(self.entries[1:])

    @property
    def norm(self) -> int:
        return sum(abs(b) for b in self.entries[1:])

    @property
    def top_index(self) -> int:
        """Highest coordinate with a nonzero entry (0 for the zero vector)."""
        for i in range(len(self.entries), 0, -1):
            if self.entries[i - 1] != 0:
                return i
        return 0

    @property
    def is_zero(self) -> bool:
        return self.top_index == 0

    def label(self) -> str:
        return ";".join(str(b) for b in self.entries)


@dataclass(frozen=True)
class FlowConfig:
    """Immutable bundle: angle, driving series, truncation V, beta fixed point."""

    alpha: AngleCF
    h: FourierSeries
    v: int = 8
    beta_fix: int = BETA_FIX

    def __post_init__(self):
        if self.v < 2:
            raise ValueError("truncation dimension must be at least 2")
        if not 0 <= self.beta_fix < BETA_SCALE:
            raise ValueError("beta_fix must hold 128 fractional bits")


def flow_config_to_json(cfg: FlowConfig) -> dict:
    return {
        "angle": angle_digest(cfg.alpha),
        "series": cfg.h.to_json(),
        "v": cfg.v,
        "beta_fix": format(cfg.beta_fix, "x"),
    }


def flow_config_from_json(doc: dict, angle: AngleCF) -> FlowConfig:
    if doc.get("angle") != angle_digest(angle):
        raise ValueError("angle digest does not match the supplied angle")
    return FlowConfig(
        alpha=angle,
        h=series_from_json(doc["series"]),
        v=int(doc["v"]),
        beta_fix=int(doc["beta_fix"], 16),
    )


# ---------------------------------------------------------------------------
# exact base arithmetic


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    t = s - a
    return s, (a - (s - t)) + (b - t)


def _dd_of_fraction(num: int, den: int) -> Tuple[float, float]:
    """num/den as a double-double pair, both halves correctly rounded."""
    hi = num / den
    hp, hq = hi.as_integer_ratio()
    lo = (num * hq - hp * den) / (den * hq)
    return hi, lo


def _seed_of(cfg: FlowConfig, x: TorusPoint) -> Tuple[float, int]:
    if x.base_seed is not None and x.base_angle == angle_digest(cfg.alpha):
        return x.base_seed, x.base_steps
    return x.coords[0], 0


def _coord_bases(cfg: FlowConfig, seed: float, start: int) -> Tuple[List[int], int]:
    """Numerators of {seed + start*alpha + (nu-2)*beta} for nu = 2..V, plus den."""
    l, q = cfg.alpha.snapshot
    sp, sq = float(seed).as_integer_ratio()
    r0 = (start * l) % q
    den = q * sq * BETA_SCALE
    head = sp * q * BETA_SCALE + r0 * sq * BETA_SCALE
    qsq = q * sq
    nums = []
    for nu in range(2, cfg.v + 1):
        off = ((nu - 2) * cfg.beta_fix) % BETA_SCALE
        nums.append((head + off * qsq) % den)
    return nums, den


class _UStream:
    """Double-double carriers of the h arguments, one per coordinate nu >= 2.

    Seeded exactly from the snapshot; each advance adds alpha as a
    double-double and folds into [0, 1), so the accumulated error after n
    steps is at most about n * 2^-106, invisible at double precision.
    """

    __slots__ = ("hi", "lo", "ahi", "alo")

    def __init__(self, cfg: FlowConfig, seed: float, start: int):
        nums, den = _coord_bases(cfg, seed, start)
        self.hi: List[float] = []
        self.lo: List[float] = []
        for num in nums:
            h, l_ = _dd_of_fraction(num, den)
            self.hi.append(h)
            self.lo.append(l_)
        l, q = cfg.alpha.snapshot
        self.ahi, self.alo = _dd_of_fraction(l, q)

    def value(self, i: int) -> float:
        t = self.hi[i] + self.lo[i]
        if t >= 1.0:
            t -= 1.0
        elif t < 0.0:
            t += 1.0
        return t

    def advance(self):
        ahi, alo = self.ahi, self.alo
        hi, lo = self.hi, self.lo
        for i in range(len(hi)):
            s, e = _two_sum(hi[i], ahi)
            e += lo[i] + alo
            h, l_ = _two_sum(s, e)
            if h >= 1.0:
                h -= 1.0
            elif h < 0.0:
                h += 1.0
            hi[i] = h
            lo[i] = l_


def _u_blocks(cfg: FlowConfig, seed: float, start: int, n: int) -> Iterator[np.ndarray]:
    """Arrays of shape (V-1, block) holding u at consecutive step indices."""
    stream = _UStream(cfg, seed, start)
    width = cfg.v - 1
    done = 0
    while done < n:
        blk = min(BLOCK_STEPS, n - done)
        block = np.empty((width, blk))
        for j in range(blk):
            for i in range(width):
                block[i, j] = stream.value(i)
            stream.advance()
        yield block
        done += blk


def _series_block(series: FourierSeries, u: np.ndarray) -> np.ndarray:
    """Vectorized real evaluation of the series on an argument array."""
    out = np.zeros_like(u)
    for m, c in series.items():
        if m == 0:
            out += c.real
        else:
            f = np.mod(m * u, 1.0)
            ang = TWO_PI * f
            out += c.real * np.cos(ang) - c.imag * np.sin(ang)
    return out


def _x1_after(cfg: FlowConfig, seed: float, steps: int) -> float:
    """Exact float of {seed + steps * alpha}."""
    l, q = cfg.alpha.snapshot
    sp, sq = float(seed).as_integer_ratio()
    r = (steps * l) % q
    den = q * sq
    return ((sp * q + r * sq) % den) / den


def _check_point(cfg: FlowConfig, x: TorusPoint):
    if x.v != cfg.v:
        raise ValueError(f"point has dimension {x.v}, config expects {cfg.v}")


# ---------------------------------------------------------------------------
# stepping


def orbit_direct(cfg: FlowConfig, x: TorusPoint, n: int) -> TorusPoint:
    """n-fold composition by summing h along the base rotation, O(n)."""
    _check_point(cfg, x)
    n = int(n)
    if n < 0:
        raise ValueError("step count must be nonnegative")
    if n == 0:
        return x
    if n > DIRECT_STEP_LIMIT:
        raise ResourceBudgetError(
            f"direct orbit of {n} steps exceeds the {DIRECT_STEP_LIMIT} cap; "
            "use orbit_fast"
        )
    seed, start = _seed_of(cfg, x)
    sums = [KahanSum() for _ in range(cfg.v - 1)]
    for block in _u_blocks(cfg, seed, start, n):
        for i in range(cfg.v - 1):
            sums[i].add(float(np.sum(_series_block(cfg.h, block[i]))))
    coords = [_x1_after(cfg, seed, start + n)]
    for i in range(cfg.v - 1):
        coords.append((x.coords[i + 1] + sums[i].value) % 1.0)
    return TorusPoint(
        tuple(coords),
        base_seed=seed,
        base_steps=start + n,
        base_angle=angle_digest(cfg.alpha),
    )


def step(cfg: FlowConfig, x: TorusPoint) -> TorusPoint:
    """One application of the skew product."""
    return orbit_direct(cfg, x, 1)


def orbit_fast(cfg: FlowConfig, x: TorusPoint, n: int) -> TorusPoint:
    """n-fold composition in closed form, O(#coeffs) independent of n.

    Each coefficient contributes c(m) e(m u) (e(mn alpha) - 1)/(e(m alpha) - 1)
    with every phase taken from the exact snapshot; a frequency the snapshot
    makes resonant (rational angles) degenerates to the n-term constant sum.
    The zero coefficient turns into the exact dyadic drift {n h(0)}.
    """
    _check_point(cfg, x)
    n = int(n)
    if n < 0:
        raise ValueError("step count must be nonnegative")
    if n == 0:
        return x
    seed, start = _seed_of(cfg, x)
    l, q = cfg.alpha.snapshot
    nums, den = _coord_bases(cfg, seed, start)
    h0 = cfg.h.coeff(0).real
    drift = frac_dyadic(h0, n)
    # per-frequency constants shared by every coordinate
    kernels = []
    for m, c in cfg.h.items():
        if m == 0:
            continue
        rs = signed_residue(m, cfg.alpha)
        if rs == 0:
            kernels.append((m, c * n))
            continue
        zden = cis_minus_one(rs, q)
        if zden == 0:
            raise PrecisionFloorError(
                f"small divisor at m = {m} underflows double precision"
            )
        znum = cis_minus_one(signed_residue(m * n, cfg.alpha), q)
        kernels.append((m, c * (znum / zden)))
    coords = [_x1_after(cfg, seed, start + n)]
    for i in range(cfg.v - 1):
        base = nums[i]
        acc = KahanComplex()
        for m, ck in kernels:
            zu = cis(((m * base) % den) / den)
            term = ck * zu
            acc.add_parts(term.real, term.imag)
        total = acc.value
        coords.append((x.coords[i + 1] + drift + total.real) % 1.0)
    return TorusPoint(
        tuple(coords),
        base_seed=seed,
        base_steps=start + n,
        base_angle=angle_digest(cfg.alpha),
    )


def orbit_rows(
    cfg: FlowConfig, x: TorusPoint, n_max: int
) -> Iterator[Tuple[int, Tuple[float, ...]]]:
    """CSV-ready orbit dump: (n, coordinates) for n = 0..n_max."""
    _check_point(cfg, x)
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    yield 0, x.coords
    if n_max == 0:
        return
    seed, start = _seed_of(cfg, x)
    stream = _UStream(cfg, seed, start)
    sums = [KahanSum() for _ in range(cfg.v - 1)]
    af = cfg.alpha.float_value
    x1 = x.coords[0]
    for n in range(1, n_max + 1):
        for i in range(cfg.v - 1):
            sums[i].add(cfg.h.eval(stream.value(i)))
        stream.advance()
        x1 = stream.value(0)
        coords = [x1] + [
            (x.coords[i + 1] + sums[i].value) % 1.0 for i in range(cfg.v - 1)
        ]
        yield n, tuple(coords)


# ---------------------------------------------------------------------------
# pairing, metric, distality


def pairing(b: FrequencyVector, x: TorusPoint) -> float:
    """<b, x> mod 1 at the current point."""
    if b.top_index > x.v:
        raise ValueError(
            f"vector touches coordinate {b.top_index}, point has {x.v}"
        )
    return fsum(bv * xv for bv, xv in zip(b.entries, x.coords)) % 1.0


def _circle_dist(a: float, b: float) -> float:
    e = abs(a - b) % 1.0
    return min(e, 1.0 - e)


def metric_d(x: TorusPoint, y: TorusPoint) -> float:
    """Sum of 2^-nu times the circle distance per coordinate."""
    if x.v != y.v:
        raise ValueError("dimension mismatch")
    total = 0.0
    scale = 0.5
    for a, b in zip(x.coords, y.coords):
        total += scale * _circle_dist(a, b)
        scale *= 0.5
    return total


@dataclass(frozen=True)
class DistalityProbe:
    min_distance: float
    bound: float
    passed: bool
    same_base: bool
    spread: float
    n_max: int

    def to_json(self) -> dict:
        return {
            "claim": "inf_n d(T^n x, T^n y) >= separation bound",
            "n_max": self.n_max,
            "min_distance": self.min_distance,
            "bound": self.bound,
            "same_base": self.same_base,
            "spread": self.spread,
            "pass": self.passed,
        }


def distality_probe(
    cfg: FlowConfig, x: TorusPoint, y: TorusPoint, n_max: int
) -> DistalityProbe:
    """Track d(T^n x, T^n y) for n = 0..n_max against the separation bound.

    Distinct base coordinates keep at least half their circle distance
    forever; equal base coordinates make the h increments cancel, so the
    distance is pinned at 2^-nu0 times the first differing coordinate gap
    and should not move at all (the probe reports the observed spread).
    """
    _check_point(cfg, x)
    _check_point(cfg, y)
    if x.coords == y.coords:
        raise ValueError("points coincide")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    same_base = x.coords[0] == y.coords[0]
    if same_base:
        nu0 = next(
            i + 1 for i, (a, b) in enumerate(zip(x.coords, y.coords)) if a != b
        )
        bound = _circle_dist(x.coords[nu0 - 1], y.coords[nu0 - 1]) * 0.5**nu0
    else:
        bound = 0.5 * _circle_dist(x.coords[0], y.coords[0])
    d0 = metric_d(x, y)
    dmin = dmax = d0
    if n_max > 0:
        width = cfg.v - 1
        weights = np.array([0.5**nu for nu in range(2, cfg.v + 1)])
        seed_x = _seed_of(cfg, x)
        seed_y = _seed_of(cfg, y)
        shared_stream = same_base and seed_x == seed_y
        af = cfg.alpha.float_value
        bx = _u_blocks(cfg, seed_x[0], seed_x[1], n_max)
        by = None if shared_stream else _u_blocks(cfg, seed_y[0], seed_y[1], n_max)
        carry_x = np.zeros(width)
        carry_y = np.zeros(width)
        xc = np.array(x.coords[1:])
        yc = np.array(y.coords[1:])
        for ux in bx:
            uy = ux if shared_stream else next(by)
            d = np.zeros(ux.shape[1])
            if not shared_stream:
                x1 = np.mod(ux[0] + af, 1.0)
                y1 = np.mod(uy[0] + af, 1.0)
                e = np.abs(x1 - y1)
                d += 0.5 * np.minimum(e, 1.0 - e)
            for i in range(width):
                hx = _series_block(cfg.h, ux[i])
                px = carry_x[i] + np.cumsum(hx)
                carry_x[i] = px[-1]
                if shared_stream:
                    py = px
                else:
                    hy = _series_block(cfg.h, uy[i])
                    py = carry_y[i] + np.cumsum(hy)
                    carry_y[i] = py[-1]
                ax = np.mod(xc[i] + px, 1.0)
                ay = np.mod(yc[i] + py, 1.0)
                e = np.abs(ax - ay)
                d += weights[i] * np.minimum(e, 1.0 - e)
            dmin = min(dmin, float(np.min(d)))
            dmax = max(dmax, float(np.max(d)))
    return DistalityProbe(
        min_distance=dmin,
        bound=bound,
        passed=dmin >= bound - FLOAT_SLACK,
        same_base=same_base,
        spread=dmax - dmin,
        n_max=n_max,
    )


# ---------------------------------------------------------------------------
# Birkhoff averages


def birkhoff_avg(
    cfg: FlowConfig, b: FrequencyVector, x: TorusPoint, n_steps: int
) -> complex:
    """(1/N) sum over n = 1..N of e(<b, T^n x>)."""
    _check_point(cfg, x)
    if b.top_index > cfg.v:
        raise ValueError(
            f"vector touches coordinate {b.top_index}, config has {cfg.v}"
        )
    if n_steps < 1:
        raise ValueError("need at least one step")
    if n_steps > DIRECT_STEP_LIMIT:
        raise ResourceBudgetError(f"average over {n_steps} steps exceeds the cap")
    seed, start = _seed_of(cfg, x)
    width = cfg.v - 1
    b1 = b.entries[0] if b.entries else 0
    bn = [
        b.entries[nu - 1] if nu - 1 < len(b.entries) else 0
        for nu in range(2, cfg.v + 1)
    ]
    af = cfg.alpha.float_value
    carries = np.zeros(width)
    base = np.array(x.coords[1:])
    acc = KahanComplex()
    for block in _u_blocks(cfg, seed, start, n_steps):
        phase = np.zeros(block.shape[1])
        if b1 != 0:
            phase += b1 * np.mod(block[0] + af, 1.0)
        for i in range(width):
            if bn[i] == 0:
                continue
            h_vals = _series_block(cfg.h, block[i])
            prefix = carries[i] + np.cumsum(h_vals)
            carries[i] = prefix[-1]
            phase += bn[i] * np.mod(base[i] + prefix, 1.0)
        ang = TWO_PI * np.mod(phase, 1.0)
        acc.add_parts(float(np.sum(np.cos(ang))), float(np.sum(np.sin(ang))))
    total = acc.value
    return complex(total.real / n_steps, total.imag / n_steps)


# ---------------------------------------------------------------------------
# conjugacy


@dataclass(frozen=True)
class ConjugacyPair:
    """T and its straightened twin: T = Psi^-1 after T1 after Psi.

    top drives with the mean plus the fast resonant coefficients only; psi
    solves the coboundary for everything else, and the change of variables
    shifts coordinate nu by psi evaluated at the same argument h sees.
    """

    base: FlowConfig
    top: FlowConfig
    psi: CoboundaryFunction
    tau: float


def build_conjugacy(cfg: FlowConfig, tau: float) -> ConjugacyPair:
    h1p, h2p, mean = split_tau(cfg.h, cfg.alpha, tau)
    psi = solve_coboundary(h2p, cfg.alpha, tau=tau)
    top_coeffs = dict(h1p.items())
    if mean != 0.0:
        top_coeffs[0] = complex(mean, 0.0)
    top = replace(
        cfg, h=FourierSeries(top_coeffs, FINITE, 0.0, max(1.0, h1p.decay_const))
    )
    return ConjugacyPair(base=cfg, top=top, psi=psi, tau=float(tau))


def psi_map(pair: ConjugacyPair, x: TorusPoint, inverse: bool = False) -> TorusPoint:
    """Shift coordinate nu by -psi (or +psi) at the exact h argument."""
    cfg = pair.base
    _check_point(cfg, x)
    seed, start = _seed_of(cfg, x)
    nums, den = _coord_bases(cfg, seed, start)
    sign = 1.0 if inverse else -1.0
    coords = [x.coords[0]]
    for i in range(cfg.v - 1):
        shift = pair.psi.series.eval(nums[i] / den)
        coords.append((x.coords[i + 1] + sign * shift) % 1.0)
    return TorusPoint(
        tuple(coords),
        base_seed=x.base_seed,
        base_steps=x.base_steps,
        base_angle=x.base_angle,
    )


def psi_inv(pair: ConjugacyPair, x: TorusPoint) -> TorusPoint:
    return psi_map(pair, x, inverse=True)


@dataclass(frozen=True)
class ConjugacyCertificate:
    n_values: Tuple[int, ...]
    defects: Tuple[float, ...]
    budgets: Tuple[float, ...]
    passed: bool

    @property
    def worst_defect(self) -> float:
        return max(self.defects, default=0.0)

    def to_json(self) -> dict:
        return {
            "claim": "T^n = Psi^-1 after T1^n after Psi within budget",
            "n_values": list(self.n_values),
            "defects": list(self.defects),
            "budgets": list(self.budgets),
            "pass": self.passed,
        }


def check_conjugacy(
    pair: ConjugacyPair, x: TorusPoint, n_values: Iterable[int]
) -> ConjugacyCertificate:
    """Compare T^n x against Psi^-1(T1^n(Psi x)) coordinatewise.

    Both orbits run the truncated series, whose coboundary identity is exact
    by construction, so the per-step budget is the certified tail bound of
    psi plus a float allowance scaled by the size of psi.
    """
    cfg = pair.base
    _check_point(cfg, x)
    eps_step = FLOAT_SLACK * max(1.0, pair.psi.series.l1_norm())
    per_step = pair.psi.identity_error_bound + eps_step
    y = psi_map(pair, x)
    ns = sorted({int(n) for n in n_values})
    defects = []
    budgets = []
    ok = True
    for n in ns:
        if n < 1:
            raise ValueError("conjugacy check needs positive step counts")
        a = orbit_direct(cfg, x, n)
        bpt = psi_inv(pair, orbit_direct(pair.top, y, n))
        defect = max(
            _circle_dist(ai, bi) for ai, bi in zip(a.coords, bpt.coords)
        )
        budget = n * per_step + 10.0 * eps_step
        defects.append(defect)
        budgets.append(budget)
        ok = ok and defect <= budget
    return ConjugacyCertificate(
        n_values=tuple(ns),
        defects=tuple(defects),
        budgets=tuple(budgets),
        passed=ok,
    )
