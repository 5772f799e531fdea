"""Finite Fourier series, resonant splits, and coboundary solving.

Everything here is a finite trigonometric polynomial carrying an explicit
bound on whatever tail was discarded.  That keeps each downstream check
quantitative: an evaluation is a compensated finite sum, an identity holds up
to a number computed from the decay class, never up to an unspecified
constant.

Small divisors e(m alpha) - 1 are always computed from the exact residue of
m against the angle snapshot, then turned into a float through 2 sin(pi x)
forms, so a divisor of size 1e-4 near a resonant band is trusted to full
float precision rather than drowned by the subtraction of nearby units.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from math import cos, exp, pi, sin, sqrt
from random import Random
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np

from .contfrac import AngleCF, PrecisionFloorError, angle_digest, signed_residue
from .phases import cis, cis_minus_one, frac_dyadic
from .spectrum import SnapshotRangeError, classify, classify_tau
from .summation import KahanComplex

IMAG_RESIDUE_TOL = 1e-12
COEFF_GRID = 1 << 12
TAIL_ENUM_LIMIT = 10**6


class CoboundaryDomainError(ValueError):
    """A frequency whose small divisor may vanish was handed to the solver."""


@dataclass(frozen=True)
class Decay:
    """Declared coefficient decay: analytic(eta), smooth(tau), or finite."""

    kind: str  # "analytic" | "smooth" | "finite"
    param: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("analytic", "smooth", "finite"):
            raise ValueError(f"unknown decay kind {self.kind!r}")
        if self.kind == "finite":
            if self.param is not None:
                raise ValueError("finite decay takes no parameter")
        else:
            if self.param is None or not self.param > 0:
                raise ValueError(f"{self.kind} decay needs a positive parameter")
        if self.kind == "smooth" and self.param <= 3:
            raise ValueError("smooth decay requires an exponent above 3")

    def weight(self, m: int) -> float:
        """Upper envelope for |coefficient(m)| at unit constant, m != 0."""
        am = abs(m)
        if self.kind == "analytic":
            return exp(-self.param * am)
        if self.kind == "smooth":
            return am ** (-self.param)
        return 1.0


FINITE = Decay("finite")


class FourierSeries:
    """Immutable finite series sum of c(m) e(mt) with a certified tail bound.

    Coefficients must be conjugate-symmetric (the represented function is
    real) and must sit under decay_const times the decay envelope.  Evaluation
    runs over increasing |m| with compensated summation; each phase m*t is
    reduced mod 1 in exact integer arithmetic on the dyadic value of t.
    """

    __slots__ = ("_pairs", "_map", "decay", "truncation_error", "decay_const")

    def __init__(
        self,
        coeffs: Mapping[int, complex],
        decay: Decay = FINITE,
        truncation_error: float = 0.0,
        decay_const: float = 1.0,
    ):
        cleaned = {}
        for m, c in coeffs.items():
            c = complex(c)
            if c != 0:
                cleaned[int(m)] = c
        for m, c in cleaned.items():
            mirror = cleaned.get(-m, 0j)
            if abs(mirror - c.conjugate()) > 1e-12 * max(1.0, abs(c)):
                raise ValueError(f"conjugate symmetry fails at m = {m}")
        if truncation_error < 0:
            raise ValueError("truncation_error must be nonnegative")
        for m, c in cleaned.items():
            if m == 0:
                continue
            cap = decay_const * decay.weight(m)
            if abs(c) > cap * (1 + 1e-9):
                raise ValueError(
                    f"|c({m})| = {abs(c):.3e} breaks the declared "
                    f"{decay.kind} envelope {cap:.3e}"
                )
        self._pairs = tuple(sorted(cleaned.items(), key=lambda kv: (abs(kv[0]), kv[0])))
        self._map = cleaned
        self.decay = decay
        self.truncation_error = float(truncation_error)
        self.decay_const = float(decay_const)

    def __len__(self) -> int:
        return len(self._pairs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FourierSeries)
            and self._pairs == other._pairs
            and self.decay == other.decay
            and self.truncation_error == other.truncation_error
        )

    def coeff(self, m: int) -> complex:
        return self._map.get(m, 0j)

    def support(self) -> Tuple[int, ...]:
        return tuple(m for m, _ in self._pairs)

    def support_radius(self) -> int:
        return max((abs(m) for m in self._map), default=0)

    def items(self):
        """Coefficients in evaluation order: increasing (|m|, m)."""
        return self._pairs

    def eval_with_residue(self, t: float) -> Tuple[float, float]:
        acc = KahanComplex()
        for m, c in self._pairs:
            if m == 0:
                acc.add_parts(c.real, c.imag)
                continue
            z = cis(frac_dyadic(t, m))
            acc.add_parts(c.real * z.real - c.imag * z.imag,
                          c.real * z.imag + c.imag * z.real)
        v = acc.value
        return v.real, v.imag

    def eval(self, t: float) -> float:
        re, im = self.eval_with_residue(t)
        if abs(im) > IMAG_RESIDUE_TOL:
            warnings.warn(f"imaginary residue {im:.3e} at t = {t!r}", stacklevel=2)
        return re

    def derivative(self, order: int = 1) -> "FourierSeries":
        """Termwise derivative; decay reclassified as finite, constant widened
        to cover the (2 pi m)^order growth."""
        coeffs = {
            m: c * (2j * pi * m) ** order
            for m, c in self._pairs
            if m != 0 or order == 0
        }
        const = max((abs(c) for m, c in coeffs.items() if m != 0), default=1.0)
        return FourierSeries(coeffs, FINITE, 0.0, max(1.0, const))

    def scale(self, s: float) -> "FourierSeries":
        return FourierSeries(
            {m: c * s for m, c in self._pairs},
            self.decay,
            self.truncation_error * abs(s),
            self.decay_const * abs(s),
        )

    def l1_norm(self) -> float:
        return float(sum(abs(c) for _, c in self._pairs))

    def to_json(self) -> dict:
        return {
            "decay": {"kind": self.decay.kind, "param": self.decay.param},
            "coeffs": [[m, c.real, c.imag] for m, c in self._pairs],
            "tail_bound": self.truncation_error,
        }


def series_from_json(doc: Union[str, dict]) -> FourierSeries:
    if isinstance(doc, str):
        doc = json.loads(doc)
    decay = Decay(doc["decay"]["kind"], doc["decay"]["param"])
    coeffs = {int(m): complex(re, im) for m, re, im in doc["coeffs"]}
    # stored constants are not serialized; re-derive the tightest one
    const = 1.0
    for m, c in coeffs.items():
        if m:
            const = max(const, abs(c) / decay.weight(m))
    return FourierSeries(coeffs, decay, doc["tail_bound"], const)


def eval_series(series: FourierSeries, t: float) -> float:
    return series.eval(t)


# ---------------------------------------------------------------------------
# the h families


def furstenberg_h(
    angle: AngleCF,
    t_coeffs: Union[Mapping[int, float], Iterable[float]],
    k_cut: Optional[int] = None,
    t_bound: Optional[float] = None,
) -> FourierSeries:
    """Weighted ladder series sum of t_k (1 - e(q_k alpha)) e(q_k x) plus mirror.

    The factor 1 - e(q_k alpha) shrinks like 1/q_{k+1}, so the series is very
    close to its own coboundary obstruction by construction.  t_coeffs maps
    k >= 1 to a real weight (a plain sequence is read as k = 1, 2, ...).
    """
    if not isinstance(t_coeffs, Mapping):
        t_coeffs = {k: t for k, t in enumerate(t_coeffs, start=1)}
    if k_cut is None:
        k_cut = max(t_coeffs, default=0)
    if k_cut > angle.k_star - 1:
        raise SnapshotRangeError(
            f"k_cut = {k_cut} reaches past the built ladder (max {angle.k_star - 1})"
        )
    coeffs: Dict[int, complex] = {}
    for k, t in t_coeffs.items():
        if not 1 <= k <= k_cut:
            raise ValueError(f"weight index {k} outside 1..{k_cut}")
        t = float(t)
        if t_bound is not None and abs(t) > t_bound:
            raise ValueError(f"|t_{k}| = {abs(t)} exceeds the declared bound {t_bound}")
        if t == 0.0:
            continue
        qk = angle.q(k)
        r = signed_residue(qk, angle)
        minus = cis_minus_one(r, angle.q_snapshot)  # e(q_k alpha) - 1
        if minus == 0:
            # ||q_k alpha|| ~ 1/q_{k+1} fell below the smallest subnormal
            raise PrecisionFloorError(
                f"coefficient at q_{k} = {qk} underflows double precision"
            )
        coeffs[qk] = complex(-t * minus.real, -t * minus.imag)
        coeffs[-qk] = coeffs[qk].conjugate()
    return FourierSeries(coeffs, FINITE, 0.0)


def analytic_h_sample(eta: float, m_cut: int, seed: int) -> FourierSeries:
    """Random-phase series with |c(m)| = e^(-eta |m|) exactly and c(0) = 1.

    The tail bound is the closed geometric sum of the discarded envelope.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if m_cut < 1:
        raise ValueError("m_cut must be >= 1")
    rng = Random(seed)
    coeffs: Dict[int, complex] = {0: 1.0 + 0j}
    for m in range(1, m_cut + 1):
        mag = exp(-eta * m)
        z = cis(rng.random())
        coeffs[m] = complex(mag * z.real, mag * z.imag)
        coeffs[-m] = coeffs[m].conjugate()
    x = exp(-eta)
    tail = 2.0 * x ** (m_cut + 1) / (1.0 - x)
    return FourierSeries(coeffs, Decay("analytic", eta), tail)


def smooth_h_sample(tau: float, m_cut: int, seed: int) -> FourierSeries:
    """Random-phase series with |c(m)| = |m|^(-tau) exactly and c(0) = 1.

    Tail bound by integral comparison: 2 m_cut^(1-tau) / (tau - 1).
    """
    if not tau > 3:
        raise ValueError("tau must exceed 3")
    if m_cut < 1:
        raise ValueError("m_cut must be >= 1")
    rng = Random(seed)
    coeffs: Dict[int, complex] = {0: 1.0 + 0j}
    for m in range(1, m_cut + 1):
        mag = float(m) ** (-tau)
        z = cis(rng.random())
        coeffs[m] = complex(mag * z.real, mag * z.imag)
        coeffs[-m] = coeffs[m].conjugate()
    tail = 2.0 * float(m_cut) ** (1.0 - tau) / (tau - 1.0)
    return FourierSeries(coeffs, Decay("smooth", tau), tail)


# ---------------------------------------------------------------------------
# resonant splits


def _split_by(h: FourierSeries, into_first) -> Tuple[FourierSeries, FourierSeries, float]:
    first: Dict[int, complex] = {}
    second: Dict[int, complex] = {}
    mean = 0.0
    for m, c in h.items():
        if m == 0:
            mean = c.real
            continue
        (first if into_first(m) else second)[m] = c
    mk = lambda d: FourierSeries(d, h.decay, h.truncation_error, h.decay_const)
    return mk(first), mk(second), mean


def split_resonant(
    h: FourierSeries, angle: AngleCF
) -> Tuple[FourierSeries, FourierSeries, float]:
    """(resonant part, flat part, mean): bands k >= 2 with q_k | m vs the rest.

    Both parts inherit the decay class and the (shared, hence conservative)
    tail bound of h.  Coefficientwise h = h1 + h2 + mean.
    """
    return _split_by(h, lambda m: classify(m, angle).resonant)


def split_tau(
    h: FourierSeries, angle: AngleCF, tau=None
) -> Tuple[FourierSeries, FourierSeries, float]:
    """(fast-band part M1, slow part M2 u M3, mean) for the three-way split."""
    return _split_by(h, lambda m: classify_tau(m, angle, tau).theorem2_class == "M1")


# ---------------------------------------------------------------------------
# coboundaries


@dataclass(frozen=True)
class CoboundaryFunction:
    """g with g(t + alpha) - g(t) reproducing a non-resonant series.

    identity_error_bound caps the sup-norm defect against the underlying
    infinite series; for the stored frequencies the identity is exact by
    construction, so sampled defects should only show float noise plus this
    bound.
    """

    series: FourierSeries
    source: dict
    identity_error_bound: float

    def defect(self, t: float, rhs: FourierSeries, alpha_float: float) -> float:
        """|g(t + alpha) - g(t) - rhs(t)| evaluated at one point."""
        stepped = self.series.eval(t + alpha_float)
        here = self.series.eval(t)
        return abs(stepped - here - rhs.eval(t))


def _first_moment_tail_analytic(eta: float, cut: int) -> float:
    # sum_{m > cut} m x^m for x = e^-eta
    x = exp(-eta)
    return x ** (cut + 1) * ((cut + 1) - cut * x) / (1.0 - x) ** 2


def _tail_closed_form(decay: Decay, const: float, cut: int, theorem2_tau) -> float:
    """2 sum_{|m|>cut} envelope(m)/|e(m alpha)-1| under the small-divisor bounds.

    Flat-regime divisors: |e(m alpha)-1| >= 4 ||m alpha|| >= 2/|m| for bands
    k >= 1 without their divisor, and >= 2/|m|^(tau/3) on the slow divisible
    bands; the unified exponent tau/3 (or 1 in the flat split) makes one
    closed form per decay class.
    """
    if decay.kind == "finite":
        return 0.0
    if cut < 1:
        raise ValueError("tail bound needs a positive support radius")
    if theorem2_tau is None:
        # divisor >= 2/|m|
        if decay.kind == "analytic":
            return 2.0 * const * _first_moment_tail_analytic(decay.param, cut)
        s = decay.param - 1.0  # sum m^(1-tau) <= cut^(2-tau)/(tau-2)
        return 2.0 * const * float(cut) ** (1.0 - s) / (s - 1.0)
    power = float(theorem2_tau) / 3.0
    if decay.kind == "smooth":
        s = decay.param - power  # sum m^(power - tau)
        if s <= 1.0:
            raise ValueError("decay too weak against tau/3 divisors")
        return 2.0 * const * float(cut) ** (1.0 - s) / (s - 1.0)
    # analytic decay against m^(tau/3) divisors: numeric sum, geometric from
    # far enough out; remainder bounded by a geometric comparison
    x = exp(-decay.param)
    total = 0.0
    m = cut + 1
    while True:
        term = float(m) ** power * x**m
        total += term
        m += 1
        ratio = x * (1.0 + 1.0 / (m - 1)) ** power
        if ratio < 1.0 and term * ratio / (1.0 - ratio) < total * 1e-18 + 1e-300:
            total += term * ratio / (1.0 - ratio)
            break
        if m > cut + 10**6:
            raise ValueError("analytic tail refuses to settle; eta too small")
    return 2.0 * const * total


def _tail_uncovered_extra(
    angle: AngleCF, decay: Decay, const: float, cut: int, theorem2_tau
) -> float:
    """Exact-divisor contributions for divisible m in (cut, q_2).

    Below q_2 the generic lower bounds fail on the divisible frequencies
    (their band index is 0 or 1), so each one is added with its true divisor
    instead; there are at most q_2 of them.
    """
    if decay.kind == "finite":
        return 0.0
    q1, q2 = angle.q(1), angle.q(2)
    if cut + 1 >= q2:
        return 0.0
    if q2 - cut > TAIL_ENUM_LIMIT:
        raise ValueError(
            "too many sub-q_2 frequencies to enumerate; store a larger cut"
        )
    q = angle.q_snapshot
    extra = 0.0
    for m in range(cut + 1, q2):
        band_q = q1 if m >= q1 else 1
        if m % band_q:
            continue
        if theorem2_tau is not None:
            if classify_tau(m, angle, theorem2_tau).theorem2_class != "M2":
                continue
        div = abs(cis_minus_one(signed_residue(m, angle), q))
        extra += 4.0 * const * decay.weight(m) / div
    return extra


def solve_coboundary(
    h_nonres: FourierSeries, angle: AngleCF, tau=None
) -> CoboundaryFunction:
    """Divide each coefficient by its exact small divisor e(m alpha) - 1.

    With tau = None the input must avoid the resonant set (divisible bands
    k >= 2); with tau given it must avoid the fast divisible bands (class M1)
    and the error bound switches to the slow-band divisor estimates.
    """
    q = angle.q_snapshot
    coeffs: Dict[int, complex] = {}
    for m, c in h_nonres.items():
        if m == 0:
            raise CoboundaryDomainError(
                "mean term present: e(0) - 1 vanishes, split the mean off first"
            )
        if tau is None:
            if classify(m, angle).resonant:
                raise CoboundaryDomainError(f"m = {m} lies in a resonant band")
        else:
            if classify_tau(m, angle, tau).theorem2_class == "M1":
                raise CoboundaryDomainError(f"m = {m} lies in a fast divisible band")
        r = signed_residue(m, angle)
        if r == 0:
            raise CoboundaryDomainError(f"m = {m} annihilates the snapshot")
        divisor = cis_minus_one(r, q)
        if divisor == 0:
            raise PrecisionFloorError(
                f"small divisor at m = {m} underflows double precision"
            )
        coeffs[m] = c / divisor
    cut = h_nonres.support_radius()
    if h_nonres.decay.kind == "finite":
        bound = 0.0
    else:
        bound = _tail_closed_form(
            h_nonres.decay, h_nonres.decay_const, cut, tau
        ) + _tail_uncovered_extra(angle, h_nonres.decay, h_nonres.decay_const, cut, tau)
    g = FourierSeries(coeffs, FINITE, 0.0)
    source = {
        "angle": angle_digest(angle),
        "decay": h_nonres.decay.kind,
        "support": len(h_nonres),
        "mode": "flat-split" if tau is None else f"tau-split:{tau}",
    }
    return CoboundaryFunction(g, source, bound)


# ---------------------------------------------------------------------------
# coefficient decay certificate for composed exponentials


@dataclass(frozen=True)
class CoeffBoundCertificate:
    """Grid check of |c(m)| m^2 <= 8 (sup|f'|^2 + sup|f''|) for F = e(f).

    The 8 is audited slack over the integration-by-parts constant; the grid
    is fine enough that aliasing for the analytic integrands in scope sits
    below the stated noise floor.
    """

    m_limit: int
    grid: int
    passed: bool
    worst_m: int
    worst_lhs: float
    rhs: float
    deriv_norm: float
    second_norm: float
    noise_floor: float

    def to_json(self) -> dict:
        return {
            "claim": "|c(m)| m^2 <= 8 (sup|f'|^2 + sup|f''|) for F = e(f)",
            "range": {"m_limit": self.m_limit, "grid": self.grid},
            "pass": self.passed,
            "worst_witness": {
                "m": self.worst_m,
                "lhs": self.worst_lhs,
                "rhs": self.rhs,
                "sup_f_prime": self.deriv_norm,
                "sup_f_second": self.second_norm,
            },
        }


def check_coeff_bound(f: FourierSeries, m_limit: int) -> CoeffBoundCertificate:
    """Certify the quadratic coefficient decay of e(f) on a 4096-point grid.

    Coefficients of F come from one FFT; the derivative sup-norms are grid
    maxima of the termwise derivatives.  Frequencies past half the grid alias
    and are refused.
    """
    if m_limit < 1:
        raise ValueError("m_limit must be >= 1")
    if m_limit > COEFF_GRID // 2 - 1:
        raise ValueError(
            f"m_limit {m_limit} aliases on a {COEFF_GRID}-point grid; keep it below "
            f"{COEFF_GRID // 2}"
        )
    ts = np.arange(COEFF_GRID) / COEFF_GRID
    f_vals = np.zeros(COEFF_GRID, dtype=np.complex128)
    d1 = np.zeros(COEFF_GRID, dtype=np.complex128)
    d2 = np.zeros(COEFF_GRID, dtype=np.complex128)
    for m, c in f.items():
        wave = np.exp((2j * pi * m) * ts)
        f_vals += c * wave
        d1 += c * (2j * pi * m) * wave
        d2 += c * (2j * pi * m) ** 2 * wave
    if np.abs(f_vals.imag).max() > 1e-9:
        raise ValueError("f must be real-valued to build e(f)")
    big_f = np.exp(2j * pi * f_vals.real)
    coeffs = np.fft.fft(big_f) / COEFF_GRID
    n1 = float(np.abs(d1.real).max())
    n2 = float(np.abs(d2.real).max())
    rhs = 8.0 * (n1 * n1 + n2)
    noise = 1e-6
    passed = True
    worst_m = 0
    worst_lhs = 0.0
    for m in range(1, m_limit + 1):
        for sgn in (m, -m):
            lhs = abs(coeffs[sgn % COEFF_GRID]) * m * m
            if lhs > worst_lhs:
                worst_lhs, worst_m = lhs, sgn
            if lhs > rhs + noise:
                passed = False
    return CoeffBoundCertificate(
        m_limit, COEFF_GRID, passed, worst_m, worst_lhs, rhs, n1, n2, noise
    )
