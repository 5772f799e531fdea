"""Exact continued-fraction engine for Liouville-type rotation angles.

An angle is represented by its partial quotients together with a snapshot
convergent l/q taken well past the advertised growth range, so that every
quantity the rest of the package touches (residues, distances to integers,
resonance bands) is computed in exact integer arithmetic against l/q.
Quotients past the advertised index are 1, which keeps the snapshot a strict
refinement of every advertised convergent without changing the growth class.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from mpmath import mp

from .phases import fold_signed

__all__ = [
    "Convergent",
    "PartialQuotients",
    "AngleCF",
    "ExpWindowRecord",
    "PolyCapRecord",
    "BoundsCertificate",
    "QuotientsExhausted",
    "PrecisionFloorError",
    "ResourceBudgetError",
    "AngleDocumentError",
    "convergents_from_quotients",
    "build_exp_alpha",
    "build_poly_alpha",
    "explicit_angle",
    "rational_angle",
    "frac_mod1",
    "residue",
    "signed_residue",
    "dist_to_int",
    "check_convergent_bounds",
    "legendre_locate",
    "angle_to_json",
    "angle_from_json",
    "angle_digest",
]

# Quotients appended past the advertised index.  phi^64 > 2e13, so the
# snapshot refines the last advertised convergent by far more than any
# strict-inequality margin the certificates need.
GOLDEN_TAIL_STEPS = 64

# Precision floor: the snapshot must resolve phases n*m*alpha for n up to
# N_MAX and frequencies up to M_MAX with 2^60 of headroom, so that the float
# obtained from an exact residue is faithful to the ideal angle.
DEFAULT_N_MAX = 10**8
DEFAULT_M_MAX = 10**6
PRECISION_FLOOR = DEFAULT_N_MAX * DEFAULT_M_MAX * 2**60

# Hard ceiling on the bit size of any denominator a builder will produce.
# One exponential step past a four-digit q_k would need ~1e3500 bits.
BIT_BUDGET = 1 << 22


class QuotientsExhausted(ValueError):
    """Requested an index past the stored partial quotients."""


class PrecisionFloorError(ValueError):
    """Snapshot denominator too small for the requested resolution."""


class ResourceBudgetError(RuntimeError):
    """Construction would exceed the integer bit budget."""


class AngleDocumentError(ValueError):
    """Serialized angle fails its internal consistency check."""


@dataclass(frozen=True)
class Convergent:
    k: int
    l: int
    q: int


@dataclass(frozen=True)
class PartialQuotients:
    a0: int
    quotients: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.a0 < 0:
            raise ValueError("a0 must be nonnegative")
        for a in self.quotients:
            if a < 1:
                raise ValueError("partial quotients must be positive integers")


@dataclass(frozen=True)
class ExpWindowRecord:
    """Ratio q_{k+1} / e^{q_k}; the [1/2, 3] window is this package's
    acceptance band for 'comparable to e^{q_k}'."""

    k: int
    ratio: float
    in_window: bool


@dataclass(frozen=True)
class PolyCapRecord:
    k: int
    within_cap: bool      # q_{k+1} <= 2 * q_k**tau, checked exactly
    sharp_member: bool    # q_{k+1} > q_k**(tau/3), checked exactly


@dataclass(frozen=True)
class AngleCF:
    """A rotation angle pinned to an exact rational snapshot.

    convergents runs from index 0 through the snapshot index; k_star is the
    advertised index, past which the quotients are the padding tail.
    """

    pq: PartialQuotients
    convergents: tuple[Convergent, ...]
    k_star: int
    kind: str
    tau: Optional[Fraction] = None
    growth: tuple = field(default=())
    exact: bool = False  # True when the quotients are the complete expansion

    @property
    def snap_index(self) -> int:
        return len(self.convergents) - 1

    @property
    def l_snapshot(self) -> int:
        return self.convergents[-1].l

    @property
    def q_snapshot(self) -> int:
        return self.convergents[-1].q

    @property
    def snapshot(self) -> tuple[int, int]:
        c = self.convergents[-1]
        return (c.l, c.q)

    @property
    def float_value(self) -> float:
        return self.l_snapshot / self.q_snapshot

    def q(self, k: int) -> int:
        return self.convergents[k].q

    def l(self, k: int) -> int:
        return self.convergents[k].l


def convergents_from_quotients(a0: int, quotients: Sequence[int]) -> list[Convergent]:
    """Run the standard recurrence l_{k+1} = a_{k+1} l_k + l_{k-1} (same for q)."""
    convs = [Convergent(0, a0, 1)]
    if not quotients:
        return convs
    convs.append(Convergent(1, a0 * quotients[0] + 1, quotients[0]))
    for k in range(2, len(quotients) + 1):
        a = quotients[k - 1]
        prev, prev2 = convs[-1], convs[-2]
        convs.append(Convergent(k, a * prev.l + prev2.l, a * prev.q + prev2.q))
    return convs


def _iroot(n: int, r: int) -> int:
    """Floor of the r-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("negative radicand")
    if r == 1 or n <= 1:
        return n
    x = 1 << -((-n.bit_length()) // r)
    while True:
        y = ((r - 1) * x + n // x ** (r - 1)) // r
        if y >= x:
            return x
        x = y


def _nearest_exp_over(qk: int) -> int:
    """Round-half-up integer nearest e^{qk} / qk."""
    digits = max(200, int(qk * 0.4343) + 60)
    with mp.workdps(digits):
        x = mp.exp(qk) / qk
        return int(mp.floor(x + mp.mpf(1) / 2))


def _exp_ratio(q_next: int, qk: int) -> float:
    with mp.workdps(60):
        return float(mp.mpf(q_next) * mp.exp(-qk))


def _finish_angle(
    quotients: list[int],
    k_star: int,
    kind: str,
    tau: Optional[Fraction],
    growth: tuple,
    tail_steps: int,
    precision_floor: int,
) -> AngleCF:
    quotients = quotients + [1] * tail_steps
    convs = convergents_from_quotients(0, quotients)
    q_snap = convs[-1].q
    if q_snap <= precision_floor:
        raise PrecisionFloorError(
            f"snapshot denominator has {len(str(q_snap))} digits, below the "
            f"precision floor; choose a larger k_star"
        )
    return AngleCF(
        pq=PartialQuotients(0, tuple(quotients)),
        convergents=tuple(convs),
        k_star=k_star,
        kind=kind,
        tau=tau,
        growth=growth,
    )


def build_exp_alpha(
    k_star: int,
    *,
    seed_q1: int = 2,
    tail_steps: int = GOLDEN_TAIL_STEPS,
    precision_floor: int = PRECISION_FLOOR,
    bit_budget: int = BIT_BUDGET,
) -> AngleCF:
    """Build an angle whose denominators track e^{q_k}.

    Greedy rule: a_{k+1} is the nearest integer to e^{q_k} / q_k, so
    q_{k+1} = a_{k+1} q_k + q_{k-1} lands within the [1/2, 3] window around
    e^{q_k}.  Growth is doubly exponential; one step past a four-digit
    denominator would need more bits than the budget allows, so k_star is
    effectively capped at 4 for the default seed.

    Raises ResourceBudgetError when a step would exceed bit_budget and
    PrecisionFloorError when the snapshot comes out too coarse.
    """
    if k_star < 3:
        raise ValueError("k_star must be at least 3")
    if seed_q1 < 1:
        raise ValueError("seed_q1 must be positive")
    quotients = [seed_q1]
    q_prev, q_cur = 1, seed_q1
    records: list[ExpWindowRecord] = []
    for k in range(1, k_star):
        if q_cur * 14427 > bit_budget * 10000:  # q_cur * log2(e) bits, integer-safe
            need = str(q_cur * 14427 // 10000)
            shown = need if len(need) <= 12 else f"{need[0]}.{need[1:4]}e{len(need) - 1}"
            raise ResourceBudgetError(
                f"step k={k}: the next denominator needs about "
                f"{shown} bits, over the budget of {bit_budget}; "
                f"use k_star <= {k}"
            )
        a_next = max(1, _nearest_exp_over(q_cur))
        q_next = a_next * q_cur + q_prev
        if k >= 2:
            ratio = _exp_ratio(q_next, q_cur)
            ok = 0.5 <= ratio <= 3.0
            records.append(ExpWindowRecord(k, ratio, ok))
            if not ok:
                raise ValueError(
                    f"growth ratio {ratio} at k={k} escaped the [1/2, 3] window"
                )
        quotients.append(a_next)
        q_prev, q_cur = q_cur, q_next
    return _finish_angle(
        quotients, k_star, "exp-type", None, tuple(records), tail_steps, precision_floor
    )


def build_poly_alpha(
    tau: Union[int, str, Fraction],
    k_star: int,
    *,
    seed_q1: int = 2,
    tail_steps: int = GOLDEN_TAIL_STEPS,
    precision_floor: int = PRECISION_FLOOR,
    bit_budget: int = BIT_BUDGET,
) -> AngleCF:
    """Build an angle with polynomial denominator growth q_{k+1} ~ q_k**tau.

    tau must be a rational greater than 3 (pass an int, a Fraction, or a
    string like "10/3"; floats are rejected so the exponent stays exact).
    Every built step satisfies q_{k+1} <= 2 q_k**tau, checked in exact
    integer arithmetic.
    """
    if isinstance(tau, float):
        raise TypeError("tau must be exact: pass an int, Fraction, or 'p/r' string")
    tau = Fraction(tau)
    if tau <= 3:
        raise ValueError("tau must exceed 3")
    if k_star < 3:
        raise ValueError("k_star must be at least 3")
    p, r = tau.numerator, tau.denominator
    quotients = [seed_q1]
    q_prev, q_cur = 1, seed_q1
    records: list[PolyCapRecord] = []
    for k in range(1, k_star):
        if q_cur.bit_length() * p // r > bit_budget:
            raise ResourceBudgetError(
                f"step k={k} would exceed the bit budget; use k_star <= {k}"
            )
        a_next = max(1, _iroot(q_cur ** (p - r), r))
        q_next = a_next * q_cur + q_prev
        within = q_next**r <= 2**r * q_cur**p
        sharp = q_next ** (3 * r) > q_cur**p
        records.append(PolyCapRecord(k, within, sharp))
        if not within:
            raise ValueError(f"cap q_(k+1) <= 2 q_k**tau violated at k={k}")
        quotients.append(a_next)
        q_prev, q_cur = q_cur, q_next
    return _finish_angle(
        quotients, k_star, "poly-type", tau, tuple(records), tail_steps, precision_floor
    )


def explicit_angle(
    quotients: Sequence[int],
    *,
    a0: int = 0,
    kind: str = "explicit",
    k_star: Optional[int] = None,
    tau: Optional[Fraction] = None,
    exact: bool = False,
) -> AngleCF:
    """Wrap user-supplied quotients without padding or floor checks."""
    pq = PartialQuotients(a0, tuple(int(a) for a in quotients))
    convs = convergents_from_quotients(pq.a0, pq.quotients)
    return AngleCF(
        pq=pq,
        convergents=tuple(convs),
        k_star=len(pq.quotients) if k_star is None else k_star,
        kind=kind,
        tau=tau,
        exact=exact,
    )


def rational_angle(l: int, q: int) -> AngleCF:
    """Angle equal to the exact rational l/q in [0, 1)."""
    if q < 1:
        raise ValueError("denominator must be positive")
    if not (0 <= l < q):
        raise ValueError("need 0 <= l < q")
    if math.gcd(l, q) != 1:
        raise ValueError("l/q must be in lowest terms")
    quotients = []
    x, y = l, q
    a0, x = divmod(x, y)
    while x:
        a, rem = divmod(y, x)
        quotients.append(a)
        y, x = x, rem
    angle = explicit_angle(quotients, a0=a0, kind="explicit", exact=True)
    if angle.snapshot != (l, q):
        raise AngleDocumentError("continued fraction of l/q failed to round-trip")
    return angle


def residue(mult: int, angle: AngleCF) -> int:
    """(mult * l) mod q for the snapshot l/q, valid for any sign of mult.

    For non-exact angles the multiplier must stay inside the faithful range
    |mult| * 2^60 < q^2: the snapshot sits within 1/q^2 of every extension of
    the quotients, so reductions below that line cannot tell them apart."""
    l, q = angle.snapshot
    if not angle.exact and abs(mult) << 60 >= q * q:
        raise PrecisionFloorError(
            f"|mult| = {abs(mult)} exceeds the snapshot's faithful range"
        )
    return ((mult % q) * l) % q


def signed_residue(mult: int, angle: AngleCF) -> int:
    """Residue folded to (-q/2, q/2], so ||mult * alpha|| = |result| / q."""
    return fold_signed(residue(mult, angle), angle.q_snapshot)


def frac_mod1(n: int, angle: AngleCF) -> float:
    """{n * alpha} as a float, reduced exactly before conversion."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    l, q = angle.snapshot
    if not angle.exact and n << 60 >= q * q:
        raise PrecisionFloorError(f"n = {n} exceeds the snapshot's faithful range")
    return ((n * l) % q) / q


def dist_to_int(x: float) -> float:
    """Distance from x to the nearest integer."""
    f = x % 1.0
    return f if f <= 0.5 else 1.0 - f


@dataclass(frozen=True)
class BoundsCertificate:
    k: int
    lower_ok: bool      # 1/(2 q_{k+1}) < ||q_k alpha||
    upper_ok: bool      # ||q_k alpha|| < 1/q_{k+1}
    det_ok: bool        # l_{k+1} q_k - l_k q_{k+1} = (-1)^k
    coprime_ok: bool
    dist: float
    lo: float
    hi: float

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.det_ok and self.coprime_ok

    def to_json(self) -> dict:
        return {
            "claim": "two-sided convergent bounds with determinant identity",
            "range": f"k={self.k}",
            "pass": self.passed,
            "worst_witness": {"dist": self.dist, "lo": self.lo, "hi": self.hi},
        }


def check_convergent_bounds(angle: AngleCF, k: int) -> BoundsCertificate:
    """Certify 1/(2 q_{k+1}) < ||q_k alpha|| < 1/q_{k+1} in exact arithmetic.

    Valid for 1 <= k <= snapshot index - 2: at the snapshot edge the upper
    bound degenerates to equality by construction, which is a statement about
    the snapshot and not about the angle.
    """
    if not 1 <= k <= angle.snap_index - 2:
        raise QuotientsExhausted(
            f"k={k} outside the certified range 1..{angle.snap_index - 2}"
        )
    l_snap, q_snap = angle.snapshot
    qk = angle.q(k)
    qk1 = angle.q(k + 1)
    a = abs(fold_signed((qk * l_snap) % q_snap, q_snap))
    lower_ok = q_snap < 2 * qk1 * a
    upper_ok = a * qk1 < q_snap
    det = angle.l(k + 1) * qk - angle.l(k) * qk1
    det_ok = det == (-1) ** k
    coprime_ok = math.gcd(angle.l(k), qk) == 1
    return BoundsCertificate(
        k=k,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        det_ok=det_ok,
        coprime_ok=coprime_ok,
        dist=a / q_snap,
        lo=1.0 / (2.0 * qk1) if qk1 < 2**53 else 0.0,
        hi=1.0 / qk1 if qk1 < 2**53 else 0.0,
    )


def legendre_locate(l: int, q: int, angle: AngleCF) -> Optional[int]:
    """Index k with l/q = l_k/q_k when |alpha - l/q| < 1/(2q^2), else None.

    The hypothesis is tested exactly; a rational that fails it is reported as
    not-a-convergent by returning None.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(l, q) != 1:
        raise ValueError("l/q must be in lowest terms")
    l_snap, q_snap = angle.snapshot
    if q >= q_snap:
        raise PrecisionFloorError("q must stay below the snapshot denominator")
    # |alpha - l/q| < 1/(2 q^2)  <=>  2 q |l_snap q - l q_snap| < q_snap
    if 2 * q * abs(l_snap * q - l * q_snap) >= q_snap:
        return None
    for c in angle.convergents:
        if c.q == q and c.l == l:
            return c.k
    return None


def angle_to_json(angle: AngleCF) -> dict:
    doc = {
        "kind": angle.kind,
        "k_star": angle.k_star,
        "a0": str(angle.pq.a0),
        "quotients": [str(a) for a in angle.pq.quotients],
        "snapshot": {"l": str(angle.l_snapshot), "q": str(angle.q_snapshot)},
        "exact": angle.exact,
    }
    if angle.tau is not None:
        doc["tau"] = f"{angle.tau.numerator}/{angle.tau.denominator}"
    return doc


def angle_from_json(doc: Union[str, dict]) -> AngleCF:
    """Rebuild an angle, verifying the stored snapshot against the quotients."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        a0 = int(doc["a0"])
        quotients = [int(a) for a in doc["quotients"]]
        kind = doc["kind"]
        k_star = int(doc["k_star"])
        snap_l = int(doc["snapshot"]["l"])
        snap_q = int(doc["snapshot"]["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise AngleDocumentError(f"malformed angle document: {exc}") from exc
    tau = None
    if doc.get("tau") is not None:
        tau = Fraction(doc["tau"])
    exact = bool(doc.get("exact", False))
    angle = explicit_angle(
        quotients, a0=a0, kind=kind, k_star=k_star, tau=tau, exact=exact
    )
    if angle.snapshot != (snap_l, snap_q):
        raise AngleDocumentError(
            "stored snapshot disagrees with the recurrence over the quotients"
        )
    return angle


def angle_digest(angle: AngleCF) -> str:
    blob = json.dumps(angle_to_json(angle), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
