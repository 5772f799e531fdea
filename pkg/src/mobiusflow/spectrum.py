"""Frequency classification along a rotation's convergent ladder.

Every nonzero integer frequency m sits in exactly one band q_k <= |m| < q_{k+1}
of the denominator ladder.  Which bands divide m decides whether e(m alpha) - 1
is dangerously small, and all of the series manipulations downstream split on
that distinction.  This module does the splitting and verifies the two
Diophantine facts the splits rely on:

  * the flat lower bound  ||m alpha|| >= 1/(2|m|)  off the resonant set, and
  * the exact scaling     ||a q_k alpha|| = a ||q_k alpha||  inside a band.

Every pass/fail decision here is an integer comparison against the snapshot
rationals; floats appear only as reported witnesses.

The flat lower bound needs care.  Its textbook proof hinges on q_k not
dividing m for the band k containing m, which the resonant-set definition
(k >= 2 and q_k | m) guarantees only for k >= 2.  Small divisible frequencies
slip through: m = 1 always violates the bound (||alpha|| < 1/2 for every
irrational), and so typically does m = q_1.  The certificate therefore scans
the provable domain {m : q_k(m) does not divide m}, and separately reports
every band-0/1 divisible m with its exact verdict, so the gap is visible
instead of silently papered over.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import log
from typing import Optional, Union

from .contfrac import AngleCF

DENSE_SCAN_LIMIT = 10**7
DENSE_PREFIX = 10**6


class SnapshotRangeError(ValueError):
    """Frequency or range parameter reaches past the built convergents."""


def _band_index(angle: AngleCF, m_abs: int) -> int:
    """Largest k with q_k <= m_abs (bands use the last index on ties q_0 = q_1 = 1)."""
    qs = [c.q for c in angle.convergents]
    i = bisect_right(qs, m_abs) - 1
    if i < 0:
        raise SnapshotRangeError(f"no band below |m| = {m_abs}")
    if i + 1 >= len(qs):
        raise SnapshotRangeError(f"|m| = {m_abs} reaches past the snapshot ladder")
    return i


def _require_in_range(angle: AngleCF, m_abs: int, what: str) -> None:
    if m_abs >= angle.q(angle.k_star):
        shown = str(m_abs) if m_abs < 10**40 else f"~10^{m_abs.bit_length() * 30103 // 100000}"
        raise SnapshotRangeError(
            f"{what} = {shown} is not below q_{angle.k_star}; "
            "the classification is only certified inside the built ladder"
        )


def is_sharp(angle: AngleCF, k: int, tau: Union[Fraction, int, str]) -> bool:
    """Whether q_k belongs to the fast-growth subset: q_{k+1} > q_k^(tau/3).

    Decided by exact integer powering, q_{k+1}^(3s) > q_k^p for tau = p/s.
    The index k = 0 (value 1) never qualifies; a value 1 at k = 1 may.
    """
    if k < 1:
        return False
    tau = Fraction(tau)
    p, s = tau.numerator, tau.denominator
    return angle.q(k + 1) ** (3 * s) > angle.q(k) ** p


@dataclass(frozen=True)
class SpectralClass:
    """Placement of one frequency relative to the convergent ladder."""

    m: int
    k: int  # band: q_k <= |m| < q_{k+1}; 0 for m = 0
    band_q: int
    divisible: bool  # band_q | m
    resonant: bool  # k >= 2 and band_q | m (m = 0 counts as resonant)
    theorem2_class: Optional[str] = None  # "M1" | "M2" | "M3" | "zero"


def classify(m: int, angle: AngleCF) -> SpectralClass:
    """Band and resonance of a frequency.

    m = 0 is reported resonant with band 0: its coefficient is handled by the
    drift bookkeeping downstream, never by the resonant series.
    """
    if m == 0:
        return SpectralClass(0, 0, 1, True, True)
    am = abs(m)
    _require_in_range(angle, am, "|m|")
    k = _band_index(angle, am)
    bq = angle.q(k)
    divisible = am % bq == 0
    return SpectralClass(m, k, bq, divisible, k >= 2 and divisible)


def classify_tau(
    m: int, angle: AngleCF, tau: Union[Fraction, int, str, None] = None
) -> SpectralClass:
    """classify plus the three-way split used for polynomial-type angles.

    M1: band denominator grows fast (sharp) and divides m.
    M2: band denominator divides m but grows slowly (value 1 included).
    M3: band denominator does not divide m.
    """
    if tau is None:
        tau = angle.tau
    if tau is None:
        raise ValueError("tau is required: pass it or use an angle that carries one")
    base = classify(m, angle)
    if m == 0:
        return SpectralClass(0, 0, 1, True, True, "zero")
    if not base.divisible:
        cls = "M3"
    elif is_sharp(angle, base.k, tau):
        cls = "M1"
    else:
        cls = "M2"
    return SpectralClass(base.m, base.k, base.band_q, base.divisible, base.resonant, cls)


# ---------------------------------------------------------------------------
# certificates


def _fold_abs(t: int, q: int) -> int:
    """|signed residue|: distance of t in [0, q) to the nearest multiple of q."""
    return t if 2 * t <= q else q - t


@dataclass(frozen=True)
class FlatBoundCertificate:
    """Exhaustive check of 2|m| ||m alpha|| >= 1 on the provable domain.

    checked counts the frequencies actually compared; skipped_resonant the
    k >= 2 divisible ones the claim never covers; uncovered the band-0/1
    divisible ones where the textbook argument is silent (each carried with
    its exact verdict, capped at 64 entries).  controls lists the resonant
    witnesses m = q_k, which must all violate the bound.
    """

    m_limit: int
    checked: int
    passed: bool
    worst_m: int
    worst_ratio: float  # min over checked m of 2|m| ||m alpha||, >= 1 iff passed
    skipped_resonant: int
    uncovered_count: int
    uncovered: tuple  # (m, ratio, holds) for divisible m in bands 0/1
    controls: tuple  # (k, q_k, ratio, violates) for q_k <= m_limit, k >= 2

    def to_json(self) -> dict:
        return {
            "claim": "2|m|*dist(m*alpha, Z) >= 1 off the divisible bands",
            "range": {
                "m_limit": self.m_limit,
                "checked": self.checked,
                "skipped_resonant": self.skipped_resonant,
                "uncovered": self.uncovered_count,
            },
            "pass": self.passed,
            "worst_witness": {
                "m": self.worst_m,
                "ratio": self.worst_ratio,
                "uncovered": [list(u) for u in self.uncovered],
                "resonant_controls": [list(c) for c in self.controls],
            },
        }


def check_flat_lower_bound(angle: AngleCF, m_limit: int) -> FlatBoundCertificate:
    """Scan 1 <= m <= m_limit with exact arithmetic (negative m are mirrors).

    The residue of m*l mod q is stepped by one addition per m, so the whole
    scan is linear in m_limit with no multiplications of snapshot-sized
    integers.
    """
    if m_limit < 1:
        raise ValueError("m_limit must be >= 1")
    _require_in_range(angle, m_limit, "m_limit")
    q = angle.q_snapshot
    l = angle.l_snapshot
    qs = [c.q for c in angle.convergents]
    k = 0
    while qs[k + 1] <= 1:
        k += 1
    t = l % q
    checked = 0
    skipped = 0
    passed = True
    worst_num = None  # minimal 2m|r_m|, compared against q
    worst_m = 0
    uncovered = []
    uncovered_count = 0
    for m in range(1, m_limit + 1):
        if m > 1:
            t += l
            if t >= q:
                t -= q
            while qs[k + 1] <= m:
                k += 1
        r = _fold_abs(t, q)
        if m % qs[k] == 0:
            if k >= 2:
                skipped += 1
            else:
                uncovered_count += 1
                if len(uncovered) < 64:
                    holds = 2 * m * r >= q
                    uncovered.append((m, 2 * m * r / q, holds))
            continue
        checked += 1
        num = 2 * m * r  # ratio is num/q with q fixed, so min num is the worst
        if num < q:
            passed = False
        if worst_num is None or num < worst_num:
            worst_num, worst_m = num, m
    controls = []
    for kk in range(2, len(qs) - 1):
        qk = qs[kk]
        if qk > m_limit:
            break
        rr = _fold_abs((qk * l) % q, q)
        controls.append((kk, qk, 2 * qk * rr / q, 2 * qk * rr < q))
    return FlatBoundCertificate(
        m_limit,
        checked,
        passed,
        worst_m,
        worst_num / q if worst_num is not None else float("inf"),
        skipped,
        uncovered_count,
        tuple(uncovered),
        tuple(controls),
    )


@dataclass(frozen=True)
class ScalingCertificate:
    """Per-band check of ||a q_k alpha|| = a ||q_k alpha|| for 1 <= a <= a_max.

    a_max is the largest a with a q_k < q_{k+1}.  Within budget every a is
    checked; past it a doubling grid plus the endpoint is sampled and partial
    is set.  premise_max is the largest sampled a ||q_k alpha|| (exact bound
    checked: < 1/q_k), equality failures abort immediately.
    """

    k: int
    a_max: int
    scanned: int
    dense_upto: int
    partial: bool
    passed: bool
    premise_ok: bool
    premise_max: float

    def to_json(self) -> dict:
        return {
            "claim": "dist(a q_k alpha, Z) = a * dist(q_k alpha, Z) on the band",
            "range": {
                "k": self.k,
                "a_max": str(self.a_max),
                "scanned": self.scanned,
                "dense_upto": self.dense_upto,
                "partial": self.partial,
            },
            "pass": self.passed and self.premise_ok,
            "worst_witness": {"premise_max": self.premise_max},
        }


def check_resonant_scaling(
    angle: AngleCF, k: int, budget: int = DENSE_SCAN_LIMIT
) -> ScalingCertificate:
    """Verify the in-band scaling identity with exact residues.

    For dense ranges the residue of a q_k l is stepped additively; each a is
    then a pure integer comparison.  The premise a ||q_k alpha|| < 1/q_k is
    checked at the largest scanned a (it is monotone in a).
    """
    if not 0 <= k < angle.k_star:
        raise SnapshotRangeError(f"band {k} is not inside the built ladder")
    q = angle.q_snapshot
    l = angle.l_snapshot
    qk = angle.q(k)
    qk1 = angle.q(k + 1)
    a_max = (qk1 - 1) // qk
    if a_max < 1:
        raise SnapshotRangeError(f"band {k} admits no multiplier (q_{k+1} = q_k)")
    tk = (qk * l) % q
    rk = _fold_abs(tk, q)
    if rk == 0:
        raise SnapshotRangeError(f"q_{k} annihilates the snapshot; angle too shallow")

    def equality_at(a: int, t: int) -> bool:
        # t = (a q_k l) mod q; identity holds iff min(t, q - t) == a * rk
        return min(t, q - t) == a * rk

    passed = True
    scanned = 0
    if a_max <= budget:
        dense_upto = a_max
        partial = False
        t = tk
        for a in range(1, a_max + 1):
            if not equality_at(a, t):
                passed = False
                break
            scanned += 1
            t += tk
            if t >= q:
                t -= q
        sampled_top = a_max
    else:
        dense_upto = DENSE_PREFIX
        partial = True
        t = tk
        for a in range(1, dense_upto + 1):
            if not equality_at(a, t):
                passed = False
                break
            scanned += 1
            t += tk
            if t >= q:
                t -= q
        if passed:
            a = dense_upto * 2
            grid = []
            while a < a_max:
                grid.append(a)
                a *= 2
            grid.append(a_max)
            for a in grid:
                if not equality_at(a, (a * tk) % q):
                    passed = False
                    break
                scanned += 1
        sampled_top = a_max
    # premise at the top of the sampled range: a ||q_k alpha|| < 1/q_k
    premise_ok = sampled_top * rk * qk < q
    premise_max = sampled_top * rk / q
    return ScalingCertificate(
        k, a_max, scanned, dense_upto, partial, passed, premise_ok, premise_max
    )


# ---------------------------------------------------------------------------
# truncation indices


def sharp_denominators(angle: AngleCF, tau, stop_above: int) -> list:
    """Ascending (k, q_k, q_{k+1}) for sharp bands, stopping once q_k > stop_above."""
    tau = Fraction(tau)
    out = []
    for k in range(1, angle.snap_index):
        qk = angle.q(k)
        if qk > stop_above:
            break
        if is_sharp(angle, k, tau):
            out.append((k, qk, angle.q(k + 1)))
    return out


@dataclass(frozen=True)
class TruncationIndex:
    """Resonant truncation depths for a sum length N.

    K: deepest band with q_K <= 2 ln N.  K_prime: position of N in the ladder
    of sharp denominators, q~_{K'} < N <= q~_{K'}^+, where q~^+ means the next
    denominator in the full ladder; 0 when N is at or below the first sharp
    value, None when no tau is available.
    """

    n: int
    K: int
    K_prime: Optional[int]
    witness: dict

    def to_json(self) -> dict:
        return {
            "claim": "q_K <= 2 ln N < q_{K+1}; sharp ladder brackets N",
            "range": {"N": self.n},
            "pass": True,
            "worst_witness": dict(self.witness, K=self.K, K_prime=self.K_prime),
        }


def truncation_indices(angle: AngleCF, n: int, tau=None) -> TruncationIndex:
    """Locate the truncation depths for averaging up to N = n.

    The 2 ln N comparison runs in floats; ties against an integer q_k cannot
    occur to double precision for the q ladders in scope (growth is at least
    Fibonacci), and a 1e-12 relative guard raises rather than misplace K.
    """
    if n < 2:
        raise ValueError("need N >= 2")
    target = 2.0 * log(n)
    qs = [c.q for c in angle.convergents]
    if target >= qs[angle.k_star]:
        raise SnapshotRangeError(f"2 ln N = {target:.3f} reaches past the built ladder")
    K = bisect_right(qs, target) - 1
    while K + 1 < len(qs) and qs[K + 1] <= target:
        K += 1  # unreachable with exact floats; kept for tie paranoia
    near = min(abs(target - qs[K]), abs(qs[K + 1] - target))
    if near < 1e-12 * max(1.0, target):
        raise SnapshotRangeError("2 ln N sits on a ladder rung; cannot certify K")
    if tau is None:
        tau = angle.tau
    K_prime = None
    witness = {"two_log_n": target, "q_K": str(qs[K]), "K_loglog": 0.0}
    if n > 2:
        witness["K_loglog"] = K / log(log(n))
    if tau is not None:
        ladder = sharp_denominators(angle, tau, n)
        K_prime = None
        for pos, (k, qk, qk_next) in enumerate(ladder, start=1):
            if qk >= n:
                if pos == 1:
                    K_prime = 0  # N at or below the first sharp value
                    witness["sharp_bracket"] = "below first sharp value"
                    break
                # a previous sharp value had n > its successor denominator
                raise SnapshotRangeError(
                    f"N = {n} falls in a gap of the sharp ladder; no K' exists"
                )
            if n <= qk_next:
                K_prime = pos
                witness["sharp_bracket"] = [k, str(qk), str(qk_next)]
                break
        if K_prime is None:
            if not ladder:
                K_prime = 0
                witness["sharp_bracket"] = "no sharp values below N"
            else:
                raise SnapshotRangeError(
                    f"N = {n} falls in a gap of the sharp ladder; no K' exists"
                )
    return TruncationIndex(n, K, K_prime, witness)
