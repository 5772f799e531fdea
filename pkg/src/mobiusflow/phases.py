"""Exact phase reduction helpers.

Every oscillatory sum in this package feeds trig functions with arguments
that were reduced mod 1 while still exact: integer residues against an exact
rational angle, or integer arithmetic on the mantissa of a float slope.
Floats appear only after the reduction, so phase accuracy does not degrade
with the length of an orbit or the size of a frequency.
"""

from __future__ import annotations

import math

__all__ = [
    "TWO_PI",
    "cis",
    "fold_signed",
    "cis_minus_one",
    "frac_dyadic",
    "GeometricKernel",
]

TWO_PI = 2.0 * math.pi

# A residue r with |r| * SERIES_CUTOFF * n < q keeps every phase j*r/q of a
# length-n geometric sum below 1/SERIES_CUTOFF, where the second-order term
# of the Dirichlet kernel is under 1e-17 relative.
SERIES_CUTOFF = 10**9


def cis(frac: float) -> complex:
    """e(frac) for a phase given in turns."""
    a = TWO_PI * frac
    return complex(math.cos(a), math.sin(a))


def fold_signed(r: int, q: int) -> int:
    """Fold a residue in [0, q) to the balanced range (-q/2, q/2]."""
    return r if 2 * r <= q else r - q


def cis_minus_one(rs: int, q: int) -> complex:
    """e(rs/q) - 1 without cancellation near the origin.

    rs must already be balanced; the sine form keeps full relative accuracy
    for residues as small as the subnormal floor.
    """
    f = rs / q
    s = math.sin(math.pi * f)
    return complex(-2.0 * s * s, 2.0 * s * math.cos(math.pi * f))


def frac_dyadic(c: float, n: int) -> float:
    """{n * c} computed exactly on the dyadic expansion of c.

    A float is mant * 2**e with integer mant, so n*c mod 1 is an integer
    masking problem; the only rounding is the final division.
    """
    if c == 0.0 or n == 0:
        return 0.0
    f, e = math.frexp(c)
    mant = int(f * 9007199254740992.0)  # f * 2**53, exact
    e -= 53
    if e >= 0:
        return 0.0
    denom = 1 << (-e)
    return ((n * mant) % denom) / denom


class GeometricKernel:
    """Sums sum_{j<n} e(j * r/q) for one exact rational step r/q.

    The caller supplies the canonical residue R_n of n*r mod q (cheap to
    maintain incrementally), so no n-dependent rounding enters.  Residues too
    small for float division fall into a series branch where the kernel is
    n * e((n-1)r/(2q)) up to a relative error below 1e-17.
    """

    __slots__ = ("r", "q", "rs", "series", "den")

    def __init__(self, r: int, q: int, n_max: int) -> None:
        self.r = r % q
        self.q = q
        self.rs = fold_signed(self.r, q)
        if self.r == 0:
            self.series = True
            self.den = complex(1.0)
        else:
            self.series = abs(self.rs) * n_max * SERIES_CUTOFF < q
            self.den = cis_minus_one(self.rs, q) if not self.series else complex(1.0)

    def value(self, r_n: int, n: int) -> complex:
        """Kernel value given r_n = (n * r) mod q."""
        if self.r == 0:
            return complex(n)
        if self.series:
            half = ((n - 1) * self.rs) / (2 * self.q)
            return n * cis(half)
        num = cis_minus_one(fold_signed(r_n % self.q, self.q), self.q)
        return num / self.den

    def value_at(self, n: int) -> complex:
        """Kernel value computed from scratch at index n."""
        return self.value((n * self.r) % self.q, n)
