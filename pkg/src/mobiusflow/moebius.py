"""Mobius tables and twisted exponential sums over short segments.

Sieving is exact integer work: an entry is -1, 0 or +1 because of the
factorization of its index, never because a float rounded somewhere.  The
twisted sum combines those exact weights with unit-modulus phases; the only
float operations are the phase evaluation and a compensated accumulation, so
repeated runs over the same inputs are bit-identical.

Memory is the binding constraint for the full sieve (about 18 bytes per
integer while building).  Both sieves check an explicit byte budget before
allocating and refuse with the required size, rather than letting numpy die
half way through a multi-gigabyte allocation.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from math import gcd, isqrt
from typing import Optional, Union

import numpy as np

from .contfrac import AngleCF, PrecisionFloorError
from .phases import cis, frac_dyadic
from .summation import KahanComplex

MEM_BUDGET_ENV = "MDL_MEM_BUDGET"
DEFAULT_MEM_BUDGET = 2 << 30  # bytes

BLOCK = 1 << 20

MU_MAGIC = b"MU01"


class MemoryBudgetError(RuntimeError):
    """Raised instead of attempting an allocation beyond the byte budget."""


def memory_budget() -> int:
    raw = os.environ.get(MEM_BUDGET_ENV)
    if raw is None:
        return DEFAULT_MEM_BUDGET
    try:
        budget = int(raw)
    except ValueError as exc:
        raise MemoryBudgetError(f"{MEM_BUDGET_ENV} must be an integer byte count, got {raw!r}") from exc
    if budget <= 0:
        raise MemoryBudgetError(f"{MEM_BUDGET_ENV} must be positive, got {budget}")
    return budget


def _require_bytes(needed: int, what: str) -> None:
    budget = memory_budget()
    if needed > budget:
        raise MemoryBudgetError(
            f"{what} needs about {needed} bytes but the budget is {budget}; "
            f"raise {MEM_BUDGET_ENV} to allow it"
        )


@dataclass(frozen=True)
class MuTable:
    """Exact mu values on a contiguous integer range [n_lo, n_hi]."""

    n_lo: int
    n_hi: int
    values: np.ndarray  # int8, values[i] = mu(n_lo + i)

    def __post_init__(self):
        if self.n_lo < 1 or self.n_hi < self.n_lo:
            raise ValueError(f"bad range [{self.n_lo}, {self.n_hi}]")
        if len(self.values) != self.n_hi - self.n_lo + 1:
            raise ValueError("values length disagrees with the range")
        if self.values.dtype != np.int8:
            raise ValueError("values must be int8")

    def __len__(self) -> int:
        return self.n_hi - self.n_lo + 1

    def mu(self, n: int) -> int:
        if not self.n_lo <= n <= self.n_hi:
            raise IndexError(f"{n} outside [{self.n_lo}, {self.n_hi}]")
        return int(self.values[n - self.n_lo])

    def restrict(self, lo: int, hi: int) -> "MuTable":
        if not (self.n_lo <= lo <= hi <= self.n_hi):
            raise IndexError(f"[{lo}, {hi}] not inside [{self.n_lo}, {self.n_hi}]")
        return MuTable(lo, hi, self.values[lo - self.n_lo : hi - self.n_lo + 1])

    def mertens(self) -> int:
        """Sum of the table entries, exact."""
        return int(self.values.sum(dtype=np.int64))


def _primes_upto(limit: int) -> np.ndarray:
    """Primes <= limit, ascending int64."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    composite = np.zeros(limit + 1, dtype=bool)
    composite[:2] = True
    for p in range(2, isqrt(limit) + 1):
        if not composite[p]:
            composite[p * p :: p] = True
    return np.nonzero(~composite)[0].astype(np.int64)


def sieve_full(n_max: int) -> MuTable:
    """mu on [1, n_max] by the product-of-found-primes sieve.

    For each prime p <= sqrt(n_max) the sign is flipped on multiples of p and
    zeroed on multiples of p^2, while a companion array tracks the product of
    distinct primes found.  Whatever index still disagrees with its product
    owns exactly one prime factor above sqrt(n_max), hence one final flip.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    # mu + res + arange + comparison mask, all length n_max+1
    _require_bytes(18 * (n_max + 1), f"sieve_full({n_max})")
    mu = np.ones(n_max + 1, dtype=np.int8)
    res = np.ones(n_max + 1, dtype=np.int64)
    root = isqrt(n_max)
    composite = np.zeros(root + 1, dtype=bool)
    for p in range(2, root + 1):
        if composite[p]:
            continue
        composite[p * p :: p] = True
        mu[p::p] *= -1
        res[p::p] *= p
        mu[p * p :: p * p] = 0
    leftover = res != np.arange(n_max + 1, dtype=np.int64)
    mu[leftover] *= -1
    mu[0] = 0
    return MuTable(1, n_max, mu[1:].copy())


def sieve_segment(n_top: int, length: int) -> MuTable:
    """mu on the half-open segment (n_top - length, n_top].

    Same product trick as sieve_full, but run block by block so only the
    int8 output plus one block of int64 scratch is ever live.  Needs the
    primes up to sqrt(n_top) regardless of how short the segment is.
    """
    if not 1 <= length <= n_top:
        raise ValueError(f"need 1 <= length <= n_top, got length={length}, n_top={n_top}")
    root = isqrt(n_top)
    # output + primes + per-block (n, res, mu, mask) scratch
    block = min(BLOCK, length)
    _require_bytes(length + 9 * root + 26 * block, f"sieve_segment({n_top}, {length})")
    primes = _primes_upto(root)
    lo = n_top - length + 1
    out = np.empty(length, dtype=np.int8)
    for start in range(lo, n_top + 1, BLOCK):
        stop = min(start + BLOCK - 1, n_top)
        width = stop - start + 1
        mu = np.ones(width, dtype=np.int8)
        res = np.ones(width, dtype=np.int64)
        for p in primes:
            p = int(p)
            first = -start % p
            mu[first::p] *= -1
            res[first::p] *= p
            p2 = p * p
            first2 = -start % p2
            if first2 < width:
                mu[first2::p2] = 0
        n_vals = np.arange(start, stop + 1, dtype=np.int64)
        mu[res != n_vals] *= -1
        out[start - lo : stop - lo + 1] = mu
    return MuTable(lo, n_top, out)


def squarefree_count(n_max: int) -> int:
    """#\\{n <= n_max squarefree\\} = sum_{d^2 <= n_max} mu(d) floor(n_max/d^2).

    Independent of the sieves' zero pattern: only needs mu up to sqrt(n_max).
    """
    root = isqrt(n_max)
    small = sieve_full(root) if root >= 1 else None
    total = 0
    for d in range(1, root + 1):
        m = small.mu(d)
        if m:
            total += m * (n_max // (d * d))
    return total


# ---------------------------------------------------------------------------
# binary table format: 4-byte magic, then n_top and length as little-endian
# u64, then the int8 entries.  20 bytes of header total.

def write_mu_table(path, table: MuTable) -> None:
    header = MU_MAGIC + struct.pack("<QQ", table.n_hi, len(table))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(table.values.tobytes())


def read_mu_table(path) -> MuTable:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MU_MAGIC:
        raise ValueError(f"not a mu table: bad magic {blob[:4]!r}")
    n_top, length = struct.unpack("<QQ", blob[4:20])
    payload = blob[20:]
    if len(payload) != length:
        raise ValueError(f"payload holds {len(payload)} entries, header says {length}")
    values = np.frombuffer(payload, dtype=np.int8).copy()
    bad = np.abs(values) > 1
    if bad.any():
        raise ValueError("entries outside {-1, 0, 1}")
    return MuTable(n_top - length + 1, n_top, values)


# ---------------------------------------------------------------------------
# twisted sums

@dataclass(frozen=True)
class TwistedSum:
    """Sum of mu(n) e(alpha n) over n in (n_top - length, n_top], n = r mod q."""

    n_top: int
    length: int
    q: int
    r: int
    alpha_float: float
    value: complex

    @property
    def normalized(self) -> float:
        return abs(self.value) / self.length

    def csv_row(self) -> str:
        return ",".join(
            [
                str(self.n_top),
                str(self.length),
                str(self.q),
                str(self.r),
                repr(self.alpha_float),
                repr(self.value.real),
                repr(self.value.imag),
                repr(self.normalized),
            ]
        )


CSV_HEADER = "N,M,q,r,alpha,re,im,norm"


def _angle_frac_sum(
    angle: AngleCF, mult: int, vals, n0: int, n_top: int, q: int
) -> complex:
    """sum mu(n) e(mult n alpha) for n = n0, n0+q, ... <= n_top.

    The residue of mult*n*l mod q_snapshot is stepped incrementally (one big
    add per term); each needed phase is the correctly rounded float of
    residue/q_snapshot, so the reduction mod 1 happens in exact arithmetic.
    """
    qs = angle.q_snapshot
    ls = angle.l_snapshot
    if not angle.exact and abs(mult) * n_top << 60 >= qs * qs:
        raise PrecisionFloorError(
            f"multiple {mult}*{n_top} exceeds the faithful range of the snapshot"
        )
    step = (ls * mult * q) % qs
    cur = (ls * mult * n0) % qs
    acc = KahanComplex()
    for m in vals:
        if m:
            z = cis(cur / qs)
            if m > 0:
                acc.add_parts(z.real, z.imag)
            else:
                acc.add_parts(-z.real, -z.imag)
        cur += step
        if cur >= qs:
            cur -= qs
    return acc.value


def _float_frac_sum(alpha: float, mult: int, vals, n0: int, q: int) -> complex:
    """Same loop with a raw float alpha: phases use the exact fractional part
    of n times the dyadic rational alpha (no drift), but alpha itself is
    whatever rounding the caller supplied."""
    acc = KahanComplex()
    n = n0
    for m in vals:
        if m:
            z = cis(frac_dyadic(alpha, mult * n))
            if m > 0:
                acc.add_parts(z.real, z.imag)
            else:
                acc.add_parts(-z.real, -z.imag)
        n += q
    return acc.value


def twisted_sum(
    n_top: int,
    length: int,
    q: int = 1,
    r: int = 0,
    alpha: Union[AngleCF, float] = 0.0,
    *,
    table: Optional[MuTable] = None,
    mult: int = 1,
) -> TwistedSum:
    """Twisted segment sum over an arithmetic progression.

    Computes sum of mu(n) e(mult * alpha * n) for n in (n_top - length, n_top]
    with n = r (mod q).  Requires gcd(r, q) = 1 unless q = 1; the congruence
    classes sharing a factor with q contribute O(log) terms and are excluded
    by the callers that need the progression decomposition.

    alpha may be an AngleCF, in which case every fractional part comes from
    the exact snapshot rationals, or a float for exploratory use.  Terms are
    accumulated left to right with compensation, so results are reproducible
    bit for bit.
    """
    if not 1 <= length <= n_top:
        raise ValueError(f"need 1 <= length <= n_top, got length={length}, n_top={n_top}")
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    r %= q
    if q > 1 and gcd(r, q) != 1:
        raise ValueError(f"residue {r} shares a factor with modulus {q}")
    lo = n_top - length + 1
    if table is None:
        table = sieve_segment(n_top, length)
    elif table.n_lo > lo or table.n_hi < n_top:
        raise ValueError(
            f"table covers [{table.n_lo}, {table.n_hi}], need [{lo}, {n_top}]"
        )
    n0 = lo + (r - lo) % q
    if isinstance(alpha, AngleCF):
        alpha_float = alpha.float_value
    else:
        alpha_float = float(alpha)
    if n0 > n_top:
        value = complex(0.0, 0.0)
    else:
        vals = table.values[n0 - table.n_lo : n_top - table.n_lo + 1 : q].tolist()
        if isinstance(alpha, AngleCF):
            value = _angle_frac_sum(alpha, mult, vals, n0, n_top, q)
        else:
            value = _float_frac_sum(alpha_float, mult, vals, n0, q)
    return TwistedSum(n_top, length, q, r, alpha_float, value)
