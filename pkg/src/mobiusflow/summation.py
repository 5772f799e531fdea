"""Compensated accumulators for long oscillatory sums.

Second-order Kahan (Neumaier) update: the running compensation absorbs the
rounding error of each add, so partial sums of ~1e7 unit-size terms stay
accurate to a few ulp instead of drifting like n*eps.
"""

from __future__ import annotations

__all__ = ["KahanSum", "KahanComplex"]


class KahanSum:
    """Real compensated accumulator with a fixed left-to-right order."""

    __slots__ = ("s", "c")

    def __init__(self, start: float = 0.0) -> None:
        self.s = float(start)
        self.c = 0.0

    def add(self, v: float) -> None:
        t = self.s + v
        if abs(self.s) >= abs(v):
            self.c += (self.s - t) + v
        else:
            self.c += (v - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.c


class KahanComplex:
    """Componentwise compensated accumulator for complex terms."""

    __slots__ = ("re", "im")

    def __init__(self) -> None:
        self.re = KahanSum()
        self.im = KahanSum()

    def add(self, z: complex) -> None:
        self.re.add(z.real)
        self.im.add(z.imag)

    def add_parts(self, re: float, im: float) -> None:
        self.re.add(re)
        self.im.add(im)

    @property
    def value(self) -> complex:
        return complex(self.re.value, self.im.value)
