"""Exact rational arithmetic with p-adic and modular views.

Rationals are ``fractions.Fraction`` throughout: it is already normalized
(coprime numerator and positive denominator) and backed by unbounded ints.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Union

Rational = Fraction
RationalLike = Union[int, Fraction]

_RAT_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


class NotReducibleError(ValueError):
    """A denominator is not invertible modulo the requested modulus."""


def rat(x: RationalLike | str, den: int = 1) -> Fraction:
    """Coerce ``x`` (int, Fraction or ``"num/den"`` text) to a Fraction."""
    if isinstance(x, str):
        q = parse_rational(x)
        return q if den == 1 else q / den
    if isinstance(x, float):
        raise TypeError("floating-point input is not accepted")
    if not isinstance(x, _RationalABC):
        raise TypeError(f"cannot interpret {x!r} as a rational")
    return Fraction(x, den)


def parse_rational(text: str) -> Fraction:
    m = _RAT_RE.match(text.strip())
    if m is None:
        raise ValueError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(x: RationalLike) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class PValuation:
    """``value == unit * p**v`` with ``unit`` free of the prime ``p``."""

    v: int
    unit: Fraction
    p: int

    @property
    def value(self) -> Fraction:
        return self.unit * Fraction(self.p) ** self.v


def _strip(n: int, p: int) -> tuple[int, int]:
    if n % p:
        return 0, n
    # divide by p, p^2, p^4, ... while possible, then back down
    powers = [p]
    while n % (powers[-1] ** 2) == 0:
        powers.append(powers[-1] ** 2)
    k = 0
    for i in range(len(powers) - 1, -1, -1):
        q, rem = divmod(n, powers[i])
        if rem == 0:
            n = q
            k += 1 << i
    while n % p == 0:
        n //= p
        k += 1
    return k, n


def int_valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("0 has no p-adic valuation")
    return _strip(n, p)[0]


def p_valuation(x: RationalLike, p: int) -> PValuation:
    x = Fraction(x)
    if x == 0:
        raise ValueError("0 has no p-adic valuation")
    if p < 2:
        raise ValueError(f"p must be a prime, got {p}")
    vn, n = _strip(x.numerator, p)
    vd, d = _strip(x.denominator, p)
    return PValuation(vn - vd, Fraction(n, d), p)


def is_power_of(n: int, p: int) -> bool:
    """True iff the positive integer ``n`` is ``p**e`` for some ``e >= 0``."""
    if n < 1:
        return False
    return _strip(n, p)[1] == 1


def in_z_inv_p(x: RationalLike, p: int) -> bool:
    return is_power_of(Fraction(x).denominator, p)


def reduce_mod(x: RationalLike, r: int) -> int:
    """Image of ``x`` in Z/rZ, canonical in ``[0, r)``."""
    if r < 1:
        raise ValueError(f"modulus must be positive, got {r}")
    x = Fraction(x)
    if r == 1:
        return 0
    try:
        inv = pow(x.denominator, -1, r)
    except ValueError:
        raise NotReducibleError(
            f"denominator {x.denominator} is not invertible mod {r}"
        ) from None
    return x.numerator * inv % r


def p_free_part(x: RationalLike, p: int) -> int:
    """Absolute value of the p-free part of a nonzero element of Z[1/p]."""
    pv = p_valuation(x, p)
    return abs(pv.unit.numerator)
