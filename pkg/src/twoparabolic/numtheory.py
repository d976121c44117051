"""Jordan totient, SL2(Z/r) orders, multiplicative orders, Jacobi symbols,
primitive roots and bounded prime searches in arithmetic progressions."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt
from typing import Callable, Sequence, Union


# ---------------------------------------------------------------------------
# factoring and primality

_WHEEL = (4, 2, 4, 2, 4, 6, 2, 6)  # gaps of the 2*3*5 wheel from 7


@lru_cache(maxsize=4096)
def factorization(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``|n|`` as ``((q, e), ...)`` by wheel trial division."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out = []
    for q in (2, 3, 5):
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            out.append((q, e))
    q, i = 7, 0
    while q * q <= n:
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            out.append((q, e))
        q += _WHEEL[i]
        i = (i + 1) & 7
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def prime_divisors(n: int) -> list[int]:
    return [q for q, _ in factorization(n)]


# deterministic strong-pseudoprime base sets (Jaeschke; Sorenson and Webster)
_MR_SMALL_LIMIT = 341_550_071_728_321
_MR_SMALL_BASES = (2, 3, 5, 7, 11, 13, 17)
_MR_LARGE_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_LARGE_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _strong_probable_prime(n: int, a: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Exact primality test.

    Miller-Rabin with a base set that is proven deterministic below the
    corresponding limit; trial division beyond (exact but slow).
    """
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    if n < _MR_SMALL_LIMIT:
        bases = _MR_SMALL_BASES
    elif n < _MR_LARGE_LIMIT:
        bases = _MR_LARGE_BASES
    else:
        return len(factorization(n)) == 1 and factorization(n)[0][1] == 1
    return all(_strong_probable_prime(n, a) for a in bases)


# ---------------------------------------------------------------------------
# arithmetic functions


def jordan2(r: int) -> int:
    """J_2(r) = r^2 * prod over primes q | r of (1 - q^-2)."""
    if r < 1:
        raise ValueError("jordan2 needs r >= 1")
    out = 1
    for q, e in factorization(r):
        out *= q ** (2 * e) - q ** (2 * e - 2)
    return out


def sl2_order(r: int) -> int:
    """|SL_2(Z/rZ)| = r * J_2(r)."""
    return r * jordan2(r)


def euler_phi(n: int) -> int:
    out = 1
    for q, e in factorization(n):
        out *= (q - 1) * q ** (e - 1)
    return out


def carmichael(n: int) -> int:
    """Exponent of the unit group (Z/nZ)^x."""
    lam = 1
    for q, e in factorization(n):
        if q == 2 and e >= 3:
            part = 2 ** (e - 2)
        else:
            part = (q - 1) * q ** (e - 1)
        lam = lam * part // gcd(lam, part)
    return lam


def mult_order(p: int, r: int) -> int:
    """Least s >= 1 with p^s = 1 (mod r); sigma_p(1) = 1."""
    if r < 1:
        raise ValueError("modulus must be positive")
    if r == 1:
        return 1
    if gcd(p, r) != 1:
        raise ValueError(f"gcd({p}, {r}) != 1, so {p} has no order mod {r}")
    s = carmichael(r)
    for q in prime_divisors(s):
        while s % q == 0 and pow(p, s // q, r) == 1:
            s //= q
    return s


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n < 1 or n % 2 == 0:
        raise ValueError("the Jacobi symbol needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_primitive_root(m: int, q: int) -> bool:
    """Whether ``m`` generates (Z/qZ)^x for the prime ``q``."""
    if q == 2:
        return m % 2 == 1
    if m % q == 0:
        return False
    return all(pow(m, (q - 1) // ell, q) != 1 for ell in prime_divisors(q - 1))


def free_rank_gamma1Z(r: int) -> int:
    """Rank 1 + J_2(r)/12 of the free group Gamma_1(r) in SL2(Z) (r >= 4)."""
    if r < 4:
        raise ValueError("Gamma_1(r) is not free for r < 4")
    j = jordan2(r)
    if j % 12:
        raise ValueError(f"J_2({r}) = {j} is not divisible by 12")
    return 1 + j // 12


def discrete_log(g: int, h: int, q: int, order: int, bound: int | None = None) -> int | None:
    """Least l in [0, order) with g^l = h (mod q), by baby-step giant-step.

    Returns ``None`` if there is none.  ``bound`` caps the table size.
    """
    g %= q
    h %= q
    m = isqrt(order - 1) + 1 if order > 1 else 1
    if bound is not None and m > bound:
        raise OverflowError(f"discrete log table of size {m} exceeds bound {bound}")
    table: dict[int, int] = {}
    x = 1
    for j in range(m):
        table.setdefault(x, j)
        x = x * g % q
    step = pow(g, -m, q)
    y = h
    for i in range(m):
        j = table.get(y)
        if j is not None:
            ell = i * m + j
            if ell < order:
                return ell
        y = y * step % q
    return None


# ---------------------------------------------------------------------------
# primes in arithmetic progressions


@dataclass(frozen=True)
class Congruence:
    """Value must be ``residue`` mod ``modulus``."""

    residue: int
    modulus: int

    def __call__(self, q: int) -> bool:
        return q % self.modulus == self.residue % self.modulus

    def describe(self) -> str:
        return f"= {self.residue} mod {self.modulus}"


@dataclass(frozen=True)
class PrimitiveRoot:
    """``base`` must be a primitive root modulo the value."""

    base: int

    def __call__(self, q: int) -> bool:
        return self.base % q != 0 and is_primitive_root(self.base, q)

    def describe(self) -> str:
        return f"{self.base} primitive"


@dataclass(frozen=True)
class Predicate:
    """Arbitrary named condition on the candidate prime."""

    name: str
    fn: Callable[[int], bool] = field(compare=False)

    def __call__(self, q: int) -> bool:
        return self.fn(q)

    def describe(self) -> str:
        return self.name


Extra = Union[Congruence, PrimitiveRoot, Predicate]


@dataclass(frozen=True)
class APSearchSpec:
    """Search ``offset + n*modulus`` for n = 0..bound."""

    modulus: int
    offset: int
    extras: tuple[Extra, ...] = ()
    bound: int = 10**6

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")
        if gcd(self.modulus, self.offset) != 1:
            raise ValueError(
                f"gcd({self.modulus}, {self.offset}) != 1: the progression holds at most one prime"
            )
        object.__setattr__(self, "extras", tuple(self.extras))


@dataclass(frozen=True)
class BoundExceeded:
    """No qualifying prime among the first ``bound + 1`` terms."""

    bound: int
    reason: str = "prime search bound exceeded"

    def __bool__(self) -> bool:
        return False


def find_prime_in_ap(spec: APSearchSpec) -> tuple[int, int] | BoundExceeded:
    """Least ``n <= bound`` with ``offset + n*modulus`` prime and all extras true."""
    v = spec.offset
    for n in range(spec.bound + 1):
        if v > 1 and is_prime(v) and all(x(v) for x in spec.extras):
            return n, v
        v += spec.modulus
    return BoundExceeded(spec.bound)


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, v in enumerate(sieve) if v]


def units_mod(r: int) -> Sequence[int]:
    return [x for x in range(r) if gcd(x, r) == 1] if r > 1 else [0]
