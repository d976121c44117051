"""Catalogue of explicit word identities in SL2(Z[1/p]) with an exact verifier.

Each template is a (p, r, k)-family: a word whose exponents are integer
formulas, an expected matrix, and applicability conditions.  Verification
evaluates the word exactly and, when it does not match, also tries the
inverse, the negation and the negated inverse of the expected value before
calling it a failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Sequence

from .mat2 import A, B, GenWord, Mat2, U, diag, eval_word, lower, membership, upper
from .numtheory import is_prime, mult_order, primes_up_to

EXACT = "exact"
MATCHES_INVERSE = "matches-inverse"
MATCHES_NEGATION = "matches-negation"
MATCHES_NEGATED_INVERSE = "matches-negated-inverse"
FAIL = "fail"
VERDICTS = (EXACT, MATCHES_INVERSE, MATCHES_NEGATION, MATCHES_NEGATED_INVERSE, FAIL)


class NotApplicableError(ValueError):
    """The template's conditions exclude the requested (p, r, k)."""


class NonIntegralExponentError(ValueError):
    pass


def exact_div(num: int, den: int) -> int:
    """``num / den`` as an int, refusing to round."""
    q, rem = divmod(num, den)
    if rem:
        raise NonIntegralExponentError(f"{num}/{den} is not an integer")
    return q


Pairs = list  # list[tuple[str, int]]


@dataclass(frozen=True)
class Condition:
    description: str
    test: Callable[[int, int, int], bool] = field(compare=False)


def _cond(description: str, test: Callable[[int, int, int], bool]) -> Condition:
    return Condition(description, test)


PRIME_P = _cond("p prime", lambda p, r, k: is_prime(p))
COPRIME = _cond("gcd(p, r) = 1", lambda p, r, k: gcd(p, r) == 1)


def p_mod(residue: int, modulus: int) -> Condition:
    return _cond(f"p = {residue} mod {modulus}", lambda p, r, k: p % modulus == residue)


def p_in(*values: int) -> Condition:
    return _cond(f"p in {set(values)}", lambda p, r, k: p in values)


def k_range(lo: int, hi: int) -> Condition:
    return _cond(f"{lo} <= k <= {hi}", lambda p, r, k: lo <= k <= hi)


@dataclass(frozen=True)
class IdentityTemplate:
    """A parametrized word identity.

    ``r`` is either a fixed integer or a function of ``p``.  ``symbols`` builds
    the symbol table (by default A, B, U = U_p and Q = Q_{r/p}).  ``u_power``
    gives m for templates whose target is +-U_p^m, enabling the consequence
    check.  ``complete`` marks triangular templates that are finished to a
    diagonal matrix by one extra Q-power.
    """

    name: str
    source: str
    r: int | Callable[[int], int]
    word: Callable[[int, int, int], Pairs] = field(compare=False)
    expected: Callable[[int, int, int], Mat2] = field(compare=False)
    conditions: tuple[Condition, ...] = ()
    symbols: Callable[[int, int, int], dict[str, Mat2]] | None = field(default=None, compare=False)
    alphabet: tuple[str, ...] = ("A", "Q")
    uses_k: bool = False
    k_values: tuple[int, ...] = (1, 2, 3)
    u_power: Callable[[int, int, int], int] | None = field(default=None, compare=False)
    complete: bool = False
    note: str = ""

    def r_for(self, p: int) -> int:
        return self.r(p) if callable(self.r) else self.r

    def violated(self, p: int, r: int | None = None, k: int | None = None) -> str | None:
        """The first failing condition's description, or ``None``."""
        if r is None:
            r = self.r_for(p)
        if k is None:
            k = self.k_values[0] if self.uses_k else 1
        if r != self.r_for(p):
            return f"r = {self.r_for(p)} for this family at p = {p}"
        for c in (PRIME_P, COPRIME) + self.conditions:
            if not c.test(p, r, k):
                return c.description
        return None

    def applicable(self, p: int, r: int | None = None, k: int | None = None) -> bool:
        return self.violated(p, r, k) is None


def default_symbols(p: int, r: int, k: int) -> dict[str, Mat2]:
    return {"A": A, "B": B, "U": U(p), "Q": upper(Fraction(r, p))}


@dataclass(frozen=True)
class Instance:
    template: IdentityTemplate
    p: int
    r: int
    k: int | None
    word: GenWord
    table: dict
    expected: Mat2
    completion: int = 0  # exponent of the appended Q-power, if any
    completion_side: str = ""


def _complete_with_q(m: Mat2, q: Fraction) -> tuple[int, str] | None:
    """Q^c exponent (and side) turning the upper triangular ``m`` diagonal."""
    if m.c != 0 or m.b == 0:
        return None
    c = -m.b / (m.a * q)  # m * Q^c
    if c.denominator == 1:
        return int(c), "right"
    c = -m.b / (q * m.d)  # Q^c * m
    if c.denominator == 1:
        return int(c), "left"
    return None


def instantiate(t: IdentityTemplate, p: int, r: int | None = None, k: int | None = None) -> Instance:
    """Concrete word, symbol table and expected matrix for ``(p, r, k)``."""
    if r is None:
        r = t.r_for(p)
    if t.uses_k and k is None:
        k = t.k_values[0]
    why = t.violated(p, r, k)
    if why is not None:
        raise NotApplicableError(f"{t.name} does not apply at p={p}, r={r}, k={k}: needs {why}")
    kk = k if k is not None else 1
    table = (t.symbols or default_symbols)(p, r, kk)
    word = GenWord.build(t.alphabet, t.word(p, r, kk))
    expected = t.expected(p, r, kk)
    inst = Instance(t, p, r, k if t.uses_k else None, word, table, expected)
    if t.complete:
        m = eval_word(word, table)
        fix = _complete_with_q(m, table["Q"].b)
        if fix is not None:
            c, side = fix
            q = GenWord.syllable(t.alphabet, "Q", c) if c else GenWord.empty(t.alphabet)
            word = word * q if side == "right" else q * word
            inst = Instance(t, p, r, inst.k, word, table, expected, c, side)
    return inst


@dataclass(frozen=True)
class VerificationReport:
    template: str
    p: int
    r: int
    k: int | None
    verdict: str
    actual: Mat2
    expected: Mat2
    consequence: Mat2 | None = None
    consequence_ok: bool | None = None
    in_gamma1bar: bool | None = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict != FAIL and self.consequence_ok is not False

    def as_dict(self) -> dict:
        return {
            "template": self.template,
            "p": self.p,
            "r": self.r,
            "k": self.k,
            "verdict": self.verdict,
            "actual": str(self.actual),
            "expected": str(self.expected),
            "consequence": None if self.consequence is None else str(self.consequence),
            "consequence_ok": self.consequence_ok,
            "in_gamma1bar": self.in_gamma1bar,
            "note": self.note,
        }


def compare(actual: Mat2, expected: Mat2) -> str:
    if actual == expected:
        return EXACT
    if actual == expected.inverse():
        return MATCHES_INVERSE
    if actual == -expected:
        return MATCHES_NEGATION
    if actual == -expected.inverse():
        return MATCHES_NEGATED_INVERSE
    return FAIL


def verify_instance(inst: Instance) -> VerificationReport:
    t = inst.template
    actual = eval_word(inst.word, inst.table)
    verdict = compare(actual, inst.expected)
    consequence = ok = None
    if t.u_power is not None and verdict != FAIL:
        m = t.u_power(inst.p, inst.r, inst.k or 1)
        target = U(inst.p) ** (2 * m)
        sq = actual * actual
        consequence = sq if sq == target else sq.inverse()
        ok = consequence == target
    notes = [t.note] if t.note else []
    if inst.completion_side:
        notes.append(f"completed by Q^{inst.completion} on the {inst.completion_side}")
    return VerificationReport(
        t.name,
        inst.p,
        inst.r,
        inst.k,
        verdict,
        actual,
        inst.expected,
        consequence,
        ok,
        membership(actual, inst.p, inst.r) if gcd(inst.p, inst.r) == 1 else None,
        "; ".join(notes),
    )


def verify(t: IdentityTemplate, p: int, r: int | None = None, k: int | None = None) -> VerificationReport:
    return verify_instance(instantiate(t, p, r, k))


def verify_all(
    primes: Iterable[int] | None = None,
    k_values: Sequence[int] | None = None,
    templates: Iterable[IdentityTemplate] | None = None,
    r: int | None = None,
) -> list[VerificationReport]:
    """Verify every applicable (template, p, k); ``r`` filters to one level."""
    primes = list(primes) if primes is not None else primes_up_to(99)
    out = []
    for t in templates if templates is not None else catalog():
        ks = (tuple(k_values) if k_values is not None else t.k_values) if t.uses_k else (None,)
        for p in primes:
            rr = t.r_for(p)
            if r is not None and rr != r:
                continue
            for k in ks:
                if t.applicable(p, rr, k):
                    out.append(verify(t, p, rr, k))
    return out


def summarize(reports: Iterable[VerificationReport]) -> dict[str, int]:
    counts = {v: 0 for v in VERDICTS}
    for rep in reports:
        counts[rep.verdict] += 1
    return counts


# ---------------------------------------------------------------------------
# the catalogue

def _negU(m_power: int) -> Callable[[int, int, int], Mat2]:
    return lambda p, r, k: -(U(p) ** m_power)


def _posU(m_power: int) -> Callable[[int, int, int], Mat2]:
    return lambda p, r, k: U(p) ** m_power


def _sigma(p: int, r: int, k: int) -> int:
    return mult_order(p, r)


def _sym_bm(p: int, r: int, k: int) -> dict[str, Mat2]:
    return {"a": A, "b": B, "u": U(p)}


def _sym_73(p: int, r: int, k: int) -> dict[str, Mat2]:
    return {"A": A, "Q": upper(Fraction(7, 3)), "W": upper(Fraction(7, 3**k))}


def _sym_diamond(p: int, r: int, k: int) -> dict[str, Mat2]:
    mu = Fraction(3, 2)
    return {"X": upper(mu), "Y": lower(mu)}


def _w73(k: int) -> list:
    """Word over A, Q (Q = Q_{7/3}) for Q_{7/3^k}, by the corrected recursion."""
    w = GenWord.build(("A", "Q"), [("Q", 1)])
    for j in range(1, k):
        a = lambda e: GenWord.syllable(("A", "Q"), "A", e)
        w = a(3**j) * w.inverse() * a(3 ** (j - 1)) * w.inverse() * a(3**j)
    return w.pairs()


def _eq3(p: int, r: int, k: int) -> list:
    return [
        ("U", k), ("A", p ** (k - 1)), ("U", -k), ("B", 1), ("A", p ** (k + 1)),
        ("U", -k), ("B", 1), ("A", p ** (k - 1)), ("B", -1),
    ]


def _bm_relator(kind: str) -> Callable[[int, int, int], list]:
    def build(p: int, r: int, k: int) -> list:
        if kind == "ab3":
            return [("a", 1), ("b", 1)] * 3
        if kind == "ub2":
            return [("u", 1), ("b", 1)] * 2
        if kind == "bua3":
            return [("b", 1), ("u", 1), ("a", p)] * 3
        if kind == "b4":
            return [("b", 4)]
        return [("u", -1), ("a", 1), ("u", 1)]
    return build


_CATALOG: list[IdentityTemplate] | None = None


def catalog() -> list[IdentityTemplate]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return list(_CATALOG)


def by_name(name: str) -> IdentityTemplate:
    for t in catalog():
        if t.name == name:
            return t
    raise KeyError(name)


def _build_catalog() -> list[IdentityTemplate]:
    AB = ("A", "B", "Q")
    ABU = ("A", "B", "U", "Q")
    bm = ("a", "b", "u")
    T = IdentityTemplate
    cat = [
        # r = 1: A and Q_{1/p} generate everything
        T("r1-B", "B from A and Q_{1/p}", 1,
          lambda p, r, k: [("A", -1), ("Q", p), ("A", -1)],
          lambda p, r, k: B, alphabet=AB),
        T("r1-U", "U_p from A, B and Q_{1/p}", 1,
          lambda p, r, k: [("B", -1), ("Q", 1), ("A", -p), ("Q", 1)],
          _posU(1), alphabet=AB, u_power=lambda p, r, k: 1),
        T("U-from-power", "U_p from A, B and any power U_p^k", 1, _eq3, _posU(1),
          alphabet=ABU, uses_k=True, u_power=lambda p, r, k: 1),
        T("push-B", "B^i U_p B^-i = U_p^((-1)^i)", 1,
          lambda p, r, k: [("B", k), ("U", 1), ("B", -k)],
          lambda p, r, k: U(p) ** ((-1) ** k), alphabet=ABU, uses_k=True, k_values=(1, 2, 3)),
        T("push-A", "U_p^-1 A U_p = A^(p^2)", 1,
          lambda p, r, k: [("U", -1), ("A", 1), ("U", 1)],
          lambda p, r, k: A ** (p * p), alphabet=ABU),
        T("Q-integer-conjugate", "Q_r = B A^-r B^-1", lambda p: p + 1,
          lambda p, r, k: [("B", 1), ("A", -r), ("B", -1)],
          lambda p, r, k: upper(r), alphabet=AB,
          note="B A^r B^-1 evaluates to Q_{-r}; the sign is moved into the exponent"),
        # r = 2, 3, 4
        T("r2", "U_p in Delta_{2/p}, Q-exponent s = p", 2,
          lambda p, r, k: [("Q", p), ("A", exact_div(p - 1, 2)), ("Q", -1),
                           ("A", -exact_div(p * (p - 1), 2))],
          _posU(1), u_power=lambda p, r, k: 1,
          note="leading exponent s = p solves the upper-right entry to zero"),
        T("r3-p1mod3", "U_p in Delta_{3/p}, p = 1 mod 3", 3,
          lambda p, r, k: [("Q", exact_div(p * (p - 1), 3)), ("A", 1),
                           ("Q", -exact_div(p - 1, 3)), ("A", -p)],
          _posU(1), (p_mod(1, 3),), u_power=lambda p, r, k: 1),
        T("r3-p2mod3", "-U_p in Delta_{3/p}, p = 2 mod 3", 3,
          lambda p, r, k: [("Q", exact_div(p * (p + 1), 3)), ("A", -1),
                           ("Q", exact_div(p + 1, 3)), ("A", -p)],
          _negU(1), (p_mod(2, 3),), u_power=lambda p, r, k: 1),
        T("r4-p1mod4", "U_p in Delta_{4/p}, p = 1 mod 4", 4,
          lambda p, r, k: [("Q", p), ("A", exact_div(p - 1, 4)), ("Q", -1),
                           ("A", -exact_div(p * (p - 1), 4))],
          _posU(1), (p_mod(1, 4),), u_power=lambda p, r, k: 1),
        T("r4-p3mod4", "-U_p in Delta_{4/p}, p = 3 mod 4", 4,
          lambda p, r, k: [("Q", -p), ("A", exact_div(p + 1, 4)), ("Q", -1),
                           ("A", exact_div(p * (p + 1), 4))],
          _negU(1), (p_mod(3, 4),), u_power=lambda p, r, k: 1),
        # r = 5
        T("r5-p2", "-U_2^2 in Delta_{5/2}", 5,
          lambda p, r, k: [("A", 2), ("Q", 1), ("A", -1), ("Q", 1), ("A", -1), ("Q", -2)],
          _negU(2), (p_in(2),), u_power=lambda p, r, k: 2),
        T("r5-p1mod10", "U_p^2 in Delta_{5/p}, p = 1 mod 10", 5,
          lambda p, r, k: [("A", p), ("Q", exact_div(p - 1, 5)), ("A", -p - 1),
                           ("Q", -exact_div(p - 1, 5)), ("A", 1),
                           ("Q", -exact_div((p + 1) * p * (p - 1) ** 2, 5))],
          _posU(2), (p_mod(1, 10),), u_power=lambda p, r, k: 2),
        T("r5-p3mod10", "triangular word for -U_p^2, p = 3 mod 10", 5,
          lambda p, r, k: [("A", p), ("Q", exact_div(2 * (p - 3), 5) + 1),
                           ("A", exact_div(p - 3, 2) + 1), ("Q", -exact_div(p - 3, 5) - 1), ("A", 1)],
          _negU(2), (p_mod(3, 10),), u_power=lambda p, r, k: 2, complete=True),
        T("r5-p7mod10", "triangular word for -U_p^2, p = 7 mod 10", 5,
          lambda p, r, k: [("A", p), ("Q", -exact_div(2 * (p - 7), 5) - 3),
                           ("A", -exact_div(p - 7, 2) - 3), ("Q", -exact_div(p - 7, 5) - 1), ("A", 1)],
          _negU(2), (p_mod(7, 10),), u_power=lambda p, r, k: 2, complete=True),
        T("r5-p9mod10", "triangular word for -U_p^2, p = 9 mod 10", 5,
          lambda p, r, k: [("A", p), ("Q", -exact_div(p - 9, 5) - 2), ("A", p + 1),
                           ("Q", -exact_div(p - 9, 5) - 2), ("A", 1)],
          _negU(2), (p_mod(9, 10),), u_power=lambda p, r, k: 2, complete=True),
        # numerators near p
        T("r=p-1", "U_p in Delta_{(p-1)/p}", lambda p: p - 1,
          lambda p, r, k: [("Q", p), ("A", 1), ("Q", -1), ("A", -p)],
          _posU(1), u_power=lambda p, r, k: 1),
        T("r=p+1", "U_p^2 in Delta_{(p+1)/p}", lambda p: p + 1,
          lambda p, r, k: [("Q", p**3 - p**2 - p), ("A", 1), ("Q", -1), ("A", p),
                           ("Q", 1), ("A", -1), ("Q", 1), ("A", -p)],
          _posU(2), u_power=lambda p, r, k: 2),
        T("r=(p+1)/2-p3", "U_3 in Delta_{2/3}", lambda p: (p + 1) // 2,
          lambda p, r, k: [("Q", -3), ("A", -1), ("Q", 1), ("A", 3)],
          _posU(1), (p_in(3),), u_power=lambda p, r, k: 1),
        T("r=(p+1)/2", "-U_p in Delta_{(p+1)/2p}, p > 3", lambda p: (p + 1) // 2,
          lambda p, r, k: [("Q", -2 * p), ("A", 1), ("Q", -2), ("A", p)],
          _negU(1), (_cond("p > 3", lambda p, r, k: p > 3),), u_power=lambda p, r, k: 1),
        # strong witnesses
        T("witness-3/2", "strong relation word for 3/2", 3,
          lambda p, r, k: [("A", 2), ("Q", -1), ("A", 1)],
          lambda p, r, k: Mat2.of(Fraction(-1, 2), Fraction(-3, 2), 0, -2), (p_in(2),)),
        T("witness-8/3", "strong relation word for 8/3", 8,
          lambda p, r, k: [("A", 6), ("Q", -1), ("A", 1), ("Q", -1), ("A", 1)],
          lambda p, r, k: Mat2.of(Fraction(1, 9), Fraction(16, 9), 0, 9), (p_in(3),)),
        T("7/3^k-step", "Q_{7/3^(k+1)} from A and Q_{7/3^k}", 7,
          lambda p, r, k: [("A", 3**k), ("W", -1), ("A", 3 ** (k - 1)), ("W", -1), ("A", 3**k)],
          lambda p, r, k: upper(Fraction(7, 3 ** (k + 1))), (p_in(3), k_range(1, 6)),
          symbols=_sym_73, alphabet=("A", "W"), uses_k=True, k_values=(1, 2, 3, 4, 5, 6),
          note="recursive form; the closed form with Q_{7/3} in every step does not hold"),
        T("7/3^k", "Q_{7/3^k} as a word in A and Q_{7/3}", 7,
          lambda p, r, k: _w73(k),
          lambda p, r, k: upper(Fraction(7, 3**k)), (p_in(3), k_range(1, 6)),
          symbols=_sym_73, uses_k=True, k_values=(1, 2, 3, 4, 5, 6)),
        T("diamond-3/2", "diag(-8,-1/8) in <X_{3/2}, Y_{3/2}>", 3,
          lambda p, r, k: [("X", 12)] + [("Y", 1), ("X", -1)] * 2 + [("X", -1), ("Y", -2)],
          lambda p, r, k: diag(-8), (p_in(2),), symbols=_sym_diamond, alphabet=("X", "Y")),
    ]
    bm_rel = [
        ("bm-(ab)^3=b^2", "ab3", lambda p, r, k: B * B),
        ("bm-(ub)^2=b^2", "ub2", lambda p, r, k: B * B),
        ("bm-(bua^p)^3=b^2", "bua3", lambda p, r, k: B * B),
        ("bm-b^4=1", "b4", lambda p, r, k: Mat2.identity()),
        ("bm-u^-1au=a^(p^2)", "conj", lambda p, r, k: A ** (p * p)),
    ]
    for name, kind, exp in bm_rel:
        cat.append(T(name, "Behr-Mennicke relator as a matrix identity", 1, _bm_relator(kind), exp,
                     (p_in(2, 3),), symbols=_sym_bm, alphabet=bm))
    return cat


def naive_7_3k_word(k: int) -> tuple[GenWord, dict[str, Mat2]]:
    """The closed form A^{3^k} Q^-1 A^{3^(k-1)} Q^-1 A^{3^k} with Q = Q_{7/3}.

    Kept as a regression check: it evaluates to Q_{7/9} at k = 1 and is not
    unipotent for k >= 2.
    """
    w = GenWord.build(("A", "Q"), [("A", 3**k), ("Q", -1), ("A", 3 ** (k - 1)), ("Q", -1), ("A", 3**k)])
    return w, {"A": A, "Q": upper(Fraction(7, 3))}
