"""Finitely presented groups and HLT Todd-Coxeter coset enumeration.

The enumerator works on a 1-indexed integer table with two columns per
generator (column ``2g`` for ``g`` and ``2g + 1`` for its inverse, so the
inverse column is ``col ^ 1``); 0 marks an undefined entry.  Coincidences are
processed with a queue and union-find in the usual way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

import numpy as np

from ._accel import kernel
from .mat2 import A, B, GenWord, Mat2, U, eval_word, membership, upper
from .numtheory import jordan2

COMPLETE = "complete"
OVERFLOW = "overflow"


class PresentationError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Presentation:
    gens: tuple[str, ...]
    relators: tuple[GenWord, ...]

    def __post_init__(self) -> None:
        if len(set(self.gens)) != len(self.gens):
            raise PresentationError("duplicate generator names")
        rels = []
        for w in self.relators:
            w = w.over(self.gens) if set(w.symbols()) <= set(self.gens) else None
            if w is None:
                raise PresentationError("relator uses a symbol outside the generators")
            if not w:
                raise PresentationError("relators must be nonempty after free reduction")
            rels.append(w)
        object.__setattr__(self, "relators", tuple(rels))

    def text(self) -> str:
        lines = ["gens: " + " ".join(self.gens)]
        lines += ["rel: " + str(w) for w in self.relators]
        return "\n".join(lines) + "\n"

    def check_matrices(self, table: Mapping[str, Mat2]) -> list[str]:
        """Relators that do not evaluate to the identity under ``table``."""
        return [str(w) for w in self.relators if not eval_word(w, table).is_identity()]


_TOKEN = re.compile(r"\S+")


def load_presentation(text: str, sanity: Mapping[str, Mat2] | None = None) -> Presentation:
    """Parse ``gens: ...`` / ``rel: ...`` text; '#' starts a comment."""
    gens: tuple[str, ...] | None = None
    rels: list[GenWord] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        offset = len(key) + len(sep) + (len(line) - len(line.lstrip()))
        if not sep or key not in ("gens", "rel"):
            raise PresentationError("expected 'gens:' or 'rel:'", lineno, 1)
        if key == "gens":
            if gens is not None:
                raise PresentationError("generators declared twice", lineno, 1)
            names = rest.split()
            for m in _TOKEN.finditer(rest):
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", m.group()):
                    raise PresentationError(f"bad generator name {m.group()!r}", lineno, offset + m.start() + 1)
            if not names:
                raise PresentationError("no generators", lineno, offset + 1)
            gens = tuple(names)
            continue
        if gens is None:
            raise PresentationError("'rel:' before 'gens:'", lineno, 1)
        for m in _TOKEN.finditer(rest):
            tok = m.group()
            sm = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^([+-]?\d+))?", tok)
            col = offset + m.start() + 1
            if sm is None:
                raise PresentationError(f"malformed syllable {tok!r}", lineno, col)
            if sm.group(1) not in gens:
                raise PresentationError(f"unknown symbol {sm.group(1)!r}", lineno, col)
        try:
            w = GenWord.parse(rest, gens)
        except ValueError as exc:  # pragma: no cover - tokens checked above
            raise PresentationError(str(exc), lineno, offset + 1) from exc
        if not w:
            raise PresentationError("relator reduces to the empty word", lineno, offset + 1)
        rels.append(w)
    if gens is None:
        raise PresentationError("missing 'gens:' line")
    pres = Presentation(gens, tuple(rels))
    if sanity is not None:
        bad = pres.check_matrices(sanity)
        if bad:
            raise PresentationError("relator is not killed by the matrices: " + "; ".join(bad))
    return pres


def behr_mennicke(p: int) -> Presentation:
    """The Behr-Mennicke presentation of SL2(Z[1/p]) on a, b, u for p = 2, 3."""
    if p not in (2, 3):
        raise ValueError(
            f"no built-in presentation for p={p}; supply one with load_presentation"
        )
    g = ("a", "b", "u")
    mk = lambda pairs: GenWord.build(g, pairs)
    rels = (
        mk([("a", 1), ("b", 1)] * 3 + [("b", -2)]),
        mk([("u", 1), ("b", 1)] * 2 + [("b", -2)]),
        mk([("b", 1), ("u", 1), ("a", p)] * 3 + [("b", -2)]),
        mk([("b", 4)]),
        mk([("u", -1), ("a", 1), ("u", 1), ("a", -p * p)]),
    )
    return Presentation(g, rels)


def bm_matrices(p: int) -> dict[str, Mat2]:
    return {"a": A, "b": B, "u": U(p)}


@dataclass(frozen=True)
class SubgroupSpec:
    words: tuple[GenWord, ...]

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("a subgroup needs at least one generator word")


def embed_delta(p: int, r: int) -> SubgroupSpec:
    """Words for A and Q_{r/p}: ``a`` and ``u^-1 b a^(-rp) b^-1 u``."""
    g = ("a", "b", "u")
    qw = GenWord.build(g, [("u", -1), ("b", 1), ("a", -r * p), ("b", -1), ("u", 1)])
    if eval_word(qw, bm_matrices(p)) != upper(Fraction(r, p)):  # pragma: no cover
        raise AssertionError("embedding word does not evaluate to Q_{r/p}")
    return SubgroupSpec((GenWord.build(g, [("a", 1)]), qw))


# ---------------------------------------------------------------------------
# the enumeration kernel


@kernel
def _rep(parent, c):
    r = c
    while parent[r] != r:
        r = parent[r]
    while parent[c] != r:
        nxt = parent[c]
        parent[c] = r
        c = nxt
    return r


@kernel
def _merge(parent, queue, qlen, k, l):
    a = _rep(parent, k)
    b = _rep(parent, l)
    if a != b:
        if a > b:
            a, b = b, a
        parent[b] = a
        queue[qlen] = b
        qlen += 1
    return qlen


@kernel
def _coincidence(table, parent, queue, a, b):
    """Identify cosets a and b; returns the number of cosets killed."""
    ncols = table.shape[1]
    qlen = _merge(parent, queue, 0, a, b)
    i = 0
    while i < qlen:
        g = queue[i]
        i += 1
        for x in range(ncols):
            d = table[g, x]
            if d != 0:
                xi = x ^ 1
                table[d, xi] = 0
                mu = _rep(parent, g)
                nu = _rep(parent, d)
                if table[mu, x] != 0:
                    qlen = _merge(parent, queue, qlen, nu, table[mu, x])
                elif table[nu, xi] != 0:
                    qlen = _merge(parent, queue, qlen, mu, table[nu, xi])
                else:
                    table[mu, x] = nu
                    table[nu, xi] = mu
    return qlen


@kernel
def _scan(table, parent, queue, state, c, word, lo, hi, define):
    """Scan ``word[lo:hi]`` from coset c, filling gaps when ``define`` is set.

    ``state`` holds [next free row, dead count, out-of-space flag].
    Returns 0 normally and -1 when a definition was needed but no row is free.
    """
    f = c
    i = lo
    b = c
    j = hi - 1
    maxrow = table.shape[0] - 1
    while True:
        while i <= j and table[f, word[i]] != 0:
            f = table[f, word[i]]
            i += 1
        if i > j:
            if f != b:
                state[1] += _coincidence(table, parent, queue, f, b)
            return 0
        while j >= i and table[b, word[j] ^ 1] != 0:
            b = table[b, word[j] ^ 1]
            j -= 1
        if j < i:
            state[1] += _coincidence(table, parent, queue, f, b)
            return 0
        if i == j:
            table[f, word[i]] = b
            table[b, word[i] ^ 1] = f
            return 0
        if not define:
            return 0
        n = state[0]
        if n > maxrow:
            state[2] = 1
            return -1
        state[0] = n + 1
        for x in range(table.shape[1]):
            table[n, x] = 0
        parent[n] = n
        table[f, word[i]] = n
        table[n, word[i] ^ 1] = f


@kernel
def _compact(table, parent, state, pos):
    """Renumber live cosets 1..m in order; returns the new index of ``pos``."""
    top = state[0]
    ncols = table.shape[1]
    newidx = np.zeros(top + 1, dtype=np.int64)
    m = 0
    newpos = 0
    for c in range(1, top):
        if parent[c] == c:
            m += 1
            newidx[c] = m
            if newpos == 0 and c >= pos:
                newpos = m
    for c in range(1, top):
        if parent[c] == c:
            nc = newidx[c]
            for x in range(ncols):
                d = table[c, x]
                table[nc, x] = newidx[_rep(parent, d)] if d != 0 else 0
    for c in range(1, m + 1):
        parent[c] = c
    state[0] = m + 1
    state[1] = 0
    return newpos if newpos != 0 else m + 1


@kernel
def _next_live(parent, c, top):
    while c < top and parent[c] != c:
        c += 1
    return c


@kernel
def hlt_enumerate(ncols, rel_letters, rel_offsets, sub_letters, sub_offsets, max_cosets, lookahead):
    """HLT enumeration.  Returns (status, table, live count, total defined).

    status 0 = complete, 1 = overflow.
    """
    table = np.zeros((max_cosets + 1, ncols), dtype=np.int64)
    parent = np.zeros(max_cosets + 1, dtype=np.int64)
    queue = np.zeros(max_cosets + 1, dtype=np.int64)
    state = np.zeros(3, dtype=np.int64)
    parent[1] = 1
    state[0] = 2
    total = 1
    nrel = rel_offsets.shape[0] - 1
    nsub = sub_offsets.shape[0] - 1
    # subgroup generators fix coset 1
    s = 0
    while s < nsub:
        before = state[0]
        rc = _scan(table, parent, queue, state, 1, sub_letters, sub_offsets[s], sub_offsets[s + 1], True)
        total += state[0] - before
        if rc == 0:
            s += 1
            continue
        _compact(table, parent, state, 1)
        if state[0] > max_cosets:
            return 1, table, state[0] - 1, total
    c = 1
    while True:
        c = _next_live(parent, c, state[0])
        if c >= state[0]:
            break
        k = 0
        restart = False
        while k < nrel + ncols:
            if parent[c] != c:
                break
            before = state[0]
            if k < nrel:
                rc = _scan(table, parent, queue, state, c, rel_letters, rel_offsets[k], rel_offsets[k + 1], True)
            else:
                x = k - nrel
                rc = 0
                if table[c, x] == 0:
                    n = state[0]
                    if n > max_cosets:
                        rc = -1
                    else:
                        state[0] = n + 1
                        for y in range(ncols):
                            table[n, y] = 0
                        parent[n] = n
                        table[c, x] = n
                        table[n, x ^ 1] = c
            total += state[0] - before
            if rc == 0:
                k += 1
                continue
            # out of rows: reclaim dead ones, then try a lookahead pass
            freed = state[1]
            c = _compact(table, parent, state, c)
            if freed * 4 < max_cosets and lookahead:
                for d in range(1, state[0]):
                    if parent[d] != d:
                        continue
                    for kk in range(nrel):
                        if parent[d] != d:
                            break
                        _scan(table, parent, queue, state, d, rel_letters, rel_offsets[kk], rel_offsets[kk + 1], False)
                c = _compact(table, parent, state, c)
            if state[0] > max_cosets:
                return 1, table, state[0] - 1, total
            restart = True
            break
        if restart:
            continue
        c += 1
    _compact(table, parent, state, 1)
    return 0, table, state[0] - 1, total


def _flatten(words: Sequence[GenWord]) -> tuple[np.ndarray, np.ndarray]:
    letters: list[int] = []
    offsets = [0]
    for w in words:
        letters.extend(2 * idx + (0 if s > 0 else 1) for idx, s in w.letters())
        offsets.append(len(letters))
    return np.asarray(letters, dtype=np.int64), np.asarray(offsets, dtype=np.int64)


@dataclass
class CosetTable:
    """Result of an enumeration.  ``table`` rows 1..index are the live cosets."""

    gens: tuple[str, ...]
    status: str
    table: np.ndarray
    live: int
    defined: int
    max_cosets: int

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE

    @property
    def index(self) -> int | None:
        return self.live if self.complete else None

    def image(self, coset: int, word: GenWord) -> int:
        w = word.over(self.gens)
        for idx, s in w.letters():
            coset = int(self.table[coset, 2 * idx + (0 if s > 0 else 1)])
            if coset == 0:
                raise ValueError("table is not closed")
        return coset

    def permutation(self, gen: str | int, inverse: bool = False) -> list[int]:
        g = self.gens.index(gen) if isinstance(gen, str) else gen
        col = 2 * g + (1 if inverse else 0)
        return [int(self.table[c, col]) for c in range(1, self.live + 1)]


def todd_coxeter(
    pres: Presentation, sub: SubgroupSpec | Sequence[GenWord], max_cosets: int = 100_000, lookahead: bool = True
) -> CosetTable:
    """Index of the subgroup, or an overflow outcome past ``max_cosets``."""
    if max_cosets < 1:
        raise ValueError("max_cosets must be positive")
    words = sub.words if isinstance(sub, SubgroupSpec) else tuple(sub)
    rl, ro = _flatten(pres.relators)
    sl, so = _flatten([w.over(pres.gens) for w in words])
    status, table, live, total = hlt_enumerate(2 * len(pres.gens), rl, ro, sl, so, int(max_cosets), bool(lookahead))
    st = COMPLETE if status == 0 else OVERFLOW
    tab = table[: live + 1].copy() if st == COMPLETE else table[:0].copy()
    return CosetTable(pres.gens, st, tab, int(live), int(total), max_cosets)


@dataclass(frozen=True)
class ConjectureReport:
    p: int
    r: int
    status: str
    index: int | None
    jordan2: int
    equal_gamma1bar: bool | None
    max_cosets: int

    @property
    def verdict(self) -> str:
        if self.index is None:
            return f"inconclusive (bound {self.max_cosets})"
        return "equal" if self.equal_gamma1bar else "index differs from J2(r)"

    def as_dict(self) -> dict:
        d = {"p": self.p, "r": self.r}
        if self.index is None:
            d["status"] = self.status
        else:
            d["index"] = self.index
        d["jordan2"] = self.jordan2
        d["equal"] = self.equal_gamma1bar
        return d


def verify_conjecture(
    p: int, r: int, max_cosets: int = 100_000, presentation: Presentation | None = None
) -> ConjectureReport:
    """Enumerate cosets of Delta_{r/p}; equality with the congruence subgroup
    follows when the index is J_2(r), since Delta lies inside it."""
    pres = presentation if presentation is not None else behr_mennicke(p)
    if presentation is None:
        sub = embed_delta(p, r)
    else:
        sub = _embed_for(pres, p, r)
    table = todd_coxeter(pres, sub, max_cosets)
    j = jordan2(r)
    if not table.complete:
        return ConjectureReport(p, r, OVERFLOW, None, j, None, max_cosets)
    inside = gcd(p, r) == 1 and all(membership(m, p, r) for m in (A, upper(Fraction(r, p))))
    return ConjectureReport(p, r, COMPLETE, table.index, j, inside and table.index == j, max_cosets)


def _embed_for(pres: Presentation, p: int, r: int) -> SubgroupSpec:
    """Embedding words for a user presentation on generators named a, b, u."""
    if not {"a", "b", "u"} <= set(pres.gens):
        raise PresentationError("user presentations must name the generators a, b and u")
    g = pres.gens
    return SubgroupSpec(
        (
            GenWord.build(g, [("a", 1)]),
            GenWord.build(g, [("u", -1), ("b", 1), ("a", -r * p), ("b", -1), ("u", 1)]),
        )
    )
