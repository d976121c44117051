from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from twoparabolic.mat2 import LOWER, NOT_TRIANGULAR, A, GenWord, eval_word, triangular_class, upper
from twoparabolic.reduction import strong_witness_to_diagonal
from twoparabolic.search import (
    RELATION,
    STRONG,
    PellState,
    SearchBounds,
    a_seq,
    diamond_checks,
    pell_q,
    pell_state,
    pell_witness_check,
    search_witness,
)


def words_of(ws):
    return [str(w.word) for w in ws]


def brute_force(p, r, S, E, strong):
    """Exact evaluation of every alternating word with both symbols."""
    table = {"A": A, "Q": upper(Fraction(r, p))}
    exps = [e for e in range(-E, E + 1) if e]
    out = set()
    for n in range(2, S + 1):
        for first in ("A", "Q"):
            syms = [("A", "Q")[(i + (first == "Q")) % 2] for i in range(n)]
            for es in product(exps, repeat=n):
                w = GenWord.build(("A", "Q"), list(zip(syms, es)))
                cls = triangular_class(eval_word(w, table))
                if not cls.triangular:
                    continue
                if strong and not triangular_class(eval_word(w, table), p).strong:
                    continue
                out.add(str(w))
    return out


def test_search_bounds_validation():
    with pytest.raises(ValueError):
        SearchBounds(0, 3)
    with pytest.raises(ValueError):
        SearchBounds(2, 2, "weak")


def test_search_3_2_witness():
    ws = search_witness(2, 3, SearchBounds(3, 2, STRONG))
    assert "A^2 Q^-1 A" in words_of(ws)


def test_search_8_3_witness():
    ws = search_witness(3, 8, SearchBounds(5, 6, STRONG))
    assert "A^6 Q^-1 A Q^-1 A" in words_of(ws)


def test_search_free_ratio_is_empty():
    assert search_witness(2, 9, SearchBounds(4, 6)) == []


def test_search_rejects_non_coprime():
    with pytest.raises(ValueError):
        search_witness(2, 4, SearchBounds(2, 2))


@pytest.mark.parametrize("p, r, S, E", [(2, 3, 2, 2), (2, 3, 3, 2), (3, 2, 3, 3), (2, 1, 3, 2), (3, 4, 3, 3)])
@pytest.mark.parametrize("mode", [RELATION, STRONG])
def test_enumeration_completeness(p, r, S, E, mode):
    ws = search_witness(p, r, SearchBounds(S, E, mode))
    assert set(words_of(ws)) == brute_force(p, r, S, E, mode == STRONG)
    assert len(ws) == len(set(words_of(ws)))


def test_canonical_order():
    ws = search_witness(3, 2, SearchBounds(4, 4))
    keys = [(len(w.word), w.word.pairs()[0][0], [e for _, e in w.word.pairs()]) for w in ws]
    assert keys == sorted(keys)


def test_witnesses_reverify():
    for w in search_witness(3, 2, SearchBounds(4, 5, STRONG)):
        m = eval_word(w.word, {"A": A, "Q": upper(Fraction(2, 3))})
        assert m == w.matrix
        assert triangular_class(m, 3).strong and w.shape.strong
        assert {"A", "Q"} <= w.word.symbols()


def test_thread_count_does_not_change_output():
    b = SearchBounds(4, 5)
    one = words_of(search_witness(2, 3, b, workers=1))
    four = words_of(search_witness(2, 3, b, workers=4))
    assert one == four


def test_wide_arithmetic_path():
    # entries overflow int64 here, so the object-array path runs
    ws = search_witness(97, 101, SearchBounds(3, 4))
    assert set(words_of(ws)) == brute_force(97, 101, 3, 4, False)


@pytest.mark.parametrize("p, r, S, E", [(2, 3, 4, 4), (3, 8, 5, 6), (3, 2, 4, 5), (5, 4, 4, 5), (3, 4, 4, 6)])
def test_strong_witnesses_complete_to_diagonal(p, r, S, E):
    table = {"A": A, "Q": upper(Fraction(r, p))}
    ws = search_witness(p, r, SearchBounds(S, E, STRONG))
    assert ws
    for w in ws:
        m = eval_word(strong_witness_to_diagonal(w.word, p, r), table)
        c = triangular_class(m, p)
        assert c.shape == "diagonal" and abs(c.k) == abs(w.shape.k)


# Pell sequence


def test_pell_q_list():
    want = [Fraction(3), Fraction(7, 2), Fraction(41, 12), Fraction(239, 70), Fraction(1393, 408), Fraction(8119, 2378)]
    assert [pell_q(n) for n in range(1, 7)] == want


def test_pell_states():
    assert [(pell_state(n).X, pell_state(n).Y) for n in range(2, 6)] == [(3, 2), (17, 12), (99, 70), (577, 408)]
    for n in range(2, 30):
        s = pell_state(n)
        assert s.X**2 - 2 * s.Y**2 == 1
    assert pell_state(1).X ** 2 - 2 * pell_state(1).Y ** 2 == -1
    with pytest.raises(ValueError):
        PellState(2, 1)


def test_pell_convergence():
    target_sq = 2  # q - 2 -> sqrt(2)
    x = pell_q(6) - 2
    # |x - sqrt 2| < 1e-6, decided exactly: (x - 1e-6)^2 < 2 < (x + 1e-6)^2
    eps = Fraction(1, 10**6)
    assert (x - eps) ** 2 < target_sq < (x + eps) ** 2
    gaps = [abs(pell_q(n + 1) - pell_q(n)) for n in range(2, 12)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_a_seq():
    assert [a_seq(n) for n in range(1, 5)] == [0, 2, 60, 2030]
    with pytest.raises(ValueError):
        a_seq(0)


def test_a_seq_companion_matrix():
    # (a(n), a(n-1), 1) advances by a fixed 3x3 integer matrix
    M = np.array([[34, -1, -8], [1, 0, 0], [0, 0, 1]], dtype=object)
    v = np.array([2, 0, 1], dtype=object)
    for n in range(3, 25):
        v = M.dot(v)
        assert v[0] == a_seq(n)


def test_pell_witness_shapes():
    # the products are lower triangular; at n = 1 the word is A^-1 itself
    for n in range(1, 7):
        chk = pell_witness_check(n)
        assert chk.ok and chk.shape == LOWER and not chk.upper
    chk = pell_witness_check(1)
    assert chk.matrix == A.inverse()


def test_pell_witness_exact_entries():
    chk = pell_witness_check(3)
    q = Fraction(41, 12)
    t = {"A": A, "Q": upper(q)}
    assert eval_word(chk.word, t) == chk.matrix
    assert chk.matrix.b == 0 and chk.matrix.a == chk.matrix.d


def test_pell_non_witness_detected():
    # a wrong exponent must not be reported as triangular
    q = pell_q(2)
    w = GenWord.build(("A", "Q"), [("Q", 1)] + [("A", -1), ("Q", 1)] * 3 + [("A", -1), ("Q", 1)])
    assert triangular_class(eval_word(w, {"A": A, "Q": upper(q)})).shape == NOT_TRIANGULAR


def test_diamond_checks():
    reps = diamond_checks()
    assert all(r.ok for r in reps)
    ident = reps[0]
    assert ident.verdict == "exact" and ident.actual.a == -8 and ident.actual.d == Fraction(-1, 8)
    by = {r.template: r for r in reps}
    assert "False" in by["diamond-plus8-not-in-principal"].note
    assert by["diamond-minus8-in-principal"].in_gamma1bar


def test_kernel_backends_agree():
    # compiled kernel and its Python body give the same rows
    from twoparabolic.search import _enumerate_from

    for s0, e0 in ((0, 2), (1, -1), (0, -3)):
        res = []
        for fn in (_enumerate_from, _enumerate_from.py_func):
            mats = np.zeros((4, 4), dtype=np.int64)
            out = np.zeros((4096, 5), dtype=np.int64)
            n = fn(2, 3, 4, 4, False, s0, e0, mats, out)
            res.append(out[:n].copy())
        assert np.array_equal(res[0], res[1])
