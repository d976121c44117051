import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twoparabolic.identities import catalog
from twoparabolic.mat2 import DIAGONAL, A, GenWord, I2, M5, Mat2, U, eval_word, lower, triangular_class, upper
from twoparabolic.numtheory import is_prime, is_primitive_root, mult_order
from twoparabolic.reduction import (
    ALPHABET,
    DIRECT_HEIGHT,
    ArtinSearchFailure,
    Certificate,
    Context,
    NotInSubgroupError,
    ReductionError,
    clear_denominators,
    conjugate_to_pm_r,
    euclid_reduce,
    eval_zp,
    find_good_a,
    normalize_b,
    reduce_m5,
    reduce_to_word,
    strong_witness_to_diagonal,
)


def random_target(p, r, rng, length=12, max_exp=10):
    """Random product of A, Q_r and U_p^sigma with a known (discarded) word."""
    u = U(p) ** mult_order(p, r)
    gens = {"A": A, "Q": upper(r), "U": u}
    m, prev = I2, None
    for _ in range(rng.randint(1, length)):
        sym = rng.choice([s for s in gens if s != prev])
        prev = sym
        m = m * gens[sym] ** rng.choice([e for e in range(-max_exp, max_exp + 1) if e])
    return m


def small_targets(p, r, seed, count):
    """Integral top rows of height at most DIRECT_HEIGHT: the pipeline's regime."""
    rng, out = random.Random(seed), []
    while len(out) < count:
        m = random_target(p, r, rng, 6, 6)
        if m.a.denominator == 1 and m.b.denominator == 1 and m.height() <= DIRECT_HEIGHT:
            out.append(m)
    return out


def holds(stage, m, p, r, k):
    ctx = Context(p, r, k)
    return eval_zp(stage.left, ctx) * m * eval_zp(stage.right, ctx) == stage.matrix


# stages


def test_clear_denominators_examples():
    s = clear_denominators(upper(3), 2, 3, 2)
    assert s.steps[0][1] == {"left_U": 0, "conj_U": 0} and not s.left
    m = upper(Fraction(3, 16))  # U_2^-4 Q_3 U_2^4
    s = clear_denominators(m, 2, 3, 2)
    assert s.steps[0][1] == {"left_U": 0, "conj_U": 1} and s.matrix == upper(3)
    # valuations (-3, -1) with k = 1: U^3 is the least left factor
    m = Mat2.of(Fraction(1, 27), Fraction(2, 3), 0, 27)
    s = clear_denominators(m, 3, 2, 1)
    assert s.steps[0][1] == {"left_U": 3, "conj_U": 0}
    assert (U(3) ** 2 * m).a.denominator != 1
    assert holds(s, m, 3, 2, 1)


def test_normalize_b_examples():
    s = normalize_b(Mat2.of(7, 2, 3, 1), 3, 2)
    assert not s.right and not s.steps
    s = normalize_b(Mat2.of(3, 4, 2, 3), 3, 2)
    assert s.steps == (("normalize-b:parity", {"Q_r": 1}),)
    s = normalize_b(upper(10), 2, 5, 4)
    bp = int(s.matrix.b) // 5
    assert bp % 2 == 1 and len(s.right) == 1


def test_normalize_b_rejects_fractional_row():
    with pytest.raises(ReductionError):
        normalize_b(upper(Fraction(3, 2)), 2, 3)


def test_find_good_a_artin():
    s = find_good_a(upper(2), 3, 2, 1, criterion="artin")
    q = int(s.matrix.a)
    assert s.steps[0][1]["A"] < 100
    assert is_prime(q) and q % 4 == 3 and is_primitive_root(3, q)


def test_find_good_a_four_divides_r():
    s = find_good_a(upper(4), 3, 4, 2, criterion="artin")
    a = int(s.matrix.a)
    assert a < 0 and is_prime(-a) and -a % 4 == 3 and is_primitive_root(3, -a)


def test_find_good_a_bound_zero():
    with pytest.raises(ArtinSearchFailure):
        find_good_a(upper(2), 3, 2, 1, bound=0, criterion="artin")
    with pytest.raises(ValueError):
        find_good_a(upper(2), 3, 2, 1, criterion="nope")


def test_conjugate_signs():
    # 3 is primitive mod 7 and 7 = 3 mod 4, so the sign is the Jacobi symbol of b/r
    s = conjugate_to_pm_r(Mat2.of(7, 2, 3, 1), 3, 2, 1)
    assert s.matrix.b == 2 and s.steps[0][1]["sign"] == 1  # (1/7) = 1
    s = conjugate_to_pm_r(Mat2.of(7, 6, 1, 1), 3, 2, 1)
    assert s.matrix.b == -2 and s.steps[0][1]["sign"] == -1  # (3/7) = -1
    assert holds(s, Mat2.of(7, 6, 1, 1), 3, 2, 1)


def test_conjugate_brute_force_mod_3():
    m = Mat2.of(3, 1, 2, 1)
    s = conjugate_to_pm_r(m, 2, 1, 1)
    ell = s.steps[0][1]["conj_U"]
    reachable = [l for l in (0, 1) if (1 * 4**l) % 3 in (1, 2)]
    assert ell == min(reachable) and abs(s.matrix.b) == 1


def test_euclid_examples():
    assert not euclid_reduce(lower(5), 3, 2).right
    for p, r in ((3, 2), (2, 3), (3, 5)):
        m = Mat2.of(r + 1, r, 1, 1)
        s = euclid_reduce(m, p, r)
        assert len(s.steps) <= 2 and s.matrix.a == 1 and s.matrix.b == 0


@pytest.mark.parametrize("p, r", [(3, 2), (3, 1), (5, 2), (2, 3), (3, 4), (2, 5)])
def test_euclid_on_words(p, r):
    # words in A and Q_r; levels 1 and 2 can end at -1 and use the -I word
    rng = random.Random(5)
    for _ in range(200):
        m = I2
        for j in range(rng.randint(1, 10)):
            m = m * (A if j % 2 else upper(r)) ** rng.choice([e for e in range(-9, 10) if e])
        s = euclid_reduce(m, p, r)
        assert s.matrix.a == 1 and s.matrix.b == 0 and holds(s, m, p, r, 1)
        if r == 2 and abs(m.a) > 1:
            rounds = len(s.steps)
            assert rounds <= 2 * int(max(abs(m.a), abs(m.b))).bit_length()


@pytest.mark.parametrize("p, r", [(3, 2), (7, 3), (3, 4), (2, 5), (5, 4), (7, 5)])
def test_stage_contracts(p, r):
    k = mult_order(p, r)
    for m in small_targets(p, r, 11, 8):
        s1 = clear_denominators(m, p, r, k)
        assert s1.matrix.a.denominator == 1 and s1.matrix.b.denominator == 1
        s2 = normalize_b(s1.matrix, p, r, k)
        bp = int(s2.matrix.b) // r
        assert bp % 2 and bp % p
        s3 = find_good_a(s2.matrix, p, r, k, bound=10**5, max_log=64, criterion="exact")
        assert is_prime(abs(int(s3.matrix.a)))
        s4 = conjugate_to_pm_r(s3.matrix, p, r, k)
        assert abs(s4.matrix.b) == r
        s5 = euclid_reduce(s4.matrix, p, r, k)
        assert s5.matrix.a == 1 and s5.matrix.b == 0
        for s, x in ((s1, m), (s2, s1.matrix), (s3, s2.matrix), (s4, s3.matrix), (s5, s4.matrix)):
            assert holds(s, x, p, r, k)


# certificates


def test_reduce_examples():
    c = reduce_to_word(A**5, 3, 2)
    assert str(c.word) == "A^5"
    c = reduce_to_word(U(7), 7, 3)
    assert eval_word(c.word, Context(7, 3, 1).table()) == U(7)
    assert c.k == 1 and c.steps


def test_reduce_rejects_non_members():
    with pytest.raises(NotInSubgroupError):
        reduce_to_word(U(2), 2, 3)
    with pytest.raises(ValueError):
        reduce_to_word(A, 2, 3, method="nope")
    with pytest.raises(ValueError):
        reduce_to_word(A, 2, 4)


def test_certificate_checks_itself():
    with pytest.raises(AssertionError):
        Certificate(A, GenWord.parse("A^2", ALPHABET), 3, 2, 1)


@pytest.mark.parametrize("method", ["auto", "pipeline", "padic"])
def test_methods_agree_on_matrix(method):
    m = small_targets(7, 5, 3, 1)[0]
    c = reduce_to_word(m, 7, 5, method=method)
    assert c.target == m
    assert eval_word(c.word, Context(7, 5, 4).table()) == m


@pytest.mark.parametrize("p, r", [(3, 2), (7, 3), (3, 4), (7, 5), (2, 5), (2, 9), (5, 6), (11, 13)])
def test_random_certificates(p, r):
    rng = random.Random(100 + p * r)
    k = mult_order(p, r)
    for _ in range(15):
        m = random_target(p, r, rng)
        c = reduce_to_word(m, p, r)
        assert eval_zp(c.word, Context(p, r, k)) == m


def test_custom_k():
    # k = 2 sigma still works: U_7^2 is a power of the generator
    m = U(7) ** 4
    c = reduce_to_word(m, 7, 3, k=2)
    assert c.k == 2 and eval_word(c.word, Context(7, 3, 2).table()) == m


words = st.lists(st.tuples(st.sampled_from(ALPHABET), st.integers(-12, 12)), max_size=10).map(
    lambda ps: GenWord.build(ALPHABET, ps)
)


@given(words, st.sampled_from([(3, 2, 1), (7, 5, 4), (2, 3, 2), (5, 4, 1)]))
def test_eval_zp_matches_fraction_evaluation(w, prk):
    ctx = Context(*prk)
    assert eval_zp(w, ctx) == eval_word(w, ctx.table())


def test_criteria():
    m = Mat2.of(10, 9, 1, 1)
    # sigma_2(9) = 6 and every candidate is 1 mod 9, so 3 divides both k and (q-1)/2
    assert mult_order(2, 9) == 6
    with pytest.raises(ArtinSearchFailure):
        reduce_to_word(m, 2, 9, bound=2000, criterion="artin")
    c = reduce_to_word(m, 2, 9, criterion="exact")
    assert c.target == m


def test_artin_impossible_at_2_9():
    for n in range(2000):
        q = 10 + 9 * n
        if is_prime(q):
            assert ((q - 1) // 2) % 3 == 0


def test_reduce_m5():
    for p in (2, 3, 7):
        c = reduce_m5(p)
        assert c.target == M5
        assert eval_word(c.word, Context(p, 5, mult_order(p, 5)).table()) == M5
    with pytest.raises(ArtinSearchFailure):
        reduce_m5(23)  # 23 = 1 mod 11
    with pytest.raises(ArtinSearchFailure):
        reduce_m5(7, k=5)


# strong witnesses

T32 = {"A": A, "Q": upper(Fraction(3, 2))}
T83 = {"A": A, "Q": upper(Fraction(8, 3))}


def test_strong_witness_examples():
    w = GenWord.parse("A^2 Q^-1 A", ("A", "Q"))
    out = strong_witness_to_diagonal(w, 2, 3)
    m = eval_word(out, T32)
    c = triangular_class(m, 2)
    assert c.shape == DIAGONAL and abs(c.k) == 1
    assert m * m == U(2) ** (2 * c.k)
    w = GenWord.parse("A^6 Q^-1 A Q^-1 A", ("A", "Q"))
    m = eval_word(strong_witness_to_diagonal(w, 3, 8), T83)
    c = triangular_class(m, 3)
    assert c.shape == DIAGONAL and c.k == -2


def test_strong_witness_lower_and_diagonal():
    # Q^-1 A Q^-2 is lower triangular at 3/2
    w = GenWord.parse("Q^-1 A Q^-2", ("A", "Q"))
    assert eval_word(w, T32).b == 0
    out = strong_witness_to_diagonal(w, 2, 3)
    assert triangular_class(eval_word(out, T32), 2).shape == DIAGONAL
    assert strong_witness_to_diagonal(out, 2, 3) == out


def test_strong_witness_errors():
    with pytest.raises(ValueError, match="strong"):
        strong_witness_to_diagonal(GenWord.parse("A^3", ("A", "Q")), 2, 3)
    with pytest.raises(ValueError, match="triangular"):
        strong_witness_to_diagonal(GenWord.parse("A Q", ("A", "Q")), 2, 3)


def test_strong_witness_agrees_with_catalog():
    checked = 0
    for t in catalog():
        if t.symbols is not None or t.alphabet != ("A", "Q") or t.u_power is None:
            continue
        for p in (2, 3, 5, 7, 11, 13, 19, 23, 31):
            if not t.applicable(p):
                continue
            r = t.r_for(p)
            w = GenWord.build(t.alphabet, t.word(p, r, 1))
            table = {"A": A, "Q": upper(Fraction(r, p))}
            cls = triangular_class(eval_word(w, table), p)
            if not cls.strong:
                continue
            out = eval_word(strong_witness_to_diagonal(w, p, r), table)
            got = triangular_class(out, p)
            assert got.shape == DIAGONAL and abs(got.k) == t.u_power(p, r, 1)
            checked += 1
    assert checked > 20
