import random
from fractions import Fraction

import pytest

from invgeom.grouporacle import (BSOracle, FreeGroupOracle, IdentityOracle, OracleUnknownError, bs_oracle,
                                 bs_reduction_rules, cayley_ball, eliminate_generator_oracle, format_rules,
                                 free_group_oracle, free_product_oracle, parse_rules, rewriting_oracle,
                                 scary_oracle)
from invgeom.presentation import GroupPresentation, fixture_onerelator_scary, group_image
from invgeom.tribool import Confirmed, Refuted, Unknown
from invgeom.words import Alphabet, free_reduce, invert

AB = Alphabet("ab")


def rand_word(rng, rank, max_len):
    return tuple(rng.randrange(2 * rank) for _ in range(rng.randint(0, max_len)))


def test_free_group_examples():
    o = free_group_oracle(2)
    assert o.is_identity(AB.parse("a a^-1")) is Confirmed
    assert o.is_identity(AB.parse("a b")) is Refuted
    assert o.normal_form(AB.parse("a b b^-1")) == AB.parse("a")
    assert free_group_oracle(0).is_identity(()) is Confirmed
    with pytest.raises(ValueError):
        free_group_oracle(-1)


def test_free_product_examples():
    o = free_product_oracle(free_group_oracle(["a"]), free_group_oracle(["t"]))
    a = o.alphabet
    assert o.is_identity(a.parse("a t t^-1 a^-1")) is Confirmed
    assert o.normal_form(a.parse("t a t^-1")) == a.parse("t a t^-1")
    assert o.normal_form(a.parse("a t a^-1 a t^-1")) == a.parse("a")
    with pytest.raises(ValueError):
        free_product_oracle(free_group_oracle(["a"]), free_group_oracle(["a"]))


def test_free_product_of_free_groups_is_free():
    fp = free_product_oracle(free_group_oracle(["a", "b"]), free_group_oracle(["c"]))
    fg = free_group_oracle(3)
    rng = random.Random(0)
    for _ in range(1000):
        w = rand_word(rng, 3, 12)
        assert fp.normal_form(w) == fg.normal_form(w)
        assert fp.is_identity(w) is fg.is_identity(w)


def bs_matrix(n, w):
    """2x2 rational matrices: a = [[1,1],[0,1]], b = [[1/n,0],[0,1]]."""
    a = ((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1)))
    ai = ((Fraction(1), Fraction(-1)), (Fraction(0), Fraction(1)))
    b = ((Fraction(1, n), Fraction(0)), (Fraction(0), Fraction(1)))
    bi = ((Fraction(n), Fraction(0)), (Fraction(0), Fraction(1)))
    gens = [a, ai, b, bi]
    m = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    for x in w:
        g = gens[x]
        m = tuple(tuple(sum(m[i][k] * g[k][j] for k in range(2)) for j in range(2)) for i in range(2))
    return m


def image(n, w):
    """Faithful image: affine matrices for n > 1, exponent sums in Z^2 for n = 1."""
    if n == 1:
        return tuple(sum(1 if x == 2 * g else -1 if x == 2 * g + 1 else 0 for x in w) for g in (0, 1))
    return bs_matrix(n, w)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bs_relator_is_identity(n):
    o = bs_oracle(n)
    assert o.is_identity(AB.parse(f"a b a^-{n} b^-1")) is Confirmed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bs_oracle_agrees_with_matrices(n):
    o = bs_oracle(n)
    rng = random.Random(n)
    for _ in range(1000):
        w = rand_word(rng, 2, 12)
        assert (o.is_identity(w) is Confirmed) == (image(n, w) == image(n, ()))
        nf = o.normal_form(w)
        assert image(n, nf) == image(n, w)
        assert o.normal_form(nf) == nf


def test_bs_normal_form_shape():
    o = bs_oracle(2)
    assert o.normal_form(AB.parse("a b")) == AB.parse("b a a")
    assert o.normal_form(AB.parse("b a a b^-1")) == AB.parse("a")
    assert o.normal_form(AB.parse("b a b^-1")) == AB.parse("b a b^-1")
    with pytest.raises(ValueError):
        BSOracle(0)


def test_rewriting_examples():
    rules = bs_reduction_rules(2)
    o = rewriting_oracle(AB, rules, confluent_terminating=True)
    assert o.is_identity(AB.parse("a^-1 b a a b^-1")) is Confirmed
    assert o.is_identity(AB.parse("b")) is Refuted
    loop = rewriting_oracle(AB, [(AB.parse("a"), AB.parse("a a"))], step_budget=50)
    assert loop.is_identity(AB.parse("a")) is Unknown
    assert loop.normal_form(AB.parse("a")) is None


def test_rewriting_without_flag_never_refutes():
    o = rewriting_oracle(AB, bs_reduction_rules(2))
    assert o.is_identity(AB.parse("b")) is Unknown
    assert o.is_identity(AB.parse("a^-1 b a a b^-1")) is Confirmed
    assert not o.has_normal_form
    with pytest.raises(ValueError):
        cayley_ball(o, 1)


def test_bs_reductions_are_not_canonical():
    # a nonempty fixpoint representing the identity
    o = rewriting_oracle(AB, bs_reduction_rules(2))
    w = AB.parse("a b a^-2 b^-1")
    assert o.rewrite(w) == w


def test_rules_file_roundtrip():
    text = "gens: a b ;\n# comment\nrule: a^-1 b -> b a^-1 a^-1 ;\nrule: b^-1 a -> a a b^-1 ;\nconfluent_terminating\n"
    alpha, rules, confluent = parse_rules(text)
    assert alpha == AB and confluent and rules == bs_reduction_rules(2)
    assert parse_rules(format_rules(alpha, rules, confluent)) == (alpha, rules, confluent)
    with pytest.raises(ValueError):
        parse_rules("rule: a -> b ;")
    with pytest.raises(ValueError):
        parse_rules("gens: a ;\nrule a -> 1 ;")


def test_identity_only_oracle():
    o = IdentityOracle(AB, lambda w: Confirmed if not free_reduce(w) else Unknown)
    assert o.is_identity(AB.parse("a a^-1")) is Confirmed
    with pytest.raises(ValueError):
        cayley_ball(o, 1)


def test_scary_oracle_identification():
    o = scary_oracle()
    a = o.alphabet
    assert o.is_identity(group_image(fixture_onerelator_scary()).relators[0]) is Confirmed
    assert o.is_identity(a.parse("b c b^-1 a d^-1 a^-1")) is Confirmed
    assert o.normal_form(a.parse("a d^-1 a^-1")) == a.parse("b c^-1 b^-1")
    assert o.normal_form(a.parse("b c^-2")) == a.parse("b c^-1 b^-1 b c^-1 b^-1 b")
    fg3 = free_group_oracle(["a", "b", "u"])
    rng = random.Random(4)
    for _ in range(1000):
        w = rand_word(rng, 4, 12)
        nf = o.normal_form(w)
        assert o.normal_form(nf) == nf
        assert o.is_identity(w) is fg3.is_identity(o.to_base(w))


def test_eliminate_generator():
    g = group_image(fixture_onerelator_scary())
    o = eliminate_generator_oracle(g)
    ref = scary_oracle()
    rng = random.Random(5)
    for _ in range(500):
        w = rand_word(rng, 4, 10)
        assert o.is_identity(w) is ref.is_identity(w)
    assert eliminate_generator_oracle(GroupPresentation(("a",), ((0, 0),))) is None


@pytest.mark.parametrize("make", [lambda: free_group_oracle(2), lambda: bs_oracle(2), lambda: bs_oracle(3),
                                  scary_oracle,
                                  lambda: free_product_oracle(bs_oracle(2), free_group_oracle(["t"]))])
def test_normal_form_idempotent_and_consistent(make):
    o = make()
    rng = random.Random(9)
    for _ in range(1000):
        w = rand_word(rng, len(o.alphabet), 10)
        nf = o.normal_form(w)
        assert o.normal_form(nf) == nf
        assert (o.is_identity(w) is Confirmed) == (o.is_identity(nf) is Confirmed)
        assert o.equal(w, nf) is Confirmed


def test_ball_sizes_free():
    assert len(cayley_ball(free_group_oracle(1), 2)) == 5
    assert [len(cayley_ball(free_group_oracle(2), r)) for r in range(4)] == [1, 5, 17, 53]
    assert len(cayley_ball(free_group_oracle(["a", "b", "u"]), 1)) == 7
    # sphere recursion |S(k)| = 2m (2m-1)^(k-1) for rank m
    for m in (1, 2, 3):
        for r in range(4):
            expected = 1 + sum(2 * m * (2 * m - 1) ** (k - 1) for k in range(1, r + 1))
            assert len(cayley_ball(free_group_oracle(m), r)) == expected


def test_ball_properties():
    for o in (free_group_oracle(2), bs_oracle(2), scary_oracle()):
        prev = None
        for r in range(4):
            ball = cayley_ball(o, r)
            assert ball.graph.is_deterministic()
            assert len(set(ball.forms)) == len(ball.forms)
            if prev is not None:
                assert set(prev.forms) <= set(ball.forms)
            adj = ball.graph.adjacency()
            for v, g in enumerate(ball.forms):
                for x, t in adj[v].items():
                    assert o.normal_form(g + (x,)) == ball.forms[t]
            prev = ball


def test_ball_distance_matches_length():
    o = bs_oracle(2)
    ball = o.ball(4)
    assert ball.length(AB.parse("b a a b^-1")) == 1
    assert o.length(AB.parse("a b a^-1 a^-1 b^-1")) == 0
    assert ball.distance(AB.parse("b"), AB.parse("b a")) == 1


def test_ball_aborts_on_unknown():
    loop = rewriting_oracle(AB, [(AB.parse("a"), AB.parse("a a"))], step_budget=5, confluent_terminating=True)
    with pytest.raises(OracleUnknownError):
        cayley_ball(loop, 1)
