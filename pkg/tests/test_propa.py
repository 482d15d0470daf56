import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from invgeom.propa import (INF, ContractionError, FinExtMetric, MetricError, Witness, analyze_contraction,
                           check_witness, ext_add, l1, random_instance, transport, transport_witness)


def delta(n):
    return [{x: 1} for x in range(n)]


def line(n, step=1):
    return FinExtMetric([[abs(i - j) * step for j in range(n)] for i in range(n)])


def test_ext_add():
    assert ext_add(1, 2) == 3
    assert ext_add(INF, 2) == INF and ext_add(0, INF) == INF


def test_metric_validation():
    with pytest.raises(MetricError):
        FinExtMetric([[0, 1], [2, 0]])          # asymmetric
    with pytest.raises(MetricError):
        FinExtMetric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])   # triangle
    with pytest.raises(MetricError):
        FinExtMetric([[0, 0], [0, 0]])          # distinct points at distance 0
    with pytest.raises(MetricError):
        FinExtMetric([[0, 1, None], [1, 0, 1], [None, 1, 0]])  # inf inside a component
    m = FinExtMetric([[0, 1, None], [1, 0, None], [None, None, 0]])
    assert m.components() == [[0, 1], [2]]
    assert m.ball(0, 5) == [0, 1]
    assert m.min_positive() == 1


def test_metric_json_round_trip():
    m = FinExtMetric([[0, Fraction(1, 2), None], [Fraction(1, 2), 0, None], [None, None, 0]])
    back = FinExtMetric.from_json(m.to_json())
    assert back.d == m.d
    assert back.to_json() == m.to_json()


def test_delta_passes_below_min_distance():
    m = line(4, 3)
    assert check_witness(m, Witness(delta(4), 0, 2, 0)).ok


def test_delta_two_points_violation():
    rep = check_witness(line(2), Witness(delta(2), 1, 1, 0))
    assert not rep.ok
    assert rep.violations == [("variation", 0, 1, 2)]
    assert rep.max_variation == 2


def test_uniform_passes():
    n = 5
    u = [{q: Fraction(1, n) for q in range(n)} for _ in range(n)]
    assert check_witness(line(n), Witness(u, 0, 10, 4)).ok
    assert not check_witness(line(n), Witness(u, 0, 10, 3)).ok   # support leaks out of B(x, 3)


def test_check_reports_each_condition():
    m = line(3)
    xi = [{0: 0.5}, {1: 1.5, 0: -0.5}, {2: 1}]
    kinds = {v[0] for v in check_witness(m, Witness(xi, 5, 1, 1)).violations}
    assert kinds == {"norm", "negative"}
    assert check_witness(m, Witness(delta(2), 0, 0, 0)).violations == [("size", 2, 3)]


def test_witness_json_round_trip():
    w = Witness([{0: Fraction(1, 3), 1: Fraction(2, 3)}, {1: 1.0}], Fraction(1, 2), 2, 3)
    back = Witness.from_json(w.to_json())
    assert back == w


def test_contraction_examples():
    X = line(4)
    assert analyze_contraction(X, X, range(4)).k == 1
    point = FinExtMetric([[0]])
    assert analyze_contraction(X, point, [0] * 4).k == 4
    with pytest.raises(ContractionError) as err:
        analyze_contraction(X, line(4, 2), range(4))
    assert err.value.pair == (0, 1)


def test_contraction_k_counts_per_component():
    X = FinExtMetric([[0, None, None], [None, 0, None], [None, None, 0]])
    assert analyze_contraction(X, FinExtMetric([[0]]), [0, 0, 0]).k == 1


def test_identity_transport():
    Y = line(5)
    w = Witness(delta(5), 0, 0, 0)
    cm = analyze_contraction(Y, Y, range(5))
    z = transport_witness(cm, w)
    assert z.xi == w.xi


def test_single_point_target():
    n, R = 4, 2
    X = FinExtMetric([[0 if i == j else R for j in range(n)] for i in range(n)])
    Y = FinExtMetric([[0]])
    cm = analyze_contraction(X, Y, [0] * n)
    t = transport(cm, Witness([{0: 1}], 0, R, 0))
    assert t.c == 1
    assert t.witness.S == n * R
    assert [c.members for c in t.classes] == [list(range(n))]
    assert t.witness.xi == [{0: 1.0}] * n
    rep = check_witness(X, t.witness)
    assert rep.ok and rep.max_variation == 0


def test_transport_rejects_bad_witness():
    Y = line(2)
    cm = analyze_contraction(Y, Y, [0, 1])
    with pytest.raises(ValueError):
        transport(cm, Witness(delta(2), 1, 1, 0))


def check_transport_properties(X, Y, f, wY, exact):
    cm = analyze_contraction(X, Y, f)
    t = transport(cm, wY, exact=exact)
    z = t.witness
    assert z.S == cm.k * t.c * wY.R
    for x, vec in enumerate(z.xi):
        total = sum(vec.values())
        if exact:
            assert total == 1
        else:
            assert abs(total - 1) <= 1e-9
        assert all(X.d[x][q] <= z.S for q in vec)
    for x in range(X.n):
        for y in range(x + 1, X.n):
            if X.d[x][y] <= wY.R:
                assert l1(z.xi[x], z.xi[y]) <= l1(wY.xi[f[x]], wY.xi[f[y]]) + (0 if exact else 1e-9)
    for c in t.classes:
        assert c.diameter <= c.bound <= z.S or c.diameter == 0
        if len(c.members) > 1:
            assert c.diameter < c.bound
    assert check_witness(X, z).ok


@pytest.mark.parametrize("seed", range(20))
def test_random_transport_exact(seed):
    X, Y, f, wY = random_instance(random.Random(seed), exact=True)
    check_transport_properties(X, Y, f, wY, True)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_transport_float(seed):
    X, Y, f, wY = random_instance(random.Random(seed))
    check_transport_properties(X, Y, f, wY, False)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_random_instance_shape(seed):
    X, Y, f, wY = random_instance(random.Random(seed))
    assert 1 <= Y.n <= 12 and 1 <= X.n <= 30
    assert analyze_contraction(X, Y, f).k <= 3
    finite = [v for row in X.d for v in row if v != INF]
    assert all(float(v).is_integer() and v <= 10 for v in finite)
    assert check_witness(Y, wY).ok
    assert not math.isnan(float(wY.eps))
