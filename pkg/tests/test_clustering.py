
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from clustercert import (
    AlignmentError,
    ClusterCertError,
    ClusterQuery,
    Cube,
    FractionalParams,
    FunctionSpec,
    GridFunction,
    GridSpec,
    SearchInfeasibleError,
    check_hypothesis_a,
    check_hypothesis_b,
    classify_partition,
    cluster_search,
    eta_lower_bound,
    gagliardo,
    k_star,
    restrict,
    sample,
    subcube,
    superlevel_measure,
)
from clustercert.clustering import depth_bound_terms, partition_csv, search_depths

from conftest import halfspace

HALF = FractionalParams(0.5, 2.0)


def const(m, value, dim=2, side=1.0):
    return GridFunction(GridSpec(Cube((0.0,) * dim, side), m), np.full(m**dim, float(value)))


def query(c=1.0, alpha=0.5, gamma=1.0, delta=0.5, lam=0.5, params=HALF):
    return ClusterQuery(c, alpha, gamma, delta, lam, params)


def test_query_validation():
    for bad in [dict(c=0.0), dict(alpha=1.0), dict(gamma=-1.0), dict(delta=0.0), dict(lam=1.0)]:
        with pytest.raises(ClusterCertError):
            query(**bad)


def test_superlevel_measure_examples():
    assert superlevel_measure(const(4, 2.0), 1.0) == 1.0
    assert superlevel_measure(const(4, 1.0), 1.0) == 0.0
    assert superlevel_measure(halfspace(6, high=2.0), 1.0) == pytest.approx(0.5, rel=1e-15)
    # measure carries the cube volume
    assert superlevel_measure(const(3, 2.0, side=2.0), 1.0) == pytest.approx(4.0)


def test_hypothesis_a_examples():
    assert check_hypothesis_a(const(4, 2.0), 1.0, 0.99) == (True, 1.0)
    assert check_hypothesis_a(const(4, 0.0), 0.3, 0.2) == (False, 0.0)
    assert check_hypothesis_a(halfspace(8), 1.0, 0.4) == (True, 0.5)
    # strict inequality at the boundary
    assert check_hypothesis_a(halfspace(8), 1.0, 0.5) == (False, 0.5)


def test_hypothesis_b_examples():
    ok, g = check_hypothesis_b(const(4, 2.0), query(gamma=1e-9))
    assert ok and g == 0.0
    u = sample(FunctionSpec("bump", {"width": 0.2, "height": 2.0}), GridSpec(Cube.unit(2), 48))
    ok, g = check_hypothesis_b(u, query(c=1.0, gamma=100.0))
    assert g == pytest.approx(gagliardo(u, HALF), rel=1e-15)
    assert check_hypothesis_b(u, query(gamma=g))[0] is True
    assert check_hypothesis_b(u, query(gamma=g * (1 - 1e-12)))[0] is False


def test_hypothesis_b_scaling_factor():
    u = sample(FunctionSpec("bump", {"width": 0.4}), GridSpec(Cube.unit(2), 12))
    v = u.rehost(Cube((0.0, 0.0), 3.0))
    params = FractionalParams(0.25, 1.0)
    _, g = check_hypothesis_b(v, query(c=2.0, params=params))
    assert g == pytest.approx(gagliardo(v, params) / (2.0 * 3.0 ** (2 - 0.25)), rel=1e-14)


def test_classify_examples():
    rep = classify_partition(const(4, 2.0), 1.0, 0.5, 2)
    assert rep.plus_count == 4 and rep.clu1_holds and rep.clu1_rhs == pytest.approx(4 / 3)
    rep = classify_partition(halfspace(4), 1.0, 0.4, 2)
    assert rep.plus_indices == [(1, 0), (1, 1)]
    assert rep.clu1_lhs == 2 and rep.clu1_rhs == pytest.approx(1.0) and rep.clu1_holds
    rep = classify_partition(const(4, 0.0), 1.0, 0.5, 2)
    assert rep.plus_count == 0 and not rep.clu1_holds
    with pytest.raises(AlignmentError):
        classify_partition(const(4, 0.0), 1.0, 0.5, 3)


def test_classify_threshold_is_inclusive():
    # one cell of four above c in each block: exactly alpha/2 with alpha = 1/2
    vals = np.zeros((4, 4))
    vals[::2, ::2] = 2.0
    u = GridFunction(GridSpec(Cube.unit(2), 4), vals)
    assert classify_partition(u, 1.0, 0.5, 2).plus_count == 4
    assert classify_partition(u, 1.0, 0.5000001, 2).plus_count == 0


def test_k_star_worked_example():
    q = query(alpha=0.5, lam=0.5, delta=0.5, gamma=1.0)
    b = 16 * 1.5 * 2**1.5 / (0.125 * 0.25 * 0.5)
    terms = depth_bound_terms(q, 2)
    assert terms["B"] == pytest.approx(b, rel=1e-14)
    assert b == pytest.approx(4344.46, abs=5e-3)
    assert k_star(q, 2) == 4345
    assert eta_lower_bound(q, 2) == pytest.approx(1 / 4345)


def test_k_star_monotone_and_clamped():
    base = query(gamma=1.0)
    half = query(gamma=0.5)
    assert depth_bound_terms(half, 2)["B"] == pytest.approx(depth_bound_terms(base, 2)["B"] / 4)
    assert k_star(half, 2) < k_star(base, 2)
    tiny = query(gamma=1e-3)
    assert depth_bound_terms(tiny, 2)["B"] < 2 ** (HALF.p * HALF.s)
    assert k_star(tiny, 2) == 2


def test_k_star_is_first_violating_depth():
    for gamma in (0.3, 1.0, 2.7):
        for params in (FractionalParams(0.3, 1.0), FractionalParams(0.5, 2.0), FractionalParams(0.9, 1.5)):
            q = query(gamma=gamma, params=params)
            b = depth_bound_terms(q, 3)["B"]
            ks = k_star(q, 3)
            ps = params.p * params.s
            assert ks**ps > b
            assert ks == 2 or (ks - 1) ** ps <= b


def test_k_star_huge():
    q = query(gamma=1e6, params=FractionalParams(0.01, 1.0))
    ks = k_star(q, 2)
    assert isinstance(ks, int) and ks > 10**300


def test_search_constant():
    u = const(8, 2.0)
    cert = cluster_search(u, query(gamma=0.1))
    assert cert.found and cert.k == 2 and cert.index == (0, 0) and cert.fraction == 1.0
    assert cert.eta == 0.5
    assert cert.x1 == subcube(u.cube, 2, (0, 0)).center == (-0.25, -0.25)
    assert cert.gamma_measured == 0.0 and cert.hypothesis_b


def test_search_halfspace():
    u = halfspace(8)
    cert = cluster_search(u, query(alpha=0.4, lam=0.5, delta=0.25, gamma=50.0))
    assert cert.found and cert.k == 2 and cert.index == (1, 0) and cert.fraction == 1.0
    assert cert.x1[0] > 0


def test_search_zero_function_exhausts():
    u = const(12, 0.0)
    cert = cluster_search(u, query(gamma=1.0))
    assert not cert.found
    assert not cert.hypothesis_a and cert.alpha_measured == 0.0
    assert cert.checked_ks == [2, 3, 4, 6, 12]
    assert set(cert.plus_counts.values()) == {0}
    assert cert.skipped_ks == [5, 7, 8, 9, 10, 11]


def test_search_infeasible():
    with pytest.raises(SearchInfeasibleError):
        cluster_search(const(7, 2.0), query(gamma=0.01))
    # k* = 2 and m odd
    with pytest.raises(SearchInfeasibleError):
        cluster_search(const(9, 2.0), query(gamma=1e-3))
    assert search_depths(9, 2) == ([], [2])


def test_search_prefers_coarsest_then_lexicographic():
    # only the top-right 1/3 x 1/3 block (k=3) is above lambda*c
    vals = np.zeros((6, 6))
    vals[4:, 4:] = 3.0
    u = GridFunction(GridSpec(Cube.unit(2), 6), vals)
    cert = cluster_search(u, query(alpha=0.1, gamma=100.0, delta=0.1))
    assert cert.found and cert.k == 3 and cert.index == (2, 2)
    assert cert.checked_ks == [2, 3]
    assert cert.plus_counts[2] == 1


def test_partition_csv_rows():
    u = halfspace(4)
    q = query(alpha=0.4, gamma=50.0)
    reports = []
    cluster_search(u, q, collect_reports=reports)
    text = partition_csv(u, q, reports)
    lines = text.strip().splitlines()
    assert lines[0] == "k,index,count_c,count_lambda_c,cells,class"
    assert lines[1:] == ["2,0:0,0,0,4,-", "2,0:1,0,0,4,-", "2,1:0,4,4,4,+", "2,1:1,4,4,4,+"]


# ---------------------------------------------------------------------------
# properties

arrays = st.tuples(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4, 6, 12]))


@settings(max_examples=300, deadline=None)
@given(arr=arrays, c=st.floats(-1.5, 1.5), alpha=st.floats(1e-6, 1 - 1e-6))
def test_counting_bound(arr, c, alpha):
    seed, k = arr
    u = GridFunction(GridSpec(Cube.unit(2), 12), np.random.default_rng(seed).standard_normal(144))
    ok, _ = check_hypothesis_a(u, c, alpha)
    rep = classify_partition(u, c, alpha, k)
    assert rep.plus_count == len(rep.plus_indices) <= k * k
    if ok:
        assert rep.clu1_holds


def _recount(u, cert, lam_c):
    sub = restrict(u, cert.k, cert.index)
    return np.count_nonzero(sub.values > lam_c) / sub.values.size


blobs = st.tuples(st.integers(0, 2**32 - 1), st.floats(0.05, 0.3), st.floats(0.5, 3.0))


def _blob(seed, width, height, m=24):
    rng = np.random.default_rng(seed)
    fs = FunctionSpec("bump", {"center": rng.uniform(-0.4, 0.4, 2).tolist(), "width": width, "height": height})
    return sample(fs, GridSpec(Cube.unit(2), m))


@settings(max_examples=40, deadline=None)
@given(blob=blobs, delta=st.floats(0.05, 0.9), lam=st.floats(0.05, 0.95), alpha=st.floats(0.01, 0.9))
def test_certificate_soundness_and_monotone(blob, delta, lam, alpha):
    u = _blob(*blob)
    q = query(c=0.4, alpha=alpha, gamma=1e3, delta=delta, lam=lam)
    cert = cluster_search(u, q)
    assume(cert.found)
    assert cert.fraction == _recount(u, cert, lam * 0.4)
    assert cert.fraction > 1 - delta
    assert 2 <= cert.k <= cert.k_star and cert.eta == 1 / cert.k
    relaxed = query(c=0.4, alpha=alpha, gamma=1e3, delta=min(0.99, delta * 1.5), lam=lam * 0.5)
    if cert.k <= k_star(relaxed, 2):
        again = cluster_search(u, relaxed)
        assert again.found and again.k <= cert.k


@settings(max_examples=25, deadline=None)
@given(blob=blobs, t=st.sampled_from([0.1, 2.0, 7.5, 1e3]))
def test_scale_equivariance(blob, t):
    u = _blob(*blob)
    q = query(c=0.4, alpha=0.05, gamma=1e3)
    a = cluster_search(u, q)
    b = cluster_search(u.scaled(t), query(c=0.4 * t, alpha=0.05, gamma=1e3))
    assert (a.found, a.k, a.index, a.fraction) == (b.found, b.k, b.index, b.fraction)
    assert b.gamma_measured == pytest.approx(a.gamma_measured, rel=1e-12)
