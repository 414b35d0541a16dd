import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hamexpr import analysis as an
from hamexpr import hamiltonians as hm
from hamexpr.analysis import AnalysisError

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=4, max_size=30))
def test_coefficients_match_definitions(pairs):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    if len(set(x)) < 2 or len(set(y)) < 2:
        with pytest.raises(AnalysisError):
            an.kendall_tau(x, y)
        return
    sx = np.std(x)
    sy = np.std(y)
    if sx > 1e-6 * max(1.0, np.max(np.abs(x))) and sy > 1e-6 * max(1.0, np.max(np.abs(y))):
        assert math.isclose(an.pearson(x, y), oracles.pearson(x, y), abs_tol=1e-9)
    assert math.isclose(an.spearman(x, y), oracles.spearman(x, y), abs_tol=1e-12)
    assert math.isclose(an.kendall_tau(x, y), oracles.kendall_tau_b(x, y), abs_tol=1e-12)


def test_perfect_monotone():
    x = np.arange(12.0)
    assert an.pearson(x, 2 * x + 1) == 1.0
    assert an.spearman(x, np.exp(x)) == pytest.approx(1.0)
    assert an.kendall_tau(x, -x**3) == pytest.approx(-1.0)


def test_input_validation():
    with pytest.raises(AnalysisError):
        an.pearson([1, 2], [1, 2])
    with pytest.raises(AnalysisError):
        an.pearson([1, 2, 3], [1, 2])
    with pytest.raises(AnalysisError):
        an.pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(AnalysisError):
        an.mutual_information(range(5), range(5))
    with pytest.raises(AnalysisError):
        an.PairedSeries([1, 2, np.nan], [1, 2, 3])


def test_mutual_information_oracles(rng):
    # independent uniform blocks give zero; a deterministic 2-level map gives log 2
    x = np.repeat([0.0, 1.0], 50)
    assert math.isclose(an.mutual_information(x, x, bins=2), math.log(2))
    assert math.isclose(an.mutual_information(x, np.tile([0.0, 1.0], 50), bins=2), 0.0, abs_tol=1e-12)
    assert an.default_bins(100) == 5 and an.default_bins(1) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(10, 80))
def test_mutual_information_symmetric_nonnegative(seed, n):
    r = np.random.default_rng(seed)
    x = r.standard_normal(n)
    y = x + r.standard_normal(n)
    a = an.mutual_information(x, y)
    assert a >= 0
    assert math.isclose(a, an.mutual_information(y, x), rel_tol=1e-12, abs_tol=1e-15)


def test_correlation_report_small_series():
    rep = an.correlation_report([1.0, 2.0, 3.0, 5.0], [2.0, 1.0, 4.0, 3.0])
    assert math.isnan(rep.mutual_info) and rep.n == 4


def test_aggregate_by_class():
    h_basis = hm.heisenberg_xxz(4, 1.0, -10.0)
    h_sup = hm.heisenberg_xxz(4, 1.0, 0.0)
    mc = hm.maxcut(hm.Graph.from_edges(4, [(0, 1)]))
    rep = lambda v, mi=0.5: an.CorrelationReport(v, v, v, mi, 10, 2)
    aggs = an.aggregate_by_class([(mc, rep(0.2)), (h_sup, rep(-0.8)), (mc, rep(0.4, float("nan"))), (h_basis, rep(0.1))])
    by = {a.subclass: a for a in aggs}
    assert [a.subclass for a in aggs] == ["MaxCut", "HeisenbergXXZ:Superposition", "HeisenbergXXZ:BasisState"]
    assert by["MaxCut"].n_instances == 2
    assert math.isclose(by["MaxCut"].means["pearson"], 0.3)
    assert math.isclose(by["MaxCut"].stds["pearson"], 0.1)
    assert by["MaxCut"].means["mutual_info"] == 0.5  # NaN entries are skipped
    assert by["HeisenbergXXZ:Superposition"].problem_class == "HeisenbergXXZ"
    with pytest.raises(AnalysisError):
        an.aggregate_by_class([])


def test_noise_sweep_ordering():
    series = lambda i: (np.arange(12.0), np.arange(12.0) * (i + 1))
    pts = an.noise_sweep([("a", 0.0), ("b", 1e-3)], series)
    assert [p.label for p in pts] == ["a", "b"] and pts[1].report.spearman == pytest.approx(1.0)
    with pytest.raises(AnalysisError):
        an.noise_sweep([("a", 1e-3), ("b", 0.0)], series)


def test_bell_shape_interior():
    x = [0.1, 0.2, 0.3, 0.4]
    assert an.bell_shape_interior(x, [0.5, 0.9, 0.6, 0.4])
    assert not an.bell_shape_interior(x, [0.9, 0.5, 0.6, 0.4])
    assert not an.bell_shape_interior(x, [0.1, 0.5, 0.6, 0.7])
