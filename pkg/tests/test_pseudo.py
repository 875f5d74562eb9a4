import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relsz.hypergraph import WeightedHypergraph
from relsz.oracles import lfc_value_loops, lfc_values_grid_all, strong_lfc_loops
from relsz.pseudo import (
    NU,
    NU_MINUS_ONE,
    ONE,
    LfcPattern,
    MixedFactorAssignment,
    PreconditionError,
    all_mixed_values,
    assignment_from_index,
    lfc_delta,
    lfc_delta_point_sampled,
    lfc_value_arithmetic,
    lfc_value_hypergraph,
    lfc_values_all,
    mixed_blowup_average,
    mixed_expansion,
    n_slots,
    strong_lfc_bound,
    strong_lfc_lhs,
    uniformity_from_lfc,
)
from relsz.norms import gowers_norm
from relsz.suites import seeded_masked, seeded_nu
from relsz.zcore import DensityFunction


def test_pattern_round_trip():
    p = LfcPattern.from_int(3, 0b101100111010)
    assert LfcPattern.from_int(3, p.to_int()) == p
    assert len(p.bitstring()) == 12
    assert LfcPattern.all_ones(3).to_int() == (1 << 12) - 1
    assert LfcPattern.single(3, 1, 2).to_int() == 1 << (1 * 4 + 2)
    with pytest.raises(ValueError):
        LfcPattern(3, np.ones((2, 4), dtype=bool))


def test_constant_weight_gives_one():
    nu = DensityFunction.constant(4)
    for p in (0, 1, 77, 4095):
        assert lfc_value_arithmetic(nu, 3, LfcPattern.from_int(3, p)) == pytest.approx(1.0)
    rep = lfc_delta(nu, 3)
    assert rep.delta == pytest.approx(0.0, abs=1e-15) and rep.method == "exhaustive"
    assert rep.certified


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2 ** 32 - 1), st.integers(0, 15))
def test_k2_patterns_factorise(N, seed, p):
    nu = DensityFunction.random(N, np.random.default_rng(seed))
    assert lfc_value_arithmetic(nu, 2, LfcPattern.from_int(2, p)) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_all_ones_matches_nested_loops(seed):
    nu = seeded_nu(5, seed)
    ex = np.ones((3, 4), dtype=bool)
    got = lfc_value_arithmetic(nu, 3, LfcPattern.all_ones(3))
    assert got == pytest.approx(lfc_value_loops(nu.values, 3, ex), rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1), st.integers(0, 4095))
def test_single_patterns_match_nested_loops(N, seed, p):
    nu = seeded_nu(N, seed)
    bits = np.array([(p >> f) & 1 for f in range(12)], dtype=bool).reshape(3, 4)
    got = lfc_value_arithmetic(nu, 3, LfcPattern.from_int(3, p))
    assert got == pytest.approx(lfc_value_loops(nu.values, 3, bits), rel=1e-9)


def test_delta_is_max_over_grid_oracle():
    nu = seeded_nu(5, 11)
    want = lfc_values_grid_all(nu.values, 3)
    got = lfc_values_all(nu, 3)
    assert np.allclose(got, want, rtol=1e-9, atol=0)
    assert lfc_delta(nu, 3).delta == pytest.approx(np.abs(want - 1).max(), rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.floats(0.0, 0.5), st.integers(0, 2 ** 32 - 1))
def test_delta_at_least_mean_shift(N, eta, seed):
    nu = DensityFunction(seeded_nu(N, seed).values * (1 + eta))
    rep = lfc_delta(nu, 3)
    assert rep.delta >= eta - 1e-12
    single = lfc_value_arithmetic(nu, 3, LfcPattern.single(3, 0, 0))
    assert abs(single - 1) == pytest.approx(eta, abs=1e-12)


def test_hypergraph_single_pattern_is_slice_mean():
    g = WeightedHypergraph.random(3, 3, np.random.default_rng(0))
    for j in range(3):
        for w in range(4):
            assert lfc_value_hypergraph(g, LfcPattern.single(3, j, w)) == pytest.approx(g.slices[j].mean())


def test_sampled_delta_is_lower_bound():
    nu = seeded_nu(4, 3)
    full = lfc_delta(nu, 3)
    part = lfc_delta(nu, 3, samples=40, seed=1, exhaustive=False)
    assert part.method == "sampled" and not part.certified
    assert part.delta <= full.delta + 1e-15


def test_sampled_k4_runs():
    rep = lfc_delta(seeded_nu(3, 0), 4, samples=8, seed=0)
    assert rep.method == "sampled"
    assert rep.to_json()["worst_pattern"].count("1") + rep.to_json()["worst_pattern"].count("0") == n_slots(4)


def test_point_sampled_estimate():
    nu = seeded_nu(5, 2, spread=0.2)
    exact = lfc_values_all(nu, 3)
    rep = lfc_delta_point_sampled(nu, 3, points=40000, seed=0)
    assert rep.method == "point_sampled" and not rep.certified
    assert abs(rep.delta - np.abs(exact - 1).max()) < 0.05
    again = lfc_delta_point_sampled(nu, 3, points=40000, seed=0)
    assert again.delta == rep.delta
    ones = lfc_delta_point_sampled(DensityFunction.constant(7), 3, points=100, seed=0)
    assert ones.delta == 0.0


def test_mixed_examples():
    nu = seeded_nu(5, 4)
    g = WeightedHypergraph.from_arithmetic(nu, 3)
    delta = lfc_delta(g).delta
    all_nu = MixedFactorAssignment(3, np.full((3, 4), NU))
    assert abs(mixed_blowup_average(g, all_nu) - 1) <= delta + 1e-12
    codes = np.full((3, 4), ONE)
    codes[0, 1] = codes[2, 3] = NU_MINUS_ONE
    a = MixedFactorAssignment(3, codes)
    assert a.K == 2
    val = mixed_blowup_average(g, a)
    assert abs(val) <= 4 * delta + 1e-12
    assert val == pytest.approx(mixed_expansion(g, a), rel=1e-9, abs=1e-14)
    assert mixed_blowup_average(WeightedHypergraph.ones(3, 5), a) == 0.0


def test_mixed_transform_matches_direct():
    nu = seeded_nu(4, 8)
    g = WeightedHypergraph.from_arithmetic(nu, 3)
    vals = lfc_values_all(g)
    S, K = all_mixed_values(vals, 3)
    rng = np.random.default_rng(0)
    for idx in rng.integers(0, 3 ** 12, size=25):
        a = assignment_from_index(3, int(idx))
        assert K[idx] == a.K
        assert S[idx] == pytest.approx(mixed_blowup_average(g, a), rel=1e-9, abs=1e-13)


def _choice(c):
    return np.array([[(c >> (2 * t + e)) & 1 for e in range(2)] for t in range(2)], dtype=bool)


def test_strong_lfc_trivial_cases():
    nu1 = WeightedHypergraph.ones(3, 4)
    rng = np.random.default_rng(0)
    g = WeightedHypergraph.random(3, 4, rng)
    gt = WeightedHypergraph.random(3, 4, rng)
    for c in range(16):
        assert strong_lfc_lhs(nu1, g, gt, _choice(c)).value == 0.0
    nu, _, gt = seeded_masked(4, 1)
    zero = nu.map(np.zeros_like)
    assert strong_lfc_lhs(nu, zero, gt, _choice(0)).value == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_strong_lfc_matches_loops_and_bound(seed):
    nu, g, gt = seeded_masked(5, seed)
    delta = lfc_delta(nu).delta
    for c in (0, 5, 10, 15):
        res = strong_lfc_lhs(nu, g, gt, _choice(c))
        want = strong_lfc_loops(nu.slices, g.slices, gt.slices, _choice(c))
        assert res.value == pytest.approx(want, rel=1e-9, abs=1e-14)
        assert abs(res.value) <= strong_lfc_bound(delta, 3) + 1e-12
        assert all(res.step_checks(delta).values())


def test_strong_lfc_part_relabels():
    nu, g, gt = seeded_masked(4, 7)
    order = [1, 2, 0]  # part 0 becomes the last part
    res = strong_lfc_lhs(nu, g, gt, _choice(6), part=0)
    want = strong_lfc_loops(nu.relabel(order).slices, g.relabel(order).slices, gt.relabel(order).slices,
                            _choice(6))
    assert res.value == pytest.approx(want, rel=1e-9, abs=1e-14)


def test_strong_lfc_validates_domination():
    nu, g, gt = seeded_masked(3, 0)
    bad = g.map(lambda s: s + 5.0)
    with pytest.raises(PreconditionError, match="exceeds its majorant"):
        strong_lfc_lhs(nu, bad, gt, _choice(0))
    with pytest.raises(PreconditionError, match="gtilde"):
        strong_lfc_lhs(nu, g, gt.map(lambda s: s + 2.0), _choice(0))


def test_uniformity_examples():
    u = uniformity_from_lfc(DensityFunction.constant(4), 3)
    assert (u.u_norm, u.bound, u.satisfied) == (0.0, 0.0, True)
    nu = seeded_nu(5, 9)
    g = WeightedHypergraph.from_arithmetic(nu, 3)
    u = uniformity_from_lfc(g)
    assert u.satisfied and u.cut_satisfied and u.slack >= 0
    # the U^2 power of slice j - 1 is the mixed average with slot row j set to nu - 1
    for j in range(3):
        codes = np.full((3, 4), ONE)
        codes[j] = NU_MINUS_ONE
        direct = mixed_blowup_average(g, MixedFactorAssignment(3, codes))
        assert gowers_norm(g.slices[j] - 1).power == pytest.approx(direct, rel=1e-9, abs=1e-15)
