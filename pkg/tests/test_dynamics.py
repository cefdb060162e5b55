import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrtax.dynamics import (
    HalfLifeEstimate,
    SurvivalCurve,
    WindowPlan,
    edge_survival,
    fit_through_origin,
    half_life_scaling,
    mean_half_life,
    rolling_trees,
    scaling_plot_data,
    scaling_to_csv,
    scaling_to_json,
    survival_to_csv,
    tree_half_life,
)
from corrtax.errors import DynamicsError
from corrtax.panel import ReturnPanel, log_returns
from corrtax.synth import SectorConfig, generate_sector_market, weekly_dates
from corrtax.taxonomy import Edge, SpanningTree

NAMES = ("A", "B", "C", "D", "E")


def tree(*pairs):
    edges = []
    for a, b in pairs:
        i, j = sorted((NAMES.index(a), NAMES.index(b)))
        edges.append(Edge(i, j, 1.0))
    return SpanningTree(NAMES, tuple(edges))


STAR = tree(("A", "B"), ("A", "C"), ("A", "D"), ("A", "E"))
CHAIN = tree(("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"))
PATH2 = tree(("A", "B"), ("A", "C"), ("C", "D"), ("D", "E"))
# no edge in common with CHAIN
CROSS = tree(("A", "C"), ("C", "E"), ("B", "E"), ("B", "D"))


def random_returns(rows, n=5, seed=0):
    rng = np.random.default_rng(seed)
    return ReturnPanel(weekly_dates(rows), tuple(f"x{k}" for k in range(n)), rng.standard_normal((rows, n)))


class TestWindowing:
    def test_single_window(self):
        assert len(rolling_trees(random_returns(12), WindowPlan(12, 1))) == 1

    def test_window_count(self):
        assert len(rolling_trees(random_returns(10), WindowPlan(4, 2))) == 4

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=2, max_value=30), st.integers(min_value=1, max_value=7), st.data())
    def test_window_count_law(self, rows, step, data):
        width = data.draw(st.integers(min_value=2, max_value=max(2, rows)))
        if width > rows:
            return
        trees = rolling_trees(random_returns(rows, n=3), WindowPlan(width, step))
        assert len(trees) == (rows - width) // step + 1

    def test_periodic_panel_gives_identical_trees(self):
        block = np.random.default_rng(3).standard_normal((3, 5))
        returns = ReturnPanel(weekly_dates(24), tuple(f"x{k}" for k in range(5)), np.tile(block, (8, 1)))
        trees = rolling_trees(returns, WindowPlan(6, 3))
        assert len({t.edge_set() for t in trees}) == 1

    def test_zero_variance_window_is_reported(self):
        values = np.random.default_rng(0).standard_normal((10, 3))
        values[4:8, 1] = 0.25
        returns = ReturnPanel(weekly_dates(10), ("a", "b", "c"), values)
        with pytest.raises(DynamicsError, match=r"window 2 .*asset 'b'"):
            rolling_trees(returns, WindowPlan(4, 2))

    @pytest.mark.parametrize("width, step", [(1, 1), (3, 0)])
    def test_invalid_plan(self, width, step):
        with pytest.raises(DynamicsError):
            WindowPlan(width, step)

    def test_plan_too_wide(self):
        with pytest.raises(DynamicsError, match="exceeds"):
            rolling_trees(random_returns(5), WindowPlan(6, 1))


class TestSurvival:
    def test_identical(self):
        curve = edge_survival([STAR, STAR, STAR])
        assert list(curve.fraction) == [1.0, 1.0, 1.0]
        assert list(curve.lags) == [0, 1, 2]

    def test_disjoint(self):
        assert edge_survival([CHAIN, CROSS]).fraction[1] == 0.0

    def test_half_kept(self):
        # PATH2 keeps (A,B),(A,C) of STAR
        assert edge_survival([STAR, PATH2]).fraction[1] == 0.5

    def test_weights_ignored(self):
        heavier = SpanningTree(NAMES, tuple(Edge(e.i, e.j, 9.0) for e in STAR.edges))
        assert edge_survival([STAR, heavier]).fraction[1] == 1.0

    def test_origin_offset(self):
        curve = edge_survival([STAR, CHAIN, PATH2], origin=1)
        assert list(curve.fraction) == [1.0, 0.75]

    def test_origin_out_of_range(self):
        with pytest.raises(DynamicsError):
            edge_survival([STAR], origin=1)

    def test_fractions_have_denominator_n_minus_1(self):
        trees = rolling_trees(random_returns(60, n=6, seed=4), WindowPlan(10, 2))
        for origin in range(len(trees)):
            for f in edge_survival(trees, origin).fraction:
                assert Fraction(f).limit_denominator(5) * 5 == round(f * 5)

    def test_curve_validation(self):
        with pytest.raises(DynamicsError):
            SurvivalCurve([0, 1], [0.9, 0.5])


class TestHalfLife:
    def test_never_decays(self):
        est = tree_half_life(SurvivalCurve([0, 1, 2], [1.0, 1.0, 1.0]))
        assert est.half_life is None and not est.defined

    def test_exact_hit(self):
        assert tree_half_life(SurvivalCurve([0, 1], [1.0, 0.5])).half_life == 1.0

    def test_interpolated(self):
        # 1.0 + (0.4 - 1.0) * t = 0.5  ->  t = 5/6
        assert tree_half_life(SurvivalCurve([0, 1], [1.0, 0.4])).half_life == pytest.approx(5 / 6, abs=1e-12)

    def test_first_crossing_not_last(self):
        est = tree_half_life(SurvivalCurve([0, 1, 2, 3], [1.0, 0.5, 0.75, 0.25]))
        assert est.half_life == 1.0

    def test_step_duration(self):
        assert tree_half_life(SurvivalCurve([0, 1], [1.0, 0.5]), step_duration=4.0).half_life == 4.0

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=8), min_size=1, max_size=10))
    def test_within_bracket(self, counts):
        fractions = [1.0] + [c / 8 for c in counts]
        curve = SurvivalCurve(range(len(fractions)), fractions)
        est = tree_half_life(curve)
        below = [k for k, f in enumerate(fractions) if f <= 0.5]
        if not below:
            assert not est.defined
        else:
            k = below[0]
            assert k - 1 < est.half_life <= k
            if fractions[k] == 0.5:
                assert est.half_life == k


class TestMeanHalfLife:
    def test_identical_trees_undefined(self):
        est = mean_half_life([STAR, STAR])
        assert est == HalfLifeEstimate(None, 0)

    def test_average(self):
        # origin 0: STAR -> PATH2 keeps half at lag 1 (t=1); origin 1: PATH2 -> STAR keeps half (t=1);
        # origin 2: STAR alone has no later window and is skipped
        est = mean_half_life([STAR, PATH2, STAR])
        assert est.half_life == 1.0 and est.origin_count == 2

    def test_mean_over_defined_subset(self):
        # origin 0: [1, 1, 0, 0] -> 1.5; origin 1: [1, 0, 0] -> 0.5; origin 2: [1, 1] never decays
        est = mean_half_life([CHAIN, CHAIN, CROSS, CROSS])
        assert est.origin_count == 2
        assert est.half_life == 1.0

    def test_too_few(self):
        with pytest.raises(DynamicsError):
            mean_half_life([STAR])


class TestScaling:
    def test_exact_line(self):
        widths = np.array([10, 20, 30, 40, 52])
        slope, residuals = fit_through_origin(widths, 0.05 * widths)
        assert slope == pytest.approx(0.05, abs=1e-9)
        np.testing.assert_allclose(residuals, 0, atol=1e-12)

    def test_closed_form(self):
        slope, _ = fit_through_origin([10, 20], [1, 3])
        assert slope == pytest.approx(70 / 500, abs=1e-15)

    def test_too_few_points(self):
        with pytest.raises(DynamicsError):
            fit_through_origin([10], [1])

    def test_all_undefined(self):
        block = np.random.default_rng(3).standard_normal((2, 4))
        periodic = ReturnPanel(weekly_dates(20), ("a", "b", "c", "d"), np.tile(block, (10, 1)))
        with pytest.raises(DynamicsError, match="defined half-life"):
            half_life_scaling(periodic, [4, 6], step=2)

    def test_on_synthetic_market(self):
        panel = generate_sector_market(SectorConfig([("p", 4, 0.3), ("q", 4, 0.3)], 200, seed=5))
        result = half_life_scaling(log_returns(panel), [8, 12, 16, 60], step=2, max_fit_width=52)
        assert list(result.fit_mask) == [True, True, True, False]
        assert result.slope >= 0
        x, y = result.widths[result.fit_mask], result.half_lives[result.fit_mask]
        assert result.slope == pytest.approx(float(np.sum(x * y) / np.sum(x * x)), rel=1e-14)
        assert np.isnan(result.residuals[3])
        # step=2 rows per lag, so half-lives are at least 2 weeks when defined
        assert np.all(result.half_lives[~np.isnan(result.half_lives)] > 0)

    def test_exports(self):
        panel = generate_sector_market(SectorConfig([("p", 3, 0.3), ("q", 3, 0.3)], 120, seed=2))
        result = half_life_scaling(log_returns(panel), [8, 12], step=2)
        assert scaling_to_csv(result).startswith("width,half_life\n8,")
        doc = json.loads(scaling_to_json(result))
        assert doc["widths"] == [8, 12] and doc["slope"] == result.slope
        lines = scaling_plot_data(result).splitlines()
        assert lines[0].startswith("#") and lines[2].split()[0] == "8"

    def test_deterministic(self):
        returns = log_returns(generate_sector_market(SectorConfig([("p", 3, 0.3), ("q", 3, 0.3)], 150, seed=8)))
        a = half_life_scaling(returns, [8, 12, 20], step=2)
        b = half_life_scaling(returns, [8, 12, 20], step=2)
        assert scaling_to_json(a) == scaling_to_json(b)


def test_survival_csv():
    assert survival_to_csv(edge_survival([STAR, PATH2])) == "lag,fraction\n0,1.0\n1,0.5\n"
