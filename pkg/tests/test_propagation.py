"""Tests for propagation models, wall crossings and model loading."""

import tempfile
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from fpsim.errors import InvalidParameterError, TraceParseError
from fpsim.geometry.base import Point, Region
from fpsim.propagation.analytic import (
    FadingLinearModel,
    NoisyLinearModel,
    mean_rss_linear,
    sample_rss_fading,
    sample_rss_noisy,
)
from fpsim.propagation.base import (
    AnalyticChannelParams,
    Anchor,
    ChannelKind,
    Cost231Params,
    FloorPlan,
    Wall,
)
from fpsim.propagation.cost231 import Cost231Model, cost231_rss
from fpsim.propagation.loader import (
    default_anchors,
    default_office_plan,
    get_model,
    load_anchors,
    load_floorplan,
    save_anchors,
)
from fpsim.propagation.walls import count_wall_intersections, wall_loss_matrix

ORIGIN = Anchor(Point(0, 0), 1.0, "AP1")


def noisy(var: float = 1e-6, floor: float = 0.0) -> AnalyticChannelParams:
    return AnalyticChannelParams(alpha=2.0, noise_floor=floor, quant_noise_var=var, model=ChannelKind.NOISY)


def fading(floor: float = 0.0) -> AnalyticChannelParams:
    return AnalyticChannelParams(alpha=2.0, noise_floor=floor, model=ChannelKind.FADING)


class TestMeanRss:
    @pytest.mark.parametrize("tx,floor,d,expected", [
        (1.0, 0.0, 1.0, 1.0),
        (1.0, 0.0, 2.0, 0.25),
        (100.0, 1e-3, 10.0, 1.001),
    ])
    def test_formula(self, tx, floor, d, expected):
        anchor = Anchor(Point(0, 0), tx)
        assert mean_rss_linear(Point(d, 0), anchor, noisy(floor=floor)) == pytest.approx(expected)

    def test_strictly_decreasing(self):
        values = [mean_rss_linear(Point(d, 0), ORIGIN, noisy()) for d in (0.5, 1, 2, 4, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_clamped_at_anchor(self):
        assert np.isfinite(mean_rss_linear(Point(0, 0), ORIGIN, noisy()))

    def test_rejects_non_positive_alpha(self):
        with pytest.raises(InvalidParameterError, match="alpha"):
            AnalyticChannelParams(alpha=0.0)


class TestNoisySamples:
    def test_tiny_noise_matches_mean(self):
        rng = np.random.default_rng(0)
        value = sample_rss_noisy(Point(2, 0), ORIGIN, noisy(var=1e-18), rng)
        assert value == pytest.approx(0.25, abs=1e-8)

    def test_moments(self):
        var = 0.5
        model = NoisyLinearModel(noisy(var=var))
        draws = model.sample(np.array([[2.0, 0.0]]), [ORIGIN], 100_000, np.random.default_rng(0))[0, :, 0]
        assert abs(draws.mean() - 0.25) <= 3 * np.sqrt(var / 100_000)
        assert draws.var() == pytest.approx(var, rel=0.05)

    def test_wrong_channel(self):
        with pytest.raises(InvalidParameterError, match="noisy"):
            sample_rss_noisy(Point(1, 0), ORIGIN, fading(), np.random.default_rng(0))


class TestFadingSamples:
    def test_mean(self):
        anchor = Anchor(Point(0, 0), 4.0)
        model = FadingLinearModel(fading(floor=0.1))
        draws = model.sample(np.array([[2.0, 0.0]]), [anchor], 100_000, np.random.default_rng(1))
        assert draws.mean() == pytest.approx(1.0 + 0.1, rel=0.02)

    def test_unit_distance_std(self):
        model = FadingLinearModel(fading())
        draws = model.sample(np.array([[1.0, 0.0]]), [ORIGIN], 100_000, np.random.default_rng(2))
        assert draws.std() == pytest.approx(1.0, rel=0.03)
        assert (draws >= 0).all()

    def test_draws_follow_exponential(self):
        model = FadingLinearModel(fading())
        draws = model.sample(np.array([[2.0, 0.0]]), [ORIGIN], 5000, np.random.default_rng(5)).ravel()
        assert stats.kstest(draws, "expon", args=(0.0, 0.25)).pvalue > 0.01

    def test_scalar_draw_non_negative(self):
        rng = np.random.default_rng(3)
        assert all(sample_rss_fading(Point(3, 4), ORIGIN, fading(), rng) >= 0 for _ in range(100))


class TestWalls:
    def test_empty_plan(self):
        assert count_wall_intersections(Point(0, 0), Point(10, 0), FloorPlan()) == 0

    def test_bisecting_wall(self):
        plan = FloorPlan((Wall(Point(5, -1), Point(5, 1)),))
        assert count_wall_intersections(Point(0, 0), Point(10, 0), plan) == 1

    def test_parallel_disjoint_wall(self):
        plan = FloorPlan((Wall(Point(0, 1), Point(10, 1)),))
        assert count_wall_intersections(Point(0, 0), Point(10, 0), plan) == 0

    def test_touching_endpoint_counts(self):
        plan = FloorPlan((Wall(Point(5, 0), Point(5, 3)),))
        assert count_wall_intersections(Point(0, 0), Point(10, 0), plan) == 1

    def test_zero_length_wall(self):
        with pytest.raises(InvalidParameterError, match="zero length"):
            Wall(Point(1, 1), Point(1, 1))

    def test_collinear_overlap_counts(self):
        plan = FloorPlan((Wall(Point(2, 0), Point(4, 0)),))
        assert count_wall_intersections(Point(0, 0), Point(10, 0), plan) == 1

    def test_loss_matrix_sums_overrides(self):
        plan = FloorPlan((
            Wall(Point(2, -1), Point(2, 1)),
            Wall(Point(4, -1), Point(4, 1), attenuation=10.0),
            Wall(Point(0, 5), Point(10, 5)),
        ))
        anchors = [Anchor(Point(0, 0), 20.0), Anchor(Point(6, 6), 20.0)]
        loss = wall_loss_matrix(np.array([[6.0, 0.0], [1.0, 0.0]]), anchors, plan, 3.0)
        assert loss.shape == (2, 2)
        assert loss[0, 0] == pytest.approx(13.0)
        assert loss[0, 1] == pytest.approx(3.0)
        assert loss[1, 0] == 0.0

    def test_path_of_zero_length(self):
        plan = FloorPlan((Wall(Point(5, -1), Point(5, 1)),))
        loss = wall_loss_matrix(np.array([[1.0, 1.0]]), [Anchor(Point(1, 1), 20.0)], plan, 3.0)
        assert loss[0, 0] == 0.0


class TestCost231:
    TX = Anchor(Point(0, 0), 20.0)
    PARAMS = Cost231Params(sigma=0.0)

    @pytest.mark.parametrize("d,walls,expected", [
        (1.0, 0, -33.73),
        (10.0, 0, -50.13),
        (10.0, 2, -59.15),
    ])
    def test_noiseless(self, d, walls, expected):
        plan = FloorPlan(tuple(Wall(Point(x, -1), Point(x, 1)) for x in (3.0, 6.0)[:walls]))
        assert cost231_rss(Point(d, 0), self.TX, self.PARAMS, plan) == pytest.approx(expected, abs=1e-9)

    def test_wall_attenuation_override(self):
        plan = FloorPlan((Wall(Point(5, -1), Point(5, 1), attenuation=10.0),))
        rss = cost231_rss(Point(10, 0), self.TX, self.PARAMS, plan)
        assert rss == pytest.approx(-60.13, abs=1e-9)

    def test_distance_clamp(self):
        assert cost231_rss(Point(0, 0), self.TX, self.PARAMS, FloorPlan()) == pytest.approx(20 - 53.73 + 16.4)

    def test_shadowing_std(self):
        model = Cost231Model(Cost231Params(sigma=2.0))
        draws = model.sample(np.array([[10.0, 0.0]]), [self.TX], 50_000, np.random.default_rng(0))
        assert draws.std() == pytest.approx(2.0, rel=0.03)
        assert draws.mean() == pytest.approx(-50.13, abs=0.05)

    def test_noiseless_flag(self):
        assert Cost231Model(self.PARAMS).is_noiseless
        assert not Cost231Model(Cost231Params()).is_noiseless


class TestLoader:
    def test_get_model_by_name(self):
        assert isinstance(get_model("cost231"), Cost231Model)
        assert isinstance(get_model("noisy"), NoisyLinearModel)
        assert isinstance(get_model("FADING"), FadingLinearModel)

    def test_unknown_model(self):
        with pytest.raises(InvalidParameterError, match="Unsupported propagation model"):
            get_model("free-space")

    def test_default_anchors_inside_region(self):
        region = Region.from_size(30, 18)
        anchors = default_anchors(region)
        assert [a.id for a in anchors] == ["AP1", "AP2", "AP3", "AP4"]
        assert all(region.contains(a.location) for a in anchors)

    def test_default_office_plan(self):
        plan = default_office_plan(Region.from_size(30, 18))
        assert len(plan) == 16
        ys = {w.start.y for w in plan.walls if w.start.y == w.end.y}
        assert ys == {5.0, 7.0, 11.0, 13.0}

    def test_anchor_file(self):
        anchors = [Anchor(Point(1.5, 2), 20.0, "a"), Anchor(Point(3, 4.25), 17.5, "b")]
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "anchors.csv"
            save_anchors(anchors, path)
            assert load_anchors(path) == anchors

    def test_duplicate_anchor_id(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "anchors.csv"
            path.write_text("id,x,y,txpower\nA,1,1,20\nA,2,2,20\n")
            with pytest.raises(TraceParseError, match="duplicate anchor id"):
                load_anchors(path)

    def test_floorplan_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "walls.csv"
            path.write_text("x1,y1,x2,y2,att_db\n0,5,30,5,\n6,0,6,5,7.5\n")
            plan = load_floorplan(path)
            assert len(plan) == 2
            assert plan.attenuations(4.51).tolist() == [4.51, 7.5]

    def test_floorplan_bad_number(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "walls.csv"
            path.write_text("x1,y1,x2,y2\n0,5,30,5\n0,x,1,1\n")
            with pytest.raises(TraceParseError, match="line 3|:3:"):
                load_floorplan(path)
