"""Tests for anchor placement."""

import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from fpsim.analysis.divergence import Scenario, level_field_approx_array
from fpsim.errors import InvalidParameterError
from fpsim.geometry.base import Point, Region, points_to_array
from fpsim.geometry.labelmap import raster_centers
from fpsim.placement.planner import PlacementMethod, place_new_anchors, voronoi_vertex_candidates
from fpsim.propagation.base import AnalyticChannelParams, Anchor, ChannelKind

REGION = Region.from_size(10, 10)
CENTER = Anchor(Point(5, 5), 20.0, "AP1")
RASTER = raster_centers(REGION, 0.1)


def farthest_raster_point(anchors) -> tuple[np.ndarray, float]:
    """Brute force: raster center with the largest distance to its nearest anchor."""
    dist = cdist(RASTER, points_to_array(anchors)).min(axis=1)
    best = int(np.argmax(dist))
    return RASTER[best], float(dist[best])


class TestVoronoiCandidates:
    def test_single_anchor_gives_corners(self):
        candidates = voronoi_vertex_candidates([CENTER.location], REGION)
        assert len(candidates) == 4
        assert all(c.min_distance == pytest.approx(math.sqrt(50)) for c in candidates)
        assert candidates[0].point.as_tuple() == pytest.approx((0.0, 0.0))

    def test_sorted_farthest_first(self):
        candidates = voronoi_vertex_candidates([Point(2, 2), Point(8, 3)], REGION)
        distances = [c.min_distance for c in candidates]
        assert distances == sorted(distances, reverse=True)

    def test_corner_anchors_give_center(self):
        top = voronoi_vertex_candidates(REGION.corners(), REGION)[0]
        assert top.point.as_tuple() == pytest.approx((5.0, 5.0))
        assert top.min_distance == pytest.approx(math.sqrt(50))

    def test_midline_anchors_match_raster_search(self):
        anchors = [Point(1, 5), Point(9, 5)]
        candidates = voronoi_vertex_candidates(anchors, REGION)
        assert candidates[0].point.as_tuple() == pytest.approx((5.0, 0.0))
        assert candidates[1].point.as_tuple() == pytest.approx((5.0, 10.0))
        point, distance = farthest_raster_point(anchors)
        assert candidates[0].min_distance >= distance
        assert candidates[0].min_distance == pytest.approx(distance, abs=0.1)
        assert abs(point[0] - 5.0) <= 0.1

    def test_needs_anchor(self):
        with pytest.raises(InvalidParameterError):
            voronoi_vertex_candidates([], REGION)


class TestPlaceNewAnchors:
    def test_greedy_steps(self):
        plan = place_new_anchors([CENTER], REGION, 2)
        assert plan.added[0].as_tuple() == pytest.approx((0.0, 0.0))
        assert plan.added[1].as_tuple() == pytest.approx((0.0, 10.0))
        assert plan.min_distances == pytest.approx((math.sqrt(50), math.sqrt(50)))

    def test_corner_anchors_add_center(self):
        corners = [Anchor(p, 20.0) for p in REGION.corners()]
        plan = place_new_anchors(corners, REGION, 1)
        assert plan.added[0].as_tuple() == pytest.approx((5.0, 5.0))

    def test_two_steps_match_raster_search(self):
        plan = place_new_anchors([CENTER], REGION, 2)
        current = [CENTER.location]
        for step in range(2):
            point, distance = farthest_raster_point(current)
            assert plan.min_distances[step] >= distance
            assert plan.min_distances[step] == pytest.approx(distance, abs=0.1)
            current.append(plan.added[step])

    def test_step_distance_is_top_candidate(self):
        plan = place_new_anchors([CENTER], REGION, 4)
        current = [CENTER.location]
        for point, distance in zip(plan.added, plan.min_distances):
            top = voronoi_vertex_candidates(current, REGION)[0]
            assert (top.point, top.min_distance) == (point, distance)
            current.append(point)

    def test_enum_method_is_accepted(self):
        plan = place_new_anchors([CENTER], REGION, 1, method=PlacementMethod.RANDOM, seed=1)
        assert plan.method == PlacementMethod.RANDOM
        assert PlacementMethod.parse(PlacementMethod.VORONOI_VERTICES) is PlacementMethod.VORONOI_VERTICES

    def test_added_anchors_never_lower_level_field(self):
        plan = place_new_anchors([CENTER], REGION, 3)
        params = AnalyticChannelParams(alpha=2.0, model=ChannelKind.NOISY)
        centers = raster_centers(REGION, 0.5)
        before = level_field_approx_array(centers, Scenario(plan.existing, params))
        after = level_field_approx_array(centers, Scenario(tuple(plan.anchors()), params))
        assert (after >= before).all()
        assert (after > before).any()

    def test_anchor_list(self):
        plan = place_new_anchors([CENTER], REGION, 2)
        anchors = plan.anchors()
        assert [a.id for a in anchors] == ["AP1", "AP2", "AP3"]
        assert all(a.tx_power == 20.0 for a in anchors)
        assert plan.anchors(tx_power=15.0)[-1].tx_power == 15.0

    def test_random_is_seeded(self):
        a = place_new_anchors([CENTER], REGION, 3, method="random", seed=4)
        b = place_new_anchors([CENTER], REGION, 3, method="random", seed=4)
        assert a.added == b.added
        assert a.method == PlacementMethod.RANDOM
        assert all(REGION.contains(p) for p in a.added)

    @pytest.mark.parametrize("name,expected", [
        ("voronoi", PlacementMethod.VORONOI_VERTICES),
        ("VERTICES", PlacementMethod.VORONOI_VERTICES),
        ("random", PlacementMethod.RANDOM),
    ])
    def test_method_names(self, name, expected):
        assert PlacementMethod.parse(name) == expected

    def test_unknown_method(self):
        with pytest.raises(InvalidParameterError, match="Unknown placement method"):
            place_new_anchors([CENTER], REGION, 1, method="grid")

    def test_count_must_be_positive(self):
        with pytest.raises(InvalidParameterError, match="count"):
            place_new_anchors([CENTER], REGION, 0)

    def test_needs_existing_anchor(self):
        with pytest.raises(InvalidParameterError):
            place_new_anchors([], REGION, 1)
