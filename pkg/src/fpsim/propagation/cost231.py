"""COST-231 multi-wall indoor model in the dB domain."""

from typing import Optional, Sequence

import numpy as np

from fpsim.geometry.base import Point, points_to_array
from .base import Anchor, Cost231Params, FloorPlan, RssModel, anchor_distances, anchor_powers
from .walls import wall_loss_matrix

DB_DISTANCE_CLAMP = 0.1


def path_loss_db(
    points: np.ndarray,
    anchors: Sequence[Anchor],
    params: Cost231Params,
    plan: FloorPlan,
) -> np.ndarray:
    """(N, K) total loss ``lc + 10*gamma*log10(d) + sum(wall attenuation)``."""
    d = anchor_distances(points, anchors, DB_DISTANCE_CLAMP)
    return params.lc + 10.0 * params.gamma * np.log10(d) + wall_loss_matrix(points, anchors, plan, params.l_w)


def cost231_rss(
    u: Point,
    anchor: Anchor,
    params: Cost231Params,
    plan: FloorPlan,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Received power in dBm; noiseless when ``rng`` is None."""
    rss = anchor.tx_power - float(path_loss_db(points_to_array([u]), [anchor], params, plan)[0, 0])
    if rng is not None and params.sigma > 0:
        rss += float(rng.normal(0.0, params.sigma))
    return rss


class Cost231Model(RssModel):
    name = "cost231"
    unit = "dBm"

    def __init__(self, params: Cost231Params, plan: FloorPlan | None = None):
        self.params = params
        self.plan = plan or FloorPlan()

    @property
    def is_noiseless(self) -> bool:
        return self.params.sigma == 0

    def mean(self, points, anchors):
        return anchor_powers(anchors)[None, :] - path_loss_db(points, anchors, self.params, self.plan)

    def sample(self, points, anchors, m, rng):
        mu = self.mean(points, anchors)
        noise = rng.normal(0.0, self.params.sigma, size=(mu.shape[0], m, mu.shape[1]))
        return mu[:, None, :] + noise

    def describe(self) -> dict:
        return {
            "model": self.name,
            "lc": self.params.lc,
            "gamma": self.params.gamma,
            "l_w": self.params.l_w,
            "sigma": self.params.sigma,
            "walls": len(self.plan),
        }
