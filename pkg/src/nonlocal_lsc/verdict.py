"""Verdicts returned by the property checkers, and the seeded sampler they share."""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_SEED = 0x5EED

REFUTED = "refuted"
PASSED = "evidence-passed"


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass
class PropertyVerdict:
    """Outcome of a sampled property check.

    ``status`` is ``"refuted"`` exactly when ``witness`` holds a concrete
    counterexample, otherwise ``"evidence-passed"`` after ``samples`` trials.
    """

    check: str
    status: str
    samples: int
    tolerance: float
    witness: Optional[dict] = None
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.status == REFUTED) != (self.witness is not None):
            raise ValueError("a refuted verdict needs a witness and vice versa")

    @property
    def refuted(self):
        return self.status == REFUTED

    @property
    def passed(self):
        return self.status == PASSED

    def to_dict(self):
        return jsonable({
            "check": self.check,
            "status": self.status,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "witness": self.witness,
            "details": self.details,
        })

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Sampler:
    """Budget, seed and search box for randomised checks.

    ``radius`` bounds the sampled values ``w, z``; ``heavy_tail`` mixes in
    log-uniform magnitudes so that tiny and large values both get probed.
    ``domain`` overrides the region ``x, y`` are drawn from.
    """

    budget: int = 2000
    seed: int = DEFAULT_SEED
    radius: float = 3.0
    heavy_tail: bool = True
    domain: object = None

    def rng(self, salt=0):
        return np.random.default_rng([self.seed, salt])

    def values(self, rng, count, n, radius=None):
        r = self.radius if radius is None else radius
        out = rng.uniform(-r, r, (count, n))
        if self.heavy_tail:
            pick = rng.random(count) < 0.25
            mags = 10.0 ** rng.uniform(-8, math.log10(r), (count, n))
            signs = rng.choice([-1.0, 1.0], (count, n))
            out[pick] = (mags * signs)[pick]
        return out

    def points(self, rng, count, domain):
        lo, hi = domain.lo, domain.hi
        t = rng.random((count, domain.dim_m))
        if self.heavy_tail:
            # push a quarter of the points towards the box faces
            pick = rng.random(count) < 0.25
            edge = 10.0 ** rng.uniform(-8, 0, (count, domain.dim_m))
            side = rng.random((count, domain.dim_m)) < 0.5
            edge = np.where(side, edge, 1.0 - edge)
            t[pick] = edge[pick]
        pts = lo + t * (hi - lo)
        if domain.mask is None:
            return pts
        keep = pts[domain.contains(pts)]
        for _ in range(50):
            if len(keep) >= count:
                break
            extra = lo + rng.random((count, domain.dim_m)) * (hi - lo)
            keep = np.vstack([keep, extra[domain.contains(extra)]])
        if len(keep) < count:
            raise ValueError("could not sample points inside the masked domain")
        return keep[:count]
