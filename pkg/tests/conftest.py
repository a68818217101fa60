import numpy as np
import pytest

from mvir.manifolds import Circle, Euclidean, Rotations3, Spd, Sphere2

ALL_MANIFOLDS = [Euclidean(2), Circle(), Sphere2(), Rotations3(), Spd(3)]
MANIFOLD_IDS = [m.name for m in ALL_MANIFOLDS]


@pytest.fixture(params=ALL_MANIFOLDS, ids=MANIFOLD_IDS)
def manifold(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_tangents_with_norm(m, rng, p, lo=0.05, hi=1.0):
    """Tangent vectors with norms uniform in [lo, hi]."""
    v = m.random_tangents(rng, p, 1.0)
    nv = m.norm(p, v)
    target = rng.uniform(lo, hi, nv.shape)
    scale = (target / np.maximum(nv, 1e-300)).reshape(nv.shape + (1,) * len(m.point_shape))
    return v * scale
