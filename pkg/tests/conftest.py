import math

import numpy as np
import pytest

import slantlab as sl

THETA0 = math.pi / 6.0


@pytest.fixture(scope="session")
def canonical():
    return sl.canonical_lorentzian_sasakian(2)


@pytest.fixture(scope="session")
def flat():
    return sl.flat_product(2)


@pytest.fixture(scope="session")
def cfg():
    return sl.FDConfig()


@pytest.fixture(scope="session")
def catalog():
    return {
        "invariant": sl.invariant_r5(),
        "anti": sl.anti_invariant_r5(),
        "slant": sl.slant_candidate_r5(THETA0),
    }


@pytest.fixture(scope="session")
def frames_at(canonical, cfg):
    """frame + split factory, memoized per (immersion name, point tuple)."""
    cache = {}

    def get(immersion, u):
        key = (immersion.name, tuple(np.round(np.asarray(u, dtype=float), 12)))
        if key not in cache:
            frame = sl.frame_at(canonical, immersion, u, cfg)
            cache[key] = (frame, sl.phi_split(canonical, frame))
        return cache[key]

    return get


def interior_points(immersion, count, seed=3, margin=5e-3):
    return immersion.sample_parameters(count, seed, margin)
