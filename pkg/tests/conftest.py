import math

import numpy as np
import pytest

from tippetop.model import TopParams
from tippetop.presets import GROUP_RATIOS, group_preset

GROUPS = tuple(GROUP_RATIOS)


@pytest.fixture
def iia():
    return group_preset("IIa")


@pytest.fixture(params=GROUPS)
def any_group(request):
    return request.param, group_preset(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def random_state(rng, theta_range=(0.2, math.pi - 0.2), scale=5.0):
    """Generic state with moderate rates (normal reaction stays positive)."""
    from tippetop.dynamics import FullState

    return FullState(
        x=rng.normal(), y=rng.normal(),
        theta=rng.uniform(*theta_range), phi=rng.uniform(0, 2 * math.pi), psi=rng.uniform(0, 2 * math.pi),
        xdot=0.05 * rng.normal(), ydot=0.05 * rng.normal(),
        thetadot=rng.normal(), phidot=scale * rng.normal(), psidot=10 * scale * rng.normal(),
    )


def generic_params(**kw) -> TopParams:
    base = dict(m=0.015, R=0.025, eps=0.006, A=1.7e-6, C=2e-6, mu=0.2, g=9.81)
    base.update(kw)
    return TopParams(**base)
