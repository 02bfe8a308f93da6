import numpy as np
import pytest

from rician_capacity import AmplitudeDistribution, ChannelSpec
from rician_capacity.quadrature import QuadratureConfig


@pytest.fixture(scope="session")
def q():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def anchor_distribution():
    """Two-point optimum of the kappa=10, alpha=0.05, K=1 fourth-moment case."""
    return AmplitudeDistribution(
        np.array([0.0, 0.7071067811865476]), np.array([0.9, 0.1]))


# Hand oracle for the anchor distribution, computed with scipy.integrate.quad
# straight from the mixture density (independent of the package quadrature):
# I = h(R) - sum p ln(1+r^2) - 1.
ANCHOR_MI = 0.05308353995408832
