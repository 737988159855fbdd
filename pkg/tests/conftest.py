import pytest

from gammalab import profile as phi
from gammalab.annealing import OptimizerConfig
from gammalab.evaluator import QuadConfig
from gammalab.gridfn import make_affine, make_heaviside


@pytest.fixture
def indicator():
    return phi.make_profile("indicator", 1.0)


@pytest.fixture
def saturating():
    return phi.make_profile("saturating_power", 1.0)


@pytest.fixture
def compact():
    return phi.make_profile("compact_bump", 1.0)


@pytest.fixture
def quad():
    return QuadConfig()


@pytest.fixture
def identity():
    return make_affine((0.0, 1.0), 1.0, 0.0)


@pytest.fixture
def step():
    return make_heaviside((0.0, 1.0), 0.5)


@pytest.fixture
def small_budget():
    """느린 테스트용 작은 최적화 예산."""
    return OptimizerConfig(restarts=1, stages=4, moves_per_stage=10, polish_sweeps=1, seed=7)
