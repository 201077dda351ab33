"""Shared fixtures."""

import pytest

from hybridop.core.config import get_settings
from hybridop.schemas.params import EvalConfig, IntervalPair, OperatorParams


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def eval_cfg() -> EvalConfig:
    return EvalConfig.from_settings()


@pytest.fixture
def params_n10_c05() -> OperatorParams:
    return OperatorParams(n=10, c=0.5)


@pytest.fixture
def intervals() -> IntervalPair:
    return IntervalPair(a=0.2, a1=0.6, b1=1.4, b=1.8)
