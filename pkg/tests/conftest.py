"""
测试公共配置：hypothesis 配置档与常用网络夹具
"""

import os

import hypothesis
import pytest

from models import NetworkModel, RoutingMatrix, StationSpec
from solver.network import solve_visit_ratios, validate_model
from utils.fixtures import cyclic_model, model_corpus

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile(
    "ci", max_examples=200, deadline=None, derandomize=True, print_blob=True
)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


CORPUS_SEED = 20240601
CORPUS_SIZE = 200


def make_model(capacities, service_times, routing, reference=0) -> NetworkModel:
    """由列表直接构造并校验模型"""
    raw = NetworkModel(
        stations=tuple(
            StationSpec(name=f"s{i + 1}", capacity=c, service_time=s)
            for i, (c, s) in enumerate(zip(capacities, service_times))
        ),
        routing=RoutingMatrix.from_rows(routing),
        reference=reference
    )
    return validate_model(raw)


@pytest.fixture
def net_a():
    """2 站环，S=(1,1)，C=(1,1)"""
    model = cyclic_model((1, 1), (1.0, 1.0))
    return model, solve_visit_ratios(model)


@pytest.fixture
def net_b():
    """2 站环，S=(1,2)，C=(2,1)"""
    model = cyclic_model((2, 1), (1.0, 2.0))
    return model, solve_visit_ratios(model)


@pytest.fixture
def net_c():
    """3 站环，S=(1,1,1)，C=(1,1,1)"""
    model = cyclic_model((1, 1, 1), (1.0, 1.0, 1.0))
    return model, solve_visit_ratios(model)


@pytest.fixture(scope="session")
def corpus():
    """200 个随机模型 (M ∈ 2..4, C_i ∈ 1..4, S_i ∈ [0.1, 10])，附带访问比"""
    return [
        (model, solve_visit_ratios(model))
        for model in model_corpus(CORPUS_SEED, CORPUS_SIZE)
    ]
