import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mmtr.corpus import SynthParams, generate_synthetic
from mmtr.fusion import ModelConfig, TrainConfig

settings.register_profile("mmtr", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("mmtr")


TINY_MODEL = ModelConfig(d_e=4, d_h=6, d_s=6, d_f=6, n_chunks=5, n_frames=6)


@pytest.fixture(scope="session")
def tiny_corpus():
    return generate_synthetic(
        SynthParams(n_instances=24, tokens_per_instance=12, audio_seconds=0.2, n_frames=16, frame_dim=5, video_window=4, seed=11)
    )


@pytest.fixture
def tiny_model_cfg():
    return TINY_MODEL


@pytest.fixture
def quick_train_cfg():
    return TrainConfig(lr=0.01, max_epochs=3, patience=2, batch_size=4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: the full-grid acceptance experiment (minutes)")


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
