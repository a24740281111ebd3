"""
Test fixtures for the QRNG finite-size randomness tests.
"""
import pytest
from fastapi.testclient import TestClient
from app.main import app
from app.models import QuantizerConfig, SourceModel
from app.services.quantized_source import quantizer_for_source


@pytest.fixture
def client():
    """Test client for making requests to the API"""
    return TestClient(app)


@pytest.fixture
def source():
    """Reference source: excess noise 0.1, variance 1.1"""
    return SourceModel(excess_noise=0.1)


@pytest.fixture
def quantizer_8bit(source):
    """8-bit ADC over 3 sigma"""
    return quantizer_for_source(source, range_sigma=3.0, bits=8)


@pytest.fixture
def toy_quantizer():
    """3-bit ADC with range 1: delta = 0.25, levels -3..3"""
    return QuantizerConfig(sampling_range=1.0, bits=3, a_lim=2.0)


@pytest.fixture
def sample_rate_params():
    return {
        "excess_noise": 0.1,
        "bits": 8,
        "range_sigma": 3.0,
        "alim_sigma": 10.0,
        "check_length": 10000,
        "confidence_epsilon": 1e-10,
    }
