import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# make tests/helpers importable without installing them
sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def F():
    return Fraction
