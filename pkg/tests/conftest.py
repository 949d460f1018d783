import os
import random
import sys

import pytest

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.config import PrecisionPolicy


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def policy():
    return PrecisionPolicy()


@pytest.fixture
def small_policy():
    """Low cap so that boundary cases exhaust quickly"""
    return PrecisionPolicy(start_bits=32, cap_bits=128)
