import pathlib
import random
import sys

import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from approxmod.gen import random_later_free_type, random_term, random_type  # noqa: E402

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

ROOT = pathlib.Path(__file__).resolve().parent.parent


@st.composite
def types(draw, height=4, mu=True):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return random_type(rng, draw(st.integers(0, height)), mu=mu)


@st.composite
def later_free_types(draw, height=3):
    return random_later_free_type(random.Random(draw(st.integers(0, 2**32 - 1))), height)


@st.composite
def terms(draw, size=8):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return random_term(rng, draw(st.integers(1, size)))


@pytest.fixture
def root():
    return ROOT
