"""Fixtures wrapping the offline dataset/encoder substitutes."""

import pytest

from fakes import FakeEncoder, make_fake_dataset


@pytest.fixture()
def fake_dataset():
    return make_fake_dataset()


@pytest.fixture()
def fake_encoder():
    return FakeEncoder()
