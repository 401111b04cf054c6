import pytest

from helpers import matching_diagram


@pytest.fixture
def match_diagram():
    return matching_diagram()
