import os

import pytest

from natlogic.catalog import running_example, singular_analog
from natlogic.files import PresentationFile, StructureFile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def root_path(*parts: str) -> str:
    return os.path.join(ROOT, *parts)


@pytest.fixture
def singular():
    return singular_analog()


@pytest.fixture
def running():
    return running_example()


@pytest.fixture
def a_implies_b():
    return PresentationFile().read_presentation(root_path("logics", "a-implies-b.logic"))


@pytest.fixture
def two_point():
    return StructureFile().read_catalog(root_path("structures", "two-point.struct"))
