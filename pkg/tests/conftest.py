"""
Fixture dùng chung: nhóm dựng sẵn và các locality hay dùng
"""

import os
import sys

import pytest

# Add project root to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.group_library import group_library
from src.locality import build_group_locality


@pytest.fixture(scope="session")
def s3():
    return group_library.get_group("S3")


@pytest.fixture(scope="session")
def s4():
    return group_library.get_group("S4")


@pytest.fixture(scope="session")
def d8():
    return group_library.get_group("D8")


@pytest.fixture(scope="session")
def a4():
    return group_library.get_group("A4")


@pytest.fixture(scope="session")
def sl23():
    return group_library.get_group("SL23")


@pytest.fixture(scope="session")
def s3_locality(s3):
    return build_group_locality(s3, 2, "all")


@pytest.fixture(scope="session")
def s4_locality(s4):
    return build_group_locality(s4, 2, "all")


@pytest.fixture(scope="session")
def klein(s4):
    """Nhóm bốn Klein chuẩn tắc V của S4"""
    return s4.subgroup_from_strings(["(1 2)(3 4)", "(1 3)(2 4)"])


def locality_matrix():
    """(tên nhóm, p, delta) cho các bài kiểm tra toàn diện"""
    cases = []
    for name in ("S3", "S4", "D12", "A4", "SL23"):
        order = group_library.get_group(name).order
        for p in (2, 3):
            if order % p:
                continue
            for delta in ("all", "nontrivial"):
                cases.append((name, p, delta))
    return cases
