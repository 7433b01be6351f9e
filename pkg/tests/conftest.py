from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maskcomplete import Mask, apply_mask, parse_mask_text

settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")

# Worked 3x3 rank-1 example: the full matrix and two five-entry patterns,
# one with a connected adjacency graph (recoverable) and one without.
RANK1_3X3 = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [4.0, 8.0, 12.0]])
CONNECTED5_TEXT = "111\n010\n100"
DISCONNECTED5_TEXT = "101\n010\n101"

# 4x4 rank-2 test masks with 12 entries each: both satisfy every necessary
# condition, but only the corner-block pattern is 2-closable; the
# punctured-diagonal pattern admits two distinct completions.
CORNER_BLOCK_TEXT = "1111\n1111\n1100\n1100"
DIAG_HOLES_TEXT = "0111\n1011\n1101\n1110"


@pytest.fixture
def rank1_matrix() -> np.ndarray:
    return RANK1_3X3.copy()


@pytest.fixture
def mask_connected5() -> Mask:
    return parse_mask_text(CONNECTED5_TEXT)


@pytest.fixture
def mask_disconnected5() -> Mask:
    return parse_mask_text(DISCONNECTED5_TEXT)


@pytest.fixture
def mask_corner_block() -> Mask:
    return parse_mask_text(CORNER_BLOCK_TEXT)


@pytest.fixture
def mask_diag_holes() -> Mask:
    return parse_mask_text(DIAG_HOLES_TEXT)


@pytest.fixture
def masked_connected5(rank1_matrix, mask_connected5):
    return apply_mask(rank1_matrix, mask_connected5)


@pytest.fixture
def masked_disconnected5(rank1_matrix, mask_disconnected5):
    return apply_mask(rank1_matrix, mask_disconnected5)
