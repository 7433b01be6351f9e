from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maskcomplete import (
    Mask,
    MaskedMatrix,
    MaskFormatError,
    apply_mask,
    mask_from_dense,
    parse_mask_text,
    parse_masked_matrix,
    random_mask,
    serialize_mask_text,
    serialize_masked_matrix,
)
from maskcomplete.masks import serialize_dense_matrix

from conftest import CORNER_BLOCK_TEXT, RANK1_3X3


class TestMask:
    def test_entries_sorted_and_deduplicated(self):
        mask = Mask(2, 2, ((1, 1), (0, 0)))
        assert mask.entries == ((0, 0), (1, 1))
        with pytest.raises(ValueError, match="duplicate"):
            Mask(2, 2, ((0, 0), (0, 0)))

    def test_out_of_range_entry_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            Mask(2, 2, ((2, 0),))

    def test_degrees(self):
        mask = parse_mask_text(CORNER_BLOCK_TEXT)
        assert mask.row_degrees() == [4, 4, 2, 2]
        assert mask.col_degrees() == [4, 4, 2, 2]


class TestMaskFromDense:
    def test_corner_block_has_twelve_entries(self):
        mask = parse_mask_text(CORNER_BLOCK_TEXT)
        assert mask.edge_count() == 12

    def test_all_zero_grid_is_empty(self):
        mask = mask_from_dense(np.zeros((3, 3)))
        assert mask.edge_count() == 0

    def test_all_one_grid_is_full(self):
        mask = mask_from_dense(np.ones((4, 6)))
        assert mask.edge_count() == 24
        assert mask.is_full()

    def test_non_binary_rejected(self):
        with pytest.raises(ValueError, match="non-binary"):
            mask_from_dense(np.array([[0, 2], [1, 0]]))

    def test_round_trip_through_dense(self):
        mask = random_mask(5, 7, 13, seed=3)
        assert mask_from_dense(mask.to_dense()) == mask


class TestRandomMask:
    def test_forced_full(self):
        for seed in range(5):
            assert random_mask(3, 3, 9, seed).is_full()

    def test_forced_empty(self):
        assert random_mask(2, 2, 0, seed=1).edge_count() == 0

    def test_deterministic_per_seed(self):
        a = random_mask(10, 15, 100, seed=42)
        b = random_mask(10, 15, 100, seed=42)
        assert a == b
        assert a != random_mask(10, 15, 100, seed=43)

    def test_k_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            random_mask(3, 3, 10, seed=0)

    @given(st.integers(0, 10_000))
    def test_exact_entry_count(self, seed):
        assert random_mask(4, 5, 11, seed).edge_count() == 11

    def test_cell_frequencies_uniform(self):
        # Chi-square sanity check: inclusion frequency of each cell is
        # k/(m*n) up to sampling noise.
        m, n, k, runs = 3, 3, 4, 2000
        counts = np.zeros((m, n))
        for seed in range(runs):
            counts += random_mask(m, n, k, seed).to_dense()
        expected = runs * k / (m * n)
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        # 8 degrees of freedom; 99.9th percentile is about 26.1.
        assert chi2 < 26.1


class TestApplyMask:
    def test_five_entry_values(self, rank1_matrix, mask_connected5):
        mm = apply_mask(rank1_matrix, mask_connected5)
        assert sorted(mm.values.values()) == [1.0, 2.0, 3.0, 4.0, 4.0]

    def test_full_and_empty(self, rank1_matrix):
        full = apply_mask(rank1_matrix, mask_from_dense(np.ones((3, 3))))
        assert len(full.values) == 9
        empty = apply_mask(rank1_matrix, mask_from_dense(np.zeros((3, 3))))
        assert len(empty.values) == 0

    def test_dimension_mismatch(self, rank1_matrix):
        with pytest.raises(ValueError, match="shape"):
            apply_mask(rank1_matrix, mask_from_dense(np.ones((2, 3))))

    def test_values_bitwise_equal(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((6, 8))
        mask = random_mask(6, 8, 20, seed=5)
        mm = apply_mask(a, mask)
        for (i, j), v in mm.values.items():
            assert v == a[i, j]


class TestMaskedMatrixType:
    def test_values_must_match_entries(self):
        mask = Mask(2, 2, ((0, 0),))
        with pytest.raises(ValueError, match="match mask entries"):
            MaskedMatrix(mask, {(0, 0): 1.0, (1, 1): 2.0})
        with pytest.raises(ValueError, match="match mask entries"):
            MaskedMatrix(mask, {})

    def test_non_finite_rejected(self):
        mask = Mask(1, 1, ((0, 0),))
        with pytest.raises(ValueError, match="non-finite"):
            MaskedMatrix(mask, {(0, 0): float("nan")})


class TestMaskTextFormat:
    def test_round_trip(self):
        mask = random_mask(4, 9, 17, seed=11)
        assert parse_mask_text(serialize_mask_text(mask)) == mask

    def test_ragged_rejected(self):
        with pytest.raises(MaskFormatError, match="ragged"):
            parse_mask_text("10\n1")

    def test_bad_character_rejected(self):
        with pytest.raises(MaskFormatError, match="invalid"):
            parse_mask_text("10\n1x")


class TestMaskedMatrixFormat:
    def test_parse_five_entry_example(self):
        mm = parse_masked_matrix("1,2,3\n?,4,?\n4,?,?")
        assert mm.mask.entries == ((0, 0), (0, 1), (0, 2), (1, 1), (2, 0))
        assert mm.values[(1, 1)] == 4.0
        assert mm.values[(2, 0)] == 4.0

    def test_round_trip_canonical(self):
        text = "1,2,3\n?,4,?\n4,?,?"
        canonical = serialize_masked_matrix(parse_masked_matrix(text))
        assert canonical == "1.0,2.0,3.0\n?,4.0,?\n4.0,?,?\n"
        assert serialize_masked_matrix(parse_masked_matrix(canonical)) == canonical

    def test_bit_exact_round_trip(self):
        rng = np.random.default_rng(13)
        a = rng.standard_normal((5, 4)) * 10.0 ** rng.integers(-8, 9, size=(5, 4))
        mm = apply_mask(a, random_mask(5, 4, 12, seed=2))
        back = parse_masked_matrix(serialize_masked_matrix(mm))
        assert back == mm

    def test_empty_field_is_hole(self):
        mm = parse_masked_matrix("1,,3\n,4,")
        assert mm.mask.entries == ((0, 0), (0, 2), (1, 1))

    def test_scientific_notation_accepted(self):
        mm = parse_masked_matrix("1e-3,?\n?,2.5E+2")
        assert mm.values[(0, 0)] == 1e-3
        assert mm.values[(1, 1)] == 250.0

    def test_ragged_rejected(self):
        with pytest.raises(MaskFormatError, match="ragged"):
            parse_masked_matrix("1,2\n3")

    def test_bad_token_rejected(self):
        with pytest.raises(MaskFormatError, match="bad value"):
            parse_masked_matrix("1,x\n2,3")

    def test_dense_matrix_serialization(self):
        text = serialize_dense_matrix(RANK1_3X3)
        assert parse_masked_matrix(text).mask.is_full()


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 3000))
def test_mask_dense_round_trip_property(m, n, seed):
    k = seed % (m * n + 1)
    mask = random_mask(m, n, k, seed)
    assert mask_from_dense(mask.to_dense()) == mask
    assert parse_mask_text(serialize_mask_text(mask)) == mask
