from typing import Callable

import numpy as np
import pytest

from hybrid_precoding._core.mapping import (
    MappingMatrix,
    analog_precoder,
    make_adjacent_mapping,
    make_balanced_mapping,
    make_identity_mapping,
    make_interleaved_mapping,
    make_mapping,
)
from hybrid_precoding.exceptions import ConfigurationError
from hybrid_precoding.models import MappingKind


class TestMappingMatrices:
    @pytest.mark.parametrize("subarray_size,n_ps_per_rf", [(8, 4), (4, 2)])
    def test_adjacent(self, subarray_size: int, n_ps_per_rf: int) -> None:
        group = subarray_size // n_ps_per_rf
        expected = np.kron(np.eye(n_ps_per_rf, dtype=int), np.ones((group, 1), dtype=int))
        np.testing.assert_array_equal(make_adjacent_mapping(subarray_size, n_ps_per_rf).entries, expected)

    @pytest.mark.parametrize("subarray_size,n_ps_per_rf", [(8, 4), (6, 3)])
    def test_interleaved(self, subarray_size: int, n_ps_per_rf: int) -> None:
        expected = np.vstack([np.eye(n_ps_per_rf, dtype=int)] * (subarray_size // n_ps_per_rf))
        np.testing.assert_array_equal(make_interleaved_mapping(subarray_size, n_ps_per_rf).entries, expected)

    @pytest.mark.parametrize("factory", [make_adjacent_mapping, make_interleaved_mapping, make_balanced_mapping])
    def test_full_count_is_identity(self, factory: Callable[..., MappingMatrix]) -> None:
        np.testing.assert_array_equal(factory(5, 5).entries, np.eye(5, dtype=int))

    @pytest.mark.parametrize("factory", [make_adjacent_mapping, make_interleaved_mapping])
    def test_non_divisible_counts_are_rejected(self, factory: Callable[..., MappingMatrix]) -> None:
        with pytest.raises(ConfigurationError):
            factory(10, 4)

    def test_balanced_handles_non_divisible_counts(self) -> None:
        mapping = make_balanced_mapping(10, 4)
        np.testing.assert_array_equal(mapping.entries.sum(axis=0), [3, 3, 2, 2])
        np.testing.assert_array_equal(mapping.shifter_of_antenna, [0, 0, 0, 1, 1, 1, 2, 2, 3, 3])

    def test_balanced_matches_adjacent_when_divisible(self) -> None:
        np.testing.assert_array_equal(make_balanced_mapping(18, 9).entries, make_adjacent_mapping(18, 9).entries)

    @pytest.mark.parametrize("n_ps_per_rf", [0, 9])
    def test_out_of_range_counts_are_rejected(self, n_ps_per_rf: int) -> None:
        with pytest.raises(ConfigurationError):
            make_balanced_mapping(8, n_ps_per_rf)

    def test_rows_need_exactly_one_entry(self) -> None:
        with pytest.raises(ConfigurationError):
            MappingMatrix(entries=np.array([[1, 1], [0, 1]]), kind=MappingKind.ADJACENT)

    def test_make_mapping_dispatches(self) -> None:
        assert make_mapping(MappingKind.INTERLEAVED, 8, 4).kind == MappingKind.INTERLEAVED
        assert make_mapping(MappingKind.IDENTITY, 8, 8).kind == MappingKind.IDENTITY
        with pytest.raises(ConfigurationError):
            make_mapping(MappingKind.IDENTITY, 8, 4)

    def test_identity(self) -> None:
        mapping = make_identity_mapping(3)
        assert (mapping.subarray_size, mapping.n_ps_per_rf) == (3, 3)


class TestAnalogPrecoder:
    def test_block_diagonal_layout(self) -> None:
        mapping = make_adjacent_mapping(4, 2)
        analog = np.array([1.0, 1j, -1.0, -1j])
        precoder = analog_precoder(mapping, analog, n_rf=2)
        assert precoder.shape == (8, 2)
        np.testing.assert_array_equal(precoder[:4, 0], [1.0, 1.0, 1j, 1j])
        np.testing.assert_array_equal(precoder[4:, 1], [-1.0, -1.0, -1j, -1j])
        np.testing.assert_array_equal(precoder[4:, 0], 0)
        np.testing.assert_array_equal(precoder[:4, 1], 0)
