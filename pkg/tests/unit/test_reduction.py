import math

import numpy as np
import pytest

from capflow.utils.reduction import partition_bounds, partitioned_fsum


class TestPartitionBounds:
    @pytest.mark.parametrize(("count", "partitions"), [(10, 3), (7, 7), (100, 8), (5, 1)])
    def test_blocks_cover_the_range_in_order(self, count, partitions):
        blocks = partition_bounds(count, partitions)

        assert blocks[0][0] == 0
        assert blocks[-1][1] == count
        assert all(lo < hi for lo, hi in blocks)
        assert all(prev[1] == nxt[0] for prev, nxt in zip(blocks, blocks[1:]))

    def test_more_partitions_than_items(self):
        blocks = partition_bounds(3, 10)

        assert blocks == [(0, 1), (1, 2), (2, 3)]

    def test_zero_partitions_means_one_block(self):
        assert partition_bounds(4, 0) == [(0, 4)]


class TestPartitionedFsum:
    def test_empty_sum(self):
        assert partitioned_fsum(lambda i: 1.0, 0) == 0.0

    @pytest.mark.parametrize("partitions", [1, 2, 5, 16])
    def test_matches_exact_sum(self, rng, partitions):
        # Arrange
        rows = rng.standard_normal((200, 13)) * 10.0 ** rng.integers(-8, 8, size=(200, 1))

        # Act
        total = partitioned_fsum(lambda i: rows[i], rows.shape[0], partitions)

        # Assert
        assert total == math.fsum(rows.ravel())

    def test_cancellation_is_exact(self):
        terms = [1e16, 1.0, -1e16, 1.0]

        assert partitioned_fsum(lambda i: terms[i], len(terms), 2) == 2.0

    def test_repeated_runs_are_bitwise_identical(self, rng):
        rows = rng.uniform(size=(500, 7))

        first = partitioned_fsum(lambda i: rows[i] ** 2, 500, 4)
        second = partitioned_fsum(lambda i: rows[i] ** 2, 500, 4)

        assert first == second

    def test_scalar_and_array_terms(self):
        total = partitioned_fsum(lambda i: np.full((2, 2), float(i)), 4, 3)

        assert total == 4.0 * (0 + 1 + 2 + 3)
