import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capflow.core.geometry.schema import Triple
from capflow.core.geometry.service import menger_curvature
from capflow.core.kernels.schema import KernelParams
from capflow.core.kernels.service import kernel_vector
from capflow.core.symmetrization.harness import TripleSampler, perm_check
from capflow.core.symmetrization.service import (
    batch_perm_components,
    bound_report,
    perm_component,
    perm_terms,
    perm_total,
)
from capflow.utils.cli_utils.exception import (
    AxisOutOfRange,
    DegenerateTriple,
    DimensionMismatch,
    ParameterDomainError,
)
from tests.conftest import random_triples

RIGHT_ANGLE = Triple.of([0.0, 0.0], [0.0, 1.0], [1.0, 1.0])
COLLINEAR = Triple.of([0.0, 0.0], [1.0, 1.0], [2.0, 2.0])

coordinate = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def direct_component(params: KernelParams, axis: int, t: Triple) -> float:
    def k(v):
        return kernel_vector(params, v)[axis]

    x, y, z = t.x, t.y, t.z
    return k(x - y) * k(x - z) + k(y - x) * k(y - z) + k(z - x) * k(z - y)


class TestPermComponent:
    @pytest.mark.parametrize("axis", [0, 1])
    def test_right_angle_triple(self, unit_params, axis):
        assert perm_component(unit_params, axis, RIGHT_ANGLE) == pytest.approx(0.5)

    @pytest.mark.parametrize("alpha", [0.3, 0.75, 1.0])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_three_term_formula(self, rng, alpha, n):
        params = KernelParams(alpha=alpha, n=n, d=3)
        xs, ys, zs = random_triples(rng, 50, 3, min_side=0.05)
        for x, y, z in zip(xs, ys, zs):
            t = Triple.of(x, y, z)
            for axis in range(3):
                assert perm_component(params, axis, t) == pytest.approx(
                    direct_component(params, axis, t), rel=1e-12, abs=1e-14
                )

    def test_symmetric_under_orderings(self, rng):
        params = KernelParams(alpha=0.6, n=2, d=3)
        xs, ys, zs = random_triples(rng, 20, 3, min_side=0.05)
        for points in zip(xs, ys, zs):
            reference = batch_perm_components(params, *points)
            scale = np.abs(np.stack(perm_terms(params, *points))).max()
            for ordering in itertools.permutations(points):
                values = batch_perm_components(params, *ordering)
                np.testing.assert_allclose(values, reference, rtol=0.0, atol=1e-12 * scale)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(coordinate, min_size=6, max_size=6),
        st.tuples(coordinate, coordinate),
    )
    def test_translation_invariance(self, coords, shift):
        t = Triple.of(coords[0:2], coords[2:4], coords[4:6])
        if min(np.linalg.norm(t.a), np.linalg.norm(t.b), np.linalg.norm(t.a + t.b)) < 1e-1:
            return
        params = KernelParams(alpha=0.5, n=1)
        moved = t.map(lambda p: p + np.asarray(shift))
        scale = np.abs(np.stack(perm_terms(params, t.x, t.y, t.z))).max()
        for axis in range(2):
            assert perm_component(params, axis, moved) == pytest.approx(
                perm_component(params, axis, t), abs=1e-9 * scale
            )

    @pytest.mark.parametrize("factor", [1e-3, 0.5, 7.0, 1e3])
    def test_homogeneity(self, rng, factor):
        params = KernelParams(alpha=0.4, n=2, d=2)
        xs, ys, zs = random_triples(rng, 20, 2, min_side=0.1)
        for x, y, z in zip(xs, ys, zs):
            t = Triple.of(x, y, z)
            scaled = t.map(lambda p: p * factor)
            scale = np.abs(np.stack(perm_terms(params, x, y, z))).max()
            for axis in range(2):
                value = perm_component(params, axis, t)
                assert perm_component(params, axis, scaled) * factor ** (
                    2 * params.alpha
                ) == pytest.approx(value, rel=1e-10, abs=1e-12 * scale)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_collinear_triple_vanishes_at_unit_alpha(self, n):
        params = KernelParams(alpha=1.0, n=n)
        for axis in range(2):
            assert abs(perm_component(params, axis, COLLINEAR)) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_axis_flat_triple_vanishes(self, n):
        params = KernelParams(alpha=1.0, n=n, d=3)
        t = Triple.of([0.2, 0.0, 0.5], [1.0, 0.3, 0.5], [-0.4, 0.9, 0.5])
        assert perm_component(params, 2, t) == 0.0

    def test_coincident_points_are_rejected(self, unit_params):
        with pytest.raises(DegenerateTriple):
            perm_component(unit_params, 0, Triple.of([0, 0], [0, 0], [1, 0]))

    def test_axis_out_of_range(self, unit_params):
        with pytest.raises(AxisOutOfRange):
            perm_component(unit_params, 2, RIGHT_ANGLE)

    def test_dimension_mismatch(self, unit_params):
        with pytest.raises(DimensionMismatch):
            perm_component(unit_params, 0, Triple.of([0, 0, 0], [1, 0, 0], [0, 1, 0]))


class TestPositivityAtUnitAlpha:
    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_no_negative_components(self, rng, d, n):
        params = KernelParams(alpha=1.0, n=n, d=d)
        x, y, z = random_triples(rng, 5000, d, min_side=1e-3)
        first, second, third = perm_terms(params, x, y, z)
        scale = np.maximum.reduce([np.abs(first), np.abs(second), np.abs(third)])

        assert np.all(first + second + third >= -1e-12 * scale)


class TestPermTotal:
    def test_right_angle_triple(self, unit_params):
        assert perm_total(unit_params, RIGHT_ANGLE) == pytest.approx(1.0)

    def test_half_squared_curvature_in_the_plane(self, rng, unit_params):
        # Arrange
        xs, ys, zs = random_triples(rng, 100, 2, min_side=0.05)

        for x, y, z in zip(xs, ys, zs):
            t = Triple.of(x, y, z)
            # Act
            total = perm_total(unit_params, t)
            # Assert
            assert total == pytest.approx(menger_curvature(t) ** 2 / 2.0, rel=1e-9, abs=1e-10)

    def test_positive_for_open_alpha(self):
        params = KernelParams(alpha=0.5, n=1)
        assert perm_total(params, Triple.of([0, 0], [1, 0], [0, 1])) > 0.0

    def test_collinear_triple_vanishes(self, unit_params):
        assert abs(perm_total(unit_params, COLLINEAR)) < 1e-12


class TestBoundReport:
    def test_lower_ratio_of_right_angle_triple(self):
        params = KernelParams(alpha=0.5, n=1)

        report = bound_report(params, RIGHT_ANGLE, axis=1)

        assert report.value == pytest.approx(2.0**-0.75)
        assert report.lower_ratio == pytest.approx(2.0**0.75)
        assert report.upper_ratio == pytest.approx(2.0**-0.75 * math.sqrt(2.0))
        assert report.curvature_ratio is None

    def test_flat_axis_uses_infinite_sentinel(self):
        params = KernelParams(alpha=0.5, n=1, d=3)
        t = Triple.of([0, 0, 0], [1, 0, 0], [0, 1, 0])

        report = bound_report(params, t, axis=2)

        assert report.lower_ratio == math.inf
        assert report.value == 0.0

    def test_collinear_triple(self, unit_params):
        report = bound_report(unit_params, COLLINEAR)

        assert report.collinear
        assert abs(report.value) < 1e-12
        assert report.curvature_ratio is None

    def test_curvature_ratio_at_unit_alpha(self, unit_params):
        report = bound_report(unit_params, RIGHT_ANGLE, hyperplane_axis=1)

        # p^0 = 1/2 and c^2 = 2
        assert report.curvature_ratio == pytest.approx(0.25)

    def test_bad_hyperplane_axis(self, unit_params):
        with pytest.raises(AxisOutOfRange):
            bound_report(unit_params, RIGHT_ANGLE, hyperplane_axis=5)


class TestTripleSampler:
    def test_chunks_are_reproducible(self):
        first = TripleSampler(3, seed=7, chunk_size=64).chunk(2)
        second = TripleSampler(3, seed=7, chunk_size=64).chunk(2)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_rejection_rules(self):
        sampler = TripleSampler(2, seed=1, chunk_size=512)
        x, y, z = sampler.sample(1000)
        sides = np.stack(
            [
                np.linalg.norm(x - y, axis=1),
                np.linalg.norm(y - z, axis=1),
                np.linalg.norm(x - z, axis=1),
            ],
            axis=1,
        )

        assert x.shape == (1000, 2)
        assert sides.min() >= 1e-3
        assert np.all(sides.max(axis=1) <= 1e3 * sides.min(axis=1))
        assert np.all(np.linalg.norm(x, axis=1) <= 1.0)

    def test_axis_degenerate_triples_share_a_coordinate(self):
        x, y, z = TripleSampler(3, seed=2, chunk_size=32).chunk(0, "near_axis_degenerate", axis=1)

        np.testing.assert_array_equal(x[:, 1], y[:, 1])
        np.testing.assert_array_equal(y[:, 1], z[:, 1])


class TestPermCheck:
    def test_single_sample(self, unit_params):
        report = perm_check(unit_params, samples=1, seed=3)

        assert report.samples == 1
        assert report.total_ratio.count == 1

    def test_no_sign_violations_at_unit_alpha(self, unit_params):
        report = perm_check(unit_params, samples=10_000, seed=11)

        assert report.sign_violations == 0
        assert report.vanishing_max <= 1e-10
        assert report.total_ratio.minimum > 0.0

    def test_envelopes_for_open_alpha(self):
        params = KernelParams(alpha=0.5, n=2, d=3)

        report = perm_check(params, samples=4000, seed=5)

        assert 0.0 < report.total_ratio.minimum <= report.total_ratio.maximum < math.inf
        assert all(math.isfinite(envelope.maximum) for envelope in report.upper_ratio)
        assert report.vanishing_max is None
        assert report.curvature_floor is None

    def test_curvature_floor(self):
        params = KernelParams(alpha=1.0, n=2, d=2)

        report = perm_check(params, samples=4000, seed=13, theta0=0.3, hyperplane_axis=1)

        assert report.curvature_samples > 0
        assert report.curvature_floor > 0.0
        assert "curvature_floor" in report.drift

    def test_independent_of_partition_count(self):
        params = KernelParams(alpha=0.7, n=1, d=2)

        one = perm_check(params, samples=3000, seed=9, partitions=1, chunk_size=512)
        many = perm_check(params, samples=3000, seed=9, partitions=5, chunk_size=512)

        assert one == many

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_envelopes_settle_when_the_sample_doubles(self, d, n, alpha):
        # Arrange
        params = KernelParams(alpha=alpha, n=n, d=d)

        # Act
        report = perm_check(params, samples=100_000, seed=17)

        # Assert
        assert report.total_ratio.minimum > 0.0
        assert all(math.isfinite(envelope.maximum) for envelope in report.upper_ratio)
        assert report.drift["upper_ratio_max"] < 0.1
        assert report.drift["total_ratio_min"] < 0.1

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("d", [2, 3])
    def test_curvature_floor_settles_when_the_sample_doubles(self, d, n):
        params = KernelParams(alpha=1.0, n=n, d=d)

        report = perm_check(params, samples=100_000, seed=19, theta0=0.3)

        assert report.curvature_floor > 0.0
        assert report.drift["curvature_floor"] < 0.1

    def test_hyperplane_axis_out_of_range(self, unit_params):
        with pytest.raises(AxisOutOfRange):
            perm_check(unit_params, samples=10, hyperplane_axis=2)

    def test_needs_a_sample(self, unit_params):
        with pytest.raises(ParameterDomainError):
            perm_check(unit_params, samples=0)
