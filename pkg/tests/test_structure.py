"""Tests for point structures, Lee data and H data."""
from dataclasses import FrozenInstanceError

import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemprod.exceptions import GenerationError, InvalidInputError
from riemprod.geometry.structure import (
    NablaThetaData,
    adapted_structure,
    draw_theta,
    generate_H,
    generate_structure,
    generate_theta,
    gram_schmidt,
    lee_from_omega,
    lee_from_theta,
    lee_residuals,
    project_nabla_theta,
    random_admissible_s,
    structure_from_arrays,
    validate_nabla_theta,
    validate_structure,
)
from riemprod.utils.rng import Stream, derived_seed, stream, trial_seed
from riemprod.utils.tensors import worst


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("epsilon", [-1, 1])
@pytest.mark.parametrize("seed", [0, 1, 17])
def test_generated_structure_is_valid(n, epsilon, seed):
    """Test generated structures satisfy every axiom at 1e-12."""
    ps = generate_structure(n, epsilon, seed)
    report = validate_structure(ps)
    assert report.passed, report.label
    assert ps.dim == 2 * n
    assert ps.frame_plus.shape == (2 * n, n)


def test_generation_is_deterministic():
    """Test the same seed gives the same arrays."""
    a = generate_structure(3, 1, 5)
    b = generate_structure(3, 1, 5)
    assert np.array_equal(a.g, b.g)
    assert np.array_equal(a.P, b.P)


def test_epsilon_does_not_change_arrays():
    """Test epsilon is a label on top of a seed-determined structure."""
    a = generate_structure(3, 1, 5)
    b = generate_structure(3, -1, 5)
    assert np.array_equal(a.P, b.P)


def test_epsilon_is_fixed_at_construction():
    """Test a structure cannot be relabelled in place; the other sign comes from regenerating."""
    ps = generate_structure(2, 1, 0)
    with pytest.raises(FrozenInstanceError):
        ps.epsilon = -1
    assert not hasattr(ps, "with_epsilon")
    assert generate_structure(2, -1, 0).epsilon == -1


def test_generation_rejects_small_n():
    """Test n < 2 is refused."""
    with pytest.raises(InvalidInputError):
        generate_structure(1, 1, 0)


@pytest.mark.parametrize("epsilon", [0, 2])
def test_generation_rejects_bad_epsilon(epsilon):
    """Test epsilon must be a sign."""
    with pytest.raises(InvalidInputError):
        generate_structure(2, epsilon, 0)


def test_arrays_are_read_only():
    """Test structure arrays cannot be mutated."""
    ps = generate_structure(2, 1, 0)
    with pytest.raises(ValueError):
        ps.g[0, 0] = 5.0


def test_adapted_model_accepted():
    """Test g = I, P = diag(1,1,-1,-1) passes validation."""
    ps = adapted_structure(2, 1)
    assert validate_structure(ps).passed


def test_trace_violation_rejected():
    """Test P = diag(1,1,1,-1) fails validation."""
    ps = structure_from_arrays(np.eye(4), np.diag([1.0, 1.0, 1.0, -1.0]), 1)
    assert not validate_structure(ps).passed


def test_non_symmetric_metric_rejected():
    """Test a non-symmetric g fails validation."""
    g = np.eye(4)
    g[0, 1] = 0.3
    ps = structure_from_arrays(g, np.diag([1.0, 1.0, -1.0, -1.0]), 1)
    assert not validate_structure(ps).passed


def test_incompatible_product_structure_rejected():
    """Test a traceless involution that is not g-orthogonal fails on compatibility."""
    P = np.diag([1.0, 1.0, -1.0, -1.0])
    B = np.eye(4)
    B[0, 2] = 0.5
    P_skew = B @ P @ np.linalg.inv(B)
    ps = structure_from_arrays(np.eye(4), P_skew, 1)
    report = validate_structure(ps)
    assert not report.passed


def test_singular_metric_raises():
    """Test structure_from_arrays refuses a singular metric."""
    with pytest.raises(InvalidInputError):
        structure_from_arrays(np.zeros((4, 4)), np.eye(4), 1)


def test_gram_schmidt_orthonormal():
    """Test columns come out g-orthonormal."""
    rng = np.random.default_rng(3)
    A = rng.uniform(-1, 1, (4, 4))
    g = A.T @ A + 4 * np.eye(4)
    basis = gram_schmidt(rng.uniform(-1, 1, (4, 3)), g)
    assert_allclose(basis.T @ g @ basis, np.eye(3), atol=1e-12)


def test_gram_schmidt_collapse():
    """Test dependent columns raise in strict mode and are dropped otherwise."""
    vectors = np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(GenerationError):
        gram_schmidt(vectors, np.eye(4))
    assert gram_schmidt(vectors, np.eye(4), strict=False).shape == (4, 1)


def test_lee_from_omega_adapted():
    """Test Omega = e3 on the adapted model gives theta = e3 and theta(Omega) = 1."""
    ps = adapted_structure(2, -1)
    lee = lee_from_omega(ps, [0.0, 0.0, 1.0, 0.0])
    assert_allclose(lee.theta, [0.0, 0.0, 1.0, 0.0])
    assert lee.theta_omega == pytest.approx(1.0)
    assert worst(lee_residuals(ps, lee)).passed


@pytest.mark.parametrize("epsilon", [-1, 1])
@pytest.mark.parametrize("seed", [0, 4, 9])
def test_generated_theta_respects_sign(epsilon, seed):
    """Test theta(Px) = eps theta(x) and P Omega = eps Omega."""
    ps = generate_structure(3, epsilon, seed)
    lee = generate_theta(ps, seed)
    assert worst(lee_residuals(ps, lee)).passed
    assert lee.theta_omega >= 0.0


def test_zero_scale_theta():
    """Test scale 0 yields the zero Lee form."""
    ps = generate_structure(2, 1, 0)
    lee = generate_theta(ps, 0, scale=0.0)
    assert_allclose(lee.theta, np.zeros(4))
    assert lee.theta_omega == 0.0


def test_negative_scale_rejected():
    """Test negative coefficient ranges are refused."""
    ps = generate_structure(2, 1, 0)
    with pytest.raises(InvalidInputError):
        generate_theta(ps, 0, scale=-1.0)


def test_lee_from_theta_checks_sign():
    """Test a covector in the wrong eigenspace is rejected."""
    ps = adapted_structure(2, 1)
    with pytest.raises(InvalidInputError) as info:
        lee_from_theta(ps, [0.0, 0.0, 1.0, 0.0])
    assert info.value.report is not None
    lee = lee_from_theta(ps, [1.0, 0.0, 0.0, 0.0])
    assert lee.theta_omega == pytest.approx(1.0)


@pytest.mark.parametrize("sign", [-1, 1])
def test_draw_theta_sign(sign):
    """Test drawn covectors lie in the requested eigenspace."""
    ps = generate_structure(3, 1, 2)
    theta = draw_theta(ps, 2, sign)
    assert_allclose(theta @ ps.P, sign * theta, atol=1e-12)


def test_projector_on_metric():
    """Test the H projector maps g to (g + eps g~)/2."""
    for epsilon in (-1, 1):
        ps = generate_structure(3, epsilon, 1)
        expected = 0.5 * (ps.g + epsilon * ps.g_tilde)
        assert_allclose(project_nabla_theta(ps.g, ps), expected, atol=1e-12)


def test_projector_kills_antisymmetric():
    """Test antisymmetric input projects to zero."""
    ps = generate_structure(2, 1, 1)
    A = np.random.default_rng(0).uniform(-1, 1, (4, 4))
    assert_allclose(project_nabla_theta(A - A.T, ps), np.zeros((4, 4)), atol=1e-14)


def test_projector_is_idempotent():
    """Test projecting twice equals projecting once."""
    ps = generate_structure(3, -1, 8)
    H0 = np.random.default_rng(1).uniform(-1, 1, (6, 6))
    once = project_nabla_theta(H0, ps)
    assert_allclose(project_nabla_theta(once, ps), once, atol=1e-12)


@pytest.mark.parametrize("epsilon", [-1, 1])
def test_generated_H_is_admissible(epsilon):
    """Test H is symmetric and P-compatible."""
    ps = generate_structure(4, epsilon, 3)
    assert validate_nabla_theta(ps, generate_H(ps, 3)).passed


def test_non_admissible_H_fails_validation():
    """Test a generic symmetric tensor fails the P-compatibility checks."""
    ps = generate_structure(2, 1, 0)
    S = np.random.default_rng(5).uniform(-1, 1, (4, 4))
    assert not validate_nabla_theta(ps, NablaThetaData(H=S + S.T)).passed


def test_random_admissible_s():
    """Test S is symmetric and S(x,Py) = S(y,Px)."""
    ps = generate_structure(3, 1, 6)
    S = random_admissible_s(ps, 6)
    assert_allclose(S, S.T, atol=1e-12)
    assert_allclose(S @ ps.P, (S @ ps.P).T, atol=1e-12)


def test_streams_are_independent_and_repeatable():
    """Test streams differ by purpose and repeat for equal keys."""
    a = stream(7, Stream.THETA).uniform(size=3)
    b = stream(7, Stream.THETA).uniform(size=3)
    c = stream(7, Stream.CURVATURE).uniform(size=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert trial_seed(42, 0) != trial_seed(42, 1)
    assert derived_seed(42, Stream.CONTROL, 3) == derived_seed(42, Stream.CONTROL, 3)


def test_negative_seed_rejected():
    """Test seeds must be non-negative."""
    with pytest.raises(InvalidInputError):
        stream(-1, Stream.TRIAL)
