"""Tests for the natural connection family and its curvature relations."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from riemprod.exceptions import InvalidInputError, PredicateError
from riemprod.geometry.connection import (
    ConnectionParams,
    Mode,
    canonical_ricci_residuals,
    d_connection_residuals,
    k_from_r,
    k_from_rprime,
    parallel_torsion_k,
    parallel_torsion_trace_residuals,
    params_preset,
    pq_vectors,
    q_from_torsion,
    r_from_rprime,
    ricci_relation_residuals,
    s_tensors,
    torsion,
)
from riemprod.geometry.curvature import is_curvature_like, is_p_tensor, pi_tensors, random_curvature_like, random_p_tensor
from riemprod.geometry.structure import (
    adapted_structure,
    generate_H,
    generate_structure,
    generate_theta,
    lee_from_omega,
    zero_nabla_theta,
)
from riemprod.services.verification import random_params
from riemprod.utils.tensors import worst


def _instance(n, epsilon, seed, cp=None, zero_h=False):
    ps = generate_structure(n, epsilon, seed)
    lee = generate_theta(ps, seed)
    H = zero_nabla_theta(ps) if zero_h else generate_H(ps, seed)
    return ps, lee, cp or random_params(seed), H, random_p_tensor(ps, seed).L


def test_presets():
    """Test canonical and D presets resolve against n."""
    assert params_preset("canonical", 2) == ConnectionParams(0.0, -1.0 / 8, "canonical")
    assert params_preset("D", 5).to_dict() == {"lambda": 0.0, "mu": 0.0}
    with pytest.raises(InvalidInputError):
        params_preset("levi-civita", 2)


def test_torsion_example():
    """Test T(e1,e2,e2) = 1/4 for D on the adapted model with Omega = e1."""
    ps = adapted_structure(2, 1)
    lee = lee_from_omega(ps, [1.0, 0.0, 0.0, 0.0])
    T = torsion(ps, lee, ConnectionParams.d_connection())
    assert T[0, 1, 1] == pytest.approx(0.25)


def test_torsion_zero_theta():
    """Test theta = 0 gives zero torsion."""
    ps = generate_structure(2, 1, 0)
    lee = generate_theta(ps, 0, scale=0.0)
    assert_allclose(torsion(ps, lee, ConnectionParams(0.3, -0.7)), np.zeros((4,) * 3))


def test_torsion_antisymmetric():
    """Test T(x,y,z) = -T(y,x,z)."""
    ps = generate_structure(3, -1, 2)
    T = torsion(ps, generate_theta(ps, 2), ConnectionParams(0.4, 0.9))
    assert_allclose(T, -T.transpose(1, 0, 2), atol=1e-12)


def test_q_from_torsion():
    """Test Q(x,y,z) = T(z,x,y) and three cyclic shifts return T."""
    ps = adapted_structure(2, 1)
    lee = lee_from_omega(ps, [1.0, 0.0, 0.0, 0.0])
    T = torsion(ps, lee, ConnectionParams.d_connection())
    Q = q_from_torsion(T)
    assert Q[1, 0, 1] == pytest.approx(T[1, 1, 0])
    assert Q[1, 0, 1] == pytest.approx(0.0)
    assert_allclose(q_from_torsion(q_from_torsion(Q)), T)


def test_pq_canonical_example():
    """Test p = q = -Omega/8 and the Gram entries on the adapted model."""
    ps = adapted_structure(2, -1)
    lee = lee_from_omega(ps, [0.0, 0.0, 1.0, 0.0])
    pq = pq_vectors(ps, lee, ConnectionParams.canonical(2))
    assert_allclose(pq.p, [0.0, 0.0, -0.125, 0.0])
    assert_allclose(pq.q, [0.0, 0.0, -0.125, 0.0])
    assert pq.gpp == pytest.approx(1 / 64)
    assert pq.gqq == pytest.approx(1 / 64)
    assert -ps.epsilon * pq.gpq == pytest.approx(1 / 64)


def test_pq_d_example():
    """Test D gives p = eps Omega / 2n and q = 0."""
    ps = adapted_structure(2, -1)
    lee = lee_from_omega(ps, [0.0, 0.0, 1.0, 0.0])
    pq = pq_vectors(ps, lee, ConnectionParams.d_connection())
    assert_allclose(pq.p, [0.0, 0.0, -0.25, 0.0])
    assert_allclose(pq.q, np.zeros(4))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("epsilon", [-1, 1])
@pytest.mark.parametrize("seed", [0, 3])
def test_modes_agree(n, epsilon, seed):
    """Test the general and specialized p, q, S', S'', S coincide."""
    ps, lee, cp, H, _ = _instance(n, epsilon, seed)
    pq_s, pq_g = pq_vectors(ps, lee, cp, Mode.SPECIALIZED), pq_vectors(ps, lee, cp, Mode.GENERAL)
    st_s, st_g = s_tensors(ps, lee, cp, H, Mode.SPECIALIZED), s_tensors(ps, lee, cp, H, Mode.GENERAL)
    assert_allclose(pq_s.p, pq_g.p, atol=1e-12)
    assert_allclose(pq_s.q, pq_g.q, atol=1e-12)
    assert_allclose(st_s.s_prime, st_g.s_prime, atol=1e-11)
    assert_allclose(st_s.s_double_prime, st_g.s_double_prime, atol=1e-11)
    assert_allclose(st_s.s, st_g.s, atol=1e-11)


def test_canonical_s_has_no_h_part():
    """Test S = theta(Omega)(g - eps g~)/32n^2 for the canonical connection."""
    ps, lee, _, H, _ = _instance(3, -1, 1)
    S = s_tensors(ps, lee, ConnectionParams.canonical(3), H).s
    expected = lee.theta_omega * (ps.g - ps.epsilon * ps.g_tilde) / (32 * 9)
    assert_allclose(S, expected, atol=1e-12)


def test_parallel_torsion_s_tensors():
    """Test H = 0 leaves opposite theta x theta terms in S' and S''."""
    ps, lee, cp, H, _ = _instance(2, 1, 6, zero_h=True)
    st = s_tensors(ps, lee, cp, H)
    coefficient = (cp.mu + ps.epsilon * cp.lam) / (2 * ps.n)
    assert_allclose(st.s_prime, -coefficient * np.outer(lee.theta, lee.theta), atol=1e-12)
    assert_allclose(st.s_prime + st.s_double_prime, np.zeros((4, 4)), atol=1e-12)


def test_k_from_r_examples():
    """Test K of a P-tensor, of pi1 and of pi3."""
    ps = generate_structure(2, 1, 2)
    pi = pi_tensors(ps)
    L = random_p_tensor(ps, 2).L
    assert_allclose(k_from_r(L, ps), L, atol=1e-9)
    assert_allclose(k_from_r(pi.pi1, ps), 0.5 * (pi.pi1 + pi.pi2), atol=1e-9)
    assert_allclose(k_from_r(pi.pi3, ps), pi.pi3, atol=1e-9)


def test_k_from_r_requires_curvature_like():
    """Test a random array is rejected."""
    ps = generate_structure(2, 1, 0)
    with pytest.raises(PredicateError):
        k_from_r(np.random.default_rng(0).uniform(-1, 1, (4,) * 4), ps)


def test_r_from_rprime_trivial():
    """Test theta = 0 and H = 0 give R = R'."""
    ps = generate_structure(3, 1, 0)
    lee = generate_theta(ps, 0, scale=0.0)
    L = random_p_tensor(ps, 0).L
    R = r_from_rprime(L, ps, lee, ConnectionParams(0.2, 0.5), zero_nabla_theta(ps))
    assert_allclose(R, L)


def test_r_from_rprime_requires_p_tensor():
    """Test a curvature-like tensor without P-invariance is rejected."""
    ps, lee, cp, H, _ = _instance(2, 1, 0)
    with pytest.raises(PredicateError):
        r_from_rprime(random_curvature_like(ps, 0).L, ps, lee, cp, H)


@pytest.mark.parametrize("epsilon", [-1, 1])
def test_r_from_rprime_is_curvature_like(epsilon):
    """Test R passes the curvature-like predicate for closed-theta data."""
    ps, lee, cp, H, Rprime = _instance(3, epsilon, 5)
    assert is_curvature_like(r_from_rprime(Rprime, ps, lee, cp, H)).passed


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("epsilon", [-1, 1])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_k_loop(n, epsilon, seed):
    """Test K = R' - (psi1+psi2)(S) equals the average of R over P-pairs."""
    ps, lee, cp, H, Rprime = _instance(n, epsilon, seed)
    K = k_from_rprime(Rprime, ps, lee, cp, H)
    R = r_from_rprime(Rprime, ps, lee, cp, H)
    scale = max(1.0, np.max(np.abs(K)))
    assert np.max(np.abs(K - k_from_r(R, ps))) / scale < 1e-9
    assert is_p_tensor(K, ps).passed


def test_k_from_rprime_trivial():
    """Test theta = 0, H = 0 give K = R'."""
    ps = generate_structure(2, -1, 3)
    lee = generate_theta(ps, 3, scale=0.0)
    L = random_p_tensor(ps, 3).L
    assert_allclose(k_from_rprime(L, ps, lee, ConnectionParams(0.1, 0.2), zero_nabla_theta(ps)), L)


@pytest.mark.parametrize("epsilon", [-1, 1])
def test_canonical_k_form(epsilon):
    """Test K = R' - theta(Omega)(pi1 + pi2 - eps pi3)/16n^2 for the canonical connection."""
    ps, lee, _, H, Rprime = _instance(3, epsilon, 4)
    K = k_from_rprime(Rprime, ps, lee, ConnectionParams.canonical(3), H)
    pi = pi_tensors(ps)
    expected = Rprime - lee.theta_omega * (pi.pi1 + pi.pi2 - epsilon * pi.pi3) / (16 * 9)
    assert_allclose(K, expected, atol=1e-9 * max(1.0, np.max(np.abs(K))))
    assert worst(canonical_ricci_residuals(Rprime, K, ps, lee)).passed


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("epsilon", [-1, 1])
def test_ricci_relation(n, epsilon):
    """Test the Ricci relation between R' and K and its traces."""
    ps, lee, cp, H, Rprime = _instance(n, epsilon, 8)
    S = s_tensors(ps, lee, cp, H).s
    K = k_from_rprime(Rprime, ps, lee, cp, H)
    assert worst(ricci_relation_residuals(Rprime, K, S, ps)).passed


@pytest.mark.parametrize("epsilon", [-1, 1])
def test_parallel_torsion(epsilon):
    """Test the H = 0 form of K, with the minus sign on the pi3 term, and its traces."""
    ps, lee, cp, H, Rprime = _instance(3, epsilon, 9, zero_h=True)
    K = k_from_rprime(Rprime, ps, lee, cp, H)
    pq = pq_vectors(ps, lee, cp)
    assert_allclose(K, parallel_torsion_k(Rprime, ps, pq), atol=1e-9 * max(1.0, np.max(np.abs(K))))
    assert worst(parallel_torsion_trace_residuals(Rprime, K, ps, pq)).passed


@pytest.mark.parametrize("epsilon", [-1, 1])
def test_d_connection(epsilon):
    """Test R = R' - theta(Omega) pi1/4n^2 and its contractions for D."""
    ps, lee, _, H, Rprime = _instance(3, epsilon, 10, zero_h=True)
    R = r_from_rprime(Rprime, ps, lee, ConnectionParams.d_connection(), H)
    assert worst(d_connection_residuals(Rprime, R, ps, lee)).passed
