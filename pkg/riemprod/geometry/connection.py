"""The two-parameter family of natural connections and its curvature relations."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from riemprod.exceptions import InvalidInputError, PredicateError
from riemprod.geometry.curvature import (
    contractions, is_curvature_like, is_p_tensor, pi_tensors, psi1, psi2, psi_sum
)
from riemprod.geometry.structure import LeeData, NablaThetaData, PointStructure
from riemprod.models import ResidualReport
from riemprod.utils.tensors import DEFAULT_TOL, apply_p, as_tensor, freeze, g_inner, residual, trace_with

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    """GENERAL uses the formulas valid on any W1 point; SPECIALIZED assumes theta o P = eps theta."""
    GENERAL = "general"
    SPECIALIZED = "specialized"


@dataclass(frozen=True)
class ConnectionParams:
    """Coordinates (lambda, mu) of a natural connection."""
    lam: float
    mu: float
    name: Optional[str] = None

    @classmethod
    def canonical(cls, n: int) -> "ConnectionParams":
        return cls(lam=0.0, mu=-1.0 / (4 * n), name="canonical")

    @classmethod
    def d_connection(cls) -> "ConnectionParams":
        return cls(lam=0.0, mu=0.0, name="D")

    def to_dict(self) -> Dict[str, float]:
        return {"lambda": self.lam, "mu": self.mu}


def params_preset(name: str, n: int) -> ConnectionParams:
    """Resolve a named preset ("canonical" or "D") against the half-dimension n."""
    key = name.strip().lower()
    if key == "canonical":
        return ConnectionParams.canonical(n)
    if key == "d":
        return ConnectionParams.d_connection()
    raise InvalidInputError(f"Unknown connection preset: {name}")


@dataclass(frozen=True)
class PQData:
    """The vectors p, q and their Gram entries."""
    p: np.ndarray
    q: np.ndarray
    gpp: float
    gqq: float
    gpq: float

    def __post_init__(self):
        object.__setattr__(self, "p", freeze(self.p))
        object.__setattr__(self, "q", freeze(self.q))


@dataclass(frozen=True)
class STensors:
    """S', S'' and the combined S entering K = R' - (psi1+psi2)(S)."""
    s_prime: np.ndarray
    s_double_prime: np.ndarray
    s: np.ndarray


def _wedge(S: np.ndarray, v: np.ndarray) -> np.ndarray:
    """S(y,z)v(x) - S(x,z)v(y) at (x,y,z)."""
    return np.einsum("bc,a->abc", S, v) - np.einsum("ac,b->abc", S, v)


def torsion(ps: PointStructure, lee: LeeData, cp: ConnectionParams) -> np.ndarray:
    """
    Torsion T(x,y,z) of the natural connection with parameters (lambda, mu).

    T = 1/2n {g(y,z)th(Px) - g(x,z)th(Py)}
        + lambda {g(y,z)th(x) - g(x,z)th(y) + g(y,Pz)th(Px) - g(x,Pz)th(Py)}
        + mu {g(y,Pz)th(x) - g(x,Pz)th(y) + g(y,z)th(Px) - g(x,z)th(Py)}
    """
    g, gt = ps.g, ps.g_tilde
    theta = lee.theta
    theta_p = theta @ ps.P
    return (
        _wedge(g, theta_p) / (2 * ps.n)
        + cp.lam * (_wedge(g, theta) + _wedge(gt, theta_p))
        + cp.mu * (_wedge(gt, theta) + _wedge(g, theta_p))
    )


def q_from_torsion(T) -> np.ndarray:
    """Q(x,y,z) = T(z,x,y)."""
    T = as_tensor(T, 3)
    return np.einsum("cab->abc", T)


def pq_vectors(
    ps: PointStructure,
    lee: LeeData,
    cp: ConnectionParams,
    mode: Mode = Mode.SPECIALIZED
) -> PQData:
    """
    The vectors p and q.

    General: p = lambda Omega + (mu + 1/2n) P Omega, q = lambda P Omega + mu Omega.
    Specialized: p = (lambda + eps mu + eps/2n) Omega, q = (mu + eps lambda) Omega.
    """
    n, eps = ps.n, ps.epsilon
    omega = lee.omega
    if Mode(mode) is Mode.GENERAL:
        p_omega = ps.P @ omega
        p = cp.lam * omega + (cp.mu + 1.0 / (2 * n)) * p_omega
        q = cp.lam * p_omega + cp.mu * omega
    else:
        p = (cp.lam + eps * cp.mu + eps / (2 * n)) * omega
        q = (cp.mu + eps * cp.lam) * omega
    g = ps.g
    return PQData(p=p, q=q, gpp=g_inner(g, p, p), gqq=g_inner(g, q, q), gpq=g_inner(g, p, q))


def s_tensors(
    ps: PointStructure,
    lee: LeeData,
    cp: ConnectionParams,
    H: NablaThetaData,
    mode: Mode = Mode.SPECIALIZED
) -> STensors:
    """
    S', S'' of the curvature relation between R and R', and S of K = R' - (psi1+psi2)(S).

    The specialized S uses the closed form
        S = (lambda + eps mu + eps/4n) H + (g(p,p)+g(q,q))/4 g + g(p,q)/2 g~.
    In general mode S is assembled as (S' + S'')/2 plus the same metric terms,
    which is how it arises from averaging R over (z,w) -> (Pz,Pw).
    """
    n, eps = ps.n, ps.epsilon
    lam, mu = cp.lam, cp.mu
    theta = lee.theta
    Hm = as_tensor(H.H, 2, ps.dim)
    pq = pq_vectors(ps, lee, cp, mode)

    if Mode(mode) is Mode.GENERAL:
        theta_p = theta @ ps.P
        H_p = Hm @ ps.P
        s_prime = (
            lam * Hm + (mu + 1.0 / (2 * n)) * H_p
            - (lam * np.outer(theta, theta_p) + mu * np.outer(theta, theta)) / (2 * n)
        )
        s_double_prime = (
            lam * Hm + mu * H_p
            + (lam * np.outer(theta_p, theta) + mu * np.outer(theta_p, theta_p)) / (2 * n)
        )
        core = 0.5 * (s_prime + s_double_prime)
    else:
        quadratic = (mu + eps * lam) / (2 * n) * np.outer(theta, theta)
        s_prime = (lam + eps * mu + eps / (2 * n)) * Hm - quadratic
        s_double_prime = (lam + eps * mu) * Hm + quadratic
        core = (lam + eps * mu + eps / (4 * n)) * Hm

    s = core + (pq.gpp + pq.gqq) / 4.0 * ps.g + pq.gpq / 2.0 * ps.g_tilde
    return STensors(s_prime=s_prime, s_double_prime=s_double_prime, s=s)


def _require(report: ResidualReport, what: str) -> None:
    if not report.passed:
        raise PredicateError(f"{what} (relative residual {report.relative:.3e})", report=report)


def k_from_r(R, ps: PointStructure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    K(x,y,z,w) = [R(x,y,z,w) + R(x,y,Pz,Pw)] / 2.

    Raises:
        PredicateError: If R is not curvature-like at tol
    """
    R = as_tensor(R, 4, ps.dim)
    _require(is_curvature_like(R, tol), "R is not curvature-like")
    return 0.5 * (R + apply_p(R, ps.P, (3, 4)))


def r_from_rprime(
    Rprime,
    ps: PointStructure,
    lee: LeeData,
    cp: ConnectionParams,
    H: NablaThetaData,
    mode: Mode = Mode.SPECIALIZED,
    tol: float = DEFAULT_TOL
) -> np.ndarray:
    """
    Levi-Civita curvature from the curvature of a natural connection:

    R = R' - g(p,p) pi1 - g(q,q) pi2 - g(p,q) pi3 - psi1(S') - psi2(S'').

    Raises:
        PredicateError: If R' is not a Riemannian P-tensor at tol
    """
    Rprime = as_tensor(Rprime, 4, ps.dim)
    _require(is_p_tensor(Rprime, ps, tol), "R' is not a Riemannian P-tensor")
    pq = pq_vectors(ps, lee, cp, mode)
    st = s_tensors(ps, lee, cp, H, mode)
    pi = pi_tensors(ps)
    return (
        Rprime
        - pq.gpp * pi.pi1 - pq.gqq * pi.pi2 - pq.gpq * pi.pi3
        - psi1(st.s_prime, ps) - psi2(st.s_double_prime, ps)
    )


def k_from_rprime(
    Rprime,
    ps: PointStructure,
    lee: LeeData,
    cp: ConnectionParams,
    H: NablaThetaData,
    tol: float = DEFAULT_TOL
) -> np.ndarray:
    """
    K = R' - (psi1+psi2)(S) for a closed Lee form.

    Raises:
        PredicateError: If R' is not a P-tensor or H is not symmetric
    """
    Rprime = as_tensor(Rprime, 4, ps.dim)
    _require(is_p_tensor(Rprime, ps, tol), "R' is not a Riemannian P-tensor")
    _require(residual(H.H, H.H.T, tol), "H is not symmetric (theta is not closed)")
    st = s_tensors(ps, lee, cp, H)
    return Rprime - psi_sum(st.s, ps)


def parallel_torsion_k(Rprime, ps: PointStructure, pq: PQData) -> np.ndarray:
    """K = R' - (g(p,p)+g(q,q))/2 (pi1+pi2) - g(p,q) pi3, valid when H = 0."""
    pi = pi_tensors(ps)
    return (
        np.asarray(Rprime, dtype=np.float64)
        - 0.5 * (pq.gpp + pq.gqq) * (pi.pi1 + pi.pi2)
        - pq.gpq * pi.pi3
    )


def ricci_relation_residuals(
    Rprime,
    K,
    S: np.ndarray,
    ps: PointStructure,
    tol: float = DEFAULT_TOL
) -> Dict[str, ResidualReport]:
    """
    rho(K) = rho' - tr S g - tr S~ g~ - 2(n-2) S, with S~(y,z) = S(y,Pz),
    and the traces tr S = (tau' - tau(K))/4(n-1), tr S~ = (tau'* - tau*(K))/4(n-1).
    """
    n = ps.n
    c_prime = contractions(Rprime, ps)
    c_k = contractions(K, ps)
    S_tilde = S @ ps.P
    tr_s = trace_with(ps.g_inv, S)
    tr_s_tilde = trace_with(ps.g_inv, S_tilde)
    expected_rho = c_prime.rho - tr_s * ps.g - tr_s_tilde * ps.g_tilde - 2 * (n - 2) * S
    return {
        "ricci": residual(c_k.rho, expected_rho, tol),
        "trace_s": residual(tr_s, (c_prime.tau - c_k.tau) / (4 * (n - 1)), tol),
        "trace_s_tilde": residual(tr_s_tilde, (c_prime.tau_star - c_k.tau_star) / (4 * (n - 1)), tol),
    }


def canonical_ricci_residuals(
    Rprime,
    K,
    ps: PointStructure,
    lee: LeeData,
    tol: float = DEFAULT_TOL
) -> Dict[str, ResidualReport]:
    """
    Canonical connection: rho(K) = rho' - (n-1) theta(Omega)(g - eps g~)/8n^2 and
    theta(Omega) = 4n(tau' - tau(K))/(n-1) = -4n eps (tau'* - tau*(K))/(n-1).
    """
    n, eps, t = ps.n, ps.epsilon, lee.theta_omega
    c_prime = contractions(Rprime, ps)
    c_k = contractions(K, ps)
    return {
        "canonical_ricci": residual(
            c_k.rho, c_prime.rho - (n - 1) * t * (ps.g - eps * ps.g_tilde) / (8 * n * n), tol
        ),
        "canonical_tau": residual(t, 4 * n * (c_prime.tau - c_k.tau) / (n - 1), tol),
        "canonical_tau_star": residual(t, -4 * n * eps * (c_prime.tau_star - c_k.tau_star) / (n - 1), tol),
    }


def parallel_torsion_trace_residuals(
    Rprime,
    K,
    ps: PointStructure,
    pq: PQData,
    tol: float = DEFAULT_TOL
) -> Dict[str, ResidualReport]:
    """tau(K) = tau' - 2n(n-1)(g(p,p)+g(q,q)) and tau*(K) = tau'* - 4n(n-1) g(p,q)."""
    n = ps.n
    c_prime = contractions(Rprime, ps)
    c_k = contractions(K, ps)
    return {
        "tau_k": residual(c_k.tau, c_prime.tau - 2 * n * (n - 1) * (pq.gpp + pq.gqq), tol),
        "tau_star_k": residual(c_k.tau_star, c_prime.tau_star - 4 * n * (n - 1) * pq.gpq, tol),
    }


def d_connection_residuals(
    Rprime,
    R,
    ps: PointStructure,
    lee: LeeData,
    tol: float = DEFAULT_TOL
) -> Dict[str, ResidualReport]:
    """
    Connection D with parallel torsion: R = R' - theta(Omega) pi1/4n^2,
    rho = rho' - (2n-1) theta(Omega) g/4n^2, tau = tau' - (2n-1) theta(Omega)/2n, tau* = tau'*.
    """
    n, t = ps.n, lee.theta_omega
    pi = pi_tensors(ps)
    c_prime = contractions(Rprime, ps)
    c_r = contractions(R, ps)
    return {
        "d_curvature": residual(R, np.asarray(Rprime) - t * pi.pi1 / (4 * n * n), tol),
        "d_ricci": residual(c_r.rho, c_prime.rho - (2 * n - 1) * t * ps.g / (4 * n * n), tol),
        "d_tau": residual(c_r.tau, c_prime.tau - (2 * n - 1) * t / (2 * n), tol),
        "d_tau_star": residual(c_r.tau_star, c_prime.tau_star, tol),
    }
