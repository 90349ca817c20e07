"""The psi/pi machinery, curvature symmetry predicates and Ricci-type contractions."""
import logging
from dataclasses import dataclass
from typing import Dict, NamedTuple

import numpy as np

from riemprod.exceptions import InvalidInputError
from riemprod.geometry.structure import STRUCTURE_TOL, PointStructure
from riemprod.models import ResidualReport
from riemprod.utils.rng import Stream, stream
from riemprod.utils.tensors import (
    DEFAULT_TOL, apply_p, as_tensor, freeze, metric_contract, residual, worst
)

logger = logging.getLogger(__name__)

GENERATOR_TOL = 1e-10


class PiTensors(NamedTuple):
    """The basic curvature-like tensors pi1, pi2, pi3 of a point structure."""
    pi1: np.ndarray
    pi2: np.ndarray
    pi3: np.ndarray


@dataclass(frozen=True)
class CurvatureTensor:
    """A rank-4 tensor with cached predicate results."""
    L: np.ndarray
    curvature_like: ResidualReport
    p_tensor: ResidualReport

    def __post_init__(self):
        object.__setattr__(self, "L", freeze(self.L))


@dataclass(frozen=True)
class ContractionSet:
    """Ricci tensor, scalar curvature and their P-associated versions."""
    rho: np.ndarray
    tau: float
    rho_star: np.ndarray
    tau_star: float


def _half_product(g: np.ndarray, S: np.ndarray) -> np.ndarray:
    return (
        np.einsum("bc,ad->abcd", g, S)
        - np.einsum("ac,bd->abcd", g, S)
    )


def psi1(S, ps: PointStructure) -> np.ndarray:
    """
    psi1(S)(x,y,z,w) = g(y,z)S(x,w) - g(x,z)S(y,w) + S(y,z)g(x,w) - S(x,z)g(y,w).

    Raises:
        InvalidInputError: On dimension mismatch
    """
    S = as_tensor(S, 2, ps.dim)
    return _half_product(ps.g, S) + _half_product(S, ps.g)


def psi2(S, ps: PointStructure) -> np.ndarray:
    """psi2(S)(x,y,z,w) = psi1(S)(x,y,Pz,Pw)."""
    return apply_p(psi1(S, ps), ps.P, (3, 4))


def psi_sum(S, ps: PointStructure) -> np.ndarray:
    """(psi1 + psi2)(S)."""
    L = psi1(S, ps)
    return L + apply_p(L, ps.P, (3, 4))


def pi_tensors(ps: PointStructure) -> PiTensors:
    """
    pi1 = psi1(g)/2, pi2 = psi2(g)/2, pi3 = psi1(g~).

    Raises:
        InvalidInputError: If psi1(g~) and psi2(g~) disagree, which happens
            only for structures violating the axioms
    """
    pi3 = psi1(ps.g_tilde, ps)
    check = residual(pi3, psi2(ps.g_tilde, ps), STRUCTURE_TOL, label="pi3_consistency")
    if not check.passed:
        raise InvalidInputError(
            f"psi1(g~) != psi2(g~) (relative residual {check.relative:.3e}); structure is not admissible",
            report=check
        )
    return PiTensors(pi1=0.5 * psi1(ps.g, ps), pi2=0.5 * psi2(ps.g, ps), pi3=pi3)


def _cyclic(L: np.ndarray) -> np.ndarray:
    """L(y,z,x,w) + L(z,x,y,w) evaluated at (x,y,z,w)."""
    return np.einsum("yzxw->xyzw", L) + np.einsum("zxyw->xyzw", L)


def curvature_like_residuals(L: np.ndarray, tol: float = DEFAULT_TOL) -> Dict[str, ResidualReport]:
    """Residuals of the antisymmetries and the first Bianchi identity."""
    L = np.asarray(L, dtype=np.float64)
    return {
        "antisymmetric_12": residual(L, -L.transpose(1, 0, 2, 3), tol),
        "antisymmetric_34": residual(L, -L.transpose(0, 1, 3, 2), tol),
        "bianchi": residual(L, -_cyclic(L), tol),
    }


def is_curvature_like(L, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Worst residual of the curvature-like identities, over all index tuples."""
    L = as_tensor(L, 4)
    return worst(curvature_like_residuals(L, tol))


def p_tensor_residuals(L: np.ndarray, ps: PointStructure, tol: float = DEFAULT_TOL) -> Dict[str, ResidualReport]:
    reports = curvature_like_residuals(L, tol)
    reports["p_invariance"] = residual(apply_p(L, ps.P, (3, 4)), L, tol)
    return reports


def is_p_tensor(L, ps: PointStructure, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Worst residual of the Riemannian P-tensor identities."""
    L = as_tensor(L, 4, ps.dim)
    return worst(p_tensor_residuals(L, ps, tol))


def classify_curvature(L, ps: PointStructure, tol: float = DEFAULT_TOL) -> CurvatureTensor:
    """Wrap a tensor together with both predicate results."""
    L = as_tensor(L, 4, ps.dim)
    return CurvatureTensor(L=L, curvature_like=is_curvature_like(L, tol), p_tensor=is_p_tensor(L, ps, tol))


def is_psi1_admissible(S, tol: float = DEFAULT_TOL) -> ResidualReport:
    """psi1(S) is curvature-like iff S(x,y) = S(y,x)."""
    S = np.asarray(S, dtype=np.float64)
    return residual(S, S.T, tol, label="psi1_admissible")


def is_psi2_admissible(S, ps: PointStructure, tol: float = DEFAULT_TOL) -> ResidualReport:
    """psi2(S) is curvature-like iff S(x,Py) = S(y,Px)."""
    SP = np.asarray(S, dtype=np.float64) @ ps.P
    return residual(SP, SP.T, tol, label="psi2_admissible")


def contractions(L, ps: PointStructure) -> ContractionSet:
    """
    rho(y,z) = g^ij L(e_i,y,z,e_j), rho*(y,z) = g^ij L(e_i,y,z,Pe_j) and their traces.
    """
    L = as_tensor(L, 4, ps.dim)
    rho = metric_contract(L, ps.g_inv, 1, 4)
    rho_star = metric_contract(apply_p(L, ps.P, (4,)), ps.g_inv, 1, 4)
    return ContractionSet(
        rho=rho,
        tau=metric_contract(rho, ps.g_inv, 1, 2),
        rho_star=rho_star,
        tau_star=metric_contract(rho_star, ps.g_inv, 1, 2),
    )


def bianchi_map(L: np.ndarray) -> np.ndarray:
    """b(L)(x,y,z,w) = [L(x,y,z,w) + L(y,z,x,w) + L(z,x,y,w)] / 3."""
    L = np.asarray(L, dtype=np.float64)
    return (L + _cyclic(L)) / 3.0


def _algebraic_curvature(rng: np.random.Generator, dim: int) -> np.ndarray:
    L = rng.uniform(-1.0, 1.0, size=(dim,) * 4)
    L = 0.5 * (L - L.transpose(1, 0, 2, 3))
    L = 0.5 * (L - L.transpose(0, 1, 3, 2))
    L = 0.5 * (L + L.transpose(2, 3, 0, 1))
    return L - bianchi_map(L)


def random_curvature_like(ps: PointStructure, seed: int) -> CurvatureTensor:
    """Seeded random curvature-like tensor in the ambient basis."""
    rng = stream(seed, Stream.CURVATURE, 0)
    return classify_curvature(_algebraic_curvature(rng, ps.dim), ps, GENERATOR_TOL)


def _change_basis(L: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Contract every slot of L with M, one slot at a time."""
    for _ in range(L.ndim):
        L = np.tensordot(L, M, axes=([0], [0]))
    return L


def to_frame(L: np.ndarray, ps: PointStructure) -> np.ndarray:
    """Components L(f_i, f_j, f_k, f_l) in the adapted frame."""
    return _change_basis(L, ps.frame)


def from_frame(L_frame: np.ndarray, ps: PointStructure) -> np.ndarray:
    """Ambient components of a tensor given in the adapted frame."""
    return _change_basis(L_frame, ps.coframe)


def random_p_tensor(ps: PointStructure, seed: int) -> CurvatureTensor:
    """
    Seeded random Riemannian P-tensor.

    Independent algebraic curvature tensors on V+ and V- are placed
    block-diagonally in the adapted frame and carried to the ambient basis.
    """
    rng = stream(seed, Stream.CURVATURE, 1)
    n = ps.n
    block = np.zeros((ps.dim,) * 4)
    block[:n, :n, :n, :n] = _algebraic_curvature(rng, n)
    block[n:, n:, n:, n:] = _algebraic_curvature(rng, n)
    return classify_curvature(from_frame(block, ps), ps, GENERATOR_TOL)


def mixed_components(L, ps: PointStructure) -> float:
    """
    Largest adapted-frame component L(f_i,f_j,f_k,f_l) with (i,j) or (k,l)
    straddling the two eigenspaces; zero for Riemannian P-tensors.
    """
    L_frame = to_frame(as_tensor(L, 4, ps.dim), ps)
    side = np.arange(ps.dim) >= ps.n
    same_ij = side[:, None] == side[None, :]
    allowed = same_ij[:, :, None, None] & same_ij[None, None, :, :]
    outside = np.abs(L_frame[~allowed])
    return float(outside.max()) if outside.size else 0.0
