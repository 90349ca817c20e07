"""Bochner-type invariant tensors B, A, C, E and totally real sectional curvatures."""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from riemprod.exceptions import DomainError, GenerationError, InvalidInputError, PredicateError
from riemprod.geometry.curvature import contractions, is_curvature_like, is_p_tensor, pi_tensors, psi_sum
from riemprod.geometry.structure import PointStructure, gram_schmidt
from riemprod.models import ResidualReport
from riemprod.utils.rng import Stream, stream
from riemprod.utils.tensors import DEFAULT_TOL, as_tensor, freeze, residual, worst

logger = logging.getLogger(__name__)

PLANE_TOL = 1e-10
_MIN_DENOMINATOR = 1e-12


@dataclass(frozen=True)
class SectionalPair:
    """Sectional curvatures nu and nu* of L on a totally real plane (x, y)."""
    nu: float
    nu_star: float
    plane: Tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "plane", (freeze(self.plane[0]), freeze(self.plane[1])))


def _require_p_tensor(L, ps: PointStructure, tol: float) -> np.ndarray:
    L = as_tensor(L, 4, ps.dim)
    report = is_p_tensor(L, ps, tol)
    if not report.passed:
        raise PredicateError(
            f"Input is not a Riemannian P-tensor (relative residual {report.relative:.3e})", report=report
        )
    return L


def bochner(L, ps: PointStructure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Bochner tensor of a Riemannian P-tensor.

    B(L) = L - 1/(2(n-2)) { (psi1+psi2)(rho(L)) - [tau(L)(pi1+pi2) + tau*(L) pi3] / (2(n-1)) }

    Raises:
        DomainError: If n < 3
        PredicateError: If L is not a Riemannian P-tensor at tol
    """
    n = ps.n
    if n < 3:
        raise DomainError(f"The Bochner tensor needs n >= 3, got n={n}")
    L = _require_p_tensor(L, ps, tol)
    c = contractions(L, ps)
    pi = pi_tensors(ps)
    trace_part = (c.tau * (pi.pi1 + pi.pi2) + c.tau_star * pi.pi3) / (2 * (n - 1))
    return L - (psi_sum(c.rho, ps) - trace_part) / (2 * (n - 2))


def a_tensor(L, ps: PointStructure, epsilon: Optional[int] = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    A(L) = L - tau(L)(pi1 + pi2 - eps pi3) / 4n(n-1).

    epsilon defaults to the structure's own sign.
    """
    eps = ps.epsilon if epsilon is None else epsilon
    if eps not in (-1, 1):
        raise InvalidInputError(f"epsilon must be +1 or -1, got {eps}")
    L = _require_p_tensor(L, ps, tol)
    n = ps.n
    pi = pi_tensors(ps)
    tau = contractions(L, ps).tau
    return L - tau * (pi.pi1 + pi.pi2 - eps * pi.pi3) / (4 * n * (n - 1))


def c_tensor(L, ps: PointStructure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """C(L) = L - [tau(L)(pi1 + pi2) + tau*(L) pi3] / 4n(n-1)."""
    L = _require_p_tensor(L, ps, tol)
    n = ps.n
    pi = pi_tensors(ps)
    c = contractions(L, ps)
    return L - (c.tau * (pi.pi1 + pi.pi2) + c.tau_star * pi.pi3) / (4 * n * (n - 1))


def e_tensor(L, ps: PointStructure, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    E(L) = L - tau(L) pi1 / 2n(2n-1).

    Only the curvature-like property is required of L.
    """
    L = as_tensor(L, 4, ps.dim)
    report = is_curvature_like(L, tol)
    if not report.passed:
        raise PredicateError(
            f"Input is not curvature-like (relative residual {report.relative:.3e})", report=report
        )
    n = ps.n
    tau = contractions(L, ps).tau
    return L - tau * pi_tensors(ps).pi1 / (2 * n * (2 * n - 1))


def constant_curvature_tensor(kind: str, ps: PointStructure, tau: float, tau_star: float = 0.0) -> np.ndarray:
    """
    Tensors in the kernel of A or C with prescribed scalar curvatures.

    kind "A": tau (pi1 + pi2 - eps pi3) / 4n(n-1)
    kind "C": [tau (pi1 + pi2) + tau_star pi3] / 4n(n-1)
    """
    n = ps.n
    pi = pi_tensors(ps)
    denominator = 4 * n * (n - 1)
    key = kind.strip().upper()
    if key == "A":
        return tau * (pi.pi1 + pi.pi2 - ps.epsilon * pi.pi3) / denominator
    if key == "C":
        return (tau * (pi.pi1 + pi.pi2) + tau_star * pi.pi3) / denominator
    raise InvalidInputError(f"Unknown constant-curvature kind: {kind}")


def plane_residuals(ps: PointStructure, x, y, tol: float = PLANE_TOL) -> Dict[str, ResidualReport]:
    """Orthonormality of (x, y) and orthogonality of the plane to its P-image."""
    g, P = ps.g, ps.P
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return {
        "x_unit": residual(x @ g @ x, 1.0, tol),
        "y_unit": residual(y @ g @ y, 1.0, tol),
        "xy_orthogonal": residual(x @ g @ y, 0.0, tol),
        "x_px": residual(x @ g @ P @ x, 0.0, tol),
        "x_py": residual(x @ g @ P @ y, 0.0, tol),
        "y_px": residual(y @ g @ P @ x, 0.0, tol),
        "y_py": residual(y @ g @ P @ y, 0.0, tol),
    }


def _eigen_pair(ps: PointStructure, rng: np.random.Generator, frame: np.ndarray) -> np.ndarray:
    draws = frame @ rng.uniform(-1.0, 1.0, size=(frame.shape[1], 2))
    return gram_schmidt(draws, ps.g, strict=True)


def totally_real_plane(ps: PointStructure, seed: int, retries: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded random totally real 2-plane.

    Orthonormal pairs (u, u2) in V+ and (v, v2) in V- are drawn and combined
    as x = (u + v)/sqrt2, y = (u2 + v2)/sqrt2; the P-images then lie in the
    orthogonal complement of the plane. Degenerate draws move on to the next
    substream.

    Raises:
        GenerationError: If no valid plane is found within the retry budget
    """
    if ps.n < 2:
        raise InvalidInputError(f"Totally real planes need n >= 2, got {ps.n}")
    for attempt in range(retries + 1):
        rng = stream(seed, Stream.PLANES, attempt)
        try:
            plus = _eigen_pair(ps, rng, ps.frame_plus)
            minus = _eigen_pair(ps, rng, ps.frame_minus)
        except GenerationError:
            logger.debug(f"Degenerate plane draw for seed={seed} attempt={attempt}")
            continue
        x = (plus[:, 0] + minus[:, 0]) / np.sqrt(2.0)
        y = (plus[:, 1] + minus[:, 1]) / np.sqrt(2.0)
        if worst(plane_residuals(ps, x, y)).passed:
            return x, y
    raise GenerationError(f"No totally real plane found for seed={seed} after {retries} retries")


def sectional(L, ps: PointStructure, plane: Tuple[np.ndarray, np.ndarray]) -> SectionalPair:
    """
    nu = L(x,y,y,x) / pi1(x,y,y,x) and nu* = L(x,y,y,Px) / pi1(x,y,y,x).

    Raises:
        InvalidInputError: If the plane is not totally real and orthonormal
        DomainError: If pi1(x,y,y,x) vanishes
    """
    L = as_tensor(L, 4, ps.dim)
    x, y = (np.asarray(v, dtype=np.float64) for v in plane)
    check = worst(plane_residuals(ps, x, y))
    if not check.passed:
        raise InvalidInputError(f"Plane is not totally real ({check.label} residual {check.relative:.3e})", report=check)
    denominator = float((x @ ps.g @ x) * (y @ ps.g @ y) - (x @ ps.g @ y) ** 2)
    if denominator <= _MIN_DENOMINATOR:
        raise DomainError(f"pi1(x,y,y,x) = {denominator:.3e} is too small for a sectional curvature")
    px = ps.P @ x
    nu = float(np.einsum("abcd,a,b,c,d->", L, x, y, y, x)) / denominator
    nu_star = float(np.einsum("abcd,a,b,c,d->", L, x, y, y, px)) / denominator
    return SectionalPair(nu=nu, nu_star=nu_star, plane=(x, y))
