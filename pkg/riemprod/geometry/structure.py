"""Point structures (g, P, epsilon), Lee-form data and the nabla'-theta datum H."""
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np

from riemprod.exceptions import GenerationError, InvalidInputError
from riemprod.models import ResidualReport
from riemprod.utils.rng import Stream, stream
from riemprod.utils.tensors import as_tensor, expect, freeze, residual, sym, worst

logger = logging.getLogger(__name__)

STRUCTURE_TOL = 1e-12
# Norm below which a Gram-Schmidt candidate is treated as linearly dependent.
_DEGENERATE_NORM = 1e-8


def _check_epsilon(epsilon: int) -> int:
    if epsilon not in (-1, 1):
        raise InvalidInputError(f"epsilon must be +1 or -1, got {epsilon}")
    return int(epsilon)


@dataclass(frozen=True)
class PointStructure:
    """
    Ambient algebra at a point: metric g, product structure P and sign epsilon.

    P is stored as a square array acting on column vectors, so g(x, Py) is
    x @ g @ P @ y. Frames are stored column-wise.
    """
    n: int
    epsilon: int
    g: np.ndarray
    g_inv: np.ndarray
    P: np.ndarray
    g_tilde: np.ndarray
    frame_plus: np.ndarray
    frame_minus: np.ndarray

    def __post_init__(self):
        _check_epsilon(self.epsilon)
        for name in ("g", "g_inv", "P", "g_tilde", "frame_plus", "frame_minus"):
            object.__setattr__(self, name, freeze(getattr(self, name)))

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def frame(self) -> np.ndarray:
        """Adapted frame: V+ vectors followed by V- vectors, as columns."""
        return np.hstack([self.frame_plus, self.frame_minus])

    @property
    def coframe(self) -> np.ndarray:
        """Rows are the covectors dual to the adapted frame."""
        return self.frame.T @ self.g


@dataclass(frozen=True)
class LeeData:
    """Lee form theta, its metric dual Omega and theta(Omega)."""
    theta: np.ndarray
    omega: np.ndarray
    theta_omega: float

    def __post_init__(self):
        object.__setattr__(self, "theta", freeze(self.theta))
        object.__setattr__(self, "omega", freeze(self.omega))


@dataclass(frozen=True)
class NablaThetaData:
    """H(y, z) standing in for (nabla'_y theta) z."""
    H: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", freeze(self.H))


def gram_schmidt(vectors: np.ndarray, g: np.ndarray, strict: bool = True) -> np.ndarray:
    """
    Orthonormalize columns under g with two passes of modified Gram-Schmidt.

    With strict=False, columns that collapse are dropped instead of raising.
    """
    g_sym = sym(g)
    basis = []
    for k in range(vectors.shape[1]):
        v = np.array(vectors[:, k], dtype=np.float64)
        for _ in range(2):
            for b in basis:
                v = v - (b @ g_sym @ v) * b
        norm_sq = float(v @ g_sym @ v)
        if not norm_sq > _DEGENERATE_NORM ** 2:
            if strict:
                raise GenerationError(f"Gram-Schmidt collapsed at column {k}")
            continue
        basis.append(v / np.sqrt(norm_sq))
    if not basis:
        return np.zeros((vectors.shape[0], 0))
    return np.column_stack(basis)


def _eigenframe(P: np.ndarray, g: np.ndarray, sign: int) -> np.ndarray:
    projector = 0.5 * (np.eye(P.shape[0]) + sign * P)
    u, s, _ = np.linalg.svd(projector)
    rank = int(np.sum(s > 1e-8 * max(1.0, s[0])))
    return gram_schmidt(u[:, :rank], g, strict=False)


def structure_from_arrays(g, P, epsilon: int) -> PointStructure:
    """
    Build a PointStructure from a metric and a product structure.

    The inverse metric, g~ = g(., P.) and g-orthonormal eigenframes are
    derived; no axiom is checked here (see validate_structure).

    Raises:
        InvalidInputError: On malformed arrays or a singular metric
    """
    g = as_tensor(g, 2)
    P = as_tensor(P, 2, g.shape[0])
    _check_epsilon(epsilon)
    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as e:
        raise InvalidInputError(f"Metric is singular: {e}")
    return PointStructure(
        n=g.shape[0] // 2,
        epsilon=epsilon,
        g=g,
        g_inv=g_inv,
        P=P,
        g_tilde=g @ P,
        frame_plus=_eigenframe(P, g, 1),
        frame_minus=_eigenframe(P, g, -1),
    )


def adapted_structure(n: int, epsilon: int) -> PointStructure:
    """Canonical model: g = identity, P = diag(1,...,1,-1,...,-1)."""
    if n < 2:
        raise InvalidInputError(f"Half-dimension must be at least 2, got {n}")
    P = np.diag([1.0] * n + [-1.0] * n)
    return structure_from_arrays(np.eye(2 * n), P, epsilon)


def generate_structure(n: int, epsilon: int, seed: int) -> PointStructure:
    """
    Generate a random point structure deterministically from a seed.

    g = A^T A + dim*I for a uniform array A, a g-orthonormal frame is drawn by
    Gram-Schmidt and P is the difference of the eigenspace projectors.

    Args:
        n: Half-dimension (>= 2)
        epsilon: Sign label +1 or -1
        seed: Non-negative seed

    Returns:
        PointStructure satisfying all axioms up to round-off
    """
    if n < 2:
        raise InvalidInputError(f"Half-dimension must be at least 2 (pi1 = pi2 below dim 4), got {n}")
    _check_epsilon(epsilon)
    rng = stream(seed, Stream.STRUCTURE)
    dim = 2 * n

    A = rng.uniform(-1.0, 1.0, size=(dim, dim))
    g = sym(A.T @ A + dim * np.eye(dim))
    frame = gram_schmidt(rng.uniform(-1.0, 1.0, size=(dim, dim)), g)
    plus, minus = frame[:, :n], frame[:, n:]
    P = (plus @ plus.T - minus @ minus.T) @ g

    logger.debug(f"Generated structure n={n} epsilon={epsilon} seed={seed}")
    return PointStructure(
        n=n,
        epsilon=epsilon,
        g=g,
        g_inv=sym(np.linalg.inv(g)),
        P=P,
        g_tilde=g @ P,
        frame_plus=plus,
        frame_minus=minus,
    )


def structure_residuals(ps: PointStructure, tol: float = STRUCTURE_TOL) -> Dict[str, ResidualReport]:
    """Residual of every PointStructure invariant, keyed by check name."""
    dim = ps.g.shape[0]
    identity = np.eye(dim)
    reports = {
        "dimension": expect(dim == ps.dim and dim >= 4 and dim % 2 == 0, tol),
        "involution": residual(ps.P @ ps.P, identity, tol),
        "compatibility": residual(ps.P.T @ ps.g @ ps.P, ps.g, tol),
        "trace": residual(np.trace(ps.P), 0.0, tol),
        "metric_symmetry": residual(ps.g, ps.g.T, tol),
        "g_tilde_symmetry": residual(ps.g_tilde, ps.g_tilde.T, tol),
        "inverse": residual(ps.g_inv @ ps.g, identity, tol),
    }
    try:
        positive = bool(np.min(np.linalg.eigvalsh(sym(ps.g))) > 0.0)
    except np.linalg.LinAlgError:
        positive = False
    reports["positive_definite"] = expect(positive, tol)

    sizes_ok = ps.frame_plus.shape[1] == ps.n and ps.frame_minus.shape[1] == ps.n
    reports["eigenspace_dimensions"] = expect(sizes_ok, tol)
    if sizes_ok:
        F = ps.frame
        reports["frame_orthonormal"] = residual(F.T @ ps.g @ F, identity, tol)
        reports["frame_plus_eigen"] = residual(ps.P @ ps.frame_plus, ps.frame_plus, tol)
        reports["frame_minus_eigen"] = residual(ps.P @ ps.frame_minus, -ps.frame_minus, tol)
    return reports


def validate_structure(ps: PointStructure, tol: float = STRUCTURE_TOL) -> ResidualReport:
    """Worst residual over all PointStructure invariants. Never raises."""
    return worst(structure_residuals(ps, tol))


def _eigen_combination(ps: PointStructure, rng: np.random.Generator, sign: int, scale: float) -> np.ndarray:
    frame = ps.frame_plus if sign > 0 else ps.frame_minus
    coefficients = rng.uniform(-scale, scale, size=frame.shape[1])
    return frame @ coefficients


def lee_from_omega(ps: PointStructure, omega) -> LeeData:
    """LeeData for a given vector Omega (theta = g(Omega, .))."""
    omega = np.asarray(omega, dtype=np.float64)
    theta = ps.g @ omega
    return LeeData(theta=theta, omega=omega, theta_omega=float(theta @ omega))


def lee_from_theta(ps: PointStructure, theta, tol: float = 1e-10) -> LeeData:
    """
    LeeData for a given covector, requiring theta(Px) = epsilon * theta(x).

    Raises:
        InvalidInputError: If theta does not lie in the epsilon eigenspace
    """
    theta = as_tensor(theta, 1, ps.dim)
    report = residual(theta @ ps.P, ps.epsilon * theta, tol, label="theta_sign")
    if not report.passed:
        raise InvalidInputError(
            f"theta(Px) != {ps.epsilon:+d} theta(x) (relative residual {report.relative:.3e})",
            report=report
        )
    omega = ps.g_inv @ theta
    return LeeData(theta=theta, omega=omega, theta_omega=float(theta @ omega))


def draw_theta(ps: PointStructure, seed: int, sign: int, scale: float = 1.0) -> np.ndarray:
    """Random covector theta with theta(Px) = sign * theta(x)."""
    _check_epsilon(sign)
    if scale < 0:
        raise InvalidInputError(f"scale must be non-negative, got {scale}")
    rng = stream(seed, Stream.THETA, 0 if sign > 0 else 1)
    return ps.g @ _eigen_combination(ps, rng, sign, scale)


def generate_theta(ps: PointStructure, seed: int, scale: float = 1.0) -> LeeData:
    """
    Random Lee data with Omega in the epsilon eigenspace of P.

    Omega is a combination of frame_plus (epsilon=+1) or frame_minus
    (epsilon=-1) vectors with coefficients uniform in [-scale, scale].
    """
    if scale < 0:
        raise InvalidInputError(f"scale must be non-negative, got {scale}")
    rng = stream(seed, Stream.THETA, 0 if ps.epsilon > 0 else 1)
    return lee_from_omega(ps, _eigen_combination(ps, rng, ps.epsilon, scale))


def lee_residuals(ps: PointStructure, lee: LeeData, tol: float = STRUCTURE_TOL) -> Dict[str, ResidualReport]:
    """Residuals of the LeeData invariants."""
    return {
        "theta_sign": residual(lee.theta @ ps.P, ps.epsilon * lee.theta, tol),
        "omega_sign": residual(ps.P @ lee.omega, ps.epsilon * lee.omega, tol),
        "metric_dual": residual(ps.g @ lee.omega, lee.theta, tol),
        "theta_omega": residual(lee.theta_omega, float(lee.omega @ ps.g @ lee.omega), tol),
    }


def project_nabla_theta(H0, ps: PointStructure) -> np.ndarray:
    """
    Project a rank-2 tensor onto the admissible H data.

    Symmetrizes, then averages H(y,z), eps*H(y,Pz), eps*H(Py,z), H(Py,Pz).
    The map is a projector.
    """
    H0 = sym(as_tensor(H0, 2, ps.dim))
    P, eps = ps.P, ps.epsilon
    return 0.25 * (H0 + eps * H0 @ P + eps * P.T @ H0 + P.T @ H0 @ P)


def generate_H(ps: PointStructure, seed: int, scale: float = 1.0) -> NablaThetaData:
    """Random symmetric, P-compatible H from a seeded uniform array."""
    rng = stream(seed, Stream.NABLA_THETA)
    H0 = rng.uniform(-scale, scale, size=(ps.dim, ps.dim))
    return NablaThetaData(H=project_nabla_theta(H0, ps))


def zero_nabla_theta(ps: PointStructure) -> NablaThetaData:
    """H = 0: the parallel-torsion regime."""
    return NablaThetaData(H=np.zeros((ps.dim, ps.dim)))


def nabla_theta_residuals(ps: PointStructure, data: NablaThetaData, tol: float = STRUCTURE_TOL) -> Dict[str, ResidualReport]:
    """Residuals of the NablaThetaData invariants."""
    H, P, eps = data.H, ps.P, ps.epsilon
    return {
        "symmetric": residual(H, H.T, tol),
        "second_slot": residual(H @ P, eps * H, tol),
        "first_slot": residual(P.T @ H, eps * H, tol),
    }


def validate_nabla_theta(ps: PointStructure, data: NablaThetaData, tol: float = STRUCTURE_TOL) -> ResidualReport:
    return worst(nabla_theta_residuals(ps, data, tol))


def random_admissible_s(ps: PointStructure, seed: int, subkey: int = 0) -> np.ndarray:
    """Random S with S(x,y)=S(y,x) and S(x,Py)=S(y,Px), so (psi1+psi2)(S) is a P-tensor."""
    rng = stream(seed, Stream.AUXILIARY, subkey)
    S0 = sym(rng.uniform(-1.0, 1.0, size=(ps.dim, ps.dim)))
    return 0.5 * (S0 + ps.P.T @ S0 @ ps.P)
