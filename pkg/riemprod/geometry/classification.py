"""F-tensor models of the classes W0, W3bar, W6bar, W1 and least-residual classification."""
import logging
from typing import Dict, Union

import numpy as np

from riemprod.exceptions import InvalidInputError
from riemprod.geometry.structure import LeeData, PointStructure
from riemprod.models import ClassLabel, ClassReport
from riemprod.utils.tensors import DEFAULT_TOL, as_tensor, residual

logger = logging.getLogger(__name__)

SIGN_TOL = 1e-10
_CLASS_ORDER = (ClassLabel.W0, ClassLabel.W3BAR, ClassLabel.W6BAR, ClassLabel.W1)
# Sign of theta o P each single-component class demands.
_REQUIRED_SIGN = {ClassLabel.W3BAR: -1, ClassLabel.W6BAR: 1}


def _symmetrized_model(h: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
    """(1/2n){h(x,y)theta(z) + h(x,z)theta(y)}."""
    return (np.einsum("ab,c->abc", h, theta) + np.einsum("ac,b->abc", h, theta)) / (2 * n)


def _model(label: ClassLabel, ps: PointStructure, theta: np.ndarray) -> np.ndarray:
    if label is ClassLabel.W0:
        return np.zeros((ps.dim,) * 3)
    if label is ClassLabel.W3BAR:
        return _symmetrized_model(ps.g + ps.g_tilde, theta, ps.n)
    if label is ClassLabel.W6BAR:
        return _symmetrized_model(ps.g - ps.g_tilde, theta, ps.n)
    theta_p = theta @ ps.P
    return (
        np.einsum("ab,c->abc", ps.g, theta) - np.einsum("ab,c->abc", ps.g_tilde, theta_p)
        + np.einsum("ac,b->abc", ps.g, theta) - np.einsum("ac,b->abc", ps.g_tilde, theta_p)
    ) / (2 * ps.n)


def build_f(
    class_id: Union[ClassLabel, str],
    ps: PointStructure,
    lee_or_theta: Union[LeeData, np.ndarray]
) -> np.ndarray:
    """
    Build F(x,y,z) for a class from a Lee form.

    W3bar requires theta(Px) = -theta(x), W6bar requires theta(Px) = theta(x);
    W1 accepts any theta. W0 always yields zero.

    Raises:
        InvalidInputError: If theta's behaviour under P does not fit the class
    """
    label = ClassLabel(class_id)
    theta = lee_or_theta.theta if isinstance(lee_or_theta, LeeData) else lee_or_theta
    theta = as_tensor(theta, 1, ps.dim)
    sign = _REQUIRED_SIGN.get(label)
    if sign is not None:
        report = residual(theta @ ps.P, sign * theta, SIGN_TOL, label="theta_sign")
        if not report.passed:
            raise InvalidInputError(
                f"{label.value} needs theta(Px) = {sign:+d} theta(x) (relative residual {report.relative:.3e})",
                report=report
            )
    return _model(label, ps, theta)


def theta_from_f(F, ps: PointStructure) -> np.ndarray:
    """theta(x) = g^ij F(e_i, e_j, x)."""
    F = as_tensor(F, 3, ps.dim)
    return np.einsum("ij,ijz->z", ps.g_inv, F)


def split_theta(theta: np.ndarray, ps: PointStructure):
    """Vertical and horizontal parts: (theta - theta P)/2 and (theta + theta P)/2."""
    theta_p = theta @ ps.P
    return 0.5 * (theta - theta_p), 0.5 * (theta + theta_p)


def _observed_sign(theta_v: np.ndarray, theta_h: np.ndarray, tol: float):
    v = float(np.max(np.abs(theta_v)))
    h = float(np.max(np.abs(theta_h)))
    cutoff = tol * max(1.0, v, h)
    if v <= cutoff < h:
        return 1
    if h <= cutoff < v:
        return -1
    return None


def classify_f(F, ps: PointStructure, tol: float = DEFAULT_TOL) -> ClassReport:
    """
    Classify F by refitting each class model to the recovered Lee form.

    The smallest class whose residual passes wins (W0 < W3bar < W6bar < W1).
    When none passes, the least residual is reported with pass=False.
    Never raises on well-shaped input.
    """
    F = as_tensor(F, 3, ps.dim)
    theta = theta_from_f(F, ps)
    theta_v, theta_h = split_theta(theta, ps)
    fitted = {
        ClassLabel.W0: np.zeros(ps.dim),
        ClassLabel.W3BAR: theta_v,
        ClassLabel.W6BAR: theta_h,
        ClassLabel.W1: theta,
    }
    reports = {label: residual(F, _model(label, ps, fitted[label]), tol) for label in _CLASS_ORDER}
    residuals: Dict[ClassLabel, float] = {label: r.relative for label, r in reports.items()}

    passing = [label for label in _CLASS_ORDER if reports[label].passed]
    if passing:
        best = passing[0]
    else:
        best = min(_CLASS_ORDER, key=lambda label: residuals[label])
        logger.debug(f"No class model fits F; closest is {best.value} at {residuals[best]:.3e}")

    return ClassReport(
        residuals=residuals,
        best=best,
        passed=bool(passing),
        tol=tol,
        theta_recovered=theta.tolist(),
        theta_v=theta_v.tolist(),
        theta_h=theta_h.tolist(),
        theta_v_norm=float(np.sqrt(theta_v @ ps.g_inv @ theta_v)),
        theta_h_norm=float(np.sqrt(theta_h @ ps.g_inv @ theta_h)),
        observed_sign=_observed_sign(theta_v, theta_h, tol),
    )
