"""Dense rank-1 through rank-4 tensors, metric contractions and residual norms."""
import logging
import string
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from riemprod.exceptions import InvalidInputError
from riemprod.models import ResidualReport

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9

ArrayLike = Union[np.ndarray, Sequence, float]


def as_tensor(values: ArrayLike, rank: int, dim: Optional[int] = None) -> np.ndarray:
    """
    Convert input to a float64 tensor of the given rank and validate it.

    Args:
        values: Nested sequence or array
        rank: Expected number of slots (1..4)
        dim: Expected dimension of each slot, if known

    Returns:
        Float64 array of shape (dim,) * rank

    Raises:
        InvalidInputError: On wrong rank, non-square shape, odd or small
            dimension, dimension mismatch, or non-finite entries
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != rank:
        raise InvalidInputError(f"Expected a rank-{rank} tensor, got rank {arr.ndim}")
    if len(set(arr.shape)) != 1:
        raise InvalidInputError(f"Tensor slots must share one dimension, got shape {arr.shape}")
    size = arr.shape[0]
    if size < 4 or size % 2:
        raise InvalidInputError(f"Dimension must be even and at least 4, got {size}")
    if dim is not None and size != dim:
        raise InvalidInputError(f"Dimension mismatch: expected {dim}, got {size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("Tensor contains NaN or Inf entries")
    return arr


def freeze(arr: np.ndarray) -> np.ndarray:
    """Return a read-only float64 copy of an array."""
    out = np.array(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


def _check_slots(rank: int, slots: Iterable[int]) -> list:
    slots = list(slots)
    for slot in slots:
        if not 1 <= slot <= rank:
            raise InvalidInputError(f"Slot {slot} out of range 1..{rank}")
    if len(set(slots)) != len(slots):
        raise InvalidInputError(f"Slots must be distinct, got {slots}")
    return slots


def metric_contract(
    L: np.ndarray,
    g_inv: np.ndarray,
    slot_a: int,
    slot_b: int
) -> Union[np.ndarray, float]:
    """
    Contract two slots of a tensor against an inverse metric.

    Slots are 1-based; the remaining slots keep their order. Contracting
    both slots of a rank-2 tensor yields a float.

    Args:
        L: Tensor of rank >= 2
        g_inv: Inverse metric (rank 2)
        slot_a: First slot to contract
        slot_b: Second slot to contract

    Returns:
        Tensor of rank L.ndim - 2, or a float for rank-2 input
    """
    L = np.asarray(L, dtype=np.float64)
    g_inv = np.asarray(g_inv, dtype=np.float64)
    if L.ndim < 2:
        raise InvalidInputError("metric_contract needs a tensor of rank >= 2")
    if g_inv.shape != (L.shape[0], L.shape[0]) or len(set(L.shape)) != 1:
        raise InvalidInputError(
            f"Dimension mismatch between tensor {L.shape} and inverse metric {g_inv.shape}"
        )
    slot_a, slot_b = _check_slots(L.ndim, (slot_a, slot_b))

    letters = list(string.ascii_lowercase[:L.ndim])
    letters[slot_a - 1] = "y"
    letters[slot_b - 1] = "z"
    out = "".join(ch for ch in letters if ch not in "yz")
    result = np.einsum(f"{''.join(letters)},yz->{out}", L, g_inv)
    return float(result) if result.ndim == 0 else result


def apply_p(L: np.ndarray, P: np.ndarray, slots: Iterable[int]) -> np.ndarray:
    """
    Evaluate a covariant tensor with the operator P inserted in the given slots.

    For slots (3, 4) this returns L(x, y, Pz, Pw).
    """
    L = np.asarray(L, dtype=np.float64)
    for slot in _check_slots(L.ndim, slots):
        letters = string.ascii_lowercase[:L.ndim]
        inner = letters[slot - 1]
        swapped = letters.replace(inner, "z")
        L = np.einsum(f"{swapped},z{inner}->{letters}", L, P)
    return L


def residual(X: ArrayLike, Y: ArrayLike, tol: float = DEFAULT_TOL, label: Optional[str] = None) -> ResidualReport:
    """
    Compare two tensors entrywise.

    relative = max|X - Y| / max(1, max(max|X|, max|Y|)); pass iff relative <= tol.

    Raises:
        InvalidInputError: If ranks or dimensions differ
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise InvalidInputError(f"Cannot compare tensors of shapes {X.shape} and {Y.shape}")
    if X.size == 0:
        max_abs = scale = 0.0
    else:
        max_abs = float(np.max(np.abs(X - Y)))
        scale = float(max(np.max(np.abs(X)), np.max(np.abs(Y))))
    relative = max_abs / max(1.0, scale)
    return ResidualReport(
        max_abs_residual=max_abs,
        scale=scale,
        relative=relative,
        tol=tol,
        passed=relative <= tol,
        label=label,
    )


def expect(condition: bool, tol: float = DEFAULT_TOL, label: Optional[str] = None) -> ResidualReport:
    """Express a boolean check as a residual report (0 when it holds, 1 when not)."""
    return residual(0.0 if condition else 1.0, 0.0, tol, label=label)


def worst(reports: Union[Mapping[str, ResidualReport], Iterable[ResidualReport]]) -> ResidualReport:
    """
    Aggregate reports to the one furthest from its tolerance.

    Mapping keys are attached as labels. Failing reports always dominate
    passing ones since their ratio relative/tol exceeds 1.
    """
    if isinstance(reports, Mapping):
        items = [r.model_copy(update={"label": r.label or name}) for name, r in reports.items()]
    else:
        items = list(reports)
    if not items:
        raise InvalidInputError("worst() needs at least one report")
    return max(items, key=lambda r: r.ratio)


def sym(S: np.ndarray) -> np.ndarray:
    """Symmetric part of a rank-2 tensor."""
    return 0.5 * (S + S.T)


def g_inner(g: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """g(x, y) for vectors x, y."""
    return float(x @ g @ y)


def trace_with(g_inv: np.ndarray, S: np.ndarray) -> float:
    """g^{ij} S(e_i, e_j)."""
    return float(np.einsum("ij,ij->", g_inv, S))
