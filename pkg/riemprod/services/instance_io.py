"""Reading, writing and generating JSON instance files."""
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from riemprod.exceptions import InvalidInputError
from riemprod.geometry import classification, curvature, structure
from riemprod.geometry.structure import LeeData, NablaThetaData, PointStructure
from riemprod.models import ClassLabel, InstanceFile
from riemprod.services.verification import random_params

logger = logging.getLogger(__name__)


class InstanceKind(str, Enum):
    """Kinds of instance the generator can write."""
    STRUCTURE = "structure"
    PTENSOR = "ptensor"
    INSTANCE = "instance"
    FTENSOR = "ftensor"


@dataclass(frozen=True)
class LoadedInstance:
    """An instance file with its validated point structure, Lee data and H."""
    data: InstanceFile
    ps: PointStructure
    lee: Optional[LeeData] = None
    nabla_theta: Optional[NablaThetaData] = None


def parse_instance(text: str) -> InstanceFile:
    """
    Parse and schema-check an instance document.

    Raises:
        InvalidInputError: On malformed JSON or schema violations
    """
    try:
        return InstanceFile.model_validate_json(text)
    except ValidationError as e:
        raise InvalidInputError(f"Invalid instance file: {e}")


def load_instance(path: Union[str, Path], tol: Optional[float] = None) -> LoadedInstance:
    """
    Load an instance file and revalidate its structure, theta and H.

    Raises:
        InvalidInputError: If the file cannot be read, does not parse, its
            (g, P) violate the structure axioms, theta is not in the epsilon
            eigenspace, or H is not symmetric and P-compatible
    """
    path = Path(path)
    tol = tol or structure.STRUCTURE_TOL
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"Cannot read instance file {path}: {e}")
    data = parse_instance(text)
    ps = structure.structure_from_arrays(data.g, data.P, data.epsilon)
    report = structure.validate_structure(ps, tol)
    if not report.passed:
        raise InvalidInputError(
            f"Instance {path} violates {report.label} (relative residual {report.relative:.3e})", report=report
        )

    lee = None
    if data.theta is not None:
        lee = structure.lee_from_theta(ps, data.theta, tol)

    nabla_theta = None
    if data.H is not None:
        nabla_theta = NablaThetaData(H=np.asarray(data.H, dtype=float))
        report = structure.validate_nabla_theta(ps, nabla_theta, tol)
        if not report.passed:
            raise InvalidInputError(
                f"Instance {path} has inadmissible H: {report.label} "
                f"(relative residual {report.relative:.3e})",
                report=report
            )

    logger.debug(f"Loaded instance {path} n={data.n} epsilon={data.epsilon}")
    return LoadedInstance(data=data, ps=ps, lee=lee, nabla_theta=nabla_theta)


def dump_instance(data: InstanceFile) -> str:
    """Serialize an instance with float repr, so equal inputs give identical bytes."""
    return json.dumps(data.model_dump(by_alias=True, exclude_none=True, mode="json"), indent=2)


def save_instance(data: InstanceFile, path: Optional[Union[str, Path]] = None) -> str:
    """Write an instance to path (when given) and return the serialized text."""
    text = dump_instance(data)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote instance to {path}")
    return text


def _ftensor(ps: PointStructure, seed: int, f_class: ClassLabel, theta_scale: float) -> np.ndarray:
    """W3bar draws theta from V-, W6bar from V+, W1 sums one model of each."""
    if f_class is ClassLabel.W0:
        return np.zeros((ps.dim,) * 3)
    theta_v = structure.draw_theta(ps, seed, -1, theta_scale)
    theta_h = structure.draw_theta(ps, seed, 1, theta_scale)
    if f_class is ClassLabel.W3BAR:
        return classification.build_f(f_class, ps, theta_v)
    if f_class is ClassLabel.W6BAR:
        return classification.build_f(f_class, ps, theta_h)
    return classification.build_f(ClassLabel.W3BAR, ps, theta_v) + classification.build_f(ClassLabel.W6BAR, ps, theta_h)


def generate_instance(
    kind: Union[InstanceKind, str],
    n: int,
    epsilon: int,
    seed: int,
    f_class: Union[ClassLabel, str] = ClassLabel.W3BAR,
    theta_scale: float = 1.0
) -> InstanceFile:
    """
    Generate an instance of the given kind deterministically from a seed.

    structure: g and P only. ptensor: adds a random Riemannian P-tensor R'.
    instance: adds theta, H, lambda, mu and R'. ftensor: adds an F tensor of
    the requested class; its Lee form need not match epsilon, so theta is omitted.
    """
    kind = InstanceKind(kind)
    ps = structure.generate_structure(n, epsilon, seed)
    fields = {"n": n, "epsilon": epsilon, "g": ps.g.tolist(), "P": ps.P.tolist(), "seed": seed}

    if kind is InstanceKind.PTENSOR:
        fields["Rprime"] = curvature.random_p_tensor(ps, seed).L.tolist()
    elif kind is InstanceKind.INSTANCE:
        cp = random_params(seed)
        fields.update(
            theta=structure.generate_theta(ps, seed, theta_scale).theta.tolist(),
            H=structure.generate_H(ps, seed).H.tolist(),
            lam=cp.lam,
            mu=cp.mu,
            Rprime=curvature.random_p_tensor(ps, seed).L.tolist(),
        )
    elif kind is InstanceKind.FTENSOR:
        fields["F"] = _ftensor(ps, seed, ClassLabel(f_class), theta_scale).tolist()

    return InstanceFile(**fields)
