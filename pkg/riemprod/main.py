"""Command-line front end: verify, generate, classify and invariants."""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from riemprod.config import Settings
from riemprod.exceptions import DomainError, InvalidInputError, PredicateError, RiemprodError
from riemprod.geometry import classification, curvature, invariants
from riemprod.models import ClassLabel, ContractionRecord, InvariantRecord, InvariantsFile
from riemprod.services import instance_io
from riemprod.services.suite_runner import SuiteRunner

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

INVARIANT_TENSORS: Dict[str, Callable] = {
    "B": invariants.bochner,
    "A": invariants.a_tensor,
    "C": invariants.c_tensor,
    "E": invariants.e_tensor,
}


def _n_list(value: str) -> List[int]:
    try:
        ns = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {value!r}")
    if not ns:
        raise argparse.ArgumentTypeError("at least one n is required")
    return ns


def _epsilons(value: str) -> List[int]:
    key = value.strip().lower()
    if key == "both":
        return [-1, 1]
    if key in ("+1", "1"):
        return [1]
    if key == "-1":
        return [-1]
    raise argparse.ArgumentTypeError(f"epsilon must be +1, -1 or both, got {value!r}")


def _single_epsilon(value: str) -> int:
    signs = _epsilons(value)
    if len(signs) != 1:
        raise argparse.ArgumentTypeError("a single epsilon (+1 or -1) is required here")
    return signs[0]


def _tensor_list(value: str) -> List[str]:
    names = [part.strip().upper() for part in value.split(",") if part.strip()]
    unknown = [name for name in names if name not in INVARIANT_TENSORS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"tensors must be drawn from B,A,C,E, got {value!r}")
    return names


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        print(text)


def _to_json(model) -> str:
    return json.dumps(model.model_dump(by_alias=True, mode="json"), indent=2)


def cmd_verify(args, config: Settings) -> int:
    """Run the requested suites and write the report."""
    runner = SuiteRunner(config)
    report = asyncio.run(runner.run_suite(
        suite=args.suite,
        ns=args.n,
        epsilons=args.epsilon,
        trials=args.trials,
        master_seed=args.seed,
        tol=args.tol,
    ))
    _emit(_to_json(report), args.out)
    if not report.all_passed:
        logger.error(f"{report.summary.failed} of {report.summary.total} verdicts failed")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_generate(args, config: Settings) -> int:
    """Write a seeded instance file."""
    data = instance_io.generate_instance(
        args.kind, args.n, args.epsilon, args.seed, f_class=args.f_class, theta_scale=config.theta_scale
    )
    text = instance_io.save_instance(data, args.out)
    if not args.out:
        print(text)
    return EXIT_OK


def cmd_classify(args, config: Settings) -> int:
    """Classify the F tensor of an instance file."""
    loaded = instance_io.load_instance(args.input)
    if loaded.data.F is None:
        raise InvalidInputError(f"Instance {args.input} has no F tensor")
    report = classification.classify_f(loaded.data.F, loaded.ps, args.tol)
    print(_to_json(report))
    return EXIT_OK


def cmd_invariants(args, config: Settings) -> int:
    """Compute invariant tensors of an instance's R' with their contractions."""
    loaded = instance_io.load_instance(args.input)
    if loaded.data.Rprime is None:
        raise InvalidInputError(f"Instance {args.input} has no Rprime tensor")
    ps = loaded.ps
    L = np.asarray(loaded.data.Rprime, dtype=np.float64)

    records = {}
    for name in args.tensor:
        try:
            tensor = INVARIANT_TENSORS[name](L, ps, tol=args.tol)
        except PredicateError as e:
            logger.error(f"Tensor {name}: {e}")
            return EXIT_FAILURE
        c = curvature.contractions(tensor, ps)
        records[name] = InvariantRecord(
            tensor=tensor.tolist(),
            contractions=ContractionRecord(
                rho=c.rho.tolist(), tau=c.tau, rho_star=c.rho_star.tolist(), tau_star=c.tau_star
            ),
        )
    _emit(_to_json(InvariantsFile(n=ps.n, epsilon=ps.epsilon, tensors=records)), args.out)
    return EXIT_OK


def build_parser(config: Settings) -> argparse.ArgumentParser:
    """Argument parser; defaults come from settings so RIEMPROD_* variables apply."""
    parser = argparse.ArgumentParser(
        prog="riemprod",
        description="Numerical checks of curvature identities on Riemannian almost product manifolds",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    verify = sub.add_parser("verify", help="run seeded verification suites")
    verify.add_argument("--suite", default="all",
                        help="all, T21, T31, T41, T42, T51, T52, T61, T62, C63, EQ24, EQ19, algebra or classify")
    verify.add_argument("--n", type=_n_list, default=list(config.default_n))
    verify.add_argument("--epsilon", type=_epsilons, default=[-1, 1])
    verify.add_argument("--trials", type=int, default=config.trials)
    verify.add_argument("--seed", type=int, default=config.seed)
    verify.add_argument("--tol", type=float, default=config.tolerance)
    verify.add_argument("--out")
    verify.set_defaults(func=cmd_verify)

    generate = sub.add_parser("generate", help="write a seeded instance file")
    generate.add_argument("--kind", choices=[k.value for k in instance_io.InstanceKind], default="structure")
    generate.add_argument("--n", type=int, default=config.default_n[0])
    generate.add_argument("--epsilon", type=_single_epsilon, default=1)
    generate.add_argument("--seed", type=int, default=config.seed)
    generate.add_argument("--f-class", dest="f_class", choices=[c.value for c in ClassLabel],
                          default=ClassLabel.W3BAR.value)
    generate.add_argument("--out")
    generate.set_defaults(func=cmd_generate)

    classify = sub.add_parser("classify", help="classify the F tensor of an instance")
    classify.add_argument("--in", dest="input", required=True)
    classify.add_argument("--tol", type=float, default=config.tolerance)
    classify.set_defaults(func=cmd_classify)

    inv = sub.add_parser("invariants", help="compute B, A, C, E of an instance's R'")
    inv.add_argument("--in", dest="input", required=True)
    inv.add_argument("--tensor", type=_tensor_list, default=list(INVARIANT_TENSORS))
    inv.add_argument("--tol", type=float, default=config.tolerance)
    inv.add_argument("--out")
    inv.set_defaults(func=cmd_invariants)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point.

    Returns:
        0 when everything passed, 1 on a verification or predicate failure,
        2 on usage and input errors
    """
    config = Settings()
    logging.basicConfig(
        level=config.log_level.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        return args.func(args, config)
    except (InvalidInputError, DomainError) as e:
        logger.error(f"{args.cmd}: {e}")
        return EXIT_USAGE
    except RiemprodError as e:
        logger.error(f"{args.cmd} failed: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
