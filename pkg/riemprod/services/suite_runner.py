"""Concurrent execution of seeded verification suites."""
import asyncio
import logging
import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from riemprod.config import Settings, settings as default_settings
from riemprod.exceptions import DomainError, InvalidInputError, TrialTimeoutError
from riemprod.models import ControlVerdict, ReportFile, ReportSummary, TheoremId, TheoremVerdict
from riemprod.services.verification import TrialOptions, negative_control, verify_theorem
from riemprod.utils.circuit_breaker import with_timeout
from riemprod.utils.rng import trial_seed

logger = logging.getLogger(__name__)

SUITE_ALL = "all"
# Suites that carry an expected-fail control next to their trials.
CONTROLLED = (TheoremId.T41, TheoremId.T51)


@dataclass(frozen=True)
class TrialSpec:
    """One (theorem, n, epsilon, seed) cell of a suite grid."""
    theorem_id: TheoremId
    n: int
    epsilon: int
    seed: int


@dataclass(frozen=True)
class ControlSpec:
    theorem_id: TheoremId
    n: int
    epsilon: int


def resolve_suite(suite: str) -> List[TheoremId]:
    """Map a --suite value to theorem ids; "algebra" and "classify" are case-insensitive."""
    if suite.lower() == SUITE_ALL:
        return list(TheoremId)
    try:
        return [TheoremId(suite.upper())]
    except ValueError:
        raise InvalidInputError(f"Unknown suite: {suite}")


def plan_suite(
    suite: str,
    ns: Sequence[int],
    epsilons: Sequence[int],
    trials: int,
    master_seed: int
) -> List[TrialSpec]:
    """
    Expand a suite request into trial cells.

    Trial seeds depend only on (master_seed, index), so every theorem and
    (n, epsilon) cell sees the same seed list.

    Raises:
        DomainError: An explicit T31 suite with some n < 3
        InvalidInputError: Unknown suite, n < 2 or a non-positive trial count
    """
    ids = resolve_suite(suite)
    if trials < 1:
        raise InvalidInputError(f"trials must be positive, got {trials}")
    for n in ns:
        if n < 2:
            raise InvalidInputError(f"n must be at least 2, got {n}")
    explicit = suite.lower() != SUITE_ALL
    if explicit and ids == [TheoremId.T31] and any(n < 3 for n in ns):
        raise DomainError("Suite T31 needs n >= 3 (the Bochner tensor is undefined below)")

    seeds = [trial_seed(master_seed, i) for i in range(trials)]
    plan = []
    for tid in ids:
        for n in ns:
            if tid is TheoremId.T31 and n < 3:
                logger.info(f"Skipping T31 for n={n}")
                continue
            for eps in epsilons:
                plan.extend(TrialSpec(tid, n, eps, seed) for seed in seeds)
    return plan


def plan_controls(suite: str, ns: Sequence[int], epsilons: Sequence[int]) -> List[ControlSpec]:
    """Negative controls accompanying the T41 and T51 suites."""
    return [
        ControlSpec(tid, n, eps)
        for tid in resolve_suite(suite) if tid in CONTROLLED
        for n in ns
        for eps in epsilons
    ]


def summarize(verdicts: Iterable[TheoremVerdict], controls: Iterable[ControlVerdict]) -> ReportSummary:
    outcomes = [v.passed for v in verdicts] + [c.passed for c in controls]
    passed = sum(outcomes)
    return ReportSummary(total=len(outcomes), passed=passed, failed=len(outcomes) - passed)


class SuiteRunner:
    """Runs verification trials in worker threads with bounded concurrency."""

    def __init__(self, config: Optional[Settings] = None):
        """Initialize the runner from settings."""
        self.settings = config or default_settings
        self.options = TrialOptions(
            tol=self.settings.tolerance,
            plane_samples=self.settings.plane_samples,
            plane_retries=self.settings.plane_retries,
            theta_scale=self.settings.theta_scale,
        )

    def _timed_out(self, spec: TrialSpec, tol: float, error: str) -> TheoremVerdict:
        return TheoremVerdict(
            theorem_id=spec.theorem_id, n=spec.n, epsilon=spec.epsilon, seed=spec.seed,
            max_abs_residual=0.0, relative=0.0, tol=tol, passed=False, error=error
        )

    async def run_trial(self, spec: TrialSpec, tol: float, semaphore: asyncio.Semaphore) -> TheoremVerdict:
        """Run one trial in a worker thread under the trial timeout."""
        async with semaphore:
            try:
                return await with_timeout(
                    asyncio.to_thread(
                        verify_theorem, spec.theorem_id, spec.n, spec.epsilon, spec.seed, tol, self.options
                    ),
                    timeout=self.settings.trial_timeout,
                    name=f"{spec.theorem_id.value} n={spec.n} epsilon={spec.epsilon} seed={spec.seed}",
                )
            except TrialTimeoutError as e:
                return self._timed_out(spec, tol, f"TrialTimeoutError: {e}")

    async def run_control(self, spec: ControlSpec, master_seed: int, semaphore: asyncio.Semaphore) -> ControlVerdict:
        async with semaphore:
            return await asyncio.to_thread(
                negative_control,
                spec.theorem_id,
                spec.n,
                spec.epsilon,
                master_seed,
                self.settings.control_attempts,
                self.settings.control_threshold,
                self.settings.control_min_failures,
            )

    async def run_suite(
        self,
        suite: str,
        ns: Sequence[int],
        epsilons: Sequence[int],
        trials: int,
        master_seed: int,
        tol: Optional[float] = None
    ) -> ReportFile:
        """
        Execute a suite and assemble its report.

        Args:
            suite: "all" or a single theorem id
            ns: Half-dimensions to cover
            epsilons: Signs to cover
            trials: Seeds per (theorem, n, epsilon) cell
            master_seed: Seed from which trial seeds are derived
            tol: Relative tolerance (settings.tolerance when omitted)

        Returns:
            ReportFile with verdicts sorted by (theorem_id, n, epsilon, seed)
        """
        start_time = time.time()
        tol = self.settings.tolerance if tol is None else tol
        plan = plan_suite(suite, ns, epsilons, trials, master_seed)
        control_plan = plan_controls(suite, ns, epsilons)
        logger.info(f"Running suite {suite}: {len(plan)} trials, {len(control_plan)} controls")

        semaphore = asyncio.Semaphore(max(1, self.settings.max_workers))
        verdicts = await asyncio.gather(*(self.run_trial(spec, tol, semaphore) for spec in plan))
        controls = await asyncio.gather(
            *(self.run_control(spec, master_seed, semaphore) for spec in control_plan)
        )

        verdicts = sorted(verdicts, key=lambda v: v.sort_key)
        controls = sorted(controls, key=lambda c: c.sort_key)
        summary = summarize(verdicts, controls)

        elapsed = time.time() - start_time
        logger.info(f"Suite {suite} finished in {elapsed:.2f}s: {summary.passed}/{summary.total} passed")
        return ReportFile(
            version=self.settings.report_version,
            master_seed=master_seed,
            suites=verdicts,
            controls=controls,
            summary=summary,
        )
