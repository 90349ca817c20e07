"""Seeded verification trials for the curvature identities and their negative controls."""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from riemprod.exceptions import DomainError, InvalidInputError, RiemprodError
from riemprod.geometry import classification, connection, curvature, invariants, structure
from riemprod.geometry.connection import ConnectionParams, Mode
from riemprod.geometry.structure import LeeData, NablaThetaData, PointStructure
from riemprod.models import ClassLabel, ControlVerdict, ResidualReport, TheoremId, TheoremVerdict
from riemprod.utils.rng import Stream, derived_seed, stream
from riemprod.utils.tensors import DEFAULT_TOL, apply_p, expect, residual, sym, trace_with, worst

logger = logging.getLogger(__name__)

ALGEBRA_TOL = 1e-10
EXACT_TOL = 1e-12

Reports = Dict[str, ResidualReport]


@dataclass(frozen=True)
class TrialOptions:
    """Knobs shared by all trials of a run."""
    tol: float = DEFAULT_TOL
    plane_samples: int = 64
    plane_retries: int = 16
    theta_scale: float = 1.0


@dataclass(frozen=True)
class TrialInstance:
    """Everything a trial draws from its seed."""
    ps: PointStructure
    lee: LeeData
    cp: ConnectionParams
    H: NablaThetaData
    Rprime: np.ndarray


def random_params(seed: int) -> ConnectionParams:
    """(lambda, mu) uniform in [-1, 1]^2."""
    lam, mu = stream(seed, Stream.PARAMS).uniform(-1.0, 1.0, size=2)
    return ConnectionParams(lam=float(lam), mu=float(mu))


def build_instance(
    n: int,
    epsilon: int,
    seed: int,
    preset: Optional[str] = None,
    parallel_torsion: bool = False,
    theta_scale: float = 1.0
) -> TrialInstance:
    """
    Draw a trial instance: structure, Lee data, connection, H and a random P-tensor R'.

    preset fixes (lambda, mu) by name, otherwise they are random.
    parallel_torsion=True realizes the parallel-torsion hypothesis as H = 0.
    """
    ps = structure.generate_structure(n, epsilon, seed)
    lee = structure.generate_theta(ps, seed, theta_scale)
    cp = connection.params_preset(preset, n) if preset else random_params(seed)
    H = structure.zero_nabla_theta(ps) if parallel_torsion else structure.generate_H(ps, seed)
    Rprime = curvature.random_p_tensor(ps, seed).L
    return TrialInstance(ps=ps, lee=lee, cp=cp, H=H, Rprime=Rprime)


def _k(inst: TrialInstance) -> np.ndarray:
    return connection.k_from_rprime(inst.Rprime, inst.ps, inst.lee, inst.cp, inst.H)


def _scalar_draw(seed: int, subkey: int, low: float, high: float) -> float:
    return float(stream(seed, Stream.AUXILIARY, subkey).uniform(low, high))


def _check_t21(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, theta_scale=opts.theta_scale)
    ps, lee, cp, H = inst.ps, inst.lee, inst.cp, inst.H

    R = connection.r_from_rprime(inst.Rprime, ps, lee, cp, H)
    R_general = connection.r_from_rprime(inst.Rprime, ps, lee, cp, H, mode=Mode.GENERAL)
    pq_s = connection.pq_vectors(ps, lee, cp, Mode.SPECIALIZED)
    pq_g = connection.pq_vectors(ps, lee, cp, Mode.GENERAL)
    st_s = connection.s_tensors(ps, lee, cp, H, Mode.SPECIALIZED)
    st_g = connection.s_tensors(ps, lee, cp, H, Mode.GENERAL)

    reports = {
        "k_loop": residual(_k(inst), connection.k_from_r(R, ps, opts.tol), opts.tol),
        "r_curvature_like": curvature.is_curvature_like(R, opts.tol),
        "r_modes": residual(R, R_general, opts.tol),
        "p_modes": residual(pq_s.p, pq_g.p, EXACT_TOL),
        "q_modes": residual(pq_s.q, pq_g.q, EXACT_TOL),
        "s_prime_modes": residual(st_s.s_prime, st_g.s_prime, EXACT_TOL),
        "s_double_prime_modes": residual(st_s.s_double_prime, st_g.s_double_prime, EXACT_TOL),
        "s_modes": residual(st_s.s, st_g.s, EXACT_TOL),
    }
    return reports, cp.to_dict()


def _check_t31(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    if n < 3:
        raise DomainError(f"T31 needs n >= 3, got n={n}")
    inst = build_instance(n, epsilon, seed, theta_scale=opts.theta_scale)
    ps = inst.ps
    K = _k(inst)
    b_prime = invariants.bochner(inst.Rprime, ps, opts.tol)
    shifted = inst.Rprime + curvature.psi_sum(structure.random_admissible_s(ps, seed), ps)
    c_b = curvature.contractions(b_prime, ps)

    reports = {
        "bochner": residual(b_prime, invariants.bochner(K, ps, opts.tol), opts.tol),
        "bochner_kernel": residual(invariants.bochner(shifted, ps, opts.tol), b_prime, opts.tol),
        "bochner_tau": residual(c_b.tau, 0.0, opts.tol),
        "bochner_tau_star": residual(c_b.tau_star, 0.0, opts.tol),
        "bochner_p_tensor": curvature.is_p_tensor(b_prime, ps, opts.tol),
    }
    return reports, inst.cp.to_dict()


def _eq24_reports(ps: PointStructure, lee: LeeData, cp: ConnectionParams, tol: float) -> Reports:
    pq = connection.pq_vectors(ps, lee, cp)
    unit = lee.theta_omega / (16 * ps.n ** 2)
    return {
        "gpp": residual(pq.gpp, unit, tol),
        "gqq": residual(pq.gqq, unit, tol),
        "gpq": residual(pq.gpq, -ps.epsilon * unit, tol),
    }


def _check_t41(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, preset="canonical", theta_scale=opts.theta_scale)
    ps, lee = inst.ps, inst.lee
    K = _k(inst)
    pi = curvature.pi_tensors(ps)
    canonical_form = inst.Rprime - lee.theta_omega * (pi.pi1 + pi.pi2 - ps.epsilon * pi.pi3) / (16 * n * n)

    reports = {
        "a_tensor": residual(invariants.a_tensor(inst.Rprime, ps, tol=opts.tol),
                             invariants.a_tensor(K, ps, tol=opts.tol), opts.tol),
        "canonical_form": residual(K, canonical_form, opts.tol),
    }
    reports.update(connection.canonical_ricci_residuals(inst.Rprime, K, ps, lee, opts.tol))
    return reports, inst.cp.to_dict()


def _check_eq24(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    ps = structure.generate_structure(n, epsilon, seed)
    lee = structure.generate_theta(ps, seed, opts.theta_scale)
    cp = ConnectionParams.canonical(n)
    return _eq24_reports(ps, lee, cp, min(opts.tol, EXACT_TOL)), cp.to_dict()


def _check_eq19(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, theta_scale=opts.theta_scale)
    S = connection.s_tensors(inst.ps, inst.lee, inst.cp, inst.H).s
    reports = connection.ricci_relation_residuals(inst.Rprime, _k(inst), S, inst.ps, opts.tol)
    return reports, inst.cp.to_dict()


def _plane_reports(
    L: np.ndarray,
    ps: PointStructure,
    seed: int,
    nu: float,
    nu_star: float,
    opts: TrialOptions
) -> Reports:
    pairs = [
        invariants.sectional(
            L, ps,
            invariants.totally_real_plane(ps, derived_seed(seed, Stream.PLANES, k), opts.plane_retries)
        )
        for k in range(opts.plane_samples)
    ]
    nus = np.array([p.nu for p in pairs])
    nu_stars = np.array([p.nu_star for p in pairs])
    return {
        "nu": residual(nus, np.full_like(nus, nu), opts.tol),
        "nu_star": residual(nu_stars, np.full_like(nu_stars, nu_star), opts.tol),
        "nu_spread": expect(float(np.std(nus)) <= opts.tol * (1.0 + abs(nu)), opts.tol),
        "nu_star_spread": expect(float(np.std(nu_stars)) <= opts.tol * (1.0 + abs(nu_star)), opts.tol),
    }


def _check_t42(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, preset="canonical", theta_scale=opts.theta_scale)
    ps = inst.ps
    tau_prime = _scalar_draw(seed, 20, -1.0, 1.0) * 4 * n * (n - 1)
    Rprime = invariants.constant_curvature_tensor("A", ps, tau_prime)
    K = connection.k_from_rprime(Rprime, ps, inst.lee, inst.cp, inst.H)
    unit = tau_prime / (4 * n * (n - 1))

    reports = _plane_reports(Rprime, ps, seed, unit, -ps.epsilon * unit, opts)
    reports["tau_prime"] = residual(curvature.contractions(Rprime, ps).tau, tau_prime, opts.tol)
    reports["a_rprime_zero"] = residual(invariants.a_tensor(Rprime, ps, tol=opts.tol), 0.0 * Rprime, ALGEBRA_TOL)
    reports["a_k_zero"] = residual(invariants.a_tensor(K, ps, tol=opts.tol), 0.0 * K, ALGEBRA_TOL)
    params = inst.cp.to_dict()
    params["tau_prime"] = tau_prime
    return reports, params


def _check_t51(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, parallel_torsion=True, theta_scale=opts.theta_scale)
    ps = inst.ps
    K = _k(inst)
    pq = connection.pq_vectors(ps, inst.lee, inst.cp)

    reports = {
        "c_tensor": residual(invariants.c_tensor(inst.Rprime, ps, opts.tol),
                             invariants.c_tensor(K, ps, opts.tol), opts.tol),
        "parallel_torsion_form": residual(K, connection.parallel_torsion_k(inst.Rprime, ps, pq), opts.tol),
    }
    reports.update(connection.parallel_torsion_trace_residuals(inst.Rprime, K, ps, pq, opts.tol))
    return reports, inst.cp.to_dict()


def _check_t52(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, parallel_torsion=True, theta_scale=opts.theta_scale)
    ps = inst.ps
    scale = 4 * n * (n - 1)
    tau_prime = _scalar_draw(seed, 21, -1.0, 1.0) * scale
    tau_star_prime = _scalar_draw(seed, 22, -1.0, 1.0) * scale
    Rprime = invariants.constant_curvature_tensor("C", ps, tau_prime, tau_star_prime)
    K = connection.k_from_rprime(Rprime, ps, inst.lee, inst.cp, inst.H)

    reports = _plane_reports(Rprime, ps, seed, tau_prime / scale, tau_star_prime / scale, opts)
    c_prime = curvature.contractions(Rprime, ps)
    reports["tau_prime"] = residual(c_prime.tau, tau_prime, opts.tol)
    reports["tau_star_prime"] = residual(c_prime.tau_star, tau_star_prime, opts.tol)
    reports["c_rprime_zero"] = residual(invariants.c_tensor(Rprime, ps, opts.tol), 0.0 * Rprime, ALGEBRA_TOL)
    reports["c_k_zero"] = residual(invariants.c_tensor(K, ps, opts.tol), 0.0 * K, ALGEBRA_TOL)
    params = inst.cp.to_dict()
    params.update({"tau_prime": tau_prime, "tau_star_prime": tau_star_prime})
    return reports, params


def _check_t61(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    inst = build_instance(n, epsilon, seed, preset="D", parallel_torsion=True, theta_scale=opts.theta_scale)
    ps = inst.ps
    R = connection.r_from_rprime(inst.Rprime, ps, inst.lee, inst.cp, inst.H)

    reports = {
        "e_tensor": residual(invariants.e_tensor(inst.Rprime, ps, opts.tol),
                             invariants.e_tensor(R, ps, opts.tol), opts.tol),
    }
    reports.update(connection.d_connection_residuals(inst.Rprime, R, ps, inst.lee, opts.tol))
    return reports, inst.cp.to_dict()


def _check_t62(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    ps = structure.generate_structure(n, epsilon, seed)
    pi = curvature.pi_tensors(ps)
    zero = np.zeros((ps.dim,) * 4)
    pivot = float(np.max(np.abs(pi.pi1 - pi.pi2)))

    # A curvature-like tensor with E(R') = 0 is tau' pi1 / 2n(2n-1); its failure
    # to be P-invariant is |coefficient| * max|pi1 - pi2|, so tau' must vanish.
    tau_prime = _scalar_draw(seed, 23, 0.5, 1.5) * 2 * n * (2 * n - 1)
    coefficient = tau_prime / (2 * n * (2 * n - 1))
    candidate = coefficient * pi.pi1
    p_defect = float(np.max(np.abs(apply_p(candidate, ps.P, (3, 4)) - candidate)))

    reports = {
        "flat_e_zero": residual(invariants.e_tensor(zero, ps, opts.tol), zero, opts.tol),
        "pivot": expect(pivot > 0.5, opts.tol),
        "pi1_to_pi2": residual(apply_p(pi.pi1, ps.P, (3, 4)), pi.pi2, ALGEBRA_TOL),
        "candidate_in_kernel": residual(invariants.e_tensor(candidate, ps, opts.tol), zero, ALGEBRA_TOL),
        "candidate_p_defect": residual(p_defect, abs(coefficient) * pivot, ALGEBRA_TOL),
        "candidate_rejected": expect(not curvature.is_p_tensor(candidate, ps, opts.tol).passed, opts.tol),
    }
    return reports, {"lambda": 0.0, "mu": 0.0, "tau_prime": tau_prime}


def _check_c63(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    ps = structure.generate_structure(n, epsilon, seed)
    lee = structure.generate_theta(ps, seed, opts.theta_scale)
    cp = ConnectionParams.d_connection()
    zero = np.zeros((ps.dim,) * 4)
    R = connection.r_from_rprime(zero, ps, lee, cp, structure.zero_nabla_theta(ps))
    c = curvature.contractions(R, ps)
    pi1 = curvature.pi_tensors(ps).pi1
    t = lee.theta_omega

    reports = {
        "space_form": residual(R, -t * pi1 / (4 * n * n), opts.tol),
        "tau": residual(c.tau, -(2 * n - 1) * t / (2 * n), opts.tol),
        "tau_star": residual(c.tau_star, 0.0, opts.tol),
        "tau_negative": expect(c.tau < 0.0, opts.tol),
        "tau_form": residual(R, c.tau * pi1 / (2 * n * (2 * n - 1)), ALGEBRA_TOL),
        "e_zero": residual(invariants.e_tensor(R, ps, opts.tol), zero, ALGEBRA_TOL),
    }
    return reports, {**cp.to_dict(), "theta_omega": t}


def _check_algebra(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    ps = structure.generate_structure(n, epsilon, seed)
    tol = ALGEBRA_TOL
    rng = stream(seed, Stream.AUXILIARY, 30)
    generic = rng.uniform(-1.0, 1.0, size=(ps.dim, ps.dim))
    symmetric = sym(generic)
    p_symmetric = symmetric @ ps.P
    pi = curvature.pi_tensors(ps)
    c1, c2, c3 = (curvature.contractions(p, ps) for p in pi)
    L = curvature.random_p_tensor(ps, seed).L
    c_l = curvature.contractions(L, ps)
    rho_psi1 = curvature.contractions(curvature.psi1(symmetric, ps), ps).rho
    big = curvature.random_curvature_like(ps, seed).L
    raw = stream(seed, Stream.AUXILIARY, 31).uniform(-1.0, 1.0, size=(ps.dim,) * 4)

    reports = {
        "psi1_symmetric": curvature.is_curvature_like(curvature.psi1(symmetric, ps), tol),
        "psi1_generic_rejected": expect(not curvature.is_curvature_like(curvature.psi1(generic, ps), tol).passed, tol),
        "psi2_admissible": curvature.is_curvature_like(curvature.psi2(p_symmetric, ps), tol),
        "psi2_generic_rejected": expect(not curvature.is_curvature_like(curvature.psi2(generic, ps), tol).passed, tol),
        "pi1_curvature_like": curvature.is_curvature_like(pi.pi1, tol),
        "pi2_curvature_like": curvature.is_curvature_like(pi.pi2, tol),
        "pi12_p_tensor": curvature.is_p_tensor(pi.pi1 + pi.pi2, ps, tol),
        "pi3_p_tensor": curvature.is_p_tensor(pi.pi3, ps, tol),
        "pi1_not_p_tensor": expect(not curvature.is_p_tensor(pi.pi1, ps, tol).passed, tol),
        "pi1_to_pi2": residual(apply_p(pi.pi1, ps.P, (3, 4)), pi.pi2, tol),
        "tau_pi1": residual(c1.tau, 2 * n * (2 * n - 1), tol),
        "tau_pi2": residual(c2.tau, -2 * n, tol),
        "tau_pi3": residual(c3.tau, 0.0, tol),
        "tau_star_pi1": residual(c1.tau_star, 0.0, tol),
        "tau_star_pi2": residual(c2.tau_star, 0.0, tol),
        "tau_star_pi3": residual(c3.tau_star, 4 * n * (n - 1), tol),
        "rho_psi1": residual(
            rho_psi1, trace_with(ps.g_inv, symmetric) * ps.g + (2 * n - 2) * symmetric, tol
        ),
        "rho_star_p_tensor": residual(c_l.rho @ ps.P, c_l.rho_star, tol),
        "bianchi_idempotent": residual(
            curvature.bianchi_map(curvature.bianchi_map(raw)), curvature.bianchi_map(raw), tol
        ),
        "curvature_like_generator": curvature.is_curvature_like(big, tol),
        "pair_symmetry": residual(big, big.transpose(2, 3, 0, 1), tol),
        "p_tensor_mixed_components": residual(curvature.mixed_components(L, ps), 0.0, tol),
    }
    return reports, {}


def _check_classify(n: int, epsilon: int, seed: int, opts: TrialOptions) -> Tuple[Reports, Dict[str, float]]:
    ps = structure.generate_structure(n, epsilon, seed)
    tol = ALGEBRA_TOL
    theta_v = structure.draw_theta(ps, seed, -1, opts.theta_scale)
    theta_h = structure.draw_theta(ps, seed, 1, opts.theta_scale)
    cases = {
        ClassLabel.W0: (np.zeros((ps.dim,) * 3), np.zeros(ps.dim)),
        ClassLabel.W3BAR: (classification.build_f(ClassLabel.W3BAR, ps, theta_v), theta_v),
        ClassLabel.W6BAR: (classification.build_f(ClassLabel.W6BAR, ps, theta_h), theta_h),
        ClassLabel.W1: (
            classification.build_f(ClassLabel.W3BAR, ps, theta_v)
            + classification.build_f(ClassLabel.W6BAR, ps, theta_h),
            theta_v + theta_h,
        ),
    }
    reports: Reports = {}
    for label, (F, theta) in cases.items():
        report = classification.classify_f(F, ps, tol)
        key = label.value.lower()
        reports[f"{key}_best"] = expect(report.best is label and report.passed, tol)
        reports[f"{key}_theta"] = residual(classification.theta_from_f(F, ps), theta, tol)
    w1 = classification.build_f(ClassLabel.W1, ps, theta_v + theta_h)
    reports["w1_direct_sum"] = residual(w1, cases[ClassLabel.W1][0], tol)
    return reports, {}


_CHECKS: Dict[TheoremId, Callable[[int, int, int, TrialOptions], Tuple[Reports, Dict[str, float]]]] = {
    TheoremId.T21: _check_t21,
    TheoremId.T31: _check_t31,
    TheoremId.T41: _check_t41,
    TheoremId.T42: _check_t42,
    TheoremId.T51: _check_t51,
    TheoremId.T52: _check_t52,
    TheoremId.T61: _check_t61,
    TheoremId.T62: _check_t62,
    TheoremId.C63: _check_c63,
    TheoremId.EQ24: _check_eq24,
    TheoremId.EQ19: _check_eq19,
    TheoremId.ALGEBRA: _check_algebra,
    TheoremId.CLASSIFY: _check_classify,
}


def _parse_id(theorem_id) -> TheoremId:
    try:
        return TheoremId(theorem_id)
    except ValueError:
        raise InvalidInputError(f"Unknown theorem id: {theorem_id}")


def verify_theorem(
    theorem_id,
    n: int,
    epsilon: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    options: Optional[TrialOptions] = None
) -> TheoremVerdict:
    """
    Run one seeded trial and fold all of its sub-checks into a verdict.

    The verdict carries the worst sub-check; `detail` lists every sub-check's
    relative residual. Errors raised while computing (failed generation,
    failed predicates) turn into a failing verdict with `error` set.

    Raises:
        InvalidInputError: Unknown theorem id or epsilon
        DomainError: T31 requested with n < 3
    """
    tid = _parse_id(theorem_id)
    if epsilon not in (-1, 1):
        raise InvalidInputError(f"epsilon must be +1 or -1, got {epsilon}")
    if tid is TheoremId.T31 and n < 3:
        raise DomainError(f"T31 needs n >= 3, got n={n}")
    opts = replace(options or TrialOptions(), tol=tol)

    try:
        reports, params = _CHECKS[tid](n, epsilon, seed, opts)
    except RiemprodError as e:
        logger.error(f"{tid.value} n={n} epsilon={epsilon} seed={seed} raised: {e}")
        return TheoremVerdict(
            theorem_id=tid, n=n, epsilon=epsilon, seed=seed,
            max_abs_residual=0.0, relative=0.0, tol=tol, passed=False,
            error=f"{type(e).__name__}: {e}"
        )

    top = worst(reports)
    verdict = TheoremVerdict(
        theorem_id=tid,
        n=n,
        epsilon=epsilon,
        seed=seed,
        params=params,
        max_abs_residual=top.max_abs_residual,
        relative=top.relative,
        tol=top.tol,
        passed=all(r.passed for r in reports.values()),
        worst_check=top.label,
        detail={name: r.relative for name, r in reports.items()},
    )
    if not verdict.passed:
        logger.info(f"{tid.value} n={n} epsilon={epsilon} seed={seed} failed at {top.label}: {top.relative:.3e}")
    return verdict


def _control_residual(theorem_id: TheoremId, n: int, epsilon: int, seed: int) -> float:
    inst = build_instance(n, epsilon, seed)
    K = _k(inst)
    if theorem_id is TheoremId.T41:
        invariant = invariants.a_tensor
    else:
        invariant = invariants.c_tensor
    return residual(invariant(inst.Rprime, inst.ps), invariant(K, inst.ps)).relative


def negative_control(
    theorem_id,
    n: int,
    epsilon: int,
    master_seed: int,
    attempts: int = 20,
    threshold: float = 1e-3,
    min_exceeded: int = 15
) -> ControlVerdict:
    """
    Run an invariance identity on generic data where it should break.

    Generic (lambda, mu) and H != 0 are drawn for each attempt; the control
    passes when at least `min_exceeded` attempts exceed `threshold`.
    """
    tid = _parse_id(theorem_id)
    if tid not in (TheoremId.T41, TheoremId.T51):
        raise InvalidInputError(f"No negative control is defined for {tid.value}")
    exceeded = 0
    for attempt in range(attempts):
        seed = derived_seed(master_seed, Stream.CONTROL, attempt)
        try:
            value = _control_residual(tid, n, epsilon, seed)
        except RiemprodError as e:
            logger.error(f"Negative control {tid.value} attempt {attempt} raised: {e}")
            continue
        if value > threshold:
            exceeded += 1

    passed = exceeded >= min_exceeded
    if not passed:
        logger.warning(
            f"Negative control {tid.value} n={n} epsilon={epsilon}: only {exceeded}/{attempts} attempts broke the identity"
        )
    return ControlVerdict(
        theorem_id=tid, n=n, epsilon=epsilon, master_seed=master_seed, attempts=attempts,
        exceeded=exceeded, threshold=threshold, min_exceeded=min_exceeded, passed=passed
    )
