"""Derivative-free optimization of catalysis protocols.

A hand-rolled Nelder-Mead (coefficients, tolerance and restart policy are all
explicit so runs are reproducible bit-for-bit from a seed) plus the two
protocol-level searches: full cascade optimization over detection tuples and
threshold-fidelity success aggregation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .catalysis import CatalysisStep, cascade_success_prob
from .fock import DEFAULT_CUTOFF, ImpossibleOutcomeError, TruncationError
from .ops import coherent_vector
from .targets import ssv_fidelity_analytic

__all__ = [
    "SimplexConfig",
    "OptimizationProblem",
    "OptimizationResult",
    "ExperimentResult",
    "AcceptList",
    "AcceptedTuple",
    "nelder_mead",
    "optimize_cascade",
    "threshold_success",
]

PENALTY = -1.0  # objective value substituted for impossible outcomes


@dataclass(frozen=True)
class SimplexConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    tolerance: float = 1e-7
    max_iterations: int = 2000
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one restart")


@dataclass
class OptimizationProblem:
    """Box-bounded maximization problem.

    The objective must be total on the box: return a finite value or an
    explicit penalty, never raise.
    """

    objective: callable
    bounds: tuple
    config: SimplexConfig = field(default_factory=SimplexConfig)
    x0: np.ndarray | None = None


@dataclass
class OptimizationResult:
    params: np.ndarray
    value: float
    trace: list  # best value found by each restart
    evaluations: int
    converged: bool


def _start_points(problem: OptimizationProblem) -> np.ndarray:
    lo = np.array([b[0] for b in problem.bounds], dtype=float)
    hi = np.array([b[1] for b in problem.bounds], dtype=float)
    if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
        raise ValueError("bounds must be finite")
    cfg = problem.config
    count = cfg.restarts
    points = []
    if problem.x0 is not None:
        points.append(np.clip(np.asarray(problem.x0, dtype=float), lo, hi))
        count -= 1
    if count > 0:
        sampler = qmc.Sobol(d=len(problem.bounds), scramble=True, seed=cfg.seed)
        unit = sampler.random(count)
        points.extend(lo + (hi - lo) * (0.05 + 0.9 * unit))
    return np.array(points)


def nelder_mead(problem: OptimizationProblem) -> OptimizationResult:
    """Maximize over the box with restarted Nelder-Mead; deterministic per seed."""
    cfg = problem.config
    lo = np.array([b[0] for b in problem.bounds], dtype=float)
    hi = np.array([b[1] for b in problem.bounds], dtype=float)
    evaluations = 0

    def score(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        return float(problem.objective(np.clip(x, lo, hi)))

    best_x, best_f = None, -np.inf
    trace = []
    converged = False
    for start in _start_points(problem):
        x, f, ok = _simplex_descent(score, start, lo, hi, cfg)
        trace.append(f)
        converged = converged or ok
        if f > best_f:
            best_x, best_f = x, f
    return OptimizationResult(np.clip(best_x, lo, hi), best_f, trace,
                              evaluations, converged)


def _simplex_descent(score, start, lo, hi, cfg: SimplexConfig):
    dim = start.size
    steps = 0.05 * (hi - lo)
    simplex = [np.clip(start, lo, hi)]
    for i in range(dim):
        vertex = simplex[0].copy()
        vertex[i] = vertex[i] + steps[i] if vertex[i] + steps[i] <= hi[i] \
            else vertex[i] - steps[i]
        simplex.append(vertex)
    simplex = np.array(simplex)
    values = np.array([score(v) for v in simplex])

    for _ in range(cfg.max_iterations):
        order = np.argsort(values)[::-1]  # descending: best first
        simplex, values = simplex[order], values[order]
        spread = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1))
        if spread < cfg.tolerance:
            return simplex[0], values[0], True
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = centroid + cfg.reflection * (centroid - worst)
        f_ref = score(reflected)
        if f_ref > values[0]:
            expanded = centroid + cfg.expansion * (centroid - worst)
            f_exp = score(expanded)
            if f_exp > f_ref:
                simplex[-1], values[-1] = expanded, f_exp
            else:
                simplex[-1], values[-1] = reflected, f_ref
            continue
        if f_ref > values[-2]:
            simplex[-1], values[-1] = reflected, f_ref
            continue
        contracted = centroid + cfg.contraction * (worst - centroid)
        f_con = score(contracted)
        if f_con > values[-1]:
            simplex[-1], values[-1] = contracted, f_con
            continue
        simplex[1:] = simplex[0] + cfg.shrink * (simplex[1:] - simplex[0])
        values[1:] = [score(v) for v in simplex[1:]]
    return simplex[0], values[0], False


# ---------------------------------------------------------------------------
# protocol-level searches


@dataclass
class ExperimentResult:
    """One optimized (or evaluated) protocol configuration."""

    detections: tuple
    parameters: dict
    fidelity: float
    probability: float
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AcceptedTuple:
    detections: tuple
    fidelity: float
    probability: float
    beta: float
    xi: float
    delta: float


@dataclass
class AcceptList:
    """Detection tuples whose re-optimized target fidelity clears the threshold."""

    threshold: float
    base: AcceptedTuple
    deviants: list
    aggregate_probability: float

    @property
    def ratio(self) -> float:
        return self.aggregate_probability / self.base.probability

    def entries(self) -> list:
        return [self.base, *self.deviants]


def _cascade_objective(detections, cutoff, parity):
    """Objective over (alpha, theta_1..theta_N, beta, xi, delta); penalty -1
    on impossible outcomes keeps Nelder-Mead total."""
    n_steps = len(detections)

    def objective(x):
        alpha = x[0]
        thetas = x[1 : 1 + n_steps]
        beta, xi, delta = x[1 + n_steps :]
        steps = [CatalysisStep(theta=t, n_detect=n)
                 for t, n in zip(thetas, detections)]
        try:
            return ssv_fidelity_analytic(alpha, steps, beta, xi, delta,
                                         parity=parity, cutoff=cutoff)
        except (ImpossibleOutcomeError, TruncationError):
            return PENALTY

    return objective


THETA_BOUNDS = (0.05, np.pi / 2 - 0.05)


def optimize_cascade(n_steps: int, n_bound: int = 10, *,
                     cutoff: int = DEFAULT_CUTOFF, parity="+",
                     detection_tuples=None, alpha_bounds=(0.2, 6.0),
                     beta_bounds=(0.05, 3.0), xi_bounds=(-1.2, 0.2),
                     delta_bounds=(-6.0, 6.0),
                     config: SimplexConfig | None = None) -> list:
    """Maximize the SSV fidelity for every detection tuple and rank results.

    Beamsplitters are parametrized by theta inside an open box (reflectivities
    are reported as r^2 for comparison with quoted protocols).
    """
    if n_steps > 4:
        raise ValueError("cascades beyond four steps are not supported (cost)")
    if detection_tuples is None:
        detection_tuples = itertools.product(range(n_bound), repeat=n_steps)
    config = config or SimplexConfig()
    bounds = ((alpha_bounds,) + (THETA_BOUNDS,) * n_steps
              + (beta_bounds, xi_bounds, delta_bounds))
    results = []
    for detections in detection_tuples:
        detections = tuple(int(n) for n in detections)
        problem = OptimizationProblem(
            objective=_cascade_objective(detections, cutoff, parity),
            bounds=bounds, config=config)
        res = nelder_mead(problem)
        if res.value <= PENALTY:
            continue
        alpha = float(res.params[0])
        thetas = [float(t) for t in res.params[1 : 1 + n_steps]]
        beta, xi, delta = (float(v) for v in res.params[1 + n_steps :])
        steps = [CatalysisStep(theta=t, n_detect=n)
                 for t, n in zip(thetas, detections)]
        prob = cascade_success_prob(alpha, steps, cutoff)
        results.append(ExperimentResult(
            detections=detections,
            parameters={
                "alpha": alpha,
                "thetas": thetas,
                "r2": [float(np.cos(t) ** 2) for t in thetas],
                "beta": beta,
                "xi": xi,
                "delta": delta,
            },
            fidelity=float(res.value),
            probability=float(prob),
            metadata={"evaluations": res.evaluations,
                      "converged": res.converged,
                      "seed": config.seed},
        ))
    results.sort(key=lambda r: (-r.fidelity, -r.probability, r.detections))
    return results


def reoptimize_target(alpha: float, steps, detections, *, parity="+",
                      cutoff: int = DEFAULT_CUTOFF, x0=None,
                      beta_bounds=(0.05, 3.5), xi_bounds=(-1.2, 0.2),
                      delta_bounds=(-6.0, 6.0),
                      config: SimplexConfig | None = None):
    """Hold the protocol fixed, fit only the target (beta, xi, delta)."""
    trial_steps = [CatalysisStep(theta=s.theta, n_detect=n)
                   for s, n in zip(steps, detections)]

    def objective(x):
        try:
            return ssv_fidelity_analytic(alpha, trial_steps, x[0], x[1], x[2],
                                         parity=parity, cutoff=cutoff)
        except (ImpossibleOutcomeError, TruncationError):
            return PENALTY

    problem = OptimizationProblem(
        objective=objective,
        bounds=(beta_bounds, xi_bounds, delta_bounds),
        config=config or SimplexConfig(restarts=3, tolerance=1e-6,
                                       max_iterations=600),
        x0=None if x0 is None else np.asarray(x0, dtype=float))
    return nelder_mead(problem)


def threshold_success(alpha: float, steps, f_thr: float, *, n_bound: int = 10,
                      parity="+", cutoff: int = DEFAULT_CUTOFF,
                      prune_probability: float = 1e-9,
                      base_target=None,
                      config: SimplexConfig | None = None) -> AcceptList:
    """Enumerate deviating detection tuples at fixed (alpha, thetas),
    re-optimize only the target per tuple and aggregate the probability of all
    tuples whose fidelity clears f_thr.

    The base tuple is always part of the accept list; tuples with closed-form
    probability below `prune_probability` are skipped.
    """
    steps = list(steps)
    base_detections = tuple(s.n_detect for s in steps)
    psi = coherent_vector(alpha, cutoff, warn_tail=False).amplitudes

    def fit(detections, x0):
        res = reoptimize_target(alpha, steps, detections, parity=parity,
                                cutoff=cutoff, x0=x0, config=config)
        return res

    base_res = fit(base_detections, base_target)
    base_prob = _tuple_probability(psi, steps, base_detections, cutoff)
    base = AcceptedTuple(base_detections, float(base_res.value),
                         float(base_prob), *map(float, base_res.params))
    x0 = base_res.params
    deviants = []
    aggregate = base_prob
    for detections in itertools.product(range(n_bound), repeat=len(steps)):
        if detections == base_detections:
            continue
        prob = _tuple_probability(psi, steps, detections, cutoff)
        if prob < prune_probability:
            continue
        res = fit(detections, x0)
        if res.value >= f_thr:
            deviants.append(AcceptedTuple(detections, float(res.value),
                                          float(prob), *map(float, res.params)))
            aggregate += prob
    deviants.sort(key=lambda e: -e.probability)
    return AcceptList(threshold=float(f_thr), base=base, deviants=deviants,
                      aggregate_probability=float(aggregate))


def _tuple_probability(psi, steps, detections, cutoff) -> float:
    from .catalysis import closed_form_amplitudes

    trial = [CatalysisStep(theta=s.theta, n_detect=int(n))
             for s, n in zip(steps, detections)]
    amps = closed_form_amplitudes(psi, trial)
    return float(np.vdot(amps, amps).real)
