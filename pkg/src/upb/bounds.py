"""Packing bounds on the diversity sum of unitary constellations.

Three upper bounds, each a function of a critical radius r0 solving the
packing equality m * ball_mass(r0) = total_mass:

  B1  sqrt(r0^2/n - r0^4/(4 n^2))            r0 euclidean
  B2  sin sqrt(pi^2 k/n + 4 arcsin^2(sqrt(a))/n)  r0 euclidean,
      k = floor(r0^2/4), a = r0^2/4 - k
  B3  sin(r0 / sqrt(n))                      r0 riemannian

plus the exact small-case values, the euclidean/riemannian distance
envelope the B2 derivation rests on, a crossover-radius finder for the
B1/B2 comparison, and an asymptotic (heuristic, m -> infinity) lower bound.
"""

import bisect as _bisect
import math
from dataclasses import dataclass, field, replace

from .errors import NumericalError, ValidationError
from .weyl import (
    IntegrationConfig,
    MassEstimate,
    ball_mass,
    max_radius,
    resolve_strategy,
    total_mass,
)

__all__ = [
    "AsymptoticBound",
    "BoundResult",
    "SolveDiagnostics",
    "SolverConfig",
    "BOUND_IDS",
    "BOUND_METRIC",
    "asymptotic_lower_bound",
    "b1_of_r",
    "b2_of_r",
    "b3_of_r",
    "bound_b1",
    "bound_b2",
    "bound_b3",
    "crossover_radius",
    "euclidean_riemannian_envelope",
    "evaluate_bound",
    "exact_delta",
    "solve_r0",
    "solver_key",
]

BOUND_IDS = ("b1", "b2", "b3")
BOUND_METRIC = {"b1": "euclidean", "b2": "euclidean", "b3": "riemannian"}

_FLOOR_SNAP = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Bisection settings. root_tol is on the radius, not the mass residual."""

    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    root_tol: float = 1e-6
    max_bisection_steps: int = 200

    def __post_init__(self):
        if not (0.0 < self.root_tol < 1.0):
            raise ValidationError(f"root_tol must lie in (0, 1), got {self.root_tol!r}")
        if not isinstance(self.max_bisection_steps, int) or self.max_bisection_steps < 1:
            raise ValidationError("max_bisection_steps must be a positive integer")


@dataclass(frozen=True)
class SolveDiagnostics:
    """What a solve did: eval count, sample-doubling restarts, final bracket,
    the mass estimate at the returned radius, a finite-difference mass slope
    near the root, and whether all evaluations stayed monotone in r."""

    evaluations: int
    restarts: int
    bracket: tuple
    mass: MassEstimate
    slope: float
    monotone: bool


@dataclass(frozen=True)
class BoundResult:
    n: int
    m: int
    bound_id: str
    metric: str
    r0: float
    value: float
    std_error_hint: float
    config_fingerprint: str


@dataclass(frozen=True)
class AsymptoticBound:
    """Heuristic asymptotic lower bound; valid only as m -> infinity."""

    n: int
    m: int
    tau: int
    r0: float
    value: float
    heuristic: bool = True


def _check_nm(n, m):
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    if not isinstance(m, int) or m < 2:
        raise ValidationError(f"constellation size m must be an integer >= 2, got {m!r}")


def solver_key(n, m, metric, cfg):
    """Cache key: n:m:metric:strategy:samples:nodes:seed:root_tol."""
    integ = cfg.integration
    strategy = resolve_strategy(n, integ)
    return ":".join(
        [
            str(n),
            str(m),
            metric,
            strategy,
            str(integ.samples),
            str(integ.nodes_per_axis),
            str(integ.seed),
            format(cfg.root_tol, ".17g"),
        ]
    )


def solve_r0(n, m, metric, cfg=None):
    """Radius r0 with ball_mass(n, r0, metric) = total_mass(n)/m, by bisection.

    The objective is nondecreasing in r for a fixed integration config
    (deterministic tensor values, common random numbers for Monte Carlo).
    If evaluations are detected out of order anyway, the Monte Carlo sample
    count doubles and the solve restarts, up to max_refinements times.
    Returns (r0, SolveDiagnostics). Raises NumericalError with the bracket
    attached if max_bisection_steps cannot reach root_tol.
    """
    _check_nm(n, m)
    if cfg is None:
        cfg = SolverConfig()
    target = total_mass(n) / m
    hi0 = max_radius(n, metric)
    strategy = resolve_strategy(n, cfg.integration)
    max_restarts = cfg.integration.max_refinements if strategy == "monte-carlo" else 0
    slack = 1e-12 * total_mass(n)
    evaluations = 0
    restarts = 0
    while True:
        integ = replace(cfg.integration, samples=cfg.integration.samples * 2**restarts)
        seen_r = []  # sorted radii with their mass values, for the monotone check
        seen_v = []
        monotone = True

        def evaluate(r):
            nonlocal evaluations, monotone
            est = ball_mass(n, r, metric, integ)
            evaluations += 1
            i = _bisect.bisect_left(seen_r, r)
            if i < len(seen_r) and seen_r[i] == r:
                return est
            if i > 0 and est.value < seen_v[i - 1] - slack:
                monotone = False
            if i < len(seen_r) and est.value > seen_v[i] + slack:
                monotone = False
            seen_r.insert(i, r)
            seen_v.insert(i, est.value)
            return est

        lo, hi = 0.0, hi0  # mass(0) = 0 < target, mass(hi0) = total > target
        steps = 0
        while hi - lo > cfg.root_tol:
            if steps >= cfg.max_bisection_steps:
                raise NumericalError(
                    f"bisection did not reach root_tol={cfg.root_tol:g} within "
                    f"{cfg.max_bisection_steps} steps (bracket width {hi - lo:.3e})",
                    bracket=(lo, hi),
                )
            mid = 0.5 * (lo + hi)
            if evaluate(mid).value >= target:
                hi = mid
            else:
                lo = mid
            steps += 1
            if not monotone and restarts < max_restarts:
                break
        if not monotone and restarts < max_restarts:
            restarts += 1
            continue
        r0 = 0.5 * (lo + hi)
        final = evaluate(r0)
        i = _bisect.bisect_left(seen_r, r0)
        j0, j1 = max(0, i - 1), min(len(seen_r) - 1, i + 1)
        if seen_r[j1] > seen_r[j0]:
            slope = (seen_v[j1] - seen_v[j0]) / (seen_r[j1] - seen_r[j0])
        else:
            slope = 0.0
        diag = SolveDiagnostics(
            evaluations=evaluations,
            restarts=restarts,
            bracket=(lo, hi),
            mass=final,
            slope=max(slope, 0.0),
            monotone=monotone,
        )
        return r0, diag


def _floor_frac(q):
    """(k, alpha) with k = floor(q) under a 1e-12 snap and alpha = q - k >= 0."""
    k = math.floor(q + _FLOOR_SNAP)
    return k, min(max(q - k, 0.0), 1.0)


def _check_radius(n, r, metric="euclidean"):
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"dimension must be a positive integer, got {n!r}")
    rmax = max_radius(n, metric)
    if not (math.isfinite(r) and -1e-9 <= r <= rmax * (1.0 + 1e-9)):
        raise ValidationError(f"radius must lie in [0, {rmax:.6g}], got {r!r}")
    return min(max(float(r), 0.0), rmax)


def b1_of_r(n, r):
    """First upper-bound curve sqrt(r^2/n - r^4/(4 n^2)), capped at 1."""
    r = _check_radius(n, r)
    q = r * r / n - r**4 / (4.0 * n * n)
    return min(1.0, math.sqrt(max(q, 0.0)))


def b2_of_r(n, r, clamp=True):
    """Second upper-bound curve sin sqrt(pi^2 k/n + 4 arcsin^2(sqrt(a))/n).

    k = floor(r^2/4) with a 1e-12 snap, a the fractional remainder. With
    clamp=True (the bound) the sine argument is capped at pi/2 so the value
    is the valid packing bound; clamp=False exposes the raw curve, which is
    what the B1/B2 crossover is defined on.
    """
    r = _check_radius(n, r)
    k, alpha = _floor_frac(r * r / 4.0)
    arg = math.sqrt(
        (math.pi**2 * k + 4.0 * math.asin(math.sqrt(alpha)) ** 2) / n
    )
    if clamp:
        arg = min(arg, 0.5 * math.pi)
    return math.sin(arg)


def b3_of_r(n, r):
    """Third upper-bound curve sin(r / sqrt(n)) on the riemannian radius,
    argument capped at pi/2."""
    r = _check_radius(n, r, "riemannian")
    return math.sin(min(0.5 * math.pi, r / math.sqrt(n)))


def evaluate_bound(bound_id, n, r0):
    if bound_id == "b1":
        return b1_of_r(n, r0)
    if bound_id == "b2":
        return b2_of_r(n, r0)
    if bound_id == "b3":
        return b3_of_r(n, r0)
    raise ValidationError(f"unknown bound id {bound_id!r}; expected one of {BOUND_IDS}")


def _curve_derivative(bound_id, n, r0, metric):
    h = 1e-6 * max(1.0, r0)
    rmax = max_radius(n, metric)
    lo, hi = max(0.0, r0 - h), min(rmax, r0 + h)
    if hi <= lo:
        return 0.0
    return (evaluate_bound(bound_id, n, hi) - evaluate_bound(bound_id, n, lo)) / (hi - lo)


def _bound(bound_id, n, m, cfg):
    if cfg is None:
        cfg = SolverConfig()
    metric = BOUND_METRIC[bound_id]
    r0, diag = solve_r0(n, m, metric, cfg)
    value = evaluate_bound(bound_id, n, r0)
    # radius uncertainty: half the final bracket plus the MC noise converted
    # through the local mass slope; scaled by the curve derivative
    se_r = 0.5 * cfg.root_tol
    if diag.mass.std_error > 0.0:
        if diag.slope > 0.0:
            se_r += diag.mass.std_error / diag.slope
        else:
            se_r += max_radius(n, metric)  # flat bracket: no slope information
    hint = abs(_curve_derivative(bound_id, n, r0, metric)) * se_r
    return BoundResult(
        n=n,
        m=m,
        bound_id=bound_id,
        metric=metric,
        r0=r0,
        value=value,
        std_error_hint=hint,
        config_fingerprint=solver_key(n, m, metric, cfg),
    )


def bound_b1(n, m, cfg=None):
    """Diversity-sum upper bound B1 at the euclidean critical radius."""
    return _bound("b1", n, m, cfg)


def bound_b2(n, m, cfg=None):
    """Diversity-sum upper bound B2 at the euclidean critical radius."""
    return _bound("b2", n, m, cfg)


def bound_b3(n, m, cfg=None):
    """Diversity-sum upper bound B3 at the riemannian critical radius."""
    return _bound("b3", n, m, cfg)


def exact_delta(n, m):
    """Exactly known diversity-sum optimum, or None where no exact value is
    published: all n at m in {2, 3}, all m for n = 1, and n = 2 up to m = 16."""
    _check_nm(n, m)
    if n == 1:
        return math.sin(math.pi / m)
    if m == 2:
        return 1.0
    if m == 3:
        return math.sqrt(3.0) / 2.0
    if n == 2:
        small = {
            4: math.sqrt(6.0) / 3.0,
            5: math.sqrt(10.0) / 4.0,
            6: math.sqrt(15.0) / 5.0,
            7: math.sqrt(21.0) / 6.0,
            8: math.sqrt(28.0) / 7.0,
            9: math.sqrt(36.0) / 8.0,
        }
        if m in small:
            return small[m]
        if 10 <= m <= 16:
            return math.sqrt(2.0) / 2.0
    return None


def euclidean_riemannian_envelope(n, d):
    """(lower, upper) envelope of the riemannian distance at chordal distance d:

      2 sqrt(n) arcsin(d / (2 sqrt(n))) <= dist <= 2 sqrt(k pi^2/4 + arcsin^2 sqrt(a))

    with k = floor(d^2/4) (1e-12 snap) and a the remainder. Equality holds at
    d = 0 and d = 2 sqrt(n); lower <= upper everywhere.
    """
    d = _check_radius(n, d)
    x = min(d / (2.0 * math.sqrt(n)), 1.0)
    lower = 2.0 * math.sqrt(n) * math.asin(x)
    k, alpha = _floor_frac(d * d / 4.0)
    upper = 2.0 * math.sqrt(k * math.pi**2 / 4.0 + math.asin(math.sqrt(alpha)) ** 2)
    return lower, upper


def crossover_radius(n, grid=4096, tol=1e-12):
    """Radius where the raw B2 curve crosses B1, for a given dimension n >= 2.

    On (0, sqrt(2n)) the raw curve starts above B1 and ends below it; the
    returned radius is the first sign change of b2 - b1, refined by
    bisection. Returns None if no sign change is found.
    """
    if not isinstance(n, int) or n < 2:
        raise ValidationError(f"crossover needs an integer dimension >= 2, got {n!r}")
    hi = math.sqrt(2.0 * n) * (1.0 - 1e-12)
    lo = hi * 1e-6

    def h(r):
        return b2_of_r(n, r, clamp=False) - b1_of_r(n, r)

    rs = [lo + (hi - lo) * i / (grid - 1) for i in range(grid)]
    hs = [h(r) for r in rs]
    bracket = None
    for i in range(grid - 1):
        if hs[i] > 0.0 >= hs[i + 1]:
            bracket = (rs[i], rs[i + 1])
            break
    if bracket is None:
        return None
    a, b = bracket
    for _ in range(200):
        if b - a <= tol * max(1.0, b):
            break
        mid = 0.5 * (a + b)
        if h(mid) > 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def asymptotic_lower_bound(n, m, tau, cfg=None):
    """Heuristic asymptotic lower bound sqrt(n) r0 (tau+1)^(-1/n^2).

    tau is the caller-supplied simultaneous-tangency count (asymptotically
    the kissing number in dimension 2n^2 - 1). The result is marked
    heuristic: the derivation holds only as m -> infinity and the value is
    not a certified bound at finite m.
    """
    _check_nm(n, m)
    if not isinstance(tau, int) or tau < 0:
        raise ValidationError(f"tau must be a nonnegative integer, got {tau!r}")
    r0, _ = solve_r0(n, m, "euclidean", cfg)
    value = math.sqrt(n) * r0 * (tau + 1.0) ** (-1.0 / n**2)
    return AsymptoticBound(n=n, m=m, tau=tau, r0=r0, value=value)
