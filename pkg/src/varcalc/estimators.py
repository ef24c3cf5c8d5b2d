"""Sampling estimators for one- and two-sided directional limits.

Everything here treats the objective as a black box: values only, no
structure.  The exact-calculus layer produces the same quantities from
formulas; keeping the two routes independent is the whole point, so this
module must not import from the calculus module.

The difference-quotient estimators share one grid design: a geometric
step ladder t_j = t0 * ratio^j, and at each level a fixed set of
quasi-random perturbations of the probe direction inside a ball whose
radius shrinks proportionally to t_j.  The reported value is the minimum
quotient over the last few (smallest-step) levels -- the recorded
witnesses -- so that `value == min(q for (_, _, q) in witnesses)` holds
by construction.  Enlarging the direction set or the tail window only
adds candidates, hence never increases the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import qmc

from .extreal import INF, ExtReal
from .oracles import KinkError
from .problem import CompositeProblem

DIVERGENCE_THRESHOLD = 1e6


# ---------------------------------------------------------------------------
# grid schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSchedule:
    """Step ladder and perturbation design for the liminf estimators."""

    t0: float = 0.1
    ratio: float = 0.5
    levels: int = 20
    directions: int = 64
    ball_scale: float = 1.0  # perturbation radius = ball_scale * t_j
    tail_levels: int = 3  # window whose quotients become witnesses
    seed: int = 0
    divergence_threshold: float = DIVERGENCE_THRESHOLD

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ValueError("ratio must lie in (0, 1)")
        if self.levels < 1 or self.directions < 0:
            raise ValueError("levels must be >= 1 and directions >= 0")
        if not (1 <= self.tail_levels <= self.levels):
            raise ValueError("tail_levels must lie in [1, levels]")

    def steps(self) -> np.ndarray:
        return self.t0 * self.ratio ** np.arange(self.levels)

    def ball_points(self, dim: int) -> np.ndarray:
        """Perturbation offsets in the unit ball, first row always 0.

        The same offsets are reused at every level (scaled by the level
        radius); drawing them once from a seeded scrambled Halton stream
        makes a schedule with more directions a strict superset of one
        with fewer.
        """
        pts = np.zeros((1 + self.directions, dim))
        if self.directions > 0:
            eng = qmc.Halton(d=dim, scramble=True, seed=self.seed)
            cube = 2.0 * eng.random(self.directions) - 1.0
            norms = np.linalg.norm(cube, axis=1)
            big = norms > 1.0
            cube[big] /= norms[big, np.newaxis]
            pts[1:] = cube
        return pts


@dataclass(frozen=True)
class Witness:
    """One recorded difference quotient: step, probe used, quotient."""

    t: float
    point: np.ndarray
    quotient: float


@dataclass
class LiminfEstimate:
    value: ExtReal
    witnesses: list[Witness]
    diverging: bool
    level_minima: list[tuple[float, float]]  # (t_j, min quotient at level j)
    skipped: int = 0

    def agrees_with(self, exact: ExtReal, rel_tol: float = 1e-2) -> bool:
        """Does this estimate corroborate an exact extended-real value?"""
        if exact.is_inf:
            return self.diverging
        if self.diverging or self.value.is_inf:
            return False
        scale = max(1.0, abs(exact.raw))
        return abs(self.value.raw - exact.raw) <= rel_tol * scale


# ---------------------------------------------------------------------------
# batched objective access
# ---------------------------------------------------------------------------


def _batch_fn(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, CompositeProblem):
        return f.f_value_many
    if hasattr(f, "f_value_many"):
        return f.f_value_many
    if hasattr(f, "value_many"):
        return f.value_many
    if callable(f):

        def many(X: np.ndarray) -> np.ndarray:
            out = np.empty(X.shape[0])
            for i, row in enumerate(X):
                val = f(np.asarray(row, dtype=float))
                out[i] = val.raw if isinstance(val, ExtReal) else float(val)
            return out

        return many
    raise TypeError("objective must be a problem, a batch evaluator, or a callable")


def _base_value(fn_many, x: np.ndarray) -> float:
    f0 = float(fn_many(x[np.newaxis, :])[0])
    if not math.isfinite(f0):
        raise ValueError("estimators require a finite value at the base point")
    return f0


def _collect(
    schedule: GridSchedule,
    quotients_by_level: list[np.ndarray],
    probes_by_level: list[np.ndarray],
) -> LiminfEstimate:
    """Fold per-level quotients into the tail-window estimate."""
    level_minima: list[tuple[float, float]] = []
    steps = schedule.steps()
    skipped = 0
    witnesses: list[Witness] = []
    tail_start = schedule.levels - schedule.tail_levels
    for j, (t, quots, probes) in enumerate(
        zip(steps, quotients_by_level, probes_by_level)
    ):
        bad = np.isnan(quots)
        skipped += int(bad.sum())
        good = quots[~bad]
        level_minima.append((float(t), float(good.min()) if good.size else math.inf))
        if j >= tail_start:
            for probe, q in zip(probes[~bad], good):
                witnesses.append(Witness(float(t), probe.copy(), float(q)))
    if witnesses:
        best = min(w.quotient for w in witnesses)
        tail_vals = [w.quotient for w in witnesses]
        diverging = all(q > schedule.divergence_threshold for q in tail_vals)
    else:  # every tail evaluation was skipped
        best = math.inf
        diverging = True
    value = INF if math.isinf(best) and best > 0 else ExtReal(best)
    return LiminfEstimate(
        value=value,
        witnesses=witnesses,
        diverging=diverging,
        level_minima=level_minima,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# difference-quotient estimators
# ---------------------------------------------------------------------------


def est_subderivative(f, x, w, schedule: GridSchedule | None = None) -> LiminfEstimate:
    """First-order lower quotient:  (f(x + t w') - f(x)) / t."""
    schedule = schedule or GridSchedule()
    fn_many = _batch_fn(f)
    x = np.asarray(x, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(x.shape)
    f0 = _base_value(fn_many, x)
    offsets = schedule.ball_points(x.size)
    quots, probes = [], []
    for t in schedule.steps():
        W = w + (schedule.ball_scale * t) * offsets
        vals = fn_many(x + t * W)
        with np.errstate(invalid="ignore"):
            quots.append((vals - f0) / t)
        probes.append(W)
    return _collect(schedule, quots, probes)


def est_second_subderivative(
    f, x, v, w, schedule: GridSchedule | None = None
) -> LiminfEstimate:
    """Second-order lower quotient against the base pair (x, v):

        (f(x + t w') - f(x) - t <v, w'>) / (t^2 / 2).
    """
    schedule = schedule or GridSchedule()
    fn_many = _batch_fn(f)
    x = np.asarray(x, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(x.shape)
    w = np.asarray(w, dtype=float).reshape(x.shape)
    f0 = _base_value(fn_many, x)
    offsets = schedule.ball_points(x.size)
    quots, probes = [], []
    for t in schedule.steps():
        W = w + (schedule.ball_scale * t) * offsets
        vals = fn_many(x + t * W)
        with np.errstate(invalid="ignore"):
            quots.append((vals - f0 - t * (W @ v)) / (0.5 * t * t))
        probes.append(W)
    return _collect(schedule, quots, probes)


def est_parabolic_subderivative(
    f, x, w, slope, z, schedule: GridSchedule | None = None
) -> LiminfEstimate:
    """Parabolic lower quotient along the fixed direction w with arc z':

        (f(x + t w + (t^2/2) z') - f(x) - t * slope) / (t^2 / 2)

    where slope is the (finite) first-order subderivative at x along w.
    Only the arc direction z is perturbed; w stays fixed.
    """
    schedule = schedule or GridSchedule()
    fn_many = _batch_fn(f)
    x = np.asarray(x, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(x.shape)
    z = np.asarray(z, dtype=float).reshape(x.shape)
    slope = float(slope)
    if not math.isfinite(slope):
        raise ValueError("parabolic quotients need a finite first-order slope")
    f0 = _base_value(fn_many, x)
    offsets = schedule.ball_points(x.size)
    quots, probes = [], []
    for t in schedule.steps():
        Z = z + (schedule.ball_scale * t) * offsets
        half_t2 = 0.5 * t * t
        vals = fn_many(x + t * w + half_t2 * Z)
        with np.errstate(invalid="ignore"):
            quots.append((vals - f0 - t * slope) / half_t2)
        probes.append(Z)
    return _collect(schedule, quots, probes)


# ---------------------------------------------------------------------------
# prox-regularity falsifier
# ---------------------------------------------------------------------------


@dataclass
class ProxRegularityCounterexample:
    """A pair of nearby points whose gradients are hypermonotone enough to
    defeat every modulus up to the requested bound."""

    x1: np.ndarray
    x2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    implied_r: float
    epsilon: float
    source: str  # "sequence" or "grid"

    def violation(self, r: float) -> float:
        """<v2 - v1, x2 - x1> + r ||x2 - x1||^2 ; negative means violated."""
        dx = self.x2 - self.x1
        return float((self.v2 - self.v1) @ dx + r * float(dx @ dx))

    def reverify(self, grad: Callable[[np.ndarray], np.ndarray], tol: float = 1e-10) -> bool:
        """Recompute both gradients and reproduce the recorded pairing."""
        g1 = np.asarray(grad(self.x1), dtype=float).reshape(-1)
        g2 = np.asarray(grad(self.x2), dtype=float).reshape(-1)
        if not (np.allclose(g1, self.v1, atol=tol) and np.allclose(g2, self.v2, atol=tol)):
            return False
        dx = self.x2 - self.x1
        nrm2 = float(dx @ dx)
        if nrm2 == 0.0:
            return False
        fresh = -float((g2 - g1) @ dx) / nrm2
        return abs(fresh - self.implied_r) <= tol * max(1.0, abs(self.implied_r))


@dataclass
class FalsificationResult:
    counterexample: ProxRegularityCounterexample | None
    implied_r_by_epsilon: dict[float, float]  # best implied modulus found
    pairs_checked: int

    @property
    def falsified(self) -> bool:
        return self.counterexample is not None


def _implied_r(x1, x2, v1, v2) -> float | None:
    dx = x2 - x1
    nrm2 = float(dx @ dx)
    if nrm2 <= 0.0:
        return None
    return -float((v2 - v1) @ dx) / nrm2


def prox_regularity_falsify(
    grad: Callable[[np.ndarray], np.ndarray],
    x_bar,
    v_bar,
    r_max: float = 1e3,
    epsilons: Sequence[float] = (1e-1, 1e-2, 1e-3),
    sequences: Callable[[int], tuple[np.ndarray, np.ndarray]] | None = None,
    max_sequence_index: int = 2**40,
    grid_pairs: int = 128,
    seed: int = 0,
) -> FalsificationResult:
    """Search for gradient pairs violating lower hypomonotonicity.

    Prox-regularity of a C^1 function at (x_bar, v_bar) would force, for
    some r > 0 and some epsilon > 0,

        <grad f(x2) - grad f(x1), x2 - x1>  >=  -r ||x2 - x1||^2

    for all x1, x2 within epsilon of x_bar whose gradients stay within
    epsilon of v_bar.  A verified pair with implied modulus above r_max
    inside the *smallest* epsilon ball therefore rules out every modulus
    up to r_max at every localization in the sweep.

    Pair candidates come from an optional problem-supplied index family
    k -> (x1_k, x2_k) walked along a geometric ladder, plus a seeded
    quasi-random pair grid at shrinking radii.  Gradient evaluations
    that land on kinks are skipped.
    """
    x_bar = np.asarray(x_bar, dtype=float).reshape(-1)
    v_bar = np.asarray(v_bar, dtype=float).reshape(x_bar.shape)
    eps_sorted = sorted(set(float(e) for e in epsilons), reverse=True)
    if not eps_sorted:
        raise ValueError("need at least one epsilon")
    eps_min = eps_sorted[-1]

    def admissible(x1, x2, v1, v2, eps) -> bool:
        return (
            np.linalg.norm(x1 - x_bar) <= eps
            and np.linalg.norm(x2 - x_bar) <= eps
            and np.linalg.norm(v1 - v_bar) <= eps
            and np.linalg.norm(v2 - v_bar) <= eps
        )

    def pair_stream() -> Iterable[tuple[np.ndarray, np.ndarray, str]]:
        if sequences is not None:
            k = 1
            while k <= max_sequence_index:
                yield (*sequences(k), "sequence")
                k *= 2
        eng = qmc.Halton(d=2 * x_bar.size, scramble=True, seed=seed)
        for level in range(8):
            radius = eps_min * 10.0 ** (-level)
            cube = 2.0 * eng.random(grid_pairs) - 1.0
            for row in cube:
                u1, u2 = row[: x_bar.size], row[x_bar.size :]
                yield (x_bar + radius * u1, x_bar + radius * u2, "grid")

    best_by_eps: dict[float, float] = {e: -math.inf for e in eps_sorted}
    winner: ProxRegularityCounterexample | None = None
    checked = 0
    for x1, x2, source in pair_stream():
        x1 = np.asarray(x1, dtype=float).reshape(x_bar.shape)
        x2 = np.asarray(x2, dtype=float).reshape(x_bar.shape)
        try:
            v1 = np.asarray(grad(x1), dtype=float).reshape(x_bar.shape)
            v2 = np.asarray(grad(x2), dtype=float).reshape(x_bar.shape)
        except KinkError:
            continue
        checked += 1
        r = _implied_r(x1, x2, v1, v2)
        if r is None:
            continue
        for eps in eps_sorted:
            if admissible(x1, x2, v1, v2, eps):
                best_by_eps[eps] = max(best_by_eps[eps], r)
        if r > r_max and admissible(x1, x2, v1, v2, eps_min):
            winner = ProxRegularityCounterexample(
                x1=x1, x2=x2, v1=v1, v2=v2, implied_r=r, epsilon=eps_min, source=source
            )
            break
    # A winner inside the smallest ball certifies every larger ball too.
    if winner is not None:
        for eps in eps_sorted:
            best_by_eps[eps] = max(best_by_eps[eps], winner.implied_r)
    return FalsificationResult(
        counterexample=winner,
        implied_r_by_epsilon=best_by_eps,
        pairs_checked=checked,
    )


# ---------------------------------------------------------------------------
# growth / subregularity sample checks
# ---------------------------------------------------------------------------


@dataclass
class SampleCheck:
    holds: bool
    worst_ratio: float
    worst_point: np.ndarray | None
    n_checked: int
    n_skipped: int
    note: str = ""


def _sphere_points(dim: int, n: int, seed: int) -> np.ndarray:
    eng = qmc.Halton(d=dim, scramble=True, seed=seed)
    cube = 2.0 * eng.random(n) - 1.0
    norms = np.linalg.norm(cube, axis=1)
    norms[norms < 1e-12] = 1.0
    return cube / norms[:, np.newaxis]


def qgc_sample_check(
    f,
    x_bar,
    kappa: float,
    gamma: float,
    n_samples: int = 512,
    seed: int = 0,
) -> SampleCheck:
    """Sampled test of quadratic growth with modulus kappa on a gamma ball:

        f(x) >= f(x_bar) + (kappa/2) ||x - x_bar||^2.

    Reports the worst observed ratio 2 (f(x) - f(x_bar)) / ||x - x_bar||^2;
    the condition sample-holds when that ratio stays >= kappa (up to
    roundoff slack).  Points outside the domain satisfy the bound trivially.
    """
    fn_many = _batch_fn(f)
    x_bar = np.asarray(x_bar, dtype=float).reshape(-1)
    f0 = _base_value(fn_many, x_bar)
    dirs = _sphere_points(x_bar.size, n_samples, seed)
    radii = gamma * np.logspace(0.0, -6.0, num=13)
    worst = math.inf
    worst_point = None
    checked = 0
    for r in radii:
        X = x_bar + r * dirs
        vals = fn_many(X)
        with np.errstate(invalid="ignore"):
            ratios = 2.0 * (vals - f0) / (r * r)
        for i, rho in enumerate(ratios):
            if math.isnan(rho):
                continue
            checked += 1
            if rho < worst:
                worst = rho
                worst_point = X[i].copy()
    slack = 1e-7 * max(1.0, abs(kappa))
    holds = checked > 0 and worst >= kappa - slack
    return SampleCheck(
        holds=holds,
        worst_ratio=worst,
        worst_point=worst_point,
        n_checked=checked,
        n_skipped=len(radii) * n_samples - checked,
    )


def sms_sample_check(
    subgradient_distance: Callable[[np.ndarray], float | None],
    x_bar,
    kappa: float,
    gamma: float,
    n_samples: int = 256,
    seed: int = 0,
) -> SampleCheck:
    """Sampled test of strong metric subregularity of the subgradient map:

        ||x - x_bar|| <= kappa * dist(0, subdiff f(x))   near x_bar.

    ``subgradient_distance`` returns dist(0, subdiff f(x)), or None when
    the subdifferential is empty there (such points are skipped: they
    impose no constraint).  Reports the worst ratio ||x - x_bar|| / dist.
    """
    x_bar = np.asarray(x_bar, dtype=float).reshape(-1)
    dirs = _sphere_points(x_bar.size, n_samples, seed)
    radii = gamma * np.logspace(0.0, -5.0, num=11)
    worst = 0.0
    worst_point = None
    checked = 0
    skipped = 0
    for r in radii:
        for u in dirs:
            x = x_bar + r * u
            d = subgradient_distance(x)
            if d is None:
                skipped += 1
                continue
            checked += 1
            dist_x = float(np.linalg.norm(x - x_bar))
            ratio = math.inf if d <= 0.0 and dist_x > 0.0 else dist_x / max(d, 1e-300)
            if ratio > worst:
                worst = ratio
                worst_point = x.copy()
    slack = 1e-7 * max(1.0, abs(kappa))
    holds = checked > 0 and worst <= kappa + slack
    return SampleCheck(
        holds=holds,
        worst_ratio=worst,
        worst_point=worst_point,
        n_checked=checked,
        n_skipped=skipped,
    )
