"""Built-in problem instances with hand-computed expected facts.

Three named entries exercise behavior that smooth random test problems
cannot reach:

* ``example_3_2`` -- a univariate function assembled from the chords of
  x^4 between the nodes 1/n, with an x^{10/3} cos(1/x) oscillation
  superimposed.  Gradient difference quotients at the origin admit the
  zero matrix as a second-order coefficient away from the null set of
  chord nodes, yet the hypomonotonicity sweep produces a verified
  counterexample pair for every modulus threshold we probe.
* ``example_3_3`` -- the antiderivative of x^2 sin(1/x^2): classically
  twice differentiable at every point (second derivative unbounded near
  the origin), and again falsifiable by explicit pair sequences.
* ``example_4_6`` -- a one-dimensional composite model built on the same
  staircase objective, small enough that every quantity the toolkit
  produces is checked against a hand computation.

``random_qp`` and ``random_nlp`` generate seeded instances for the
property suites: stationarity holds by construction and the relevant
spectra are known from a dense eigensolve.

Entry ids are stable opaque addresses used by the CLI
(``catalog run example_4_6``) and by problem files (``{"catalog": id}``).
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .calculus import ExactCalculus
from .estimators import (
    est_second_subderivative,
    prox_regularity_falsify,
    sms_sample_check,
)
from .expr import KinkError
from .oracles import SmoothMap, SmoothOracle, extended_hessian_residual
from .polyfun import PolyhedralFn
from .polyhedra import Polyhedron
from .problem import CompositeProblem

# ---------------------------------------------------------------------------
# the staircase evaluator (chords of x^4 with a cos(1/x) overlay)
# ---------------------------------------------------------------------------

#: pieces with index beyond this are flattened to zero; everything the
#: flattening discards is below (1/cap)^{10/3} + 2 (1/cap)^4 < 1e-23, far
#: under double roundoff for any quotient probed at realistic scales
STAIR_NODE_CAP = 10**7

_STAIR_TAIL_EDGE = 1.0 / STAIR_NODE_CAP

_TEN_THIRDS = 10.0 / 3.0


def _stair_chord_coeffs(n):
    """Slope and intercept of the chord of x^4 over [1/(n+1), 1/n].

    Both the slope numerator (n+1)^4 - n^4 and the intercept numerator
    n^3 - (n+1)^3 are expanded so no large-minus-large difference is ever
    formed; n can reach 1e7 where the naive forms lose half the mantissa.
    Accepts scalars or arrays (float64 throughout: the denominators reach
    1e42, past int64 but nowhere near float64 range).
    """
    nf = np.asarray(n, dtype=float)
    denom = nf**3 * (nf + 1.0) ** 3
    slope = (2.0 * nf + 1.0) * (2.0 * nf * (nf + 1.0) + 1.0) / denom
    intercept = -(3.0 * nf * (nf + 1.0) + 1.0) / denom
    return slope, intercept


def _stair_value_many(x: np.ndarray) -> np.ndarray:
    """Vectorized values; even in x, zero at zero, continuous across nodes
    (either neighboring chord gives the shared node value 1/n^4)."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.zeros(ax.shape)
    live = ax >= _STAIR_TAIL_EDGE
    if not np.any(live):
        return out
    a = ax[live]
    r = 1.0 / a
    osc = a**_TEN_THIRDS * np.cos(r)
    vals = np.empty_like(a)
    inner = a < 1.0
    vals[~inner] = a[~inner] ** 4  # the chords continue as x^4 itself
    if np.any(inner):
        slope, intercept = _stair_chord_coeffs(np.floor(r[inner]))
        vals[inner] = slope * a[inner] + intercept
    out[live] = osc + vals
    return out


def _stair_value(x: float) -> float:
    return float(_stair_value_many(np.array([x]))[0])


def _stair_node_hit(ax: float, n0: int) -> bool:
    """Whether ax is the double representing a chord node 1/n.

    floor(1/ax) can land on either side of n when 1/n is not exactly
    representable, so both neighboring candidates are compared.
    """
    return ax == 1.0 / n0 or ax == 1.0 / (n0 + 1)


def _stair_gradient_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0  # difference quotients vanish: see the entry facts
    s = 1.0 if x > 0.0 else -1.0
    ax = abs(x)
    if ax < _STAIR_TAIL_EDGE:
        return 0.0  # flattened tail, see STAIR_NODE_CAP
    r = 1.0 / ax
    osc = _TEN_THIRDS * ax ** (7.0 / 3.0) * math.cos(r) + ax ** (4.0 / 3.0) * math.sin(r)
    if ax > 1.0:
        return s * (osc + 4.0 * ax**3)
    if ax == 1.0:
        raise KinkError("chord slope jumps at |x| = 1")
    n0 = int(math.floor(r))
    if _stair_node_hit(ax, n0):
        raise KinkError(f"chord slope jumps at |x| = 1/{n0 if ax == 1.0 / n0 else n0 + 1}")
    slope, _ = _stair_chord_coeffs(n0)
    return s * (osc + float(slope))


def _stair_hessian_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0  # the second-order coefficient matched by the quotients
    ax = abs(x)
    if ax < _STAIR_TAIL_EDGE:
        return 0.0
    r = 1.0 / ax
    if ax > 1.0:
        poly = 12.0 * ax * ax
    elif ax == 1.0:
        raise KinkError("no classical second derivative at |x| = 1")
    else:
        if _stair_node_hit(ax, int(math.floor(r))):
            raise KinkError("no classical second derivative at a chord node")
        poly = 0.0
    return (
        (70.0 / 9.0) * ax ** (4.0 / 3.0) * math.cos(r)
        + (14.0 / 3.0) * ax ** (1.0 / 3.0) * math.sin(r)
        - ax ** (-2.0 / 3.0) * math.cos(r)
        + poly
    )


def staircase_oracle() -> SmoothOracle:
    """Chords of x^4 between the nodes 1/n plus an x^{10/3} cos(1/x) term.

    Even, continuous, zero at zero.  Differentiable except at the chord
    nodes +-1/n (the gradient raises KinkError exactly there); the
    gradient difference quotients at the origin decay like |x|^{1/3}, so
    the zero matrix is a valid second-order coefficient in the
    everywhere-defined-up-to-a-null-set sense even though the classical
    second derivative blows up like |x|^{-2/3} along the pieces.
    """
    return SmoothOracle(
        dim_in=1,
        fn=lambda x: _stair_value(float(x[0])),
        grad_fn=lambda x: np.array([_stair_gradient_scalar(float(x[0]))]),
        hess_fn=lambda x: np.array([[_stair_hessian_scalar(float(x[0]))]]),
        fn_many=lambda X: _stair_value_many(X[:, 0]),
        extended=True,
    )


# ---------------------------------------------------------------------------
# the oscillatory-integral evaluator
# ---------------------------------------------------------------------------


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


#: below this |x| the closed-form integration-by-parts tail takes over;
#: its dropped remainder is below 20 |x|^11 (< 2e-21 at the crossover)
OSC_SERIES_EDGE = 1e-2


def _osc_integral_series(ax: np.ndarray) -> np.ndarray:
    """Four integration-by-parts terms of the antiderivative of
    t^2 sin(1/t^2) from 0, valid for small positive ax (vectorized)."""
    r = 1.0 / (ax * ax)
    c = np.cos(r)
    s = np.sin(r)
    x5 = ax**5
    x7 = x5 * ax * ax
    x9 = x7 * ax * ax
    x11 = x9 * ax * ax
    return 0.5 * x5 * c + 1.25 * x7 * s - (35.0 / 8.0) * x9 * c - (315.0 / 16.0) * x11 * s


def _osc_integral_quad(ax: float) -> float:
    """Oscillation-aware adaptive quadrature for ax above the crossover.

    The substitution u = 1/t^2 turns the infinitely oscillating integrand
    into a sin-weighted tail integral of u^{-5/2}, which the adaptive
    Gauss-Kronrod machinery integrates cycle by cycle to the requested
    absolute tolerance.
    """
    out = quad(
        lambda u: u ** (-2.5),
        1.0 / (ax * ax),
        np.inf,
        weight="sin",
        wvar=1.0,
        epsabs=1e-13,
        limit=100,
        limlst=200,
        full_output=1,
    )
    value, abserr = 0.5 * float(out[0]), 0.5 * float(out[1])
    if abserr > 1e-10:
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3g} exceeds 1e-10 at |x| = {ax:.6g}"
        )
    return value


def _osc_value_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0
    ax = abs(x)
    s = 1.0 if x > 0.0 else -1.0  # even integrand, odd integral
    if ax <= OSC_SERIES_EDGE:
        return s * float(_osc_integral_series(np.array([ax]))[0])
    return s * _osc_integral_quad(ax)


def _osc_value_many(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros(x.shape)
    small = (ax > 0.0) & (ax <= OSC_SERIES_EDGE)
    if np.any(small):
        out[small] = np.sign(x[small]) * _osc_integral_series(ax[small])
    for i in np.nonzero(ax > OSC_SERIES_EDGE)[0]:
        out[i] = math.copysign(_osc_integral_quad(ax[i]), x[i])
    return out


def _osc_gradient_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0
    return x * x * math.sin(1.0 / (x * x))


def _osc_hessian_scalar(x: float) -> float:
    if x == 0.0:
        return 0.0  # lim of x sin(1/x^2) quotients
    return 2.0 * x * math.sin(1.0 / (x * x)) - (2.0 / x) * math.cos(1.0 / (x * x))


def oscillatory_integral_oracle() -> SmoothOracle:
    """Antiderivative of x^2 sin(1/x^2), zero at zero.

    Values come from oscillation-aware adaptive quadrature (|x| above
    1e-2) or from a closed-form integration-by-parts tail (below, with
    remainder < 2e-21).  The first and second derivatives are exact
    formulas: both vanish at 0, the function is classically twice
    differentiable at every point, and the second derivative is
    unbounded on every neighborhood of 0.
    """
    return SmoothOracle(
        dim_in=1,
        fn=lambda x: _osc_value_scalar(float(x[0])),
        grad_fn=lambda x: np.array([_osc_gradient_scalar(float(x[0]))]),
        hess_fn=lambda x: np.array([[_osc_hessian_scalar(float(x[0]))]]),
        fn_many=lambda X: _osc_value_many(X[:, 0]),
    )


# ---------------------------------------------------------------------------
# entries and expected facts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FactResult:
    """Outcome of one expected-fact check.

    ``source`` says how the fact was established: "exact" for direct
    arithmetic or a reverified finite certificate, "sampled" for grid or
    quasi-random evidence.
    """

    name: str
    ok: bool
    source: str
    detail: str


#: an expected-fact check: problem -> (ok, source, detail)
FactCheck = Callable[[CompositeProblem], tuple[bool, str, str]]


@dataclass
class CatalogEntry:
    id: str
    title: str
    problem: Callable[[], CompositeProblem]
    expected: dict[str, FactCheck] = field(default_factory=dict)
    kappa: float | None = None
    feasible_set: Polyhedron | None = None
    #: k -> (x1_k, x2_k): problem-supplied pair family for the
    #: hypomonotonicity sweep, walked along a doubling ladder
    pair_family: Callable[[int], tuple[np.ndarray, np.ndarray]] | None = None
    notes: tuple[str, ...] = ()


def check_expected(entry: CatalogEntry) -> list[FactResult]:
    """Build the entry's problem once and run every expected fact."""
    problem = entry.problem()
    results = []
    for name, check in entry.expected.items():
        ok, source, detail = check(problem)
        results.append(FactResult(name=name, ok=ok, source=source, detail=detail))
    return results


def _scalar_problem(oracle: SmoothOracle, name: str) -> CompositeProblem:
    """Wrap a scalar function as a composite with a vanishing g o F part."""
    return CompositeProblem(
        F=SmoothMap.identity(1),
        g=PolyhedralFn.affine(np.zeros(1)),
        x_bar=np.zeros(1),
        phi=oracle,
        name=name,
    )


def _falsification_fact(
    oracle: SmoothOracle,
    pair_family: Callable[[int], tuple[np.ndarray, np.ndarray]],
) -> FactCheck:
    def check(problem: CompositeProblem) -> tuple[bool, str, str]:
        res = prox_regularity_falsify(
            oracle.gradient,
            x_bar=np.zeros(1),
            v_bar=np.zeros(1),
            r_max=1e3,
            epsilons=(1e-1, 1e-2),
            sequences=pair_family,
        )
        ce = res.counterexample
        if ce is None:
            return False, "exact", f"no violating pair found ({res.pairs_checked} checked)"
        if not ce.reverify(oracle.gradient):
            return False, "exact", "counterexample failed independent re-evaluation"
        return (
            True,
            "exact",
            (
                f"reverified pair at x1 = {ce.x1[0]:.6g}, x2 = {ce.x2[0]:.6g} "
                f"with implied modulus {ce.implied_r:.6g} inside the "
                f"{ce.epsilon:g}-localization (source: {ce.source})"
            ),
        )

    return check


def _fd_gradient_fact(
    oracle: SmoothOracle, points: tuple[float, ...], step: float, tol: float
) -> FactCheck:
    """Central difference quotients of the value route against the
    hand-coded gradient formula (the two are independently written)."""

    def check(problem: CompositeProblem) -> tuple[bool, str, str]:
        worst = 0.0
        for p in points:
            lo = oracle.value(np.array([p - step]))
            hi = oracle.value(np.array([p + step]))
            fd = (hi - lo) / (2.0 * step)
            g = float(oracle.gradient(np.array([p]))[0])
            worst = max(worst, abs(fd - g) / max(1.0, abs(g)))
        return (
            worst <= tol,
            "sampled",
            f"worst relative gradient-vs-quotient gap {worst:.3g} over {len(points)} points",
        )

    return check


def example_3_2() -> CatalogEntry:
    """Staircase model: flat second-order coefficient, no hypomonotonicity."""
    oracle = staircase_oracle()

    def pair_family(k: int) -> tuple[np.ndarray, np.ndarray]:
        # cos(1/x) = 1 at x1 (pure chord slope), sin(1/x) = 1 at x2
        # (the x^{4/3} term dominates): the slope gap between these two
        # nearby points grows without bound relative to their distance
        x1 = 1.0 / (2.0 * math.pi * k)
        x2 = 1.0 / (0.5 * math.pi + 2.0 * math.pi * k)
        return np.array([x1]), np.array([x2])

    def fact_origin(problem: CompositeProblem) -> tuple[bool, str, str]:
        v0 = _stair_value(0.0)
        g0 = _stair_gradient_scalar(0.0)
        h0 = _stair_hessian_scalar(0.0)
        ok = v0 == 0.0 and g0 == 0.0 and h0 == 0.0
        return ok, "exact", f"value {v0:g}, gradient {g0:g}, second-order coefficient {h0:g}"

    def fact_node_continuity(problem: CompositeProblem) -> tuple[bool, str, str]:
        # both chords meeting at 1/n must give exactly 1/n^4 there; the
        # oscillation term is shared, so only the chord values are compared
        worst = 0.0
        ns = list(range(1, 61)) + [100, 1000, 10**5, 10**6]
        for n in ns:
            xn = 1.0 / n
            c_lo, d_lo = _stair_chord_coeffs(n)
            lo = float(c_lo) * xn + float(d_lo)
            if n == 1:
                hi = xn**4
            else:
                c_hi, d_hi = _stair_chord_coeffs(n - 1)
                hi = float(c_hi) * xn + float(d_hi)
            worst = max(worst, abs(hi - lo), abs(lo - float(n) ** -4.0))
        return (
            worst <= 1e-9,
            "exact",
            f"worst one-sided mismatch {worst:.3g} at {len(ns)} nodes (tol 1e-9)",
        )

    def fact_even(problem: CompositeProblem) -> tuple[bool, str, str]:
        grid = np.linspace(-1.5, 1.5, 1001)
        gap = float(np.max(np.abs(_stair_value_many(grid) - _stair_value_many(-grid))))
        return gap == 0.0, "sampled", f"max |g(x) - g(-x)| = {gap:g} on a 1001-point grid"

    def fact_kinks(problem: CompositeProblem) -> tuple[bool, str, str]:
        hits = 0
        probes = [1.0, 0.5, 1.0 / 3.0, 0.2, 1.0 / 7.0, 0.125, 1.0 / 97.0]
        for p in probes:
            for sgn in (1.0, -1.0):
                try:
                    oracle.gradient(np.array([sgn * p]))
                except KinkError:
                    hits += 1
        interior_ok = True
        for p in (0.37, 0.61, 0.9, 1.7, -0.41):
            try:
                oracle.gradient(np.array([p]))
            except KinkError:
                interior_ok = False
        ok = hits == 2 * len(probes) and interior_ok
        return (
            ok,
            "exact",
            f"{hits}/{2 * len(probes)} node probes raised, interior points did not",
        )

    def fact_flat_model(problem: CompositeProblem) -> tuple[bool, str, str]:
        prof = extended_hessian_residual(
            oracle, np.zeros(1), np.zeros((1, 1)), radii=[10.0**-k for k in range(1, 7)]
        )
        ok = prof.tail_residual <= 5e-2
        return (
            ok,
            "sampled",
            (
                f"gradient quotient residuals against the zero matrix fall to "
                f"{prof.tail_residual:.3g} at radius 1e-6"
            ),
        )

    return CatalogEntry(
        id="example_3_2",
        title="staircase with oscillation: flat second-order model, not hypomonotone",
        problem=lambda: _scalar_problem(staircase_oracle(), "example_3_2"),
        expected={
            "origin_derivatives_vanish": fact_origin,
            "chords_join_continuously": fact_node_continuity,
            "even_symmetry": fact_even,
            "kinks_exactly_at_nodes": fact_kinks,
            "zero_matrix_fits_gradient_quotients": fact_flat_model,
            "gradient_formula_matches_quotients": _fd_gradient_fact(
                oracle, (0.37, 0.61, 0.83, 1.7, -0.41), step=1e-7, tol=1e-5
            ),
            "not_prox_regular": _falsification_fact(oracle, pair_family),
        },
        pair_family=pair_family,
        notes=(
            "pieces with node index beyond 1e7 are flattened to zero; the "
            "discarded values are below 1e-23",
        ),
    )


def example_3_3() -> CatalogEntry:
    """Oscillatory integral: twice differentiable yet not hypomonotone."""
    oracle = oscillatory_integral_oracle()

    def pair_family(k: int) -> tuple[np.ndarray, np.ndarray]:
        # sin(1/x^2) = 0 at x1 (zero gradient), = 1 at x2 (gradient x2^2):
        # the gradient gap x2^2 shrinks like 1/k but the points approach
        # each other like k^{-3/2}, so the implied modulus grows like k^{1/2}
        x1 = 1.0 / math.sqrt(2.0 * math.pi * k)
        x2 = 1.0 / math.sqrt(0.5 * math.pi + 2.0 * math.pi * k)
        return np.array([x1]), np.array([x2])

    def fact_origin(problem: CompositeProblem) -> tuple[bool, str, str]:
        ok = (
            _osc_value_scalar(0.0) == 0.0
            and _osc_gradient_scalar(0.0) == 0.0
            and _osc_hessian_scalar(0.0) == 0.0
        )
        return ok, "exact", "value, gradient, and second derivative all vanish at 0"

    def fact_cubic_envelope(problem: CompositeProblem) -> tuple[bool, str, str]:
        grid = np.linspace(-1.0, 1.0, 1000)
        vals = _osc_value_many(grid)
        slack = float(np.max(np.abs(vals) - np.abs(grid) ** 3 / 3.0))
        return (
            slack <= 1e-12,
            "sampled",
            f"max(|f(x)| - |x|^3/3) = {slack:.3g} on a 1000-point grid of [-1, 1]",
        )

    def fact_route_agreement(problem: CompositeProblem) -> tuple[bool, str, str]:
        # the closed-form tail stays valid a little above its cutoff, so
        # both evaluation routes can be compared on an overlap band
        band = np.geomspace(1.05e-2, 3e-2, 25)
        worst = 0.0
        for ax in band:
            worst = max(
                worst,
                abs(_osc_integral_quad(float(ax)) - float(_osc_integral_series(np.array([ax]))[0])),
            )
        return (
            worst <= 1e-9,
            "sampled",
            f"quadrature and closed-form tail differ by at most {worst:.3g} on the overlap band",
        )

    return CatalogEntry(
        id="example_3_3",
        title="oscillatory integral: twice differentiable, not hypomonotone",
        problem=lambda: _scalar_problem(oscillatory_integral_oracle(), "example_3_3"),
        expected={
            "origin_derivatives_vanish": fact_origin,
            "cubic_envelope": fact_cubic_envelope,
            "evaluation_routes_agree": fact_route_agreement,
            "gradient_formula_matches_quotients": _fd_gradient_fact(
                oracle, (0.3, 0.7, -0.5), step=1e-4, tol=1e-4
            ),
            "not_prox_regular": _falsification_fact(oracle, pair_family),
        },
        pair_family=pair_family,
    )


def _composite_phi() -> SmoothOracle:
    """2x plus the staircase: smooth part of the composite entry."""
    stair = staircase_oracle()
    return SmoothOracle(
        dim_in=1,
        fn=lambda x: 2.0 * float(x[0]) + stair.fn(x),
        grad_fn=lambda x: np.array([2.0]) + stair.gradient(x),
        hess_fn=lambda x: stair.hessian(x),
        fn_many=lambda X: 2.0 * X[:, 0] + stair.value_many(X),
        extended=True,
    )


def example_4_6() -> CatalogEntry:
    """Composite model: growth and subregularity verified against hand values.

    Objective 2x + staircase(x) plus the indicator of {x : -x <= 0, -x^3 <= 0}
    written as a two-row composition.  At the origin: base subgradient -2,
    multiplier set {(2, t) : t >= 0}, attainment radius 2, trivial critical
    cone, and the whole battery holds.
    """

    def make_problem() -> CompositeProblem:
        F = SmoothMap(
            [
                SmoothOracle(
                    dim_in=1,
                    fn=lambda x: -float(x[0]),
                    grad_fn=lambda x: np.array([-1.0]),
                    hess_fn=lambda x: np.zeros((1, 1)),
                    fn_many=lambda X: -X[:, 0],
                ),
                SmoothOracle(
                    dim_in=1,
                    fn=lambda x: -float(x[0]) ** 3,
                    grad_fn=lambda x: np.array([-3.0 * float(x[0]) ** 2]),
                    hess_fn=lambda x: np.array([[-6.0 * float(x[0])]]),
                    fn_many=lambda X: -X[:, 0] ** 3,
                ),
            ]
        )
        return CompositeProblem(
            F=F,
            g=PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(2)),
            x_bar=np.zeros(1),
            phi=_composite_phi(),
            name="example_4_6",
        )

    feasible = Polyhedron(np.array([[-1.0]]), np.zeros(1))  # {x : x >= 0}

    def fact_msqc_grid(problem: CompositeProblem) -> tuple[bool, str, str]:
        grid = np.linspace(-1.0, 1.0, 1000)
        lhs = np.maximum(-grid, 0.0)  # distance to the feasible half-line
        rhs = np.hypot(np.maximum(-grid, 0.0), np.maximum(-grid**3, 0.0))
        worst = float(np.max(lhs - rhs))
        return (
            worst <= 1e-12,
            "exact",
            f"max(d(x, feasible) - d(F(x), dom g)) = {worst:.3g} on a 1000-point grid",
        )

    def fact_growth_grid(problem: CompositeProblem) -> tuple[bool, str, str]:
        grid = np.linspace(0.0, 1.0, 1000)
        f_vals = 2.0 * grid + _stair_value_many(grid)
        worst = float(np.min(f_vals - grid**2))
        return (
            worst >= -1e-12,
            "exact",
            f"min(f(x) - f(0) - x^2) = {worst:.3g} on the feasible part of the grid",
        )

    def fact_multiplier_set(problem: CompositeProblem) -> tuple[bool, str, str]:
        vr = ExactCalculus(problem).multipliers().vrep()
        verts = sorted(tuple(float(c) for c in np.round(v, 9)) for v in vr.vertices)
        rays = sorted(
            tuple(float(c) for c in np.round(r / np.linalg.norm(r), 9)) for r in vr.all_rays()
        )
        ok = verts == [(2.0, 0.0)] and rays == [(0.0, 1.0)]
        return ok, "exact", f"vertices {verts}, unit rays {rays}"

    def fact_tau_ball(problem: CompositeProblem) -> tuple[bool, str, str]:
        calc = ExactCalculus(problem, kappa=1.0)
        tau = calc.tau()
        vertex = np.array([2.0, 0.0])
        inside = bool(np.linalg.norm(vertex) <= tau + 1e-12)
        in_set = calc.multipliers().contains(vertex)
        ok = abs(tau - 2.0) <= 1e-12 and inside and in_set
        return ok, "exact", f"attainment radius {tau:g}; (2, 0) inside and in the set: {inside and in_set}"

    def fact_battery(problem: CompositeProblem) -> tuple[bool, str, str]:
        from .growth import growth_battery  # deferred: growth imports this module's deps

        report = growth_battery(problem, kappa=1.0, seed=0)
        verdicts = {it.name: it.verdict for it in report.items}
        ok = report.overall == "holds" and all(v == "holds" for v in verdicts.values())
        return ok, "sampled", f"overall {report.overall}; items {verdicts}"

    def fact_offcone_divergence(problem: CompositeProblem) -> tuple[bool, str, str]:
        calc = ExactCalculus(problem, kappa=1.0)
        details = []
        ok = True
        for w in (1.0, -1.0):
            exact = calc.d2_f(np.array([w]))
            est = est_second_subderivative(problem, problem.x_bar, np.zeros(1), np.array([w]))
            ok = ok and exact.value.is_inf and est.diverging
            details.append(f"w = {w:+g}: exact {exact.status}, estimator diverging = {est.diverging}")
        return ok, "sampled", "; ".join(details)

    return CatalogEntry(
        id="example_4_6",
        title="composite half-line model with hand-checked growth certificates",
        problem=make_problem,
        expected={
            "domain_distance_bound_on_grid": fact_msqc_grid,
            "growth_inequality_on_grid": fact_growth_grid,
            "multiplier_set_vertex_and_ray": fact_multiplier_set,
            "attainment_radius_two": fact_tau_ball,
            "battery_all_hold": fact_battery,
            "off_cone_directions_diverge": fact_offcone_divergence,
        },
        kappa=1.0,
        feasible_set=feasible,
        notes=(
            "the objective's smooth part is only extendedly second-order at "
            "the base point: its classical second derivative blows up nearby",
        ),
    )


# ---------------------------------------------------------------------------
# seeded generators for the property suites
# ---------------------------------------------------------------------------


def random_qp(seed: int, n: int) -> CatalogEntry:
    """Strictly convex quadratic with identity composition: the growth
    modulus is the smallest eigenvalue, known from a dense eigensolve."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    Q = A.T @ A + (0.1 + rng.uniform(0.0, 0.9)) * np.eye(n)
    lam_min = float(np.linalg.eigvalsh(Q)[0])

    def make_problem() -> CompositeProblem:
        return CompositeProblem(
            F=SmoothMap.identity(n),
            g=PolyhedralFn.affine(np.zeros(n)),
            x_bar=np.zeros(n),
            phi=SmoothOracle.quadratic(Q),
            name=f"random_qp_s{seed}_n{n}",
        )

    def fact_modulus(problem: CompositeProblem) -> tuple[bool, str, str]:
        from .growth import qg_modulus

        bounds = qg_modulus(ExactCalculus(problem), seed=seed)
        gap = max(abs(bounds.lower - lam_min), abs(bounds.upper - lam_min))
        return (
            gap <= 1e-6,
            "exact",
            (
                f"certified bounds [{bounds.lower:.9g}, {bounds.upper:.9g}] vs "
                f"eigensolve {lam_min:.9g}"
            ),
        )

    def fact_sms(problem: CompositeProblem) -> tuple[bool, str, str]:
        from .calculus import subgradient_distance_fn

        chk = sms_sample_check(
            subgradient_distance_fn(problem),
            problem.x_bar,
            kappa=(1.0 / lam_min) * (1.0 + 1e-6),
            gamma=0.1,
            n_samples=48,
            seed=seed,
        )
        return chk.holds, "sampled", f"worst ratio {chk.worst_ratio:.6g} over {chk.n_checked} points"

    return CatalogEntry(
        id=f"random_qp_s{seed}_n{n}",
        title=f"seeded strictly convex quadratic (n = {n})",
        problem=make_problem,
        expected={
            "modulus_equals_smallest_eigenvalue": fact_modulus,
            "subregularity_with_reciprocal_modulus": fact_sms,
        },
        kappa=1.0,
    )


_NLP_G_VARIANTS = ("l1", "linf", "orthant", "max_affine", "affine")


def _nlp_g(variant: str, m: int, rng: np.random.Generator) -> PolyhedralFn:
    if variant == "l1":
        return PolyhedralFn.l1_norm(m)
    if variant == "linf":
        return PolyhedralFn.max_norm(m)
    if variant == "orthant":
        return PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(m))
    if variant == "max_affine":
        A = rng.normal(size=(m + 1, m))
        b = rng.normal(size=m + 1)
        b[0] = np.max(b) + 0.1  # make one piece strictly active at 0
        return PolyhedralFn.max_affine(A, b)
    if variant == "affine":
        return PolyhedralFn.affine(rng.normal(size=m))
    raise ValueError(f"unknown g variant {variant!r}")


def random_nlp(
    seed: int,
    n: int,
    m: int,
    g_variant: str | None = None,
    rank_deficient: bool = False,
) -> CatalogEntry:
    """Seeded composite instance, stationary at the origin by construction.

    Quadratic map components F_k(x) = a_k'x + x'B_k x / 2 with F(0) = 0,
    a seeded polyhedral outer function, a multiplier picked from its
    subdifferential at 0, and the smooth part tilted so the base
    subgradient matches.  With a well-conditioned Jacobian the multiplier
    set is compact and the composition is metrically subregular with a
    modulus controlled by the smallest singular value; ``rank_deficient``
    instead appends the *negated* first Jacobian row, so the multiplier
    cone keeps a nonnegative null direction (y_1 = y_m, rest zero) and
    the multiplier set has a nontrivial recession cone.  That only works
    when the outer function's subdifferential at the base image is itself
    unbounded, so the rank-deficient flavour pins the orthant indicator
    unless the caller insists otherwise.
    """
    rng = np.random.default_rng(seed)
    if g_variant is None:
        variant = "orthant" if rank_deficient else _NLP_G_VARIANTS[int(rng.integers(len(_NLP_G_VARIANTS)))]
    else:
        variant = g_variant
    g = _nlp_g(variant, m, rng)

    J = rng.normal(size=(m, n))
    if rank_deficient:
        if m < 2:
            raise ValueError("a rank-deficient Jacobian needs m >= 2")
        J[-1] = -J[0]
    else:
        while np.linalg.svd(J, compute_uv=False)[-1] < 0.3:
            J = rng.normal(size=(m, n))
    sigma_min = float(np.linalg.svd(J, compute_uv=False)[-1])

    hessians = []
    for _ in range(m):
        B = rng.normal(size=(n, n))
        hessians.append(0.25 * (B + B.T))

    y0 = g.subdifferential(np.zeros(m)).some_point()
    v_bar = J.T @ y0
    Q_phi_raw = rng.normal(size=(n, n))
    Q_phi = 0.5 * (Q_phi_raw + Q_phi_raw.T)

    def make_problem() -> CompositeProblem:
        comps = [
            SmoothOracle.quadratic(hessians[k], c=J[k]) for k in range(m)
        ]
        return CompositeProblem(
            F=SmoothMap(comps),
            g=g,
            x_bar=np.zeros(n),
            phi=SmoothOracle.quadratic(Q_phi, c=-v_bar),
            v_bar=v_bar,
            name=f"random_nlp_s{seed}_n{n}_m{m}",
        )

    def fact_stationary(problem: CompositeProblem) -> tuple[bool, str, str]:
        ok = ExactCalculus(problem).is_stationary()
        return ok, "exact", f"base subgradient {v_bar.round(6).tolist()} lies in the image set"

    expected: dict[str, FactCheck] = {"stationary_by_construction": fact_stationary}

    if rank_deficient:

        def fact_unbounded(problem: CompositeProblem) -> tuple[bool, str, str]:
            vr = ExactCalculus(problem).multipliers().vrep()
            nrays = len(vr.all_rays())
            return nrays > 0, "exact", f"multiplier set has {nrays} recession ray(s)"

        expected["multiplier_set_unbounded"] = fact_unbounded
    if variant == "affine":

        def fact_singleton(problem: CompositeProblem) -> tuple[bool, str, str]:
            vr = ExactCalculus(problem).multipliers().vrep()
            ok = len(vr.vertices) == 1 and len(vr.all_rays()) == 0
            return ok, "exact", f"{len(vr.vertices)} vertex, {len(vr.all_rays())} rays"

        expected["multiplier_set_singleton"] = fact_singleton

    return CatalogEntry(
        id=f"random_nlp_s{seed}_n{n}_m{m}" + ("_rd" if rank_deficient else ""),
        title=f"seeded composite instance (n = {n}, m = {m}, g = {variant})",
        problem=make_problem,
        expected=expected,
        kappa=None if rank_deficient else 2.0 / sigma_min,
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_NAMED: dict[str, Callable[[], CatalogEntry]] = {
    "example_3_2": example_3_2,
    "example_3_3": example_3_3,
    "example_4_6": example_4_6,
}


def named_ids() -> list[str]:
    return sorted(_NAMED)


def get(entry_id: str) -> CatalogEntry:
    try:
        maker = _NAMED[entry_id]
    except KeyError:
        raise ValueError(
            f"unknown catalog id {entry_id!r}; known ids: {', '.join(sorted(_NAMED))}"
        ) from None
    return maker()


def phi_oracle_for(entry_id: str) -> SmoothOracle:
    """The scalar objective part a problem file can borrow by catalog id."""
    if entry_id == "example_3_2":
        return staircase_oracle()
    if entry_id == "example_3_3":
        return oscillatory_integral_oracle()
    if entry_id == "example_4_6":
        return _composite_phi()
    raise ValueError(
        f"no scalar objective is published under catalog id {entry_id!r}; "
        f"known ids: {', '.join(sorted(_NAMED))}"
    )
