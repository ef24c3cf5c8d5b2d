"""Problem-file ingestion: strict JSON documents to composite problems.

A problem file is a single JSON object

    {"n": 2, "m": 3,
     "phi": <expression> | {"catalog": "<entry id>"} | null,
     "F": [<expression>, ...],          # m expressions in n variables
     "g": {"variant": "...", ...},
     "x_bar": [0.0, 0.0],
     "options": {...}}                   # optional tuning block

Expressions use the list encoding of expr.from_obj.  Polyhedra are
{"A": [[...]], "b": [...]} with an optional "eq" mask of booleans.
Validation is strict: every unknown key is rejected and every error
message carries the JSON path to the offending entry, so a malformed
file fails loudly before any numerics run.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .estimators import GridSchedule
from .expr import from_obj as expr_from_obj, EvalDomainError
from .oracles import SmoothMap, SmoothOracle
from .polyfun import PolyhedralFn
from .polyhedra import Polyhedron
from .problem import CompositeProblem


class ProblemFileError(ValueError):
    """A problem file failed validation; the message names the JSON path."""


# ---------------------------------------------------------------------------
# strict pickers
# ---------------------------------------------------------------------------


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise ProblemFileError(f"{path}: missing required key {key!r}")
    return doc[key]


def _as_dict(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ProblemFileError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _as_int(obj, path: str, minimum: int | None = None) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ProblemFileError(f"{path}: expected an integer, got {obj!r}")
    if minimum is not None and obj < minimum:
        raise ProblemFileError(f"{path}: must be >= {minimum}, got {obj}")
    return obj


def _as_float(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ProblemFileError(f"{path}: expected a number, got {obj!r}")
    return float(obj)


def _as_vector(obj, length: int, path: str) -> np.ndarray:
    if not isinstance(obj, list):
        raise ProblemFileError(f"{path}: expected a list of {length} numbers")
    if len(obj) != length:
        raise ProblemFileError(f"{path}: expected length {length}, got {len(obj)}")
    return np.array([_as_float(v, f"{path}[{i}]") for i, v in enumerate(obj)])


def _as_matrix(obj, cols: int, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ProblemFileError(f"{path}: expected a non-empty list of rows")
    rows = [_as_vector(row, cols, f"{path}[{i}]") for i, row in enumerate(obj)]
    return np.vstack(rows)


def _no_unknown_keys(doc: dict, allowed: set[str], path: str) -> None:
    extra = sorted(set(doc) - allowed)
    if extra:
        raise ProblemFileError(
            f"{path}: unknown key(s) {', '.join(repr(k) for k in extra)}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


# ---------------------------------------------------------------------------
# options block
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunOptions:
    """Tuning knobs shared by the CLI commands; everything has a default."""

    seed: int = 0
    kappa: float | None = None
    gamma: float = 0.01
    n_samples: int = 48
    r_max: float = 1000.0
    epsilons: tuple[float, ...] = (0.1, 0.01, 0.001)
    schedule: GridSchedule | None = None


_SCHEDULE_KEYS = {"t0", "ratio", "levels", "directions", "ball_scale", "tail_levels"}


def _parse_schedule(doc: dict, path: str, seed: int) -> GridSchedule:
    _no_unknown_keys(doc, _SCHEDULE_KEYS, path)
    base = GridSchedule(seed=seed)
    kwargs = {}
    for key in ("t0", "ratio", "ball_scale"):
        if key in doc:
            kwargs[key] = _as_float(doc[key], f"{path}.{key}")
    for key in ("levels", "directions", "tail_levels"):
        if key in doc:
            kwargs[key] = _as_int(doc[key], f"{path}.{key}", minimum=1)
    return GridSchedule(
        t0=kwargs.get("t0", base.t0),
        ratio=kwargs.get("ratio", base.ratio),
        levels=kwargs.get("levels", base.levels),
        directions=kwargs.get("directions", base.directions),
        ball_scale=kwargs.get("ball_scale", base.ball_scale),
        tail_levels=kwargs.get("tail_levels", base.tail_levels),
        seed=seed,
    )


_OPTION_KEYS = {"seed", "kappa", "gamma", "n_samples", "r_max", "epsilons", "schedule"}


def _parse_options(doc, path: str) -> RunOptions:
    if doc is None:
        return RunOptions()
    doc = _as_dict(doc, path)
    _no_unknown_keys(doc, _OPTION_KEYS, path)
    seed = _as_int(doc.get("seed", 0), f"{path}.seed", minimum=0)
    kappa = None
    if doc.get("kappa") is not None:
        kappa = _as_float(doc["kappa"], f"{path}.kappa")
        if kappa <= 0:
            raise ProblemFileError(f"{path}.kappa: must be positive, got {kappa}")
    gamma = _as_float(doc.get("gamma", 0.01), f"{path}.gamma")
    n_samples = _as_int(doc.get("n_samples", 48), f"{path}.n_samples", minimum=1)
    r_max = _as_float(doc.get("r_max", 1000.0), f"{path}.r_max")
    eps_doc = doc.get("epsilons", [0.1, 0.01, 0.001])
    if not isinstance(eps_doc, list) or not eps_doc:
        raise ProblemFileError(f"{path}.epsilons: expected a non-empty list of numbers")
    epsilons = tuple(_as_float(v, f"{path}.epsilons[{i}]") for i, v in enumerate(eps_doc))
    if any(e <= 0 for e in epsilons):
        raise ProblemFileError(f"{path}.epsilons: entries must be positive")
    schedule = None
    if doc.get("schedule") is not None:
        schedule = _parse_schedule(_as_dict(doc["schedule"], f"{path}.schedule"), f"{path}.schedule", seed)
    return RunOptions(
        seed=seed,
        kappa=kappa,
        gamma=gamma,
        n_samples=n_samples,
        r_max=r_max,
        epsilons=epsilons,
        schedule=schedule,
    )


# ---------------------------------------------------------------------------
# pieces
# ---------------------------------------------------------------------------


def _parse_polyhedron(doc, dim: int, path: str) -> Polyhedron:
    doc = _as_dict(doc, path)
    _no_unknown_keys(doc, {"A", "b", "eq"}, path)
    A = _as_matrix(_need(doc, "A", path), dim, f"{path}.A")
    b = _as_vector(_need(doc, "b", path), A.shape[0], f"{path}.b")
    eq_mask = None
    if doc.get("eq") is not None:
        raw = doc["eq"]
        if not isinstance(raw, list) or len(raw) != A.shape[0]:
            raise ProblemFileError(f"{path}.eq: expected a list of {A.shape[0]} booleans")
        for i, v in enumerate(raw):
            if not isinstance(v, bool):
                raise ProblemFileError(f"{path}.eq[{i}]: expected a boolean, got {v!r}")
        eq_mask = np.array(raw, dtype=bool)
    return Polyhedron(A, b, eq_mask)


def _parse_g(doc, m: int, path: str) -> PolyhedralFn:
    doc = _as_dict(doc, path)
    variant = _need(doc, "variant", path)
    if variant == "indicator":
        _no_unknown_keys(doc, {"variant", "A", "b", "eq"}, path)
        poly_doc = {k: v for k, v in doc.items() if k != "variant"}
        return PolyhedralFn.indicator(_parse_polyhedron(poly_doc, m, path))
    if variant == "affine":
        _no_unknown_keys(doc, {"variant", "a", "beta"}, path)
        a = _as_vector(_need(doc, "a", path), m, f"{path}.a")
        beta = _as_float(doc.get("beta", 0.0), f"{path}.beta")
        return PolyhedralFn.affine(a, beta)
    if variant == "l1":
        _no_unknown_keys(doc, {"variant"}, path)
        return PolyhedralFn.l1_norm(m)
    if variant == "linf":
        _no_unknown_keys(doc, {"variant"}, path)
        return PolyhedralFn.max_norm(m)
    if variant == "max_affine":
        _no_unknown_keys(doc, {"variant", "A", "b", "dom"}, path)
        A = _as_matrix(_need(doc, "A", path), m, f"{path}.A")
        b = _as_vector(_need(doc, "b", path), A.shape[0], f"{path}.b")
        dom = None
        if doc.get("dom") is not None:
            dom = _parse_polyhedron(doc["dom"], m, f"{path}.dom")
        return PolyhedralFn.max_affine(A, b, dom)
    raise ProblemFileError(
        f"{path}.variant: unknown variant {variant!r}; "
        "allowed: affine, indicator, l1, linf, max_affine"
    )


def _parse_phi(doc, n: int, path: str) -> SmoothOracle | None:
    if doc is None:
        return None
    if isinstance(doc, dict):
        _no_unknown_keys(doc, {"catalog"}, path)
        entry_id = _need(doc, "catalog", path)
        if not isinstance(entry_id, str):
            raise ProblemFileError(f"{path}.catalog: expected a string id")
        from . import catalog  # local import: catalog never imports this module

        try:
            oracle = catalog.phi_oracle_for(entry_id)
        except ValueError as exc:
            raise ProblemFileError(f"{path}.catalog: {exc}") from exc
        if oracle.dim_in != n:
            raise ProblemFileError(
                f"{path}.catalog: oracle {entry_id!r} has dimension "
                f"{oracle.dim_in}, problem has n = {n}"
            )
        return oracle
    try:
        expr = expr_from_obj(doc, n_vars=n, path=path)
    except EvalDomainError as exc:
        raise ProblemFileError(str(exc)) from exc
    return SmoothOracle.from_expr(expr, n)


def _parse_F(doc, n: int, m: int, path: str) -> SmoothMap:
    if not isinstance(doc, list):
        raise ProblemFileError(f"{path}: expected a list of {m} expressions")
    if len(doc) != m:
        raise ProblemFileError(f"{path}: expected {m} component(s), got {len(doc)}")
    comps = []
    for k, node in enumerate(doc):
        try:
            expr = expr_from_obj(node, n_vars=n, path=f"{path}[{k}]")
        except EvalDomainError as exc:
            raise ProblemFileError(str(exc)) from exc
        comps.append(SmoothOracle.from_expr(expr, n))
    return SmoothMap(comps)


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

_TOP_KEYS = {"n", "m", "phi", "F", "g", "x_bar", "options", "name"}


def parse_problem(doc, source: str = "problem") -> tuple[CompositeProblem, RunOptions]:
    """Validate a decoded JSON document and build the problem it describes."""
    doc = _as_dict(doc, source)
    _no_unknown_keys(doc, _TOP_KEYS, source)
    n = _as_int(_need(doc, "n", source), f"{source}.n", minimum=1)
    m = _as_int(_need(doc, "m", source), f"{source}.m", minimum=1)
    phi = _parse_phi(doc.get("phi"), n, f"{source}.phi")
    F = _parse_F(_need(doc, "F", source), n, m, f"{source}.F")
    g = _parse_g(_need(doc, "g", source), m, f"{source}.g")
    x_bar = _as_vector(_need(doc, "x_bar", source), n, f"{source}.x_bar")
    options = _parse_options(doc.get("options"), f"{source}.options")
    name = doc.get("name", source)
    if not isinstance(name, str):
        raise ProblemFileError(f"{source}.name: expected a string")
    try:
        problem = CompositeProblem(F=F, g=g, x_bar=x_bar, phi=phi, name=name)
    except ValueError as exc:
        raise ProblemFileError(f"{source}: {exc}") from exc
    return problem, options


def load_problem_file(path: str) -> tuple[CompositeProblem, RunOptions]:
    """Read, decode, validate, and construct from a JSON file on disk."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ProblemFileError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_problem(doc, source=path)
