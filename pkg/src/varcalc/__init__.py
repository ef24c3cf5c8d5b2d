"""Exact second-order variational calculus for polyhedral composites.

The package computes generalized derivatives of f = phi + g(F(x)) with
smooth phi, smooth F, and polyhedral convex g: subdifferentials, second
and parabolic subderivatives, multiplier sets, critical cones, and the
graphical derivative of the subgradient map — all in closed form — and
certifies quadratic growth and strong metric subregularity with explicit
moduli.  Sampling estimators cross-validate every exact formula, and a
falsifier hunts for prox-regularity counterexamples on pathological
catalog entries.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .extreal import ExtReal, INF
from .expr import Expr, EvalDomainError, KinkError, from_obj
from .oracles import SmoothMap, SmoothOracle, extended_hessian_residual
from .polyhedra import PolyCone, Polyhedron, VRep, vertex_enumerate
from .polyfun import BlackBoxFn, PolyhedralFn
from .problem import CompositeProblem, eval_f
from .calculus import (
    D2Value,
    DualPairReport,
    ExactCalculus,
    MsqcReport,
    NotStationaryError,
    msqc_check,
    subgradient_distance_fn,
)
from .estimators import (
    FalsificationResult,
    GridSchedule,
    LiminfEstimate,
    est_parabolic_subderivative,
    est_second_subderivative,
    est_subderivative,
    prox_regularity_falsify,
    qgc_sample_check,
    sms_sample_check,
)
from .growth import BatteryReport, GrowthBounds, growth_battery, qg_modulus
from . import catalog

__all__ = [
    "__version__",
    "ExtReal",
    "INF",
    "Expr",
    "EvalDomainError",
    "KinkError",
    "from_obj",
    "SmoothMap",
    "SmoothOracle",
    "extended_hessian_residual",
    "PolyCone",
    "Polyhedron",
    "VRep",
    "vertex_enumerate",
    "BlackBoxFn",
    "PolyhedralFn",
    "CompositeProblem",
    "eval_f",
    "D2Value",
    "DualPairReport",
    "ExactCalculus",
    "MsqcReport",
    "NotStationaryError",
    "msqc_check",
    "subgradient_distance_fn",
    "FalsificationResult",
    "GridSchedule",
    "LiminfEstimate",
    "est_parabolic_subderivative",
    "est_second_subderivative",
    "est_subderivative",
    "prox_regularity_falsify",
    "qgc_sample_check",
    "sms_sample_check",
    "BatteryReport",
    "GrowthBounds",
    "growth_battery",
    "qg_modulus",
    "catalog",
]
