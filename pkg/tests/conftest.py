"""Shared fixtures: independent brute-force oracles and reporting hooks.

The oracles here deliberately re-derive everything from raw difference
quotients (no calls into the estimator machinery) so that exact-formula
tests are checked against genuinely independent arithmetic.
"""
from __future__ import annotations

import math
import re

import numpy as np
import pytest

from varcalc.extreal import ExtReal
from varcalc.polyfun import PolyhedralFn
from varcalc.polyhedra import Polyhedron


# ---------------------------------------------------------------------------
# brute-force quotient oracles
# ---------------------------------------------------------------------------


def _as_float(v) -> float:
    if isinstance(v, ExtReal):
        return v.raw
    return float(v)


def brute_subderivative(f, x, w, ts=None, ball_scale=1.0, n_dirs=24, seed=0) -> float:
    """min over a (t, w') grid of (f(x+tw') - f(x)) / t."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if ts is None:
        ts = [0.1 * 0.5**j for j in range(18)]
    rng = np.random.default_rng(seed)
    f0 = _as_float(f(x))
    best = math.inf
    for t in ts[-4:]:
        for k in range(n_dirs):
            if k == 0:
                wp = w
            else:
                wp = w + ball_scale * t * rng.standard_normal(w.shape)
            val = _as_float(f(x + t * wp))
            if math.isinf(val):
                continue
            best = min(best, (val - f0) / t)
    return best


def brute_second_quotient(f, x, v, w, ts=None, ball_scale=1.0, n_dirs=24, seed=0) -> float:
    """min over a (t, w') grid of the second-order difference quotient.

    t stays above ~1e-5: dividing an O(t^2) bracket by t^2 amplifies the
    float cancellation in f(x+tw) - f(x) like eps/t^2, so smaller steps
    make the estimate worse, not better.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if ts is None:
        ts = [0.1 * 0.5**j for j in range(14)]
    rng = np.random.default_rng(seed)
    f0 = _as_float(f(x))
    best = math.inf
    for t in ts[-4:]:
        for k in range(n_dirs):
            if k == 0:
                wp = w
            else:
                wp = w + ball_scale * t * rng.standard_normal(w.shape)
            val = _as_float(f(x + t * wp))
            if math.isinf(val):
                continue
            q = (val - f0 - t * float(v @ wp)) / (0.5 * t * t)
            best = min(best, q)
    return best


def brute_parabolic_quotient(f, x, w, slope, z, ts=None, ball_scale=1.0, n_dirs=24, seed=0) -> float:
    """min over a (t, z') grid of the parabolic difference quotient.

    Same t floor as brute_second_quotient, for the same cancellation reason.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    if ts is None:
        ts = [0.1 * 0.5**j for j in range(14)]
    rng = np.random.default_rng(seed)
    f0 = _as_float(f(x))
    best = math.inf
    for t in ts[-4:]:
        for k in range(n_dirs):
            if k == 0:
                zp = z
            else:
                zp = z + ball_scale * t * rng.standard_normal(z.shape)
            val = _as_float(f(x + t * w + 0.5 * t * t * zp))
            if math.isinf(val):
                continue
            q = (val - f0 - t * slope) / (0.5 * t * t)
            best = min(best, q)
    return best


# ---------------------------------------------------------------------------
# polyhedral function corpus
# ---------------------------------------------------------------------------


def polyfun_corpus(m: int, rng: np.random.Generator) -> list[PolyhedralFn]:
    """One instance of every polyhedral variant in dimension m."""
    A = rng.normal(size=(3, m))
    b = rng.normal(size=3)
    a = rng.normal(size=m)
    box = Polyhedron.box(-np.ones(m), np.ones(m))
    return [
        PolyhedralFn.l1_norm(m),
        PolyhedralFn.max_norm(m),
        PolyhedralFn.affine(a, float(rng.normal())),
        PolyhedralFn.max_affine(A, b),
        PolyhedralFn.indicator(Polyhedron.nonpositive_orthant(m)),
        PolyhedralFn.indicator(box),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def polyfun_corpus_members():
    """A fixed 2-dimensional instance of every polyhedral variant."""
    return polyfun_corpus(2, np.random.default_rng(555))


# ---------------------------------------------------------------------------
# acceptance summary: one pass/fail line per criterion
# ---------------------------------------------------------------------------


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows: dict[int, str] = {}
    for status, word in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if m:
                rows[int(m.group(1))] = word
    if rows:
        terminalreporter.section("acceptance criteria")
        for num in sorted(rows):
            terminalreporter.write_line(f"criterion {num:2d}: {rows[num]}")
