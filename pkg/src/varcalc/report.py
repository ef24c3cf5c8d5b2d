"""Report assembly: canonical JSON bytes and a human-readable rendering.

Every CLI command funnels its results through this module so that two
runs with the same inputs and seed produce byte-identical JSON.  The
canonical form sorts keys, fixes separators, walks containers in
deterministic order, and replaces non-finite numbers by the strings
"+inf" / "-inf" / "nan" (JSON has no spelling for them and the encoder
is run with allow_nan=False on purpose).

Reports also carry caveats: regularity hypotheses the exact calculus
*assumes* — it never verifies them from samples — are stated in every
report rather than silently relied on.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any

import numpy as np

from . import __version__
from .extreal import ExtReal

TOOL_NAME = "varcalc"

# Printed on every report that exercises the exact calculus: the outer
# polyhedral structure guarantees these properties, but the tool asserts
# rather than re-derives them for each instance.
CAVEAT_HYPOTHESES = (
    "regularity hypotheses (smoothness of the inner data near the base "
    "point; convexity and polyhedrality of the outer function) are "
    "asserted from the problem description, not verified numerically"
)

# Printed verbatim whenever the outer function is a black box: the
# growth battery's cross-implications lean on properties (subdifferential
# continuity, prox-regularity, twice epi-differentiability) that hold
# automatically in the polyhedral case but cannot be checked from samples.
CAVEAT_BLACK_BOX = (
    "the outer function is a black box: the equivalences behind the "
    "growth battery assume subdifferential continuity, prox-regularity, "
    "and twice epi-differentiability at the base point, none of which "
    "can be verified from samples; sampled verdicts are heuristic here"
)


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------


def _float_token(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    # Normalize -0.0 so that algebraically identical runs cannot differ
    # in sign-of-zero noise.
    return float(x) + 0.0


def jsonable(obj: Any) -> Any:
    """Recursively convert results into JSON-encodable values."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return _float_token(obj)
    if isinstance(obj, ExtReal):
        return _float_token(obj.raw)
    if isinstance(obj, (np.floating, np.integer)):
        return jsonable(obj.item())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        out = {}
        for key, val in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"report keys must be strings, got {key!r}")
            out[key] = jsonable(val)
        return out
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def canonical_json_bytes(doc: Any) -> bytes:
    """Deterministic UTF-8 encoding: sorted keys, fixed separators."""
    text = json.dumps(
        jsonable(doc),
        sort_keys=True,
        indent=2,
        separators=(",", ": "),
        ensure_ascii=True,
        allow_nan=False,
    )
    return (text + "\n").encode("utf-8")


def make_report(
    command: str,
    problem_name: str,
    seed: int,
    results: dict,
    caveats: list[str] | None = None,
    extra: dict | None = None,
) -> dict:
    """Assemble the report envelope shared by every command."""
    doc = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "problem": problem_name,
        "seed": seed,
        "results": results,
        "caveats": sorted(set(caveats or [])),
    }
    if extra:
        doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# human text
# ---------------------------------------------------------------------------

_ROMAN = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii")


def _fmt_value(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, str):
        return v
    if isinstance(v, list):
        if len(v) > 8:
            head = ", ".join(_fmt_value(x) for x in v[:4])
            return f"[{head}, ... ({len(v)} entries)]"
        inner = ", ".join(_fmt_value(x) for x in v)
        return f"[{inner}]"
    if isinstance(v, dict):
        inner = ", ".join(f"{k}={_fmt_value(v[k])}" for k in sorted(v))
        return f"{{{inner}}}"
    return str(v)


def _render_battery(results: dict, lines: list[str]) -> None:
    items = results.get("battery", {}).get("items", [])
    for idx, item in enumerate(items):
        tag = _ROMAN[idx] if idx < len(_ROMAN) else str(idx + 1)
        lines.append(
            f"  ({tag:>3s}) {item['name']:36s} {item['verdict']:12s}"
            f" [{item['provenance']}]"
        )
        if item.get("detail"):
            lines.append(f"        {item['detail']}")
    bat = results.get("battery", {})
    if bat:
        lines.append(
            f"  overall: {bat.get('overall', '?')}"
            + ("  (vacuous critical cone)" if bat.get("vacuous") else "")
        )
        lines.append(
            "  growth modulus bounds: "
            f"[{_fmt_value(bat.get('modulus_lower'))}, {_fmt_value(bat.get('modulus_upper'))}]"
        )
        for w in bat.get("warnings", []):
            lines.append(f"  warning: {w}")


def render_text(report: dict) -> str:
    """One-page plain-text rendering of a JSON report."""
    doc = jsonable(report)
    lines = [
        f"{doc['tool']} {doc['version']} — {doc['command']} — problem: {doc['problem']} (seed {doc['seed']})"
    ]
    results = doc.get("results", {})
    if "battery" in results:
        _render_battery(results, lines)
    for key in sorted(results):
        if key == "battery":
            continue
        lines.append(f"  {key}: {_fmt_value(results[key])}")
    caveats = doc.get("caveats", [])
    if caveats:
        lines.append("caveats:")
        for c in caveats:
            lines.append(f"  - {c}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# witness CSV
# ---------------------------------------------------------------------------


def witness_csv_bytes(rows: list[dict], field_order: list[str]) -> bytes:
    """Encode witness rows as CSV with a fixed column order."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=field_order, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        flat = {}
        for key in field_order:
            val = jsonable(row.get(key))
            if isinstance(val, list):
                val = " ".join(_fmt_value(v) for v in val)
            flat[key] = val
        writer.writerow(flat)
    return buf.getvalue().encode("utf-8")
