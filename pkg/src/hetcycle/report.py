"""Deterministic experiment outputs: CSV tables, JSON summaries, and
matplotlib figures.

Every experiment writes <name>.csv (header row, 17 significant digits),
<name>.summary.json (resolved parameters, results, pass/fail checks, with
wall-clock metadata quarantined under the "meta" key so payloads stay
byte-stable), and <name>.plot, a standalone matplotlib script that reads
the CSV from its own directory. The report path also executes the script
in place, so <name>.png appears alongside the data without a separate
plotting step.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import numbers
from datetime import datetime, timezone
from pathlib import Path

from .model import Params

__all__ = [
    "Check",
    "format_sig",
    "write_csv",
    "write_summary",
    "line_plot_script",
    "validate_plot_script",
    "write_plot_script",
    "render_plot",
]


@dataclasses.dataclass(frozen=True)
class Check:
    """One pass/fail acceptance check attached to an experiment."""

    name: str
    value: float
    threshold: float
    comparator: str  # "<=", ">=", "<", ">", "abs<="
    passed: bool
    detail: str = ""

    @classmethod
    def compare(cls, name: str, value: float, comparator: str, threshold: float, detail: str = "") -> "Check":
        ops = {
            "<=": value <= threshold,
            ">=": value >= threshold,
            "<": value < threshold,
            ">": value > threshold,
            "abs<=": abs(value) <= threshold,
        }
        if comparator not in ops:
            raise ValueError(f"unknown comparator {comparator!r}")
        return cls(name, float(value), float(threshold), comparator, bool(ops[comparator]), detail)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def format_sig(x) -> str:
    """17 significant digits: enough to round-trip any double exactly."""
    if isinstance(x, numbers.Integral):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header, rows) -> Path:
    """Write a CSV with formatted floats; deterministic byte-for-byte."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([c if isinstance(c, str) else format_sig(c) for c in row])
    return path


def _jsonable(obj):
    if isinstance(obj, Params):
        return dataclasses.asdict(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and obj != obj:  # NaN is not valid JSON
        return None
    return obj


def write_summary(path, experiment: str, params: Params, results: dict, checks=(), forcing: str = "sine") -> Path:
    """JSON summary: resolved parameters, results, checks; timestamps live
    only under "meta" so the payload is reproducible."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "experiment": experiment,
        "forcing": forcing,
        "params": _jsonable(params),
        "results": _jsonable(results),
        "checks": [c.to_dict() if isinstance(c, Check) else _jsonable(c) for c in checks],
        "all_checks_passed": all(c.passed for c in checks) if checks else True,
        "meta": {"created_utc": datetime.now(timezone.utc).isoformat()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


_PLOT_PREAMBLE = '''#!/usr/bin/env python3
"""{title} - renders {png} from {csv} (both next to this script)."""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
data = np.genfromtxt(os.path.join(here, {csv!r}), delimiter=",", names=True{genfromtxt_extra})
if data.ndim == 0:
    data = data.reshape(1)
fig, ax = plt.subplots(figsize=(7.0, 4.5))
'''

_PLOT_EPILOGUE = '''ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.set_title({title!r})
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig(os.path.join(here, {png!r}), dpi=150)
print("wrote", os.path.join(here, {png!r}))
'''


def line_plot_script(
    csv_name: str,
    png_name: str,
    x: str,
    ys,
    title: str,
    xlabel: str,
    ylabel: str,
    scale: str = "linear",
    style: str = "-",
) -> str:
    """A standalone script plotting columns of the CSV against one another.

    scale: linear | loglog | semilogy | semilogx.
    """
    plot_call = {
        "linear": "plot",
        "loglog": "loglog",
        "semilogy": "semilogy",
        "semilogx": "semilogx",
    }[scale]
    body = "".join(
        f"ax.{plot_call}(data[{x!r}], data[{col!r}], {style!r}, label={col!r})\n" for col in ys
    )
    if len(list(ys)) > 1:
        body += "ax.legend()\n"
    return (
        _PLOT_PREAMBLE.format(title=title, png=png_name, csv=csv_name, genfromtxt_extra="")
        + body
        + _PLOT_EPILOGUE.format(xlabel=xlabel, ylabel=ylabel, title=title, png=png_name)
    )


def validate_plot_script(csv_name: str, png_name: str, title: str) -> str:
    """Residual-vs-threshold chart for the validation suite."""
    body = (
        "idx = np.arange(data.size)\n"
        'ax.semilogy(idx, np.maximum(np.abs(data["value"]), 1e-18), "o", label="value")\n'
        'ax.semilogy(idx, np.maximum(data["threshold"], 1e-18), "_", ms=16, label="threshold")\n'
        "ax.set_xticks(idx)\n"
        'ax.set_xticklabels([str(c) for c in data["check"]], rotation=45, ha="right", fontsize=7)\n'
        "ax.legend()\n"
    )
    return (
        _PLOT_PREAMBLE.format(
            title=title, png=png_name, csv=csv_name,
            genfromtxt_extra=', dtype=None, encoding="utf-8"',
        )
        + body
        + _PLOT_EPILOGUE.format(xlabel="check", ylabel="magnitude", title=title, png=png_name)
    )


def write_plot_script(path, script_text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(script_text)
    return path


def render_plot(script_path) -> Path:
    """Execute a generated plot script in place, producing its PNG."""
    script_path = Path(script_path)
    code = compile(script_path.read_text(), str(script_path), "exec")
    exec(code, {"__file__": str(script_path.resolve()), "__name__": "__main__"})
    pngs = sorted(script_path.parent.glob(script_path.stem + "*.png"))
    return pngs[0] if pngs else script_path.with_suffix(".png")
