"""Machine-readable run reports.

A report echoes its configuration, lists audit entries, and carries a timing
block that is the only part allowed to differ between identical runs.
"""

import csv
import json
import math
from importlib import resources

import numpy as np

from . import __version__

STATUSES = ("pass", "fail", "NA")


def entry(claim, measured, bound=None, status="NA", *, asserted=True, exact=True, samples=None, ci99=None, note=None):
    if status not in STATUSES:
        raise ValueError(f"status must be one of {STATUSES}")
    if not exact and (samples is None or ci99 is None):
        raise ValueError("a Monte Carlo entry needs a sample count and a confidence interval")
    out = {"claim": claim, "measured": measured, "bound": bound, "status": status, "asserted": asserted, "exact": exact}
    if samples is not None:
        out["samples"] = int(samples)
    if ci99 is not None:
        out["ci99"] = [float(x) for x in ci99]
    if note:
        out["note"] = note
    return out


def check(claim, measured, bound, ok, **kwargs):
    return entry(claim, measured, bound, "pass" if ok else "fail", **kwargs)


def failing(entries):
    return [e["claim"] for e in entries if e["asserted"] and e["status"] == "fail"]


def make_report(command, config, result, entries, *, exact, seconds):
    bad = failing(entries)
    return {
        "command": command,
        "version": __version__,
        "config": config,
        "result": result,
        "entries": entries,
        "exact": bool(exact),
        "passed": not bad,
        "failing": bad,
        "timing": {"seconds": float(seconds)},
    }


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(obj):
    # JSON has no inf/nan; encode them as strings so reports stay valid.
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(report):
    plain = json.loads(json.dumps(report, default=_default))
    return json.dumps(_finite(plain), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write(report, path):
    text = dumps(report)
    if path in (None, "-"):
        print(text, end="")
    else:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def load_schema():
    return json.loads(resources.files("derand").joinpath("schema/report.schema.json").read_text())


def write_spectrum_csv(rows, path):
    """Rows of (coset_rep_hex, degree, lambda)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["coset_rep_hex", "degree", "lambda"])
        for hex_rep, degree, lam in rows:
            writer.writerow([hex_rep, degree, repr(float(lam))])
