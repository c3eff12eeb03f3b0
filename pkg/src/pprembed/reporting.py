"""Versioned JSON run reports written with stable formatting."""

from __future__ import annotations

import json
import os
import sys

import numpy as np

REPORT_VERSION = 1


def write_report(report: dict, path: str | os.PathLike | None) -> None:
    """Write (or print, when path is None) a report as stable two-space JSON."""
    text = json.dumps(report, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "wt", encoding="utf-8") as fh:
            fh.write(text)


def timing_summary(wall_ns: list[int]) -> dict:
    """Mean/median/p95 of nanosecond wall times, reported as integers."""
    arr = np.asarray(wall_ns, dtype=np.int64)
    return {
        "wall_ns_mean": int(arr.mean()),
        "wall_ns_median": int(np.median(arr)),
        "wall_ns_p95": int(np.percentile(arr, 95)),
    }
