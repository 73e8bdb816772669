"""CSV/JSON result emission with reproducible bytes."""

from __future__ import annotations

import json
import os
import tempfile

CSV_FIELDS = (
    "n", "t", "pattern", "design", "samples", "baseline_log2", "estimate_log2",
    "ratio", "stderr_ratio", "typical_frac", "seed",
)


def format_value(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def render_csv(records: list[dict]) -> str:
    lines = [",".join(CSV_FIELDS)]
    for rec in records:
        lines.append(",".join(format_value(rec[f]) for f in CSV_FIELDS))
    return "\n".join(lines) + "\n"


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_report(records: list[dict], csv_path: str, sidecar: dict | None = None,
                 sidecar_path: str | None = None) -> None:
    """Write the CSV (atomically) plus an optional JSON sidecar."""
    try:
        _atomic_write(csv_path, render_csv(records))
    except OSError as exc:
        raise OSError(f"writing {csv_path}: {exc}") from exc
    if sidecar is not None:
        if sidecar_path is None:
            base, _ = os.path.splitext(csv_path)
            sidecar_path = base + ".json"
        try:
            _atomic_write(sidecar_path, json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(f"writing {sidecar_path}: {exc}") from exc
