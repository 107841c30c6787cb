"""Atomic file output, manifests and SVG line plots."""
from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402


def atomic_write(path, data, mode="w"):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj):
    return atomic_write(path, json.dumps(obj, indent=2, default=_jsonable) + "\n")


def _jsonable(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    return str(o)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return atomic_write(path, buf.getvalue())


def _fmt(v):
    if isinstance(v, float) or hasattr(v, "dtype"):
        return repr(float(v))
    return v


def build_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def write_manifest(out_dir, command, config, files, extra=None):
    man = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "version": __version__,
        "build": build_describe(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "files": sorted(str(f) for f in files),
    }
    if extra:
        man.update(extra)
    return write_json(Path(out_dir) / "manifest.json", man)


def line_plot(path, series, xlabel, ylabel, title=None, logx=False, logy=False):
    """series: list of dicts with x, y and optional label, yerr, style."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in series:
        style = s.get("style", "-")
        if s.get("yerr") is not None:
            ax.errorbar(s["x"], s["y"], yerr=s["yerr"], fmt=style, label=s.get("label"), capsize=2, lw=1)
        else:
            ax.plot(s["x"], s["y"], style, label=s.get("label"), lw=1.2)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if any(s.get("label") for s in series):
        ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg")
    plt.close(fig)
    return atomic_write(path, buf.getvalue())
