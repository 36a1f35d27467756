"""Flat-file formats: CSV tables, key=value configs, metadata, plot scripts."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError


def fmt(x) -> str:
    """Numbers with 17 significant digits; strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_signal_csv(path):
    """Two-column ``real,imag`` file, optional header row, into complex samples."""
    samples = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 2:
                raise ConfigError("input", f"line {lineno}: expected 2 columns, got {len(parts)}")
            try:
                re, im = float(parts[0]), float(parts[1])
            except ValueError:
                if not samples and lineno == 1:
                    continue  # header
                raise ConfigError("input", f"line {lineno}: not a number: {text!r}") from None
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ConfigError("input", f"line {lineno}: non-finite value")
            samples.append(complex(re, im))
    if not samples:
        raise ConfigError("input", f"{path}: no samples")
    return np.array(samples)


def read_key_value(path):
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError("config", f"{path} line {lineno}: expected key=value")
            key, value = (s.strip() for s in text.split("=", 1))
            out[key.replace("_", "-")] = value
    return out


def write_metadata(path, meta: dict):
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sidecar_paths(out):
    out = Path(out)
    return out.with_name(out.name + ".meta.json"), out.with_name(out.stem + "_plot.py")


POINCARE_PLOT = '''\
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({csv!r})))
fig, ax = plt.subplots(figsize=(6, 6))
ax.scatter([float(r["x"]) for r in rows], [float(r["y"]) for r in rows], s=0.2, c="k")
ax.set_aspect("equal")
ax.set_xlim(-{R}, {R})
ax.set_ylim(-{R}, {R})
ax.set_title({title!r})
fig.savefig({png!r}, dpi=200)
'''

FREQMAP_PLOT = '''\
import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(open({csv!r})) if not r["flag"]]
y = [float(r["y0"]) for r in rows]
fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 7))
ax1.plot(y, [float(r["nu"]) for r in rows], ".", ms=2)
ax1.set_ylabel("nu (rad / period)")
ax2.plot(y, [float(r["eps"]) for r in rows], ".", ms=2)
ax2.axhline({eps_thr}, color="r", lw=0.8)
ax2.set_xlabel("y0")
ax2.set_ylabel("eps")
ax1.set_title({title!r})
fig.savefig({png!r}, dpi=200)
'''

SCAN_PLOT = '''\
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({csv!r})))
markers = {{"I": ("s", "integrable"), "T": ("*", "transitional"), "C": ("o", "chaotic")}}
fig, ax = plt.subplots(figsize=(6, 5))
for label, (marker, name) in markers.items():
    sel = [r for r in rows if r["label"] == label]
    ax.scatter([float(r["T"]) for r in sel], [float(r["b"]) for r in sel],
               marker=marker, s=60, label=name)
for r in rows:
    ax.annotate("%.2f" % float(r["m"]), (float(r["T"]), float(r["b"])), fontsize=7,
                xytext=(4, 4), textcoords="offset points")
ax.set_xlabel("T")
ax.set_ylabel("b")
ax.legend()
ax.set_title({title!r})
fig.savefig({png!r}, dpi=200)
'''


def write_plot_script(path, template, csv_path, **fields):
    csv_path = Path(csv_path)
    png = str(csv_path.with_suffix(".png"))
    text = template.format(csv=str(csv_path), png=png, **fields)
    Path(path).write_text(text)
    return path
