"""CSV serialization with reproducibility metadata.

Every file opens with '#'-prefixed metadata lines (tool version, resolved
config hash, cross mode), then a header row and full-precision scientific
columns. Nothing time- or host-dependent is written, so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import __version__
from .sweep import SweepResult

_HEAT_CHARS = " .:-=+*#%@"


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{float(v):.16e}"


def write_csv(path, columns, rows, metadata=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}: {val}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def sweep_rows(result: SweepResult):
    """(omega_p_hz, power_dbm, r_mag, r_re, r_im, flag) per grid cell."""
    powers = result.axis2_dbm if result.axis2_dbm is not None else [math.nan]
    for i, p in enumerate(powers):
        for j, f in enumerate(result.axis1_hz):
            v = result.values[i, j]
            flag = int(result.flags[i, j])
            mag = abs(v) if flag == 0 else math.nan
            re = v.real if flag == 0 else math.nan
            im = v.imag if flag == 0 else math.nan
            yield (f, p, mag, re, im, flag)


def ascii_heatmap(result: SweepResult, width: int = 72) -> str:
    """Coarse character rendering of |r| for a quick look without plotting."""
    mag = result.magnitude
    mag = np.where(result.flags == 0, mag, np.nan)
    n2, n1 = mag.shape
    step = max(1, n1 // width)
    cols = mag[:, ::step]
    finite = cols[np.isfinite(cols)]
    if finite.size == 0:
        return "(all cells flagged)\n"
    lo, hi = float(finite.min()), float(finite.max())
    span = hi - lo if hi > lo else 1.0
    lines = [
        f"|r| in [{lo:.4f}, {hi:.4f}]; rows: power high to low, cols: frequency",
    ]
    for i in range(n2 - 1, -1, -1):
        chars = []
        for v in cols[i]:
            if not np.isfinite(v):
                chars.append("!")
            else:
                k = int((v - lo) / span * (len(_HEAT_CHARS) - 1))
                chars.append(_HEAT_CHARS[k])
        label = "" if result.axis2_dbm is None else f"{result.axis2_dbm[i]:9.2f} "
        lines.append(label + "".join(chars))
    return "\n".join(lines) + "\n"
