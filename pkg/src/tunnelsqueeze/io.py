"""File formats: flat config files, comment-headed CSV tables, JSON reports.

CSV tables start with ``#`` comment lines (units, generating config), then
one header row, then data rows. Floats are written with 17 significant
digits so a table read back and re-written is byte-identical.
"""

import json
import math

import numpy as np

from .calibrate import NoiseCurve
from .noise import ParameterError

__all__ = [
    "InputFormatError",
    "format_float",
    "read_config",
    "write_table",
    "read_table",
    "write_curve_csv",
    "read_curve_csv",
    "write_json",
    "read_json",
]


class InputFormatError(ParameterError):
    """Malformed input file; ``line`` is 1-based (None if not line-specific)."""

    def __init__(self, path, line, message):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__("input", f"{where}: {message}")
        self.path = path
        self.line = line


def format_float(x):
    return f"{x:.17g}"


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys are lower-cased."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputFormatError(path, lineno, f"expected key = value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise InputFormatError(path, lineno, "empty key")
            out[key.lower().replace("-", "_")] = value
    return out


def write_table(fh, comments, header, rows):
    """Write comment lines, a header row and float rows to an open text file."""
    for c in comments:
        fh.write(f"# {c}\n" if c else "#\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(format_float(float(v)) for v in row) + "\n")


def read_table(path):
    """Inverse of :func:`write_table`: ``(comments, header, rows)``."""
    comments, header, rows = [], None, []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if line.startswith("#"):
                if header is not None:
                    raise InputFormatError(path, lineno, "comment after header row")
                comments.append(line[2:] if line.startswith("# ") else line[1:])
                continue
            if not line.strip():
                continue
            fields = [f.strip() for f in line.split(",")]
            if header is None:
                header = fields
                continue
            if len(fields) != len(header):
                raise InputFormatError(
                    path, lineno, f"expected {len(header)} fields, got {len(fields)}")
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise InputFormatError(path, lineno, f"non-numeric field in {line!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise InputFormatError(path, lineno, "non-finite value")
            rows.append(values)
    if header is None:
        raise InputFormatError(path, None, "no header row")
    return comments, header, rows


CURVE_HEADER = ["bias_V", "measured"]


def write_curve_csv(path, curve, extra_comments=()):
    with open(path, "w", encoding="utf-8") as fh:
        write_table(
            fh,
            [f"frequency_hz = {format_float(curve.frequency)}",
             f"resistance_ohm = {format_float(curve.resistance)}", *extra_comments],
            CURVE_HEADER,
            zip(curve.bias, curve.measured),
        )


def read_curve_csv(path, frequency=None, resistance=None):
    """Read a :class:`NoiseCurve`.

    Frequency and resistance come from ``key = value`` comment lines unless
    given explicitly.
    """
    comments, header, rows = read_table(path)
    meta = {}
    for c in comments:
        if "=" in c:
            k, v = (s.strip() for s in c.split("=", 1))
            meta[k] = v
    if [h.lower() for h in header] != [h.lower() for h in CURVE_HEADER]:
        raise InputFormatError(path, len(comments) + 1,
                               f"header must be {','.join(CURVE_HEADER)}, got {','.join(header)}")
    try:
        freq = float(frequency if frequency is not None else meta["frequency_hz"])
        res = float(resistance if resistance is not None else meta["resistance_ohm"])
    except KeyError as exc:
        raise InputFormatError(path, None, f"missing '{exc.args[0]}' comment") from None
    except ValueError as exc:
        raise InputFormatError(path, None, str(exc)) from None
    data = np.array(rows, dtype=float).reshape(-1, 2)
    first_data_line = len(comments) + 2
    bias = data[:, 0]
    bad = np.flatnonzero(np.diff(bias) <= 0)
    if bad.size:
        raise InputFormatError(path, first_data_line + int(bad[0]) + 1,
                               "biases must be strictly increasing")
    return NoiseCurve(bias, data[:, 1], freq, res)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path, obj):
    # json writes floats with repr(), the shortest string that round-trips
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=False, allow_nan=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputFormatError(path, exc.lineno, exc.msg) from None
