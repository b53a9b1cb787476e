"""JSON and CSV readers and writers.

Polynomial objects::

    {"form": "coeffs", "coefficients": [a0, ..., an]}
    {"form": "roots", "leading": an, "roots": [{"re": r, "im": i}, ...]}

Density files ``{"pdf": <polynomial>, "support": {"lower": l, "upper": u}}``
are re-validated on load. Piecewise files hold
``{"segments": [{"poly": <polynomial>, "local": <polynomial>, "interval": {...}}],
"smoothness": C}``. ``poly`` is in the global variable; the optional ``local``
is the same piece in ``t = (x - mid) / half`` and is preferred on load.
Transformed densities are ``{"transform": kind, "parameters": {...},
"base": <density file>}``. Numbers are written with Python's shortest round-trip ``repr``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .distribution import PolynomialPdf
from .exceptions import FormatError
from .fitting import Histogram
from .piecewise import ControlPoints, PiecewisePdf
from .polycore import FactoredPolynomial, Interval, Polynomial, form2_to_form1

__all__ = [
    "poly_to_dict",
    "poly_from_dict",
    "factored_to_dict",
    "interval_to_dict",
    "interval_from_dict",
    "pdf_to_dict",
    "pdf_from_dict",
    "piecewise_to_dict",
    "piecewise_from_dict",
    "transformed_from_dict",
    "density_from_dict",
    "read_json",
    "write_json",
    "read_histogram_csv",
    "read_samples_csv",
    "read_control_points_csv",
    "write_csv",
]


def _num(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise FormatError("numbers must be finite")
    return v


def _cell(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def poly_to_dict(p: Polynomial) -> dict:
    return {"form": "coeffs", "coefficients": [float(a) for a in p.coef]}


def factored_to_dict(f: FactoredPolynomial) -> dict:
    return {"form": "roots", "leading": float(f.leading),
            "roots": [{"re": float(r.real), "im": float(r.imag)} for r in f.roots]}


def poly_from_dict(obj) -> Polynomial:
    if not isinstance(obj, dict) or "form" not in obj:
        raise FormatError("polynomial object needs a 'form' field")
    form = obj["form"]
    try:
        if form == "coeffs":
            coef = obj["coefficients"]
            if not isinstance(coef, list) or not coef:
                raise FormatError("'coefficients' must be a nonempty list")
            return Polynomial([_num(a) for a in coef])
        if form == "roots":
            roots = [complex(_num(r["re"]), _num(r.get("im", 0.0))) for r in obj["roots"]]
            return form2_to_form1(FactoredPolynomial(_num(obj["leading"]), roots))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed polynomial object: {exc}") from exc
    raise FormatError(f"unknown polynomial form {form!r}")


def interval_to_dict(iv: Interval) -> dict:
    return {"lower": float(iv.lower), "upper": float(iv.upper)}


def interval_from_dict(obj) -> Interval:
    try:
        return Interval(_num(obj["lower"]), _num(obj["upper"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed interval: {exc}") from exc


def pdf_to_dict(d: PolynomialPdf) -> dict:
    return {"pdf": poly_to_dict(d.poly), "support": interval_to_dict(d.support)}


def pdf_from_dict(obj) -> PolynomialPdf:
    """Parse and re-validate; raises the validation errors of :class:`PolynomialPdf`."""
    if not isinstance(obj, dict) or "pdf" not in obj or "support" not in obj:
        raise FormatError("density file needs 'pdf' and 'support'")
    return PolynomialPdf(poly_from_dict(obj["pdf"]), interval_from_dict(obj["support"]))


def piecewise_to_dict(pp: PiecewisePdf) -> dict:
    return pp.to_dict()


def piecewise_from_dict(obj) -> PiecewisePdf:
    if not isinstance(obj, dict) or not isinstance(obj.get("segments"), list):
        raise FormatError("piecewise file needs a 'segments' list")
    try:
        C = int(obj.get("smoothness", 0))
        local = all("local" in s for s in obj["segments"])
        key = "local" if local else "poly"
        segs = [(poly_from_dict(s[key]), interval_from_dict(s["interval"])) for s in obj["segments"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed segment: {exc}") from exc
    return PiecewisePdf(segs, smoothness=C, local=local)


def transformed_from_dict(obj):
    """Rebuild a semi-infinite or real-line extension from its base density."""
    from .transform import MonotoneMap, TransformedDensity, TransformKind

    if not isinstance(obj, dict) or "base" not in obj:
        raise FormatError("transformed density needs 'transform' and 'base'")
    base = pdf_from_dict(obj["base"])
    kind = obj.get("transform")
    params = obj.get("parameters") or {}
    if kind == TransformKind.SEMI_INFINITE.value:
        g = MonotoneMap.semi_infinite()
    elif kind == TransformKind.REAL_LINE.value:
        g = MonotoneMap.real_line()
    elif kind == TransformKind.AFFINE_SUPPORT_MAP.value:
        try:
            g = MonotoneMap.affine(_num(params["b1"]), _num(params["b0"]))
        except KeyError as exc:
            raise FormatError(f"affine transform needs b1 and b0: {exc}") from exc
    else:
        raise FormatError(f"cannot rebuild transform {kind!r} from a file")
    return TransformedDensity(base, g)


def density_from_dict(obj):
    """A :class:`PolynomialPdf`, :class:`PiecewisePdf` or transformed density, by shape."""
    if isinstance(obj, dict) and "segments" in obj:
        return piecewise_from_dict(obj)
    if isinstance(obj, dict) and "transform" in obj:
        return transformed_from_dict(obj)
    return pdf_from_dict(obj)


def read_json(path):
    try:
        text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def write_json(path, obj):
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _rows(path):
    text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    rows = [r for r in csv.reader(_io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path}: no data rows")
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]  # header
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return rows


def read_histogram_csv(path) -> Histogram:
    try:
        pts = [(_cell(r[0]), _cell(r[1])) for r in _rows(path)]
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: expected two numeric columns x,y ({exc})") from exc
    x, y = zip(*pts)
    return Histogram(np.array(x), np.array(y))


def read_samples_csv(path) -> np.ndarray:
    try:
        return np.array([_cell(r[0]) for r in _rows(path)])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: expected one numeric column x ({exc})") from exc


def read_control_points_csv(path) -> ControlPoints:
    try:
        rows = [(_cell(r[0]), _cell(r[1]), r[2].strip()) for r in _rows(path)]
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: expected columns x,y,label ({exc})") from exc
    x, y, lab = zip(*rows)
    return ControlPoints(x, y, lab)


def write_csv(path, header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    if path is None or str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())
