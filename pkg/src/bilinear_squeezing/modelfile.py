"""JSON model files and CSV emission.

Model file fields::

    {"n_sites": 6, "model": "xyz", "jx": ..., "jy": ..., "jz": ..., "z_fields": [...]}

``jx/jy/jz`` may be a dense N x N array, a number (uniform all-to-all) or a
power-law generator ``{"amplitude": a, "exponent": p, "geometry": "chain"|"ring"}``.
``oat`` and ``tact`` take ``chi``.  ``explicit`` takes ``k_matrix``, ``j_matrix``,
``zz_matrix`` (and optional ``offset``); complex entries are ``[re, im]`` pairs.
"""

from __future__ import annotations

import copy
import csv
import io
import json
from pathlib import Path

import numpy as np

from .model import CouplingSpec, build_oat, build_tact, build_xyz, power_law_matrix

MODELS = ("xyz", "oat", "tact", "explicit")


class ModelFileError(ValueError):
    pass


def _coupling(value, n, field):
    if isinstance(value, dict):
        missing = {"amplitude", "exponent"} - set(value)
        if missing:
            raise ModelFileError(f"{field}: power-law generator missing {sorted(missing)}")
        try:
            return power_law_matrix(n, float(value["amplitude"]), float(value["exponent"]), value.get("geometry", "chain"))
        except ValueError as exc:
            raise ModelFileError(f"{field}: {exc}") from exc
    if isinstance(value, (int, float)):
        m = np.full((n, n), float(value))
        np.fill_diagonal(m, 0.0)
        return m
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n, n):
        raise ModelFileError(f"{field}: expected a {n}x{n} array, got shape {arr.shape}")
    return arr


def _complex_matrix(value, n, field):
    arr = np.asarray(value, dtype=float)
    if arr.shape == (n, n):
        return arr.astype(complex)
    if arr.shape == (n, n, 2):
        return arr[..., 0] + 1j * arr[..., 1]
    raise ModelFileError(f"{field}: expected {n}x{n} real or {n}x{n}x2 [re, im] array, got shape {arr.shape}")


def spec_from_dict(doc: dict) -> CouplingSpec:
    if not isinstance(doc, dict):
        raise ModelFileError("model file must contain a JSON object")
    if "n_sites" not in doc:
        raise ModelFileError("n_sites: required field missing")
    n = doc["n_sites"]
    if not isinstance(n, int) or n < 1:
        raise ModelFileError(f"n_sites: must be a positive integer, got {n!r}")
    model = doc.get("model")
    if model not in MODELS:
        raise ModelFileError(f"model: must be one of {'|'.join(MODELS)}, got {model!r}")
    fields = None
    if "z_fields" in doc:
        fields = np.asarray(doc["z_fields"], dtype=float)
        if fields.shape != (n,):
            raise ModelFileError(f"z_fields: expected length {n}, got shape {fields.shape}")
    try:
        if model == "xyz":
            zero = np.zeros((n, n))
            jx = _coupling(doc.get("jx", 0.0), n, "jx")
            jy = _coupling(doc.get("jy", 0.0), n, "jy")
            jz = _coupling(doc["jz"], n, "jz") if "jz" in doc else zero
            spec = build_xyz(jx, jy, jz, fields)
        elif model in ("oat", "tact"):
            if "chi" not in doc:
                raise ModelFileError("chi: required for oat/tact models")
            build = build_oat if model == "oat" else build_tact
            spec = build(float(doc["chi"]), n)
            if fields is not None:
                spec = spec.with_(z_fields=fields)
        else:
            zero = np.zeros((n, n))
            spec = CouplingSpec(
                n_sites=n,
                k_matrix=_complex_matrix(doc["k_matrix"], n, "k_matrix") if "k_matrix" in doc else zero,
                j_matrix=_complex_matrix(doc["j_matrix"], n, "j_matrix") if "j_matrix" in doc else zero,
                zz_matrix=np.asarray(doc.get("zz_matrix", zero), dtype=float),
                z_fields=np.zeros(n) if fields is None else fields,
                offset=float(doc.get("offset", 0.0)),
            )
    except ModelFileError:
        raise
    except (ValueError, TypeError) as exc:
        raise ModelFileError(f"{model}: {exc}") from exc
    if "include_diagonal_in_kernel" in doc:
        spec = spec.with_(include_diagonal_in_kernel=bool(doc["include_diagonal_in_kernel"]))
    return spec.with_(name=model)


def load_model_doc(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_model(path) -> CouplingSpec:
    return spec_from_dict(load_model_doc(path))


def vary_parameter(doc: dict, name: str, value: float) -> dict:
    """Copy of ``doc`` with one scalar parameter set.

    For a generator the amplitude is replaced; a dense array is scaled by
    ``value``; ``chi`` and numeric couplings are replaced outright.
    """
    out = copy.deepcopy(doc)
    if name not in out and name in ("jx", "jy", "jz"):
        out[name] = 0.0
    if name not in out:
        raise ModelFileError(f"--vary: model has no parameter {name!r}")
    cur = out[name]
    if isinstance(cur, dict):
        cur["amplitude"] = value
    elif isinstance(cur, (int, float)):
        out[name] = value
    elif isinstance(cur, list):
        out[name] = (np.asarray(cur, dtype=float) * value).tolist()
    else:
        raise ModelFileError(f"--vary: cannot vary parameter {name!r} of type {type(cur).__name__}")
    return out


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_plotdata(path, columns, rows, header: dict) -> str:
    """Write a CSV with '#'-prefixed metadata lines; returns the text written."""
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_plotdata(path) -> tuple[dict, list[str], np.ndarray]:
    header, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        elif line:
            lines.append(line)
    columns = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(columns))
    return header, columns, data
