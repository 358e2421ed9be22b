"""Manifest files, MatrixMarket block storage and JSON serialization.

A system manifest is a JSON object::

    {"layout": "tridiagonal", "label": "...",
     "blocks": {"A1": [[...], ...], "A2": "A2.mtx", ...}}

Each block is either an inline dense array (list of rows) or a path, relative
to the manifest, of a MatrixMarket file (coordinate or array format).

A raw (possibly nonsymmetric) 3x3 block matrix may be given instead as
``{"matrix": <block or path>, "sizes": [n1, n2, n3]}``; it can only be
classified.
"""

import dataclasses
import enum
import json
import math
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .block_model import BLOCK_NAMES, BlockMatrix3, BlockSystem3, Layout, MultiSaddleSystem, permute_23
from .errors import ManifestError, S3Error


# --------------------------------------------------------------------------
# JSON with 17 significant digits


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, enum.Enum):
        _emit(obj.value, out)
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            out.append("NaN")
        elif math.isinf(x):
            out.append("Infinity" if x > 0 else "-Infinity")
        else:
            s = format(x, ".17g")
            if not any(c in s for c in ".en"):
                s += ".0"
            out.append(s)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k.value if isinstance(k, enum.Enum) else k)))
            out.append(": ")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif dataclasses.is_dataclass(obj):
        _emit(to_jsonable(obj), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """Serialize to JSON, printing every float with 17 significant digits."""
    out = []
    _emit(obj, out)
    return "".join(out)


def to_jsonable(obj):
    """Shallow conversion of dataclasses (recursively) into plain containers."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


# --------------------------------------------------------------------------
# MatrixMarket


def read_mtx(path):
    m = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(m):
        m = m.toarray()
    return np.atleast_2d(np.asarray(m, dtype=float))


def write_mtx(path, a, coordinate=False):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if coordinate:
        scipy.io.mmwrite(str(path), scipy.sparse.coo_matrix(a), precision=17)
    else:
        scipy.io.mmwrite(str(path), a, precision=17)


# --------------------------------------------------------------------------
# Manifests


def _load_block(value, base, path, name):
    if isinstance(value, str):
        target = base / value
        if not target.exists():
            raise ManifestError(f"block file '{value}' not found", path, name)
        try:
            return read_mtx(target)
        except Exception as exc:
            raise ManifestError(f"cannot read MatrixMarket file '{value}': {exc}", path, name) from exc
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ManifestError("block must be a dense array or a .mtx path", path, name) from exc
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ManifestError(f"block must be two-dimensional, got {a.ndim} dimensions", path, name)
    return a


def _read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ManifestError("manifest not found", path) from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON: {exc}", path) from exc


def manifest_from_dict(data, base=".", path=None):
    """Build a BlockSystem3 (or a BlockMatrix3 for raw manifests) from parsed JSON."""
    base = Path(base)
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object", path)
    if "matrix" in data:
        if "sizes" not in data:
            raise ManifestError("raw matrix manifest needs 'sizes'", path, "sizes")
        m = _load_block(data["matrix"], base, path, "matrix")
        try:
            return BlockMatrix3(m, tuple(data["sizes"]))
        except S3Error as exc:
            raise ManifestError(str(exc), path, "sizes") from exc
    if "layout" not in data:
        raise ManifestError("missing field", path, "layout")
    try:
        layout = Layout(data["layout"])
    except ValueError as exc:
        allowed = ", ".join(l.value for l in Layout)
        raise ManifestError(f"unknown layout '{data['layout']}' (expected one of {allowed})", path, "layout") from exc
    blocks = data.get("blocks")
    if not isinstance(blocks, dict):
        raise ManifestError("missing or malformed field", path, "blocks")
    kw = {}
    for name in BLOCK_NAMES:
        if name not in blocks:
            raise ManifestError("missing block", path, f"blocks.{name}")
        kw[name] = _load_block(blocks[name], base, path, f"blocks.{name}")
    try:
        return BlockSystem3(layout=layout, label=str(data.get("label", "")), **kw)
    except S3Error as exc:
        field = getattr(exc, "block", None)
        raise ManifestError(str(exc), path, f"blocks.{field}" if field else None) from exc


def load_manifest(path):
    path = Path(path)
    return manifest_from_dict(_read_json(path), base=path.parent, path=path)


def manifest_dict(sys, inline=True, names=None):
    """JSON-ready manifest.  Persistence normalizes permuted_k to tridiagonal."""
    if sys.layout is Layout.PERMUTED_K:
        sys = permute_23(sys)
    blocks = {}
    for k in BLOCK_NAMES:
        blocks[k] = getattr(sys, k).tolist() if inline else names[k]
    return {"layout": sys.layout.value, "label": sys.label, "blocks": blocks}


def save_manifest(sys, directory, stem="system", inline=False):
    """Write ``<stem>.json`` and, unless ``inline``, one ``<stem>_<block>.mtx`` per block."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if sys.layout is Layout.PERMUTED_K:
        sys = permute_23(sys)
    names = None
    if not inline:
        names = {}
        for k in BLOCK_NAMES:
            fname = f"{stem}_{k}.mtx"
            write_mtx(directory / fname, getattr(sys, k))
            names[k] = fname
    path = directory / f"{stem}.json"
    path.write_text(dumps(manifest_dict(sys, inline=inline, names=names)) + "\n")
    return path


def save_multi_manifest(ms, directory, stem="multi"):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    diag, off = [], []
    for i, (sign, block) in enumerate(ms.diag_blocks):
        fname = f"{stem}_D{i + 1}.mtx"
        write_mtx(directory / fname, block)
        diag.append({"sign": sign, "block": fname})
    for i, j in enumerate(ms.off_blocks):
        fname = f"{stem}_J{i + 1}.mtx"
        write_mtx(directory / fname, j)
        off.append(fname)
    path = directory / f"{stem}.json"
    path.write_text(dumps({"kind": "multi_saddle", "diag_blocks": diag, "off_blocks": off}) + "\n")
    return path


def load_multi_manifest(path):
    path = Path(path)
    data = _read_json(path)
    base = path.parent
    try:
        diag = [(d["sign"], _load_block(d["block"], base, path, f"diag_blocks[{i}]"))
                for i, d in enumerate(data["diag_blocks"])]
        off = [_load_block(j, base, path, f"off_blocks[{i}]") for i, j in enumerate(data["off_blocks"])]
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"malformed multi-saddle manifest: {exc}", path) from exc
    return MultiSaddleSystem(tuple(diag), tuple(off))
