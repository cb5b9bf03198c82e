"""Deterministic emission: structured JSON documents and tab-separated columns.

Nothing time- or host-dependent is written, so a run with the same
configuration and seed reproduces its files byte for byte.
"""

import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = [
    "FORMATS",
    "to_plain",
    "canonical_json",
    "config_hash",
    "provenance",
    "flatten",
    "write_document",
    "write_columns",
    "write_shots",
]

STRUCTURED, COLUMNAR = "structured-document", "columnar-text"
FORMATS = (COLUMNAR, STRUCTURED)


def to_plain(obj):
    """Recursively convert dataclasses, numpy values and complex numbers to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        return out
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def canonical_json(obj):
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def config_hash(raw):
    """SHA-256 of the canonical JSON form of a parsed configuration."""
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()


def provenance(command, raw_config, seed):
    from . import __version__

    return {
        "command": command,
        "config_sha256": config_hash(raw_config),
        "seed": seed,
        "package_version": __version__,
    }


def flatten(doc, prefix=""):
    """Dotted-key view of a nested document."""
    rows = []
    if isinstance(doc, dict):
        for k in sorted(doc):
            rows += flatten(doc[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(doc, list) and any(isinstance(v, (dict, list)) for v in doc):
        for i, v in enumerate(doc):
            rows += flatten(v, f"{prefix}.{i}")
    else:
        rows.append((prefix, doc))
    return rows


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, list):
        return ",".join(_fmt(x) for x in v)
    if v is None:
        return "null"
    return str(v)


def write_document(path_stem, doc, fmt=STRUCTURED):
    """Write ``doc`` as ``<stem>.json`` or as a two-column ``<stem>.tsv``; returns the path."""
    doc = to_plain(doc)
    if fmt == STRUCTURED:
        path = Path(f"{path_stem}.json")
        path.write_text(canonical_json(doc))
    elif fmt == COLUMNAR:
        path = Path(f"{path_stem}.tsv")
        lines = ["key\tvalue"] + [f"{k}\t{_fmt(v)}" for k, v in flatten(doc)]
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def write_columns(path, columns):
    """Tab-separated table with a one-line header; ``columns`` is an ordered mapping."""
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    n_rows = {c.shape[0] for c in cols}
    if len(n_rows) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(n_rows)}")
    lines = ["\t".join(names)]
    for row in zip(*(c.tolist() for c in cols)):
        lines.append("\t".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def write_shots(path, shots):
    """Shot records: prep, I, Q, label, jump_count."""
    return write_columns(path, {k: shots[k] for k in ("prep", "I", "Q", "label", "jump_count")})
