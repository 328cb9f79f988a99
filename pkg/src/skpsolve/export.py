"""Plot-ready output files: versioned JSON reports and fixed-column CSV tables."""

import csv
import hashlib
import json
import os
from datetime import datetime, timezone

import numpy as np

SCHEMA = 1
FLOAT_FMT = "{:.17g}"


def canonical_json(obj):
    """Deterministic JSON text: sorted keys, fixed separators, no NaN."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def input_hash(inputs):
    """Git-style blob hash (``sha256("blob <len>\\0" + content)``) of the canonical inputs."""
    data = canonical_json(inputs).encode("utf-8")
    return hashlib.sha256(b"blob %d\0" % len(data) + data).hexdigest()


def _finite(obj):
    """Replace non-finite floats by strings so the report stays valid JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def envelope(command, config, body, extra_inputs=None, created=None):
    """Report dictionary with schema version, config echo, input hash and timestamp.

    ``created`` is the only field that differs between identical runs.  The
    hash covers everything that determines the numbers, so it leaves out
    ``output_dir``.
    """
    hashed = {k: v for k, v in config.items() if k != "output_dir"}
    inputs = {"command": command, "config": hashed, **(extra_inputs or {})}
    created = created or datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "inputs": extra_inputs or {},
        "input_hash": input_hash(inputs),
        "created": created,
        **_finite(body),
    }


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
    return path


def strip_timestamps(payload):
    """Copy of a report without the ``created`` field (for comparisons)."""
    return {k: v for k, v in payload.items() if k != "created"}


def coordinate_columns(domain):
    names = ["x", "y"][: domain.dim]
    return names, [domain.coords[:, i] for i in range(domain.dim)]


def write_table(path, header, columns):
    """CSV with a header row; floats keep full double precision."""
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([FLOAT_FMT.format(v) if isinstance(v, (float, np.floating)) else v
                        for v in row])
    return path


def write_profile(path, domain, u, phi):
    """Nodal values in the fixed column order ``x[, y], u, phi``."""
    names, coords = coordinate_columns(domain)
    return write_table(path, names + ["u", "phi"], coords + [np.asarray(u), np.asarray(phi)])


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
