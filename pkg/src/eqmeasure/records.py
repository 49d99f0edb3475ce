"""Schema-versioned CSV and JSON output.

Every CSV starts with ``# schema: eqmeasure.<name>/<version> col:type,...``
followed by a plain header row; JSON records carry a ``schema`` key.
"""

from __future__ import annotations

import json
import math

SCHEMA_VERSION = 1


def schema_tag(name: str) -> str:
    return f"eqmeasure.{name}/{SCHEMA_VERSION}"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.17g}"
    return str(v)


def write_csv(path, name: str, columns, rows) -> int:
    """Write ``rows`` under a schema line; ``columns`` is a list of ``(name, type)``.

    Returns the number of data rows.
    """
    count = 0
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema_tag(name)} " + ",".join(f"{c}:{t}" for c, t in columns) + "\n")
        fh.write(",".join(c for c, _ in columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
            count += 1
    return count


def read_csv(path):
    """Parse a file written by :func:`write_csv`; returns ``(schema, header, rows)``
    with values converted according to the declared types."""
    with open(path) as fh:
        first = fh.readline().strip()
        if not first.startswith("# schema: "):
            raise ValueError(f"{path}: missing schema line")
        tag, _, decl = first[len("# schema: "):].partition(" ")
        types = [d.split(":")[1] for d in decl.split(",")]
        header = fh.readline().strip().split(",")
        conv = {"int": int, "float": float, "bool": lambda s: s == "true", "str": str}
        rows = [[conv[t](v) for t, v in zip(types, line.strip().split(","))] for line in fh if line.strip()]
    return tag, header, rows


def write_json(path, name: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump({"schema": schema_tag(name), **payload}, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
