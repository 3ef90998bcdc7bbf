"""A module for the JSON and CSV export of reports."""

import io
import json
import jsonschema
import numpy as np
import os

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "schemas")

class ExportException(Exception):
    def __init__(self, path):
        super().__init__(f"Failed to produce {path}")

def to_file(path, content):
    """Export the content (a string) to a .json or .csv file."""
    root, ext = os.path.splitext(path)
    root_dir = os.path.dirname(root)
    if ext not in [ ".json", ".csv" ]:
        raise ValueError("Unknown file path extension")
    if root_dir != "": # ensure that the root directory exists
        if not os.path.isdir(root_dir):
            os.makedirs(root_dir)
    try:
        with open(path, "w") as f:
            f.write(content)
    except OSError as e:
        raise ExportException(path) from e

def plain(obj):
    """Convert numpy data into JSON-compatible values; matrices become ``{"shape": ..., "data": ...}``."""
    if isinstance(obj, dict):
        return { str(k): plain(v) for k, v in obj.items() }
    if isinstance(obj, np.ndarray):
        if obj.ndim >= 2:
            return { "shape": list(obj.shape), "data": [ plain(x) for x in obj.ravel() ] }
        return [ plain(x) for x in obj ]
    if isinstance(obj, (list, tuple)):
        return [ plain(x) for x in obj ]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            return str(float(obj)) # "inf", "-inf", or "nan"
        return float(obj)
    return obj

def to_json(obj):
    """Deterministic JSON text: sorted keys, 2-space indent."""
    return json.dumps(plain(obj), sort_keys=True, indent=2) + "\n"

def to_csv(rows, columns, *, fmt="%.10g"):
    """CSV text with a header line."""
    buffer = io.StringIO()
    np.savetxt(buffer, np.atleast_2d(rows), delimiter=",", header=",".join(columns), comments="", fmt=fmt)
    return buffer.getvalue()

def load_schema(name):
    with open(os.path.join(SCHEMA_DIR, f"{name}.json")) as f:
        return json.load(f)

def check_schema(document, name):
    """Validate a JSON document against a shipped schema with ``jsonschema``.

    Returns:
        problems: A list of messages, each prefixed with the path of the offending value; empty if the document conforms.
    """
    schema = load_schema(name)
    validator = jsonschema.Draft202012Validator(schema)
    return [
        f"{'/'.join(str(p) for p in error.absolute_path) or '<root>'}: {error.message}"
        for error in sorted(validator.iter_errors(document), key=lambda e: list(map(str, e.absolute_path)))
    ]

def validate(document, name):
    """Like ``check_schema``, but raise a ``jsonschema.ValidationError`` for the first problem."""
    jsonschema.validate(instance=document, schema=load_schema(name), cls=jsonschema.Draft202012Validator)
