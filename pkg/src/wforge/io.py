"""JSON operator files.

Format (UTF-8)::

    {"dims": [d_A, d_B],
     "re": [[...], ...], "im": [[...], ...],
     "meta": {"ordering": "|i_A, m_B>, A index outer", ...}}

Floats are written with Python's shortest round-trip repr (at most 17
significant digits), so a write/read cycle is bit-exact.
"""

import json
from pathlib import Path

import numpy as np

from .bipartite import BipartiteOperator
from .errors import WforgeError
from .linalg import as_hermitian

ORDERING = "|i_A, m_B>, A index outer (row-major, composite index i*d_B + m)"


class OperatorFileError(WforgeError):
    """Malformed or unreadable operator file."""


def operator_to_dict(op, meta=None):
    m = dict(meta or {})
    m.setdefault("ordering", ORDERING)
    return {
        "dims": [int(op.dim_a), int(op.dim_b)],
        "re": op.matrix.real.tolist(),
        "im": op.matrix.imag.tolist(),
        "meta": m,
    }


def write_operator(path, op, meta=None):
    Path(path).write_text(json.dumps(operator_to_dict(op, meta)), encoding="utf-8")


def operator_from_dict(data, hermitian=True):
    try:
        da, db = (int(x) for x in data["dims"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise OperatorFileError(f"malformed operator record: {exc}") from exc
    d = da * db
    if re.shape != (d, d) or im.shape != (d, d):
        raise OperatorFileError(f"matrix shape {re.shape}/{im.shape} does not match dims {da}x{db}")
    M = re + 1j * im
    if hermitian:
        try:
            as_hermitian(M)
        except WforgeError as exc:
            raise OperatorFileError(str(exc)) from exc
    return BipartiteOperator(M, da, db), dict(data.get("meta", {}))


def read_operator(path, hermitian=True):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OperatorFileError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OperatorFileError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise OperatorFileError(f"{path}: expected a JSON object")
    return operator_from_dict(data, hermitian)
