"""Plain-text file formats.

Operator files::

    M N                 diag N
    <M rows of N>       <N values>

Problem files hold one ``key value...`` entry per line: ``alpha``,
``delta``, ``p``, ``weights`` (N values or ``uniform w``) and ``data``
(M values). Config files are flat ``key value`` lines. ``#`` starts a
comment everywhere.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from sparsetik.errors import PreconditionError
from sparsetik.experiments import format_value
from sparsetik.operators import DenseOperator, DiagonalOperator
from sparsetik.penalty import WeightedPenalty
from sparsetik.seqspace import WeightSequence
from sparsetik.solvers import RegularizedProblem


class FormatError(PreconditionError):
    pass


def _lines(text):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _floats(tokens, what):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"bad number in {what}: {exc}") from None


def parse_operator(text: str):
    lines = list(_lines(text))
    if not lines:
        raise FormatError("empty operator file")
    head = lines[0].split()
    body = " ".join(lines[1:]).split()
    if len(head) == 2 and head[0] == "diag":
        n = int(head[1])
        vals = _floats(body, "diagonal")
        if len(vals) != n:
            raise FormatError(f"expected {n} diagonal values, got {len(vals)}")
        return DiagonalOperator(vals)
    if len(head) != 2:
        raise FormatError("operator header must be 'M N' or 'diag N'")
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError("operator header must be 'M N' or 'diag N'") from None
    if len(lines) - 1 != m:
        raise FormatError(f"expected {m} matrix rows, got {len(lines) - 1}")
    rows = [_floats(line.split(), "matrix row") for line in lines[1:]]
    if any(len(r) != n for r in rows):
        raise FormatError(f"every matrix row must have {n} entries")
    return DenseOperator(np.array(rows))


def format_operator(K) -> str:
    if isinstance(K, DiagonalOperator):
        vals = K.singular_values
        return f"diag {vals.size}\n" + "\n".join(format_value(v) for v in vals) + "\n"
    A = K.matrix
    out = [f"{A.shape[0]} {A.shape[1]}"]
    out += [" ".join(format_value(v) for v in row) for row in A]
    return "\n".join(out) + "\n"


def read_operator(path):
    return parse_operator(Path(path).read_text())


def write_operator(K, path):
    Path(path).write_text(format_operator(K))


PROBLEM_KEYS = ("alpha", "delta", "p", "weights", "data")


def parse_problem(text: str, K) -> RegularizedProblem:
    entries = {}
    for line in _lines(text):
        key, *rest = line.split()
        if key not in PROBLEM_KEYS:
            raise FormatError(f"unknown problem key {key!r}")
        if key in entries:
            raise FormatError(f"duplicate problem key {key!r}")
        entries[key] = rest
    for key in ("alpha", "p", "data"):
        if key not in entries:
            raise FormatError(f"problem file lacks {key!r}")
    n = K.shape[1]
    alpha = _floats(entries["alpha"], "alpha")
    p = _floats(entries["p"], "p")
    delta = _floats(entries.get("delta", ["0"]), "delta")
    if len(alpha) != 1 or len(p) != 1 or len(delta) != 1:
        raise FormatError("alpha, p and delta take a single value")
    wtok = entries.get("weights", ["uniform", "1"])
    if wtok and wtok[0] == "uniform":
        if len(wtok) != 2:
            raise FormatError("use 'weights uniform <w>'")
        weights = WeightSequence.uniform(n, _floats(wtok[1:], "weights")[0])
    else:
        vals = _floats(wtok, "weights")
        if len(vals) != n:
            raise FormatError(f"expected {n} weights, got {len(vals)}")
        weights = WeightSequence(np.array(vals))
    data = np.array(_floats(entries["data"], "data"))
    return RegularizedProblem(K, data, alpha[0], WeightedPenalty(p[0], weights), delta=delta[0])


def read_problem(path, K):
    return parse_problem(Path(path).read_text(), K)


def format_problem(prob: RegularizedProblem) -> str:
    w = prob.weights
    wline = f"uniform {format_value(w[0])}" if np.all(w == w[0]) else " ".join(format_value(v) for v in w)
    return (
        f"alpha {format_value(prob.alpha)}\n"
        f"delta {format_value(prob.delta)}\n"
        f"p {format_value(prob.p)}\n"
        f"weights {wline}\n"
        f"data {' '.join(format_value(v) for v in prob.data)}\n"
    )


def parse_config(text: str) -> dict:
    """Flat ``key value`` config; values are kept as strings."""
    cfg = {}
    for line in _lines(text):
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise FormatError(f"config line needs a key and a value: {line!r}")
        key, value = parts
        if key in cfg:
            raise FormatError(f"duplicate config key {key!r}")
        cfg[key] = value.strip()
    return cfg


def read_config(path) -> dict:
    return parse_config(Path(path).read_text())


def format_sequence(u) -> str:
    u = np.asarray(u, dtype=float)
    return f"{u.size}\n" + "\n".join(format_value(v) for v in u) + "\n"
