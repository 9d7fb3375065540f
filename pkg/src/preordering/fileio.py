"""File ingestion, value-model construction, and DOT export.

Two input formats are supported:

* edge lists: one ``u v`` or ``u v w`` arc per line, ``#`` starts a comment,
  labels are arbitrary whitespace-free tokens mapped to dense ids in
  first-seen order;
* instance files: a ``preorder <n>`` header followed by ``i j c`` lines with
  0-based node ids; unlisted pairs default to value 0.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .core import Instance, Relation, decompose

__all__ = [
    "ParseError",
    "load_edge_list",
    "load_instance_file",
    "save_instance_file",
    "load_any",
    "export_dot",
]


class ParseError(ValueError):
    """Malformed input file; carries the offending location."""

    def __init__(self, path, line_no: int | None, message: str):
        where = f"{path}:{line_no}" if line_no is not None else str(path)
        super().__init__(f"{where}: {message}")


def _content_lines(path):
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line


def load_edge_list(path, value_model: str = "unit", *, offset: float = 0.01,
                   nodes: int | None = None) -> Instance:
    """Read an arc list and build the value matrix for it.

    ``unit``: present arcs get value +1, absent ones -1.  ``offset``: present
    arcs get their weight minus ``offset`` (weight defaults to 1), absent
    ones -``offset`` (an absent pair behaves like weight 0).
    """
    if value_model not in ("unit", "offset"):
        raise ValueError(f"unknown value model: {value_model!r}")
    ids: dict[str, int] = {}
    arcs: dict[tuple[int, int], float] = {}
    for line_no, line in _content_lines(path):
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise ParseError(path, line_no, f"expected 'u v' or 'u v w', got {line!r}")
        u, v = tokens[0], tokens[1]
        if u == v:
            raise ParseError(path, line_no, f"self-loop on {u!r}")
        weight = 1.0
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError:
                raise ParseError(path, line_no, f"bad weight {tokens[2]!r}") from None
            if not math.isfinite(weight):
                raise ParseError(path, line_no, f"non-finite weight {tokens[2]!r}")
        i = ids.setdefault(u, len(ids))
        j = ids.setdefault(v, len(ids))
        if (i, j) in arcs:
            raise ParseError(path, line_no, f"duplicate edge {u} {v}")
        arcs[(i, j)] = weight
    n = len(ids)
    if nodes is not None:
        if nodes < n:
            raise ParseError(path, None, f"{n} distinct labels but only {nodes} nodes declared")
        n = nodes
    if n == 0:
        raise ParseError(path, None, "no nodes (empty edge list and no --nodes)")
    labels = list(ids)
    labels += [str(i) for i in range(len(labels), n)]
    if value_model == "unit":
        values = np.full((n, n), -1.0)
        for (i, j) in arcs:
            values[i, j] = 1.0
    else:
        values = np.full((n, n), -offset)
        for (i, j), w in arcs.items():
            values[i, j] = w - offset
    np.fill_diagonal(values, 0.0)
    return Instance(values, labels=tuple(labels))


def load_instance_file(path) -> Instance:
    """Read the native ``preorder <n>`` value-matrix format."""
    lines = list(_content_lines(path))
    if not lines:
        raise ParseError(path, None, "empty instance file")
    head_no, head = lines[0]
    tokens = head.split()
    if len(tokens) != 2 or tokens[0] != "preorder":
        raise ParseError(path, head_no, f"expected header 'preorder <n>', got {head!r}")
    try:
        n = int(tokens[1])
    except ValueError:
        raise ParseError(path, head_no, f"bad node count {tokens[1]!r}") from None
    if n < 1:
        raise ParseError(path, head_no, "node count must be at least 1")
    values = np.zeros((n, n))
    seen = set()
    for line_no, line in lines[1:]:
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(path, line_no, f"expected 'i j c', got {line!r}")
        try:
            i, j = int(tokens[0]), int(tokens[1])
            c = float(tokens[2])
        except ValueError:
            raise ParseError(path, line_no, f"bad entry {line!r}") from None
        if not 0 <= i < n or not 0 <= j < n:
            raise ParseError(path, line_no, f"node id out of range in {line!r}")
        if i == j:
            raise ParseError(path, line_no, "diagonal entries are not allowed")
        if (i, j) in seen:
            raise ParseError(path, line_no, f"duplicate pair ({i}, {j})")
        if not math.isfinite(c):
            raise ParseError(path, line_no, f"non-finite value {tokens[2]!r}")
        seen.add((i, j))
        values[i, j] = c
    return Instance(values)


def save_instance_file(inst: Instance, path) -> None:
    """Write the native format; floats round-trip exactly via repr."""
    out = [f"preorder {inst.n}"]
    for i in range(inst.n):
        for j in range(inst.n):
            if i != j and inst.values[i, j] != 0.0:
                out.append(f"{i} {j} {float(inst.values[i, j])!r}")
    Path(path).write_text("\n".join(out) + "\n")


def sniff_format(path) -> str:
    """'instance' if the first content line is a 'preorder <n>' header."""
    for _, line in _content_lines(path):
        tokens = line.split()
        return "instance" if tokens and tokens[0] == "preorder" else "edges"
    return "edges"


def load_any(path, fmt: str = "auto", value_model: str = "unit", *,
             offset: float = 0.01, nodes: int | None = None) -> Instance:
    if fmt == "auto":
        fmt = sniff_format(path)
    if fmt == "instance":
        return load_instance_file(path)
    if fmt == "edges":
        return load_edge_list(path, value_model, offset=offset, nodes=nodes)
    raise ValueError(f"unknown format: {fmt!r}")


def export_dot(rel: Relation, labels: tuple[str, ...] | None = None) -> str:
    """Deterministic DOT text for a preorder: one node per equivalence class
    (members comma-joined in id order), one edge per transitive-reduction
    arc.  Classes are ordered by smallest member id."""
    clustered = decompose(rel)  # raises on infeasible input

    def name(i: int) -> str:
        return labels[i] if labels is not None else str(i)

    lines = ["digraph preorder {"]
    for k, members in enumerate(clustered.classes):
        text = ",".join(name(i) for i in members).replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  c{k} [label="{text}"];')
    for a, b in sorted(clustered.reduction):
        lines.append(f"  c{a} -> c{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
