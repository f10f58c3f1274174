"""
DIMACS .gr and edge-list readers and writers.
"""

import logging
import os
from typing import Iterable, TextIO, Union

import numpy as np

from graphs.graph import Graph
from utils.errors import GraphFormatError

logger = logging.getLogger(__name__)


def _format_weight(weight: float) -> str:
    """Integral weights are written without a decimal point"""
    if float(weight).is_integer():
        return str(int(weight))
    return repr(float(weight))


def _parse_weight(token: str, line_number: int) -> float:
    try:
        weight = float(token)
    except ValueError:
        raise GraphFormatError(f"weight {token!r} is not a number", line_number)
    if not np.isfinite(weight) or weight <= 0:
        raise GraphFormatError(f"non-positive weight {token}", line_number)
    return weight


def parse_dimacs_gr(stream: Iterable[str], name: str = None) -> Graph:
    """Parse a 9th DIMACS Challenge .gr stream into a directed graph"""
    num_vertices = None
    declared_arcs = 0
    sources, targets, weights = [], [], []

    for line_number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tokens = line.split()

        if tokens[0] == "p":
            if num_vertices is not None:
                raise GraphFormatError("duplicate problem line", line_number)
            if len(tokens) != 4 or tokens[1] != "sp":
                raise GraphFormatError(f"malformed header {line!r}, expected 'p sp <n> <m>'", line_number)
            try:
                num_vertices, declared_arcs = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise GraphFormatError(f"malformed header {line!r}", line_number)
            if num_vertices < 0 or declared_arcs < 0:
                raise GraphFormatError("negative counts in header", line_number)

        elif tokens[0] == "a":
            if num_vertices is None:
                raise GraphFormatError("arc before 'p sp' header", line_number)
            if len(tokens) != 4:
                raise GraphFormatError(f"malformed arc {line!r}", line_number)
            try:
                u, v = int(tokens[1]), int(tokens[2])
            except ValueError:
                raise GraphFormatError(f"malformed arc {line!r}", line_number)
            for vertex in (u, v):
                if not 1 <= vertex <= num_vertices:
                    raise GraphFormatError(f"vertex {vertex} out of range 1..{num_vertices}", line_number)
            sources.append(u - 1)
            targets.append(v - 1)
            weights.append(_parse_weight(tokens[3], line_number))

        else:
            raise GraphFormatError(f"unknown line type {tokens[0]!r}", line_number)

    if num_vertices is None:
        raise GraphFormatError("missing 'p sp <n> <m>' header")
    if declared_arcs != len(sources):
        logger.warning(f"Header declares {declared_arcs} arcs but {len(sources)} were read")

    return Graph(num_vertices, sources, targets, weights, directed=True,
                 weight_unit="meters", name=name or "dimacs")


def write_dimacs_gr(graph: Graph, stream: TextIO) -> None:
    """Write a graph in .gr format; undirected edges become two arcs"""
    arcs = list(graph.edges())
    if not graph.directed:
        arcs = arcs + [(v, u, w) for u, v, w in arcs]
    stream.write(f"c {graph.name}\n")
    stream.write(f"p sp {graph.num_vertices} {len(arcs)}\n")
    for u, v, w in arcs:
        stream.write(f"a {u + 1} {v + 1} {_format_weight(w)}\n")


def parse_edge_list(stream: Iterable[str], directed: bool = False,
                    num_vertices: int = None, name: str = None) -> Graph:
    """Parse 0-based 'u v w' lines with '#' comments"""
    sources, targets, weights = [], [], []
    declared = num_vertices

    for line_number, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if raw.lstrip().startswith("# vertices="):
            declared = declared if declared is not None else int(raw.split("=", 1)[1])
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise GraphFormatError(f"expected 'u v w', got {line!r}", line_number)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"malformed vertex ids in {line!r}", line_number)
        if u < 0 or v < 0:
            raise GraphFormatError("negative vertex id", line_number)
        if declared is not None and max(u, v) >= declared:
            raise GraphFormatError(f"vertex {max(u, v)} out of range 0..{declared - 1}", line_number)
        sources.append(u)
        targets.append(v)
        weights.append(_parse_weight(tokens[2], line_number))

    if declared is None:
        declared = (max(max(sources), max(targets)) + 1) if sources else 0

    return Graph(declared, sources, targets, weights, directed=directed, name=name or "edges")


def write_edge_list(graph: Graph, stream: TextIO) -> None:
    """Write 0-based 'u v w' lines with a vertex-count comment"""
    stream.write(f"# vertices={graph.num_vertices}\n")
    stream.write(f"# directed={str(graph.directed).lower()}\n")
    for u, v, w in graph.edges():
        stream.write(f"{u} {v} {_format_weight(w)}\n")


def load_graph(path: Union[str, os.PathLike], directed: bool = None) -> Graph:
    """Load a graph file, choosing the parser by extension"""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"Graph file not found: {path}")

    name = os.path.splitext(os.path.basename(path))[0]
    with open(path, "r") as handle:
        if path.endswith(".gr"):
            graph = parse_dimacs_gr(handle, name=name)
        else:
            if directed is None:
                directed = _sniff_directed(path)
            graph = parse_edge_list(handle, directed=directed, name=name)

    logger.info(f"Loaded {graph!r} from {path}")
    return graph


def _sniff_directed(path: str) -> bool:
    """Read the '# directed=' comment written by write_edge_list"""
    with open(path, "r") as handle:
        for raw in handle:
            if not raw.startswith("#"):
                break
            if raw.startswith("# directed="):
                return raw.split("=", 1)[1].strip().lower() == "true"
    return False
