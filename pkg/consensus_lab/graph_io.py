"""JSON (de)serialization of graphs and models.

Graph file:  {"n": 3, "in": {"1": [1, 2], "2": [2], "3": [1, 3]}}
Model file:  {"n": 3, "graphs": [{"in": {...}}, ...]}

Indices are 1-based and self-loops must be listed explicitly.
"""

import json
from pathlib import Path
from typing import Any

from .errors import GraphValidationError, ParseError, ValidationError
from .graphs import CommGraph, NetworkModel


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Malformed JSON: {e.msg}", line=e.lineno, column=e.colno) from e


def _read_n(data: Any, where: str) -> int:
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: expected a JSON object")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"{where}: 'n' must be a positive integer, got {n!r}")
    return n


def _graph_from_data(data: Any, n: int, where: str) -> CommGraph:
    if not isinstance(data, dict) or not isinstance(data.get("in"), dict):
        raise ValidationError(f"{where}: expected an object with an 'in' mapping")
    mapping = data["in"]
    expected = {str(agent) for agent in range(1, n + 1)}
    unknown = sorted(set(mapping) - expected)
    if unknown:
        raise ValidationError(f"{where}: unknown agent keys {unknown} for n={n}")

    in_sets = []
    for agent in range(1, n + 1):
        senders = mapping.get(str(agent))
        if senders is None:
            raise GraphValidationError(
                f"{where}: agent {agent} has no in-neighbor list", agent=agent
            )
        if not isinstance(senders, list) or not all(
            isinstance(s, int) and not isinstance(s, bool) for s in senders
        ):
            raise GraphValidationError(
                f"{where}: agent {agent} in-neighbors must be a list of integers", agent=agent
            )
        if agent not in senders:
            raise GraphValidationError(
                f"{where}: agent {agent} is missing its self-loop", agent=agent
            )
        in_sets.append(frozenset(s - 1 for s in senders))
    return CommGraph(tuple(in_sets))


def parse_graph(text: str) -> CommGraph:
    data = _load_json(text)
    n = _read_n(data, "graph")
    return _graph_from_data(data, n, "graph")


def parse_model(text: str) -> NetworkModel:
    data = _load_json(text)
    n = _read_n(data, "model")
    graphs = data.get("graphs")
    if not isinstance(graphs, list) or not graphs:
        raise ValidationError("model: 'graphs' must be a nonempty list")
    parsed = []
    for index, entry in enumerate(graphs, 1):
        where = f"model graph {index}"
        if isinstance(entry, dict) and "n" in entry and entry["n"] != n:
            raise ValidationError(f"{where}: 'n' is {entry['n']}, model has n={n}")
        parsed.append(_graph_from_data(entry, n, where))
    return NetworkModel(tuple(parsed))


def _in_mapping(graph: CommGraph) -> dict[str, list[int]]:
    return {
        str(agent + 1): [s + 1 for s in senders] for agent, senders in enumerate(graph.sorted_in)
    }


def serialize_graph(graph: CommGraph) -> str:
    """Normalized text: one line per agent, sorted neighbor lists."""
    lines = [f'    "{key}": {json.dumps(senders)}' for key, senders in _in_mapping(graph).items()]
    return "{\n" f'  "n": {graph.n},\n' '  "in": {\n' + ",\n".join(lines) + "\n  }\n}\n"


def serialize_model(model: NetworkModel) -> str:
    """Normalized text: graphs in canonical order, one line per graph."""
    lines = [f"    {json.dumps({'in': _in_mapping(g)})}" for g in model]
    return "{\n" f'  "n": {model.n},\n' '  "graphs": [\n' + ",\n".join(lines) + "\n  ]\n}\n"


def load_graph(path: Path) -> CommGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def load_model(path: Path) -> NetworkModel:
    """Load a model file; a single-graph file is accepted as a one-graph model."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"Cannot read model file {path}: {e.strerror}") from e
    data = _load_json(text)
    if isinstance(data, dict) and "in" in data and "graphs" not in data:
        return NetworkModel((parse_graph(text),))
    return parse_model(text)


def serialize_pattern(graphs: list[CommGraph]) -> str:
    """Model-file layout with the graphs in round order, repeats kept."""
    if not graphs:
        raise ValidationError("Cannot serialize an empty pattern")
    lines = [f"    {json.dumps({'in': _in_mapping(g)})}" for g in graphs]
    return "{\n" f'  "n": {graphs[0].n},\n' '  "graphs": [\n' + ",\n".join(lines) + "\n  ]\n}\n"
