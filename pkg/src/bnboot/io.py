"""Readers and writers for the on-disk formats.

* network: JSON with ``variables``, ``edges`` ([parent, child] names) and
  ``cpts`` (per variable, one row per parent configuration). Probabilities
  are written with 17 significant digits so they read back bit-identically.
* dataset: CSV, header of variable names then one row of state labels per
  instance.
* report: CSV ``method,kind,x,y,confidence`` with 6 decimal places.
* constraints: JSON ``required_orders``, ``forbidden_parents``, ``dropped``.
"""
from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .bootstrap import ConfidenceReport, DerivedConstraints
from .core import BayesianNetwork, Dag, Dataset, Variable
from .errors import BNError, FormatError
from .features import Feature, FeatureKind, sort_features
from .pdag import Pdag
from .search import Constraints


def _fmt(p: float) -> str:
    text = format(float(p), ".17g")
    return text


def _dumps(obj: Any, indent: int = 0) -> str:
    """JSON emitter that writes floats with 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            return json.dumps(str(float(obj)))
        return _fmt(obj)
    return json.dumps(obj)


def _load_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", path) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None


def _parse_variables(doc, path) -> tuple[Variable, ...]:
    try:
        return tuple(Variable(v["name"], tuple(v["states"])) for v in doc["variables"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed variables list ({exc})", path) from None
    except BNError as exc:
        raise FormatError(str(exc), path) from None


def network_to_dict(bn: BayesianNetwork | Dag, metadata: dict | None = None) -> dict:
    dag = bn.structure if isinstance(bn, BayesianNetwork) else bn
    names = dag.names
    doc: dict[str, Any] = {
        "variables": [{"name": v.name, "states": list(v.states)} for v in dag.variables],
        "edges": [[names[p], names[c]] for c in range(dag.n) for p in dag.parents[c]],
    }
    if isinstance(bn, BayesianNetwork):
        doc["cpts"] = {names[i]: [[float(p) for p in row] for row in bn.cpts[i]] for i in range(dag.n)}
    if metadata:
        doc["metadata"] = metadata
    return doc


def dumps_network(bn: BayesianNetwork | Dag, metadata: dict | None = None) -> str:
    return _dumps(network_to_dict(bn, metadata)) + "\n"


def write_network(bn: BayesianNetwork | Dag, path, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_network(bn, metadata))


def network_from_dict(doc: dict, path=None) -> BayesianNetwork | Dag:
    """Parse a network document; returns a bare :class:`Dag` when ``cpts`` is absent."""
    variables = _parse_variables(doc, path)
    index = {v.name: i for i, v in enumerate(variables)}
    parents: list[list[int]] = [[] for _ in variables]
    try:
        for p, c in doc.get("edges", []):
            parents[index[c]].append(index[p])
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"malformed edge list ({exc})", path) from None
    try:
        dag = Dag(variables, parents)
        if "cpts" not in doc:
            return dag
        cpts = doc["cpts"]
        tables = [np.array(cpts[v.name], dtype=float) for v in variables]
        return BayesianNetwork(dag, tables)
    except KeyError as exc:
        raise FormatError(f"missing table for variable {exc}", path) from None
    except BNError as exc:
        raise FormatError(str(exc), path) from None


def read_network(path) -> BayesianNetwork | Dag:
    return network_from_dict(_load_json(path), path)


def read_metadata(path) -> dict:
    return _load_json(path).get("metadata", {})


def write_pdag(pdag: Pdag, path) -> None:
    names = [v.name for v in pdag.variables]
    doc = {
        "variables": [{"name": v.name, "states": list(v.states)} for v in pdag.variables],
        "edges": [[names[a], names[b]] for a, b in sorted(pdag.directed)],
        "undirected_edges": [[names[a], names[b]] for a, b in sorted(pdag.undirected)],
    }
    Path(path).write_text(_dumps(doc) + "\n")


def read_pdag(path) -> Pdag:
    doc = _load_json(path)
    variables = _parse_variables(doc, path)
    index = {v.name: i for i, v in enumerate(variables)}
    try:
        directed = frozenset((index[a], index[b]) for a, b in doc.get("edges", []))
        undirected = frozenset(
            (min(index[a], index[b]), max(index[a], index[b])) for a, b in doc.get("undirected_edges", [])
        )
        return Pdag(variables, directed, undirected)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"malformed PDAG ({exc})", path) from None


def _bundled(name: str) -> BayesianNetwork:
    ref = resources.files("bnboot") / "data" / name
    return network_from_dict(json.loads(ref.read_text()), name)


def load_alarm() -> BayesianNetwork:
    """The 37-variable ALARM monitoring network."""
    return _bundled("alarm.json")


def load_five_node() -> BayesianNetwork:
    """Binary model A -> C <- B, C -> D, C -> E with strong dependencies."""
    return _bundled("five_node.json")


# datasets

def dumps_dataset(dataset: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset.names)
    labels = [v.states for v in dataset.variables]
    for row in dataset.data:
        writer.writerow([labels[j][x] for j, x in enumerate(row)])
    return buf.getvalue()


def write_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(dataset))


def read_dataset(path, variables: Sequence[Variable] | None = None) -> Dataset:
    """Read a CSV dataset.

    Without a ``variables`` domain, each column's states are its distinct
    labels in sorted order; a column with a single label is then an error.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", path) from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file, expected a header line", path, 1) from None
    header = [h.strip() for h in header]
    raw = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
        raw.append((lineno, [x.strip() for x in row]))
    if variables is None:
        try:
            variables = tuple(
                Variable(name, tuple(sorted({r[j] for _, r in raw}))) for j, name in enumerate(header)
            )
        except BNError as exc:
            raise FormatError(f"{exc}; supply the variable domain explicitly", path) from None
    else:
        variables = tuple(variables)
        if [v.name for v in variables] != header:
            raise FormatError("header does not match the variable domain", path, 1)
    lookup = [{s: k for k, s in enumerate(v.states)} for v in variables]
    rows = np.zeros((len(raw), len(variables)), dtype=np.int64)
    for i, (lineno, r) in enumerate(raw):
        for j, label in enumerate(r):
            try:
                rows[i, j] = lookup[j][label]
            except KeyError:
                raise FormatError(
                    f"unknown state {label!r} for variable {variables[j].name!r}", path, lineno
                ) from None
    return Dataset(variables, rows)


# reports

REPORT_HEADER = ("method", "kind", "x", "y", "confidence")


def dumps_report(report: ConfidenceReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for f, c in report.items():
        writer.writerow([report.method, f.kind.value, report.names[f.x], report.names[f.y], f"{c:.6f}"])
    return buf.getvalue()


def write_report(report: ConfidenceReport, path) -> None:
    Path(path).write_text(dumps_report(report))


def read_report(path, names: Sequence[str] | None = None, m: int | None = None) -> ConfidenceReport:
    """Read a report CSV; ``names`` fixes the variable domain (else taken from the rows)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", path) from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != REPORT_HEADER:
        raise FormatError("expected header " + ",".join(REPORT_HEADER), path, 1)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(REPORT_HEADER):
            raise FormatError(f"expected {len(REPORT_HEADER)} fields, got {len(row)}", path, lineno)
        rows.append((lineno, row))
    if names is None:
        seen: dict[str, None] = {}
        for _, row in rows:
            seen.setdefault(row[2], None)
            seen.setdefault(row[3], None)
        names = tuple(seen)
    names = tuple(names)
    index = {name: i for i, name in enumerate(names)}
    methods = set()
    kinds = set()
    confidences: dict[Feature, float] = {}
    for lineno, (method, kind, x, y, conf) in rows:
        try:
            feature = Feature(FeatureKind.parse(kind), index[x], index[y])
            value = float(conf)
        except (KeyError, ValueError, BNError) as exc:
            raise FormatError(f"malformed report row ({exc})", path, lineno) from None
        if not 0.0 <= value <= 1.0:
            raise FormatError(f"confidence {value} outside [0, 1]", path, lineno)
        methods.add(method)
        kinds.add(feature.kind)
        confidences[feature] = value
    if len(methods) > 1:
        raise FormatError("report mixes several methods", path)
    method = methods.pop() if methods else "unknown"
    kinds = tuple(sorted(kinds, key=lambda k: k.rank))
    return ConfidenceReport(method, m, names, kinds, confidences)


# constraints

def constraints_to_dict(derived: DerivedConstraints | Constraints, names: Sequence[str]) -> dict:
    if isinstance(derived, Constraints):
        derived = DerivedConstraints(derived)
    c = derived.constraints
    return {
        "required_orders": [[names[x], names[y]] for x, y in sorted(c.required_orders)],
        "forbidden_parents": [[names[y], names[x]] for y, x in sorted(c.forbidden_parents)],
        "dropped": [[names[x], names[y], round(conf, 6)] for x, y, conf in derived.dropped],
    }


def write_constraints(derived: DerivedConstraints | Constraints, names: Sequence[str], path) -> None:
    Path(path).write_text(_dumps(constraints_to_dict(derived, names)) + "\n")


def read_constraints(path, names: Sequence[str]) -> DerivedConstraints:
    doc = _load_json(path)
    index = {name: i for i, name in enumerate(names)}
    try:
        orders = frozenset((index[x], index[y]) for x, y in doc.get("required_orders", []))
        forbidden = frozenset((index[y], index[x]) for y, x in doc.get("forbidden_parents", []))
        dropped = tuple((index[x], index[y], float(c)) for x, y, c in doc.get("dropped", []))
        return DerivedConstraints(Constraints(orders, forbidden), dropped)
    except KeyError as exc:
        raise FormatError(f"unknown variable {exc} in constraints", path) from None
    except (ValueError, TypeError) as exc:
        raise FormatError(f"malformed constraints ({exc})", path) from None


# manifests

def write_manifest(path, manifest: dict) -> Path:
    target = Path(str(path) + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return target
