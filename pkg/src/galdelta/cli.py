"""Command-line front end.

    galdelta build-bar --group z2 --xset pt --trunc 3
    galdelta verify-exodromy --group s3 --xset defining --fiber-bound 3 --trunc 3
    galdelta shape-report --group z3 --xset pt --trunc 3 --format text

Bar data come from ``--group``/``--xset``; any command that works on a
datum or category also accepts a document path as its positional input.
Errors are written as a JSON error document and the exit status is 1.
"""
from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import GaldeltaError, ParseError
from .exodromy import ComparisonReport, verify_exodromy
from .fincat import FiniteCategory, is_layered
from .finset import DEFAULT_NODE_BUDGET
from .homology import DEFAULT_MATRIX_BUDGET
from .io import dumps, load_document, to_document
from .shape import ShapeReport, homology, shape_report
from .simplex import (
    FiniteGroup,
    GSet,
    SimplicialGaloisDatum,
    bar_datum,
    cyclic_group,
    defining_gset,
    free_gset,
    point_gset,
    symmetric_group,
    trivial_gset,
)
from .total import build_total, to_dot

COMMANDS = ("build-bar", "build-total", "validate", "verify-exodromy", "homology", "shape-report", "export-dot")
WORKERS_ENV = "GALDELTA_WORKERS"


@dataclass(frozen=True)
class JobConfig:
    command: str
    inputs: tuple = ()
    group: str = "z2"
    xset: str = "pt"
    truncation: int = 2
    fiber_bound: int = 2
    max_degree: int = 2
    budget_nodes: int = DEFAULT_NODE_BUDGET
    budget_matrix: int = DEFAULT_MATRIX_BUDGET
    out: str | None = None
    format: str = "json"
    workers: int = 1

    def check(self) -> "JobConfig":
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}", field="command")
        for name in ("budget_nodes", "budget_matrix", "workers"):
            if getattr(self, name) <= 0:
                raise ParseError(f"{name} must be positive", field=name)
        if self.truncation < 1:
            raise ParseError("truncation must be at least 1", field="truncation")
        if self.fiber_bound < 0:
            raise ParseError("fiber bound must be nonnegative", field="fiber_bound")
        if self.max_degree < 0:
            raise ParseError("degree cap must be nonnegative", field="max_degree")
        return self


# -----------------------------------------------------------------------------
# built-in groups and G-sets
# -----------------------------------------------------------------------------

def parse_group(name: str) -> FiniteGroup:
    m = re.fullmatch(r"z(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return cyclic_group(int(m.group(1)))
    m = re.fullmatch(r"s([1-4])", name)
    if m:
        return symmetric_group(int(m.group(1)))
    if Path(name).is_file():
        value = load_document(name)
        if isinstance(value, FiniteGroup):
            return value
        raise ParseError(f"{name} is not a group document", field="group")
    raise ParseError(f"unknown group {name!r}; expected z<n>, s3 or a group document", field="group")


def parse_xset(name: str, G: FiniteGroup) -> GSet:
    if name == "pt":
        return point_gset(G)
    if name == "free":
        return free_gset(G)
    if name == "defining" and G.name.startswith("s"):
        return defining_gset(G, int(G.name[1:]))
    m = re.fullmatch(r"trivial(\d+)", name)
    if m:
        return trivial_gset(G, int(m.group(1)))
    if Path(name).is_file():
        value = load_document(name)
        if isinstance(value, GSet):
            if value.group.table != G.table:
                raise ParseError(f"{name} is a G-set for a different group", field="xset")
            return value
        raise ParseError(f"{name} is not a G-set document", field="xset")
    raise ParseError(f"unknown G-set {name!r}; expected pt, free, trivial<k>, defining or a G-set document",
                     field="xset")


# -----------------------------------------------------------------------------
# commands
# -----------------------------------------------------------------------------

def _datum(cfg: JobConfig) -> SimplicialGaloisDatum:
    if cfg.inputs:
        value = load_document(cfg.inputs[0])
        if not isinstance(value, SimplicialGaloisDatum):
            raise ParseError(f"{cfg.inputs[0]} is not a simplicial datum document", field="input")
        return value
    G = parse_group(cfg.group)
    return bar_datum(G, parse_xset(cfg.xset, G), cfg.truncation)


def _category_input(cfg: JobConfig) -> FiniteCategory:
    if cfg.inputs:
        value = load_document(cfg.inputs[0])
        if isinstance(value, FiniteCategory):
            return value
        if isinstance(value, SimplicialGaloisDatum):
            return build_total(value).underlying
        raise ParseError(f"{cfg.inputs[0]} is neither a category nor a datum document", field="input")
    return build_total(_datum(cfg)).underlying


def _summary_text(doc: dict) -> str:
    return "".join(f"{k}: {doc[k]}\n" for k in sorted(doc) if not isinstance(doc[k], (list, dict)))


def _validate(cfg: JobConfig) -> dict:
    if not cfg.inputs:
        raise ParseError("validate needs an input document", field="input")
    out = []
    for path in cfg.inputs:
        value = load_document(path)
        entry = {"path": str(path), "kind": to_document(value)["kind"], "valid": True}
        if isinstance(value, FiniteCategory):
            entry.update(objects=value.n_objects, morphisms=value.n_morphisms, layered=bool(is_layered(value)))
        elif isinstance(value, SimplicialGaloisDatum):
            entry.update(truncation=value.truncation, fiber_sizes=[C.n_objects for C in value.fibers])
        out.append(entry)
    return {"kind": "validation", "documents": out}


def _comparison_text(r: ComparisonReport) -> str:
    lines = [f"group {r.group}, G-set {r.xset}, fiber bound {r.fiber_bound}, truncation {r.truncation}",
             f"route: {r.route}",
             f"classes: {r.iso_classes_sheaf_side} sheaves, {r.iso_classes_descent_side} equivariant sheaves",
             f"bijection: {'yes' if r.is_bijection else 'no'}"]
    for i, j in enumerate(r.matched):
        S = r.descent_classes[j]
        lines.append(f"  sheaf {i} <-> equivariant {j}: sizes {list(S.sizes)}")
    return "\n".join(lines) + "\n"


def _shape_text(r: ShapeReport) -> str:
    lines = [f"components: {r.components}"]
    for g in r.groups:
        ab = g["abelianization"]
        lines.append(f"  pi1 at {g['representative']}: order {g['order']}, abelianization "
                     f"rank {ab['rank']} torsion {ab['torsion']}")
    for d, (a, b) in enumerate(zip(r.nerve_homology.groups, r.hocolim_homology.groups)):
        lines.append(f"H{d}: nerve {a}, hocolim {b}")
    lines.append(f"verdict: {r.verdict}")
    return "\n".join(lines) + "\n"


def execute(cfg: JobConfig) -> str:
    """Run a job and return the text to be written."""
    cfg.check()
    fmt, cmd = cfg.format, cfg.command
    if fmt == "dot" and cmd not in ("export-dot", "build-total"):
        raise ParseError(f"format dot is not available for {cmd}", field="format")
    if cmd == "build-bar":
        doc = to_document(_datum(cfg))
        if fmt == "text":
            return _summary_text({"truncation": doc["truncation"],
                                  "fiber_sizes": " ".join(str(f["objects"]) for f in doc["fibers"])})
        return dumps(doc)
    if cmd in ("build-total", "export-dot"):
        T = build_total(_datum(cfg))
        if cmd == "export-dot" or fmt == "dot":
            return to_dot(T)
        if fmt == "text":
            C = T.underlying
            return _summary_text({"objects": C.n_objects, "morphisms": C.n_morphisms,
                                  "cartesian": int(T.cartesian_flags.sum())})
        return dumps(to_document(T.underlying))
    if cmd == "validate":
        doc = _validate(cfg)
        if fmt == "text":
            return "".join(f"{d['path']}: valid {d['kind']}\n" for d in doc["documents"])
        return dumps({"schema": "galdelta/1", **doc})
    if cmd == "verify-exodromy":
        G = parse_group(cfg.group)
        r = verify_exodromy(G, parse_xset(cfg.xset, G), cfg.fiber_bound, cfg.truncation, budget=cfg.budget_nodes)
        return _comparison_text(r) if fmt == "text" else dumps(to_document(r))
    if cmd == "homology":
        H = homology(_category_input(cfg), cfg.max_degree, cfg.budget_matrix)
        if fmt == "text":
            return "".join(f"H{d} = {g}\n" for d, g in enumerate(H.groups))
        return dumps({"schema": "galdelta/1", "kind": "homology", "max_degree": cfg.max_degree,
                      "groups": H.to_document()})
    r = shape_report(_datum(cfg), cfg.max_degree, cfg.budget_matrix)
    return _shape_text(r) if fmt == "text" else dumps(to_document(r))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="galdelta", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("inputs", nargs="*", help="input documents (datum or category)")
    p.add_argument("--group", default="z2", help="z<n>, s3 or a group document")
    p.add_argument("--xset", default="pt", help="pt, free, trivial<k>, defining or a G-set document")
    p.add_argument("--trunc", type=int, default=2, help="simplicial truncation n")
    p.add_argument("--fiber-bound", type=int, default=2, help="largest value set size k")
    p.add_argument("--max-degree", type=int, default=2)
    p.add_argument("--budget-nodes", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--budget-matrix", type=int, default=DEFAULT_MATRIX_BUDGET)
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=("json", "dot", "text"), default="json")
    return p


def config_from_args(argv=None) -> JobConfig:
    a = build_parser().parse_args(argv)
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ParseError(f"{WORKERS_ENV} must be an integer", field=WORKERS_ENV) from None
    return JobConfig(a.command, tuple(a.inputs), a.group, a.xset, a.trunc, a.fiber_bound, a.max_degree,
                     a.budget_nodes, a.budget_matrix, a.out, a.format, workers)


def run(cfg: JobConfig) -> int:
    try:
        text = execute(cfg)
        status = 0
    except GaldeltaError as exc:
        text = dumps(exc.to_document())
        status = 1
    if cfg.out and status == 0:
        Path(cfg.out).write_text(text)
    else:
        (sys.stdout if status == 0 else sys.stderr).write(text)
    return status


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except GaldeltaError as exc:
        sys.stderr.write(dumps(exc.to_document()))
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
