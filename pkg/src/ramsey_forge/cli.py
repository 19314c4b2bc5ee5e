"""``ramsey-forge`` command line.

Exit status: 0 success, 1 usage or validation error, 2 nothing found,
3 budget exceeded or prefix too shallow.  Reports go to stdout as text, JSON
(``schema: 1``) or CSV.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import __version__
from .amalgamation import AmalgamationProblem, conclusion_violations, default_prescription, free_amalgamate, \
    format_prescription, parse_prescription, verify_opfap
from .cache import Cache, default_cache_dir
from .canonize import (
    EquivalenceRelationTable, block_canonize, er_canonize, er_domain, er_key, er_threshold,
    parse_approximation, parse_partition, product_canonize, product_domain, validate_front,
)
from .degrees import DegreeReport, PUBLISHED, degree_formula_J1, degree_formula_J2, degree_oracle, degree_formula, \
    rows_to_csv, space_label, test_conjecture
from .errors import DomainError, NotFoundError, ResolutionError, ResourceError
from .fraisse import FraisseClass, check_class_axioms, class_by_name, enumerate_members, iso_count, parse_class_spec
from .genseq import OMEGA, GeneratingSequence, approximation_to_json, check_axioms, check_sequence, count_AR_n, \
    enumerate_AR_n, manifest
from .ramsey import ArrowQuery, arrow_report, find_witness, pigeonhole_check
from .structures import Embedding, OrderedStructure, format_structure, parse_structure

LARGE_BUDGET = 2**30
SCHEMA = 1


@dataclass
class RunConfig:
    fmt: str = "text"
    budget: int | None = None
    cache_dir: Path = field(default_factory=default_cache_dir)
    use_cache: bool = True
    workers: int = 1
    depth_cap: int = 80

    def __post_init__(self):
        if self.budget is not None and self.budget <= 0:
            raise click.BadParameter("budget must be positive")
        if self.workers < 1:
            raise click.BadParameter("workers must be at least 1")

    def limit(self, default: int) -> int:
        return self.budget if self.budget is not None else default

    @property
    def cache(self) -> Cache | None:
        return Cache(self.cache_dir) if self.use_cache else None


# -- input helpers ------------------------------------------------------------

def resolve_class(spec: str) -> FraisseClass:
    path = Path(spec)
    if path.is_file():
        lines = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise DomainError(f"class file {spec} is empty")
        return parse_class_spec(lines[0], path.parent)
    return class_by_name(spec)


def resolve_structure(spec: str, cls: FraisseClass) -> OrderedStructure:
    """A structure file, ``N`` (N points, no tuples) or ``K:N`` (complete graph)."""
    if spec.isdigit():
        return OrderedStructure.build(cls.signature, int(spec), {})
    if spec.startswith("K:") and spec[2:].isdigit():
        n = int(spec[2:])
        return OrderedStructure.build(cls.signature, n, {"E": [(a, b) for a in range(n) for b in range(n) if a != b]})
    return parse_structure(Path(spec).read_text())


def parse_index_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "-"):
        return ()
    return tuple(int(t) for t in text.split(","))


def broadcast(items, n, what):
    items = list(items)
    if len(items) == 1:
        return items * n
    if len(items) != n:
        raise click.BadParameter(f"give one {what} or one per coordinate ({n})")
    return items


def build_seq(classes: tuple[str, ...], J: str | None) -> GeneratingSequence:
    cls = [resolve_class(c) for c in classes]
    if J is None:
        width = len(cls)
    elif J.lower() == OMEGA:
        width = OMEGA
    else:
        width = int(J)
    return GeneratingSequence(cls, width)


# -- output -------------------------------------------------------------------

def _text(report: dict) -> str:
    if "text" in report:
        return str(report["text"]) + "\n"
    out = []
    for k, v in report.items():
        if k == "rows":
            for r in v:
                out.append("  ".join(f"{a}={'' if b is None else b}" for a, b in r.items()))
        elif isinstance(v, str) and "\n" in v:
            out.append(f"{k}:")
            out.extend("  " + ln for ln in v.rstrip("\n").splitlines())
        elif isinstance(v, (dict, list)):
            out.append(f"{k}: {json.dumps(v, sort_keys=True)}")
        else:
            out.append(f"{k}: {v}")
    return "\n".join(out) + "\n"


def _csv(report: dict) -> str:
    if "rows" in report:
        return rows_to_csv(report["rows"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in report.items():
        if k == "text":
            continue
        w.writerow([k, json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v])
    return buf.getvalue()


def emit(cfg: RunConfig, command: str, report: dict) -> None:
    body = {"schema": SCHEMA, "command": command, **report}
    if cfg.fmt == "json":
        body.pop("text", None)
        click.echo(json.dumps(body, sort_keys=True, indent=2))
    elif cfg.fmt == "csv":
        click.echo(_csv(report), nl=False)
    else:
        click.echo(_text(report), nl=False)


def guarded(command: str):
    """Run a command body, mapping library errors to exit codes and reports."""

    def deco(fn):
        def wrapper(*args, **kwargs):
            cfg: RunConfig = click.get_current_context().find_object(RunConfig)
            try:
                report, status = fn(cfg, *args, **kwargs)
            except ResourceError as exc:
                emit(cfg, command, {"status": "budget-exceeded", **exc.to_dict()})
                return 3
            except ResolutionError as exc:
                emit(cfg, command, {"status": "unresolved", "message": str(exc)})
                return 3
            except NotFoundError as exc:
                emit(cfg, command, {"status": "not-found", "message": str(exc)})
                return 2
            except (DomainError, OSError) as exc:
                click.echo(f"error: {exc}", err=True)
                return 1
            emit(cfg, command, report)
            return status

        wrapper.__name__ = fn.__name__
        wrapper.__doc__ = fn.__doc__
        return wrapper

    return deco


# -- root ---------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="ramsey-forge")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]), default="text", show_default=True)
@click.option("--budget", type=int, default=None, help="Override the operation's work budget.")
@click.option("--allow-large-budget", is_flag=True, help=f"Acknowledge a budget above 2^30 ({LARGE_BUDGET}).")
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
              help="Cache directory (default: $RAMSEY_FORGE_CACHE or ~/.cache/ramsey_forge).")
@click.option("--no-cache", is_flag=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--depth-cap", type=int, default=80, show_default=True)
@click.pass_context
def cli(ctx, fmt, budget, allow_large_budget, cache_dir, no_cache, workers, depth_cap):
    """Exhaustive finite checks for structural Ramsey theory."""
    if budget is not None and budget > LARGE_BUDGET and not allow_large_budget:
        raise click.UsageError(f"--budget above {LARGE_BUDGET} needs --allow-large-budget")
    ctx.obj = RunConfig(fmt, budget, cache_dir or default_cache_dir(), not no_cache, workers, depth_cap)


CLASS = click.option("--class", "classes", multiple=True, required=True,
                     help="Built-in class name or class spec file; repeat per coordinate.")


# -- classes ------------------------------------------------------------------

@cli.group()
def classes():
    """Enumerate members of a class, count them, check its axioms."""


def _members_cached(cfg: RunConfig, cls: FraisseClass, size: int, budget: int) -> list[str]:
    compute = lambda: [format_structure(m) for m in enumerate_members(cls, size, budget)]  # noqa: E731
    cache = cfg.cache
    if cache is None:
        return compute()
    return cache.cached("enumerate", {"class": cls.describe(), "size": size}, compute)


@classes.command("enumerate")
@CLASS
@click.option("--size", type=int, required=True)
@guarded("classes enumerate")
def classes_enumerate(cfg, classes, size):
    cls = resolve_class(classes[0])
    members = _members_cached(cfg, cls, size, cfg.limit(2**24))
    text = "\n".join(members)
    return {"class": cls.name, "size": size, "count": len(members), "members": members, "text": text.rstrip("\n")}, 0


@classes.command("iso-count")
@CLASS
@click.option("--max-size", type=int, default=5, show_default=True)
@guarded("classes iso-count")
def classes_iso_count(cfg, classes, max_size):
    cls = resolve_class(classes[0])
    rows = []
    for s in range(max_size + 1):
        def compute(s=s):
            rec = iso_count(cls, s, cfg.limit(2**24))
            return [rec.count, rec.method]

        cache = cfg.cache
        count, method = cache.cached("iso-count", {"class": cls.describe(), "size": s}, compute) if cache else compute()
        rows.append({"class": cls.name, "size": s, "count": count, "method": method})
    return {"rows": rows}, 0


@classes.command("check")
@CLASS
@click.option("--size-cap", type=int, default=4, show_default=True)
@guarded("classes check")
def classes_check(cfg, classes, size_cap):
    rep = check_class_axioms(resolve_class(classes[0]), size_cap, cfg.limit(2**24))
    return rep.to_dict(), 0


# -- amalgamate ---------------------------------------------------------------

@cli.group()
def amalgamate():
    """Free amalgamation under an order prescription."""


@amalgamate.command("free")
@click.option("--class", "cls_name", default="ordered-graphs", show_default=True)
@click.option("--z", "z", required=True, help="Structure: file, N, or K:N.")
@click.option("--x", "x", required=True)
@click.option("--y", "y", required=True)
@click.option("--e", "e", default="", help="Embedding of Z into X, e.g. 0,2.")
@click.option("--f", "f", default="", help="Embedding of Z into Y.")
@click.option("--rho", type=click.Path(exists=True, path_type=Path), default=None,
              help="Prescription grid file; default keeps X-points first.")
@guarded("amalgamate free")
def amalgamate_free(cfg, cls_name, z, x, y, e, f, rho):
    cls = resolve_class(cls_name)
    p = AmalgamationProblem(resolve_structure(z, cls), resolve_structure(x, cls), resolve_structure(y, cls),
                            Embedding(parse_index_list(e)), Embedding(parse_index_list(f)))
    grid = parse_prescription(rho.read_text()) if rho else default_prescription(p)
    res = free_amalgamate(p, grid)
    return {
        "rho": format_prescription(grid),
        "w": format_structure(res.w),
        "g": list(res.g.map),
        "h": list(res.h.map),
        "sigma": list(res.sigma),
        "conclusion_failures": conclusion_violations(p, grid, res),
    }, 0


@amalgamate.command("verify-opfap")
@CLASS
@click.option("--size-cap", type=int, default=3, show_default=True)
@guarded("amalgamate verify-opfap")
def amalgamate_verify(cfg, classes, size_cap):
    return verify_opfap(resolve_class(classes[0]), size_cap, cfg.limit(2**24)).to_dict(), 0


# -- ramsey -------------------------------------------------------------------

@cli.group()
def ramsey():
    """Partition arrows by exhaustive colouring."""


def _coords(classes, specs_a, specs_b, specs_c=None):
    n = max(len(classes), len(specs_a), len(specs_b), len(specs_c or ()))
    cls = [resolve_class(c) for c in broadcast(classes, n, "class")]
    a = [resolve_structure(s, c) for s, c in zip(broadcast(specs_a, n, "--a"), cls)]
    b = [resolve_structure(s, c) for s, c in zip(broadcast(specs_b, n, "--b"), cls)]
    c_ = [resolve_structure(s, c) for s, c in zip(broadcast(specs_c, n, "--c"), cls)] if specs_c else None
    return cls, a, b, c_


@ramsey.command("check")
@CLASS
@click.option("--a", "a", multiple=True, required=True)
@click.option("--b", "b", multiple=True, required=True)
@click.option("--c", "c", multiple=True, required=True)
@click.option("--k", type=int, default=2, show_default=True)
@guarded("ramsey check")
def ramsey_check(cfg, classes, a, b, c, k):
    _, aa, bb, cc = _coords(classes, a, b, c)
    rep = arrow_report(ArrowQuery(tuple(zip(aa, bb, cc)), k), cfg.limit(2**26))
    rep.pop("elapsed")
    return {"arrow": rep["result"], **rep}, 0


@ramsey.command("witness")
@CLASS
@click.option("--a", "a", multiple=True, required=True)
@click.option("--b", "b", multiple=True, required=True)
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--size-cap", type=int, default=8, show_default=True)
@guarded("ramsey witness")
def ramsey_witness(cfg, classes, a, b, k, size_cap):
    cls, aa, bb, _ = _coords(classes, a, b)
    w = find_witness(cls, aa, bb, k, size_cap, cfg.limit(2**26))
    if w is None:
        return {"status": "not-found", "size_cap": size_cap}, 2
    return {"status": "found", **w.to_dict()}, 0


@ramsey.command("pigeonhole")
@CLASS
@click.option("--J", "J", default=None, help="Number of coordinates or 'omega'.")
@click.option("--k", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--n", type=int, required=True)
@guarded("ramsey pigeonhole")
def ramsey_pigeonhole(cfg, classes, J, k, m, n):
    seq = build_seq(classes, J)
    return {"k": k, "m": m, "n": n, "holds": pigeonhole_check(seq, k, m, n, cfg.limit(2**26))}, 0


# -- genseq -------------------------------------------------------------------

@cli.group()
def genseq():
    """Generating sequences and their finite approximations."""


J_OPT = click.option("--J", "J", default=None, help="Number of coordinates or 'omega' (default: one per --class).")


@genseq.command("build")
@CLASS
@J_OPT
@click.option("--levels", type=int, default=4, show_default=True)
@click.option("--check-size-cap", type=int, default=None, help="Also report cofinality up to this member size.")
@guarded("genseq build")
def genseq_build(cfg, classes, J, levels, check_size_cap):
    seq = build_seq(classes, J)
    rep = manifest(seq, levels)
    if check_size_cap is not None:
        rep["check"] = check_sequence(seq, levels, check_size_cap)
    rep.pop("schema")
    return rep, 0


@genseq.command("ar-enum")
@CLASS
@J_OPT
@click.option("--depth", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--count-only", is_flag=True)
@guarded("genseq ar-enum")
def genseq_ar_enum(cfg, classes, J, depth, n, count_only):
    seq = build_seq(classes, J)
    if count_only:
        return {"depth": depth, "n": n, "count": count_AR_n(seq, depth, n)}, 0
    items = enumerate_AR_n(seq, depth, n, cfg.limit(2**20))
    return {"depth": depth, "n": n, "count": len(items), "approximations": [approximation_to_json(a) for a in items]}, 0


@genseq.command("check-axioms")
@CLASS
@J_OPT
@click.option("--depth", type=int, required=True)
@click.option("--max-len", type=int, default=2, show_default=True)
@click.option("--a4-len", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@guarded("genseq check-axioms")
def genseq_check_axioms(cfg, classes, J, depth, max_len, a4_len, samples, seed):
    seq = build_seq(classes, J)
    checks = check_axioms(seq, depth, max_len, a4_len, samples, seed, cfg.limit(2**20))
    rows = [{"clause": c.clause, "status": c.status,
             "detail": json.dumps({k: v for k, v in c.detail.items()}, sort_keys=True)} for c in checks]
    return {"depth": depth, "pass": all(c.status != "fail" for c in checks), "rows": rows}, 0


# -- canonize -----------------------------------------------------------------

@cli.group()
def canonize():
    """Canonical equivalence relations."""


def _relation(domain, partition: Path | None, key):
    if partition is not None:
        return parse_partition(partition.read_text(), domain)
    if key is None:
        raise click.UsageError("give --partition or --plant")
    return EquivalenceRelationTable.from_key(domain, key)


PARTITION = click.option("--partition", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
                         help="One class per line, elements in canonical text form.")


@canonize.command("er")
@click.option("--m", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--l", "l", type=int, required=True)
@PARTITION
@click.option("--plant", default=None, help="Plant E_I for the index set I, e.g. 0,1 or - for the empty set.")
@guarded("canonize er")
def canonize_er(cfg, m, n, l, partition, plant):
    I = parse_index_list(plant) if plant is not None else None
    E = _relation(er_domain(m, n), partition, None if I is None else (lambda b: er_key(b, I)))
    res = er_canonize(E, m, n, l)
    if res is None:
        return {"witness": None, "index_sets": None, "verified": False}, 2
    out = res.to_dict()
    out.pop("schema")
    return out, 0


@canonize.command("er-threshold")
@click.option("--n", type=int, required=True)
@click.option("--l", "l", type=int, required=True)
@click.option("--m-cap", type=int, required=True)
@guarded("canonize er-threshold")
def canonize_er_threshold(cfg, n, l, m_cap):
    res = er_threshold(n, l, m_cap, cfg.limit(2**22))
    out = res.to_dict()
    out.pop("schema")
    out["partitions_scanned"] = {str(k): v for k, v in out["partitions_scanned"].items()}
    return out, 0 if res.m is not None else 2


@canonize.command("product")
@CLASS
@click.option("--a", "a", multiple=True, required=True)
@click.option("--b", "b", multiple=True, required=True)
@click.option("--c", "c", multiple=True, required=True)
@PARTITION
@click.option("--plant", default=None, help="Index sets per coordinate separated by ';', e.g. '0;-'.")
@guarded("canonize product")
def canonize_product(cfg, classes, a, b, c, partition, plant):
    _, aa, bb, cc = _coords(classes, a, b, c)
    coords = list(zip(aa, bb, cc))
    key = None
    if plant is not None:
        sets = [parse_index_list(t) for t in plant.split(";")]
        key = lambda x: tuple(tuple(cp[i] for i in I) for cp, I in zip(x, sets))  # noqa: E731
    E = _relation(product_domain([(x, z) for x, _, z in coords]), partition, key)
    res = product_canonize(E, coords, cfg.limit(2**22))
    if res is None:
        return {"witness": None, "index_sets": None, "verified": False}, 2
    out = res.to_dict()
    out.pop("schema")
    return out, 0


PLANT_KINDS = {
    "equality": lambda a: a,
    "depth": lambda a: tuple(b.depth for b in a),
    "single": lambda a: 0,
}


@canonize.command("block")
@CLASS
@J_OPT
@click.option("--depth", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--q", type=int, default=None, help="Length of the sub-prefix searched for (default n+1).")
@PARTITION
@click.option("--plant", type=click.Choice(sorted(PLANT_KINDS)), default=None)
@guarded("canonize block")
def canonize_block(cfg, classes, J, depth, n, q, partition, plant):
    seq = build_seq(classes, J)
    dom = enumerate_AR_n(seq, depth, n, cfg.limit(2**22))
    E = _relation(dom, partition, PLANT_KINDS.get(plant))
    res = block_canonize(seq, E, n, depth, q, cfg.limit(2**22))
    out = res.to_dict()
    out.pop("schema")
    return out, 0 if res.c is not None else 2


@canonize.command("front")
@CLASS
@J_OPT
@click.option("--depth", type=int, required=True)
@click.option("--front", "front", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help="One approximation per line, e.g. 0@0;1@0,1")
@click.option("--mode", type=click.Choice(["nash-williams", "sperner"]), default="nash-williams", show_default=True)
@guarded("canonize front")
def canonize_front(cfg, classes, J, depth, front, mode):
    seq = build_seq(classes, J)
    F = [parse_approximation(ln) for ln in front.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    rep = validate_front(F, seq, depth, mode, cfg.limit(2**22))
    out = rep.to_dict()
    out.pop("schema")
    return out, 0


# -- degrees ------------------------------------------------------------------

@cli.group()
def degrees():
    """Ramsey degrees for m-subsets."""


@degrees.command("formula")
@CLASS
@click.option("--m", type=int, required=True)
@guarded("degrees formula")
def degrees_formula(cfg, classes, m):
    cls = [resolve_class(c) for c in classes]
    if len(cls) == 1:
        value = degree_formula_J1(cls[0], m)
    elif len(cls) == 2 and m == 2:
        value = degree_formula_J2(cls[0], cls[1])
    else:
        raise DomainError("closed forms exist for one class, or two classes with m = 2")
    return {"classes": [c.name for c in cls], "m": m, "value": value, "text": value}, 0


@degrees.command("oracle")
@CLASS
@click.option("--m", type=int, required=True)
@click.option("--depth", type=int, default=None, help="First prefix depth (default: chosen automatically).")
@click.option("--method", type=click.Choice(["block", "naive"]), default="block", show_default=True)
@guarded("degrees oracle")
def degrees_oracle(cfg, classes, m, depth, method):
    seq = build_seq(classes, None)
    res = degree_oracle(seq, m, depth, method, cfg.depth_cap, cfg.limit(2_000_000))
    label = space_label(seq)
    rep = DegreeReport(label, m, degree_formula(seq, m), res.value, PUBLISHED.get((label, m)), res.depths)
    return {"rows": [rep.row()], "depths": list(res.depths)}, 0


@degrees.command("conjecture")
@click.option("--n-max", type=int, default=3, show_default=True)
@click.option("--method", type=click.Choice(["block", "naive"]), default="block", show_default=True)
@guarded("degrees conjecture")
def degrees_conjecture(cfg, n_max, method):
    return {"rows": test_conjecture(n_max, method)}, 0


# -- entry points -------------------------------------------------------------

def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="ramsey-forge", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    return rv if isinstance(rv, int) else 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
