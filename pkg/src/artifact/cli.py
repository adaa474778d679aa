"""Command-line front end.

Every command prints a report, JSON by default or a text table with
`--format text`.  Reports carry a versioned `schema` field and contain no
timings unless `--timings` is given, so reruns are byte-identical.  Every
flag can also be set through an environment variable named after it
(ARTIFACT_CUTOFF, ARTIFACT_BUDGET, ARTIFACT_SEED, ARTIFACT_OUT,
ARTIFACT_FORMAT, ARTIFACT_TIMINGS).

Exit codes: 0 success, 1 a check or expectation failed, 2 parse or input
error, 3 budget exceeded.
"""
import json
import sys
import time

import click
import numpy as np

from . import acceptance
from .acceptance import _plain
from .collapse import DEFAULT_BUDGET
from .errors import ArtifactError, BudgetExceeded, ParseError

REPORT_SCHEMA = "artifact.report/1"
SCENARIO_SCHEMA = "artifact.scenario/1"

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class ScenarioError(ArtifactError):
    pass


# ------------------------------------------------------------------ tasks

def _group(text):
    from .dsl import parse_group
    return parse_group(text)


def task_cohomology(spec):
    from .collapse import MorseReduction, BarScheme
    G = _group(spec["group"])
    N = spec["cutoff"]
    budget = spec["budget"]
    if spec.get("method", "reduced") == "explicit":
        from .homalg import BarCochains
        dims = BarCochains(G, N, budget=budget).cohomology_dims(N, method="explicit")
        return {"group": spec["group"], "order": G.order, "dims": dims}
    R = MorseReduction(BarScheme(G), budget)
    dims = R.dims(N)
    return {"group": spec["group"], "order": G.order, "dims": dims, "budget_used": R.cells_visited}


def task_ring(spec):
    from .rings import graded_iso_search, ring_truncation
    N = spec["cutoff"]
    G = _group(spec["group"])
    R = ring_truncation(G, N, spec["budget"])
    out = {"group": spec["group"], "invariants": R.invariants(), "presentation": R.presentation()}
    if spec.get("table"):
        out["table"] = R.to_json()
    if spec.get("compare"):
        R2 = ring_truncation(_group(spec["compare"]), N, spec["budget"])
        v = graded_iso_search(R, R2, N)
        out["compare"] = spec["compare"]
        out["verdict"] = v.to_json()
    return out


def task_ss(spec):
    from .homalg import semidirect_reduction
    from .spectra import filtered_from_reduction, spectral_sequence
    G = _group(spec["group"])
    if G.kind != "semidirect":
        raise ScenarioError("ss needs a semidirect product sd(K, P, [..])")
    N = spec["cutoff"]
    R = semidirect_reduction(G.info["K"], G.info["P"], G.info["act"], spec["budget"])
    F = filtered_from_reduction(R, N)
    pages = spectral_sequence(F, Ntot=N)
    rows = []
    for pg in pages:
        dims = {"%d,%d" % k: v for k, v in sorted(pg.dims.items()) if v}
        rows.append({"page": "infinity" if pg.r is None else pg.r, "dims": dims})
    return {"group": spec["group"], "cutoff": N, "total_dims": R.dims(N), "pages": rows}


def task_zigzag(spec):
    budget = spec["budget"]
    if "witness" in spec:
        from .witness import ConjectureWitness, verify_conjecture_witness
        data = spec["witness"]
        w = ConjectureWitness.from_json(data)
        return verify_conjecture_witness(w, spec["cutoff"], budget)
    from .zigzag import zigzag_report
    N1 = spec["cutoff"]
    N2 = spec.get("right_cutoff", N1)
    return zigzag_report(_group(spec["left"]), _group(spec["right"]), N1, N2, budget)


def task_constructible(spec):
    from .constructible import ConstructibleDatum, build_constructible
    from .lattices import LatticeQuotient
    p, a = spec["p"], spec["precision"]
    mats = [np.array(m, dtype=np.int64) for m in spec["matrices"]]
    d = mats[0].shape[0]
    V = LatticeQuotient.scaled(p, d, a, spec["V"])
    U = LatticeQuotient.scaled(p, d, a, spec["U"])
    gamma = {tuple(int(x) - 1 for x in k.split(",")): v for k, v in spec["gamma"].items()}
    limit = p ** (d * spec["U"]) * 81
    if limit > spec["budget"]:
        raise BudgetExceeded("group elements", limit, spec["budget"])
    pair = build_constructible(ConstructibleDatum(p, mats, V, U, gamma))
    return {"order": pair.via_baer.order, "bijection_is_isomorphism": pair.verify_bijection()}


def task_suite(spec):
    name = spec.get("suite", "acceptance")
    res = []
    if name in ("acceptance", "all"):
        res += acceptance.run_acceptance(spec.get("ids"), stretch=spec.get("stretch", False))
    if name in ("properties", "all"):
        res += acceptance.run_properties(spec.get("seed", 0))
    return {"passed": sum(r.passed for r in res), "total": len(res),
            "results": [r.to_json() for r in res], "_results": res}


TASKS = {"cohomology": task_cohomology, "ring": task_ring, "ss": task_ss, "zigzag": task_zigzag,
         "constructible": task_constructible, "suite": task_suite}
NEEDS = {"cohomology": ("group", "cutoff", "budget"), "ring": ("group", "cutoff", "budget"),
         "ss": ("group", "cutoff", "budget"), "zigzag": ("cutoff", "budget"),
         "constructible": ("p", "precision", "matrices", "V", "U", "gamma", "budget"),
         "suite": ("suite",)}


def _expectations(expect, result):
    """Every expected key must equal the result's value; dotted keys descend."""
    failed = []
    for key, want in expect.items():
        cur = result
        for part in key.split("."):
            cur = cur.get(part) if isinstance(cur, dict) else None
        if _plain(cur) != want:
            failed.append({"key": key, "expected": want, "found": _plain(cur)})
    return failed


def run_task(spec, timings=False):
    kind = spec.get("kind")
    if kind not in TASKS:
        raise ScenarioError("unknown task kind %r" % (kind,))
    missing = [k for k in NEEDS[kind] if k not in spec]
    if missing:
        raise ScenarioError("task %r does not name %s" % (spec.get("name", kind), ", ".join(missing)))
    row = {"name": spec.get("name", kind), "kind": kind}
    t = time.perf_counter()
    try:
        result = TASKS[kind](spec)
        if kind == "suite":
            result.pop("_results")
            ok = result["passed"] == result["total"]
        else:
            ok = result.get("ok", True) if isinstance(result, dict) else True
        row["status"] = "ok" if ok else "failed"
        row["result"] = _plain(result)
    except BudgetExceeded as exc:
        row["status"] = "budget_exceeded"
        row["error"] = {"what": exc.what, "required": int(exc.required), "budget": int(exc.budget)}
    except ParseError as exc:
        row["status"] = "parse_error"
        row["error"] = {"message": str(exc), "line": exc.line, "column": exc.column}
    except ArtifactError as exc:
        row["status"] = "error"
        row["error"] = {"type": type(exc).__name__, "message": str(exc)}
    if "expect" in spec and row["status"] == "ok":
        failed = _expectations(spec["expect"], row["result"])
        row["expectations_met"] = not failed
        if failed:
            row["status"] = "unexpected"
            row["mismatches"] = failed
    if timings:
        row["seconds"] = round(time.perf_counter() - t, 3)
    return row


def bundled_scenarios():
    from importlib import resources
    return sorted(f.name[:-5] for f in resources.files("artifact").joinpath("scenarios").iterdir()
                  if f.name.endswith(".json"))


def scenario_text(name):
    """Contents of a scenario path, or of a bundled scenario given by name."""
    import os
    from importlib import resources
    if not os.path.exists(name) and name in bundled_scenarios():
        return resources.files("artifact").joinpath("scenarios", name + ".json").read_text()
    with open(name) as fh:
        return fh.read()


def load_scenario(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("invalid JSON: %s" % exc.msg, exc.lineno, exc.colno)
    if not isinstance(data, dict) or data.get("schema") != SCENARIO_SCHEMA:
        raise ParseError("scenario must be an object with schema %r" % SCENARIO_SCHEMA)
    if not isinstance(data.get("tasks"), list):
        raise ParseError("scenario needs a list of tasks")
    return data


def run_scenario(data, timings=False):
    rows = [run_task(t, timings) for t in data["tasks"]]
    status = [r["status"] for r in rows]
    report = {"schema": REPORT_SCHEMA, "scenario": data.get("name", ""), "tasks": rows,
              "ok": all(s == "ok" for s in status)}
    if "budget_exceeded" in status:
        code = EXIT_BUDGET
    elif "parse_error" in status or "error" in status:
        code = EXIT_INPUT
    elif not report["ok"]:
        code = EXIT_FAIL
    else:
        code = EXIT_OK
    return report, code


# ------------------------------------------------------------------ output

def _text(report):
    lines = []
    if "tasks" in report:
        lines.append("scenario %s: %s" % (report.get("scenario", ""), "ok" if report["ok"] else "FAILED"))
        for r in report["tasks"]:
            extra = " (%.2f s)" % r["seconds"] if "seconds" in r else ""
            lines.append("  %-24s %-12s %s%s" % (r["name"], r["kind"], r["status"], extra))
            if "error" in r:
                lines.append("      %s" % (r["error"].get("message") or r["error"]))
        return "\n".join(lines)
    if "results" in report:
        for r in report["results"]:
            extra = " (%.2f s)" % r["seconds"] if "seconds" in r else ""
            lines.append("[%s] %s: %s%s" % ("PASS" if r["passed"] else "FAIL", r["id"], r["title"], extra))
        lines.append("%d/%d passed" % (report["passed"], report["total"]))
        return "\n".join(lines)
    _text_items(report, lines, "")
    return "\n".join(lines)


def _text_items(d, lines, indent):
    for k, v in d.items():
        if k == "schema":
            continue
        if isinstance(v, dict) and v and len(json.dumps(_plain(v))) > 70:
            lines.append("%s%s:" % (indent, k))
            _text_items(v, lines, indent + "  ")
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            lines.append("%s%s:" % (indent, k))
            lines.extend("%s  %s" % (indent, json.dumps(_plain(x))) for x in v)
        elif isinstance(v, str) and "\n" in v:
            lines.append("%s%s:" % (indent, k))
            lines.extend(indent + "  " + x for x in v.splitlines())
        else:
            lines.append("%s%s: %s" % (indent, k, v if isinstance(v, str) else json.dumps(_plain(v))))


def emit(report, fmt, out):
    s = json.dumps(_plain(report), indent=2) if fmt == "json" else _text(report)
    if out:
        with open(out, "w") as fh:
            fh.write(s + "\n")
    else:
        click.echo(s)


def _fail_input(exc):
    if isinstance(exc, ParseError):
        click.echo("parse error at line %d, column %d: %s" % (exc.line, exc.column, exc), err=True)
    else:
        click.echo("error: %s: %s" % (type(exc).__name__, exc), err=True)
    sys.exit(EXIT_INPUT)


def _single(kind, spec, ctx):
    o = ctx.obj
    spec["kind"] = kind
    row = run_task(spec, o["timings"])
    report = {"schema": REPORT_SCHEMA, "command": kind}
    report.update({k: v for k, v in row.items() if k not in ("name", "kind")})
    emit(report, o["format"], o["out"])
    if row["status"] == "budget_exceeded":
        click.echo("budget exceeded: %s" % row["error"], err=True)
        sys.exit(EXIT_BUDGET)
    if row["status"] in ("parse_error", "error"):
        msg = row["error"].get("message")
        click.echo("error: %s" % msg, err=True)
        sys.exit(EXIT_INPUT)
    sys.exit(EXIT_OK if row["status"] == "ok" else EXIT_FAIL)


def _read_arg(text):
    """A DSL argument, or @path to read it from a file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return fh.read()
    return text


# ------------------------------------------------------------------ commands

def shared(f):
    """The global flags, accepted after the subcommand too (they win there)."""
    opts = [
        click.option("--cutoff", "s_cutoff", type=int, default=None, help="Top cohomological degree."),
        click.option("--budget", "s_budget", type=int, default=None, help="Work budget."),
        click.option("--seed", "s_seed", type=int, default=None),
        click.option("--out", "s_out", type=click.Path(dir_okay=False), default=None),
        click.option("--format", "s_fmt", type=click.Choice(["json", "text"]), default=None),
        click.option("--timings/--no-timings", "s_timings", default=None),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _merge(ctx, kw):
    o = ctx.obj
    for key, name in (("s_cutoff", "cutoff"), ("s_budget", "budget"), ("s_seed", "seed"),
                      ("s_out", "out"), ("s_fmt", "format"), ("s_timings", "timings")):
        v = kw.pop(key, None)
        if v is not None:
            o[name] = v
    return o


@click.group()
@click.option("--cutoff", type=int, default=3, show_default=True, envvar="ARTIFACT_CUTOFF",
              help="Top cohomological degree.")
@click.option("--budget", type=int, default=DEFAULT_BUDGET, show_default=True, envvar="ARTIFACT_BUDGET",
              help="Maximum number of basis elements or cells a computation may touch.")
@click.option("--seed", type=int, default=0, show_default=True, envvar="ARTIFACT_SEED",
              help="Seed for randomized suites.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, envvar="ARTIFACT_OUT",
              help="Write the report here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True,
              envvar="ARTIFACT_FORMAT")
@click.option("--timings/--no-timings", default=False, envvar="ARTIFACT_TIMINGS",
              help="Include wall-clock timings (reports are then not reproducible byte for byte).")
@click.pass_context
def main(ctx, cutoff, budget, seed, out, fmt, timings):
    """Mod-p cohomology of finite p-groups: computations and checks."""
    ctx.obj = {"cutoff": cutoff, "budget": budget, "seed": seed, "out": out, "format": fmt,
               "timings": timings}


@main.command()
@click.argument("group")
@click.option("--method", type=click.Choice(["reduced", "explicit"]), default="reduced", show_default=True)
@shared
@click.pass_context
def cohomology(ctx, group, method, **kw):
    """dim H^n(G; F_p) for n up to the cutoff.  GROUP is a DSL expression or @file."""
    o = _merge(ctx, kw)
    _single("cohomology", {"group": _read_arg(group), "cutoff": o["cutoff"], "budget": o["budget"],
                           "method": method}, ctx)


@main.command()
@click.argument("group")
@click.option("--compare", default=None, help="Second group; report whether the truncations are isomorphic.")
@click.option("--table", is_flag=True, help="Include the full structure constants.")
@shared
@click.pass_context
def ring(ctx, group, compare, table, **kw):
    """Truncated cohomology ring: invariants, presentation, optional comparison."""
    o = _merge(ctx, kw)
    spec = {"group": _read_arg(group), "cutoff": o["cutoff"], "budget": o["budget"], "table": table}
    if compare:
        spec["compare"] = _read_arg(compare)
    _single("ring", spec, ctx)


@main.command()
@click.argument("group")
@shared
@click.pass_context
def ss(ctx, group, **kw):
    """Pages of the spectral sequence of a semidirect product sd(K, P, [..])."""
    o = _merge(ctx, kw)
    _single("ss", {"group": _read_arg(group), "cutoff": o["cutoff"], "budget": o["budget"]}, ctx)


@main.command("zigzag-verify")
@click.argument("left", required=False)
@click.argument("right", required=False)
@click.option("--right-cutoff", type=int, default=None)
@click.option("--witness", "witness", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Verify a zig-zag witness file instead.")
@shared
@click.pass_context
def zigzag_verify(ctx, left, right, right_cutoff, witness, **kw):
    """Check the zig-zag LEFT <- U(p, d) -> RIGHT, or a witness file."""
    o = _merge(ctx, kw)
    spec = {"cutoff": o["cutoff"], "budget": o["budget"]}
    if witness:
        with open(witness) as fh:
            spec["witness"] = fh.read()
    elif left and right:
        spec.update(left=_read_arg(left), right=_read_arg(right))
        if right_cutoff is not None:
            spec["right_cutoff"] = right_cutoff
    else:
        click.echo("error: give LEFT and RIGHT groups or --witness", err=True)
        sys.exit(EXIT_INPUT)
    _single("zigzag", spec, ctx)


@main.command()
@click.option("--p", "p", type=int, default=3, show_default=True)
@click.option("--precision", type=int, default=3, show_default=True, help="Work modulo p^precision T_0.")
@click.option("--matrices", default="[[[0,-1],[1,-1]]]", show_default=True, help="Point group generators (JSON).")
@click.option("--V", "V", type=int, default=1, show_default=True, help="V = p^V T_0.")
@click.option("--U", "U", type=int, default=3, show_default=True, help="U = p^U T_0.")
@click.option("--gamma", default='{"1,2": [-9, 9]}', show_default=True,
              help="Values of gamma on pairs of basis vectors, 1-based (JSON).")
@shared
@click.pass_context
def constructible(ctx, p, precision, matrices, V, U, gamma, **kw):
    """Build a split constructible group two ways and check the bijection."""
    o = _merge(ctx, kw)
    try:
        spec = {"p": p, "precision": precision, "matrices": json.loads(matrices), "V": V, "U": U,
                "gamma": json.loads(gamma), "budget": o["budget"]}
    except json.JSONDecodeError as exc:
        _fail_input(ParseError("invalid JSON: %s" % exc.msg, exc.lineno, exc.colno))
    _single("constructible", spec, ctx)


@main.command()
@click.argument("name", type=click.Choice(["acceptance", "properties", "all"]))
@click.option("--only", default=None, help="Comma-separated criterion numbers.")
@click.option("--stretch", is_flag=True, help="Run stretch goals with enlarged budgets.")
@click.option("--mutate-cup-sign", is_flag=True, hidden=True,
              help="Drop the Koszul sign of the cup product (the suite must then fail).")
@shared
@click.pass_context
def suite(ctx, name, only, stretch, mutate_cup_sign, **kw):
    """Run the acceptance criteria and/or the property suite."""
    o = _merge(ctx, kw)
    ids = [int(x) for x in only.split(",")] if only else None
    # progress rows on stderr; the text report repeats them on stdout
    echo = (lambda r: click.echo(r.line(o["timings"]), err=True)) if o["format"] == "json" else None
    res = []
    if name in ("acceptance", "all"):
        res += acceptance.run_acceptance(ids, stretch=stretch, echo=echo)
    if name in ("properties", "all"):
        res += acceptance.run_properties(o["seed"], koszul=not mutate_cup_sign, echo=echo)
    report = acceptance.summary_json(res, name, seed=o["seed"] if name != "acceptance" else None,
                                     timings=o["timings"])
    emit(report, o["format"], o["out"])
    sys.exit(EXIT_OK if report["passed"] == report["total"] else EXIT_FAIL)


@main.command()
@click.argument("scenario")
@shared
@click.pass_context
def run(ctx, scenario, **kw):
    """Run a scenario file (or a bundled scenario by name) and write its report."""
    o = _merge(ctx, kw)
    try:
        text = scenario_text(scenario)
    except OSError as exc:
        _fail_input(ScenarioError("cannot read scenario %r: %s" % (scenario, exc.strerror or exc)))
    try:
        data = load_scenario(text)
    except ParseError as exc:
        _fail_input(exc)
    try:
        report, code = run_scenario(data, o["timings"])
    except ScenarioError as exc:
        _fail_input(exc)
    emit(report, o["format"], o["out"])
    sys.exit(code)


if __name__ == "__main__":
    main()
