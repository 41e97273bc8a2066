"""Command-line entry point: ``revisos check|run|invert|rpp|proof``.

Exit codes: 0 success, 1 check or validation failure, 2 fuel exhausted,
3 I/O or parse error.
"""
from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass

import click

from .core import App, value_to_term
from .eval import DEFAULT_FUEL, EvalConfig, FuelExhausted, Stuck, System, evaluate, trace_to_jsonl
from .invert import invert
from .parser import Definition, ParseError, SourceFile, load, parse_term, pretty
from .rpp import (
    ArityError, RppSyntaxError, arity, compile_rpp, decode_vec, encode_vec, parse_rpp, rpp_eval,
    to_text,
)
from .typecheck import (
    EMPTY_PSI, TermCtx, TypeCheckError, allow_general_recursion, check_source,
    check_structural_recursion, type_term,
)

OK, FAILED, OUT_OF_FUEL, BAD_INPUT = 0, 1, 2, 3
DEFAULT_TRIALS = 100
DEFAULT_SEED = 20240101


@dataclass
class CliConfig:
    subcommand: str
    inputs: tuple = ()
    fuel: int = DEFAULT_FUEL
    trace: bool = False
    output: str | None = None
    json: bool = False
    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS

    def __post_init__(self):
        if self.fuel < 1:
            raise click.BadParameter("fuel must be at least 1")
        if self.trials < 1:
            raise click.BadParameter("trials must be at least 1")


def _bail(message: str, code: int = BAD_INPUT):
    click.echo(message, err=True)
    sys.exit(code)


def _load(path) -> SourceFile:
    try:
        return load(path)
    except OSError as e:
        _bail(f"{path}: error: {e.strerror or e}")
    except ParseError as e:
        _bail(f"{path}:{e}")


def _term(src: SourceFile, path, expr):
    if expr is None:
        if src.main is None:
            _bail(f"{path}: error: no main term; pass one with -e", BAD_INPUT)
        return src.main
    try:
        return parse_term(expr, src.aliases, {d.name: d.iso for d in src.definitions})
    except ParseError as e:
        _bail(f"<expr>:{e}")


def _definition(src: SourceFile, path, name) -> Definition:
    if not src.definitions:
        _bail(f"{path}: error: no definitions")
    if name is None:
        return src.definitions[-1]
    try:
        return src.lookup(name)
    except KeyError:
        _bail(f"{path}: error: no definition named {name!r}")


def _emit(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


@click.group()
@click.version_option(package_name="revisos")
def main():
    """Reversible isos: type-check, run, invert, compile RPP, extract proofs."""


# ---------------------------------------------------------------- check

@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
def check(file, as_json):
    """Type every definition: iso type, OD status, recursion witness."""
    src = _load(file)
    _, main_type, diags = check_source(src)
    failed = {d.definition for d in diags}
    report = []
    for d in src.definitions:
        entry = {"name": d.name, "type": pretty(d.declared or d.type), "ok": d.name not in failed}
        if entry["ok"]:
            rec = check_structural_recursion(d.iso, d.type)
            entry["recursion"] = None if rec is None else {"decreasing_index": rec.decreasing_index}
        report.append(entry)
    if as_json:
        out = {"file": file, "definitions": report,
               "main": pretty(main_type) if main_type is not None else None,
               "diagnostics": [d.as_dict(file) for d in diags]}
        click.echo(json.dumps(out, indent=2))
    else:
        for entry in report:
            if not entry["ok"]:
                continue
            rec = entry["recursion"]
            how = "non-recursive" if rec is None else f"structurally recursive, decreasing index {rec['decreasing_index']}"
            click.echo(f"{entry['name']} :: {entry['type']}, OD ok, {how}")
        if main_type is not None:
            click.echo(f"main : {pretty(main_type)}")
        for d in diags:
            click.echo(d.render(file), err=True)
    sys.exit(FAILED if diags else OK)


# ---------------------------------------------------------------- run

@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("-e", "--expr", help="Term to evaluate (defaults to the file's main).")
@click.option("--fuel", default=DEFAULT_FUEL, show_default=True, type=click.IntRange(min=1))
@click.option("--system", type=click.Choice(["main", "explicit"]), default="main", show_default=True)
@click.option("--trace", is_flag=True, help="Write every step to stderr as JSON lines.")
def run(file, expr, fuel, system, trace):
    """Evaluate a term and print its value."""
    cfg = CliConfig("run", (file,), fuel=fuel, trace=trace)
    src = _load(file)
    t = _term(src, file, expr)
    try:
        # running a general fixpoint is allowed; it may simply run out of fuel
        with allow_general_recursion():
            type_term(TermCtx(), EMPTY_PSI, t)
    except TypeCheckError as e:
        _bail(f"{file}: error: {e}", FAILED)
    try:
        result = evaluate(t, EvalConfig(fuel=cfg.fuel, trace=cfg.trace, system=System(system)))
    except Stuck as e:
        _bail(f"{file}: error: stuck: {e}", FAILED)
    if cfg.trace and result.trace:
        click.echo(trace_to_jsonl(result.trace), err=True)
    if isinstance(result.outcome, FuelExhausted):
        click.echo(f"FuelExhausted after {result.steps} steps")
        sys.exit(OUT_OF_FUEL)
    click.echo(pretty(result.outcome))


# ---------------------------------------------------------------- invert

@main.command(name="invert")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def invert_cmd(file, output):
    """Print the file with every definition replaced by its inverse."""
    src = _load(file)
    defs = [Definition(d.name, invert(d.iso), d.type.flip(), declared=d.declared and d.declared.flip())
            for d in src.definitions]
    _emit(pretty(SourceFile(defs, None, src.aliases)), output)


# ---------------------------------------------------------------- rpp

@main.group()
def rpp():
    """Recursive primitive permutations: reference semantics and compiler."""


def _rpp(text):
    try:
        return parse_rpp(text)
    except (RppSyntaxError, ArityError) as e:
        _bail(f"<rpp>: error: {e}")


@rpp.command(name="eval")
@click.argument("prog")
@click.argument("args", nargs=-1, type=int)
def rpp_eval_cmd(prog, args):
    """Run the reference semantics on integer arguments."""
    f = _rpp(prog)
    try:
        click.echo(" ".join(str(x) for x in rpp_eval(f, args)))
    except ArityError as e:
        _bail(f"error: {e}", FAILED)


@rpp.command(name="compile")
@click.argument("prog")
@click.option("--name", default="rpp", show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def rpp_compile_cmd(prog, name, output):
    """Emit the iso simulating PROG as a source file."""
    f = _rpp(prog)
    iso = compile_rpp(f)
    defs = [Definition(name, iso, iso.ann)]
    _emit(f"-- {to_text(f)}\n" + pretty(SourceFile(defs)), output)


@rpp.command(name="test")
@click.argument("prog")
@click.option("--trials", default=DEFAULT_TRIALS, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--fuel", default=DEFAULT_FUEL, show_default=True, type=click.IntRange(min=1))
def rpp_test_cmd(prog, trials, seed, fuel):
    """Compare the compiled iso with the reference semantics on random inputs."""
    f = _rpp(prog)
    k = arity(f)
    iso = compile_rpp(f)
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        xs = [rng.randint(-8, 8) for _ in range(k)]
        expected = rpp_eval(f, xs)
        result = evaluate(App(iso, value_to_term(encode_vec(xs))), EvalConfig(fuel=fuel))
        if isinstance(result.outcome, FuelExhausted):
            click.echo(f"{xs}: fuel exhausted")
            sys.exit(OUT_OF_FUEL)
        got = decode_vec(result.outcome, k)
        if got != expected:
            bad += 1
            click.echo(f"{xs}: iso gives {got}, reference gives {expected}")
    click.echo(f"{trials - bad}/{trials} agree")
    sys.exit(FAILED if bad else OK)


# ---------------------------------------------------------------- proofs

@main.group()
def proof():
    """Circular proofs: extraction, validity and cut-elimination."""


@proof.command(name="extract")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--name", help="Definition to translate (defaults to the last one).")
@click.option("--raw", is_flag=True, help="Keep the ex rules and the upsilon/theta split.")
@click.option("--text", is_flag=True, help="Indented text instead of JSON.")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def proof_extract(file, name, raw, text, output):
    """Write the derivation of a definition as JSON."""
    from .proofs.serialize import dumps, render
    from .proofs.translate import TranslationError, extract

    src = _load(file)
    d = _definition(src, file, name)
    try:
        proof_tree = extract(d.iso, d.type, raw=raw)
    except TranslationError as e:
        _bail(f"{file}: error: {e}", FAILED)
    _emit(render(proof_tree) + "\n" if text else dumps(proof_tree), output)


@proof.command(name="validate")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--name", help="Only this definition.")
@click.option("--json", "as_json", is_flag=True)
def proof_validate(file, name, as_json):
    """Check the validity criterion on each definition's derivation."""
    from .proofs.serialize import render_type
    from .proofs.translate import TranslationError, extract
    from .proofs.validity import check_validity

    src = _load(file)
    defs = [_definition(src, file, name)] if name else src.definitions
    report, failed = [], False
    for d in defs:
        try:
            verdict = check_validity(extract(d.iso, d.type))
        except TranslationError as e:
            failed = True
            report.append({"name": d.name, "valid": False, "reason": f"translation failed: {e}"})
            continue
        entry = {"name": d.name, "valid": bool(verdict), "reason": verdict.reason, "witness": []}
        if verdict:
            for label, j, period in verdict.witness:
                start = period.thread.elements[0][0]
                entry["witness"].append({"label": label, "decreasing_index": j,
                                         "weight": period.thread.word(),
                                         "formula": _component_text(start.type, j, render_type)})
        else:
            failed = True
        report.append(entry)
    if as_json:
        click.echo(json.dumps({"file": file, "definitions": report}, indent=2))
    else:
        for entry in report:
            if entry["valid"]:
                click.echo(f"{entry['name']}: Valid ({entry['reason']})")
                for w in entry["witness"]:
                    click.echo(f"  {w['label']}: component {w['decreasing_index']} {w['formula']}, "
                               f"period {w['weight']}")
            else:
                click.echo(f"{entry['name']}: Invalid: {entry['reason']}")
    sys.exit(FAILED if failed else OK)


def _component_text(a, j, render_type):
    from .core import tensor_components, tensor_width
    return render_type(tensor_components(a, tensor_width(a))[j - 1], negated=True)


@proof.command(name="simulate")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("-e", "--expr", help="Term to run (defaults to the file's main).")
@click.option("--steps", default=10_000, show_default=True, type=click.IntRange(min=1))
@click.option("--json", "as_json", is_flag=True)
def proof_simulate(file, expr, steps, as_json):
    """Evaluate and cut-eliminate in lockstep, comparing after every step."""
    from .proofs.cutelim import simulate

    src = _load(file)
    t = _term(src, file, expr)
    try:
        type_term(TermCtx(), EMPTY_PSI, t)
    except TypeCheckError as e:
        _bail(f"{file}: error: {e}", FAILED)
    report = simulate(t, steps)
    if as_json:
        click.echo(json.dumps({
            "term_steps": report.term_steps, "proof_steps": report.proof_steps,
            "finished": report.finished, "agrees": report.agrees, "failure": report.failure,
            "checkpoints": [{"rule": c.rule, "path": list(c.term_path), "proof_steps": c.proof_steps,
                             "agrees": c.agrees} for c in report.checkpoints],
            "value": pretty(report.final_term) if report.finished else None,
        }, indent=2))
    else:
        for n, c in enumerate(report.checkpoints, start=1):
            mark = "agree" if c.agrees else "DISAGREE"
            click.echo(f"{n:4d} {c.rule:<10} at {list(c.term_path)}: {c.proof_steps} cut step(s), {mark}")
        if report.failure:
            click.echo(f"diverged: {report.failure}")
        elif report.finished:
            click.echo(f"agreement at every step: {report.term_steps} evaluation steps, "
                       f"{report.proof_steps} cut steps, value {pretty(report.final_term)}")
        else:
            click.echo(f"stopped after {report.term_steps} steps without reaching a value")
    if not report.agrees:
        sys.exit(FAILED)
    if not report.finished:
        sys.exit(OUT_OF_FUEL)


if __name__ == "__main__":
    main()
