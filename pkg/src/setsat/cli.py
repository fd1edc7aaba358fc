"""Command-line frontend."""

from __future__ import annotations

import json
import sys

import click

from .board import canonical_board, canonical_partition, render_board
from .errors import ParseError, ResourceLimitError, WitnessViolation
from .solver import (
    NoModelUpTo, Sat, SatWitness, Unsat, Witness, decide, formula_hash, rank_bound_c,
    verdict_to_json, verify_witness,
)
from .syntax import formula_vars, normalize, parse

EXIT_SAT, EXIT_NO_MODEL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3
EMITS = ("model", "witness", "trace", "board")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _read_formula(expr: str | None, path: str | None) -> str:
    if expr is not None:
        return expr
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _fail(code: int, message: str) -> None:
    click.echo(f"setsat: {message}", err=True)
    sys.exit(code)


def _verify(text: str, witness_path: str) -> None:
    try:
        with open(witness_path, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict) and isinstance(data.get("witness"), dict):
            data = data["witness"]
        w = Witness.from_json(data)
    except (OSError, ValueError) as exc:
        _fail(EXIT_INPUT, f"cannot read witness: {exc}")
    conjs = {formula_hash(c): c for c in normalize(parse(text))}
    c = conjs.get(w.formula_hash)
    if c is None:
        _fail(EXIT_NO_MODEL, "violation (hash): witness does not belong to this formula")
    try:
        verify_witness(c, w)
    except WitnessViolation as exc:
        _fail(EXIT_NO_MODEL, f"violation ({exc.label}): {exc.detail}")
    except ResourceLimitError as exc:
        _fail(EXIT_RESOURCE, f"resource limit: {exc}")
    click.echo("witness ok")


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("input_path", required=False, metavar="[FILE]")
@click.option("-e", "--expr", help="Formula text (otherwise read FILE or standard input).")
@click.option("--mode", type=click.Choice(["auto", "mlssp", "mlsspf"]), default="auto", show_default=True)
@click.option("--rank-bound", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--emit", "emit", type=click.Choice(EMITS), multiple=True, help="Extra evidence to print; repeatable.")
@click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--verify", "witness_path", type=click.Path(), help="Check a witness file against the formula.")
@click.option("--verbose", is_flag=True, help="Show auxiliary variables introduced by normalization.")
def main(input_path, expr, mode, rank_bound, emit, output, witness_path, verbose):
    """Decide satisfiability of a set-theory formula over hereditarily finite sets."""
    try:
        text = _read_formula(expr, input_path)
    except OSError as exc:
        _fail(EXIT_INPUT, str(exc))
    try:
        formula = parse(text)
    except ParseError as exc:
        _fail(EXIT_INPUT, f"parse error: {exc}")
    if witness_path is not None:
        _verify(text, witness_path)
        return
    has_finite = any(c.has_finiteness() for c in normalize(formula))
    if mode == "mlssp" and has_finite:
        _fail(EXIT_INPUT, "finite(...) is not part of the mlssp language; use --mode mlsspf")
    bound_c = rank_bound_c(len(formula_vars(formula)))
    try:
        verdict = decide(formula, rank_bound, mode)
    except ResourceLimitError as exc:
        _fail(EXIT_RESOURCE, f"resource limit: {exc}")

    report = verdict_to_json(verdict, verbose=verbose)
    report["completeness_bound"] = bound_c
    report["rank_bound"] = rank_bound
    extras = _evidence(verdict, emit)
    report.update(extras)

    if output == "json":
        click.echo(_dump(report))
    else:
        _print_text(verdict, report, extras, verbose)
    if isinstance(verdict, NoModelUpTo):
        click.echo(
            f"note: no model with rank <= {rank_bound}; completeness would need rank {bound_c}",
            err=True,
        )
    sys.exit(EXIT_SAT if isinstance(verdict, (Sat, SatWitness)) else EXIT_NO_MODEL)


def _evidence(verdict, emit) -> dict:
    out: dict = {}
    if not isinstance(verdict, (Sat, SatWitness)):
        return out
    c = verdict.conjunction
    if "witness" in emit and isinstance(verdict, SatWitness):
        out["witness"] = verdict.witness.to_json()
    if "trace" in emit or "board" in emit:
        if isinstance(verdict, SatWitness):
            trace = verdict.witness.trace
            g = trace.board
        else:
            from .process import extract_trace

            g = canonical_board(verdict.model, c)
            trace = extract_trace(canonical_partition(verdict.model, c), g.F, g.Q, board=g)
        if "trace" in emit:
            out["trace"] = trace.emit()
        if "board" in emit:
            out["board"] = render_board(canonical_partition(verdict.model, c), g)
    return out


def _print_text(verdict, report, extras, verbose) -> None:
    if isinstance(verdict, NoModelUpTo):
        click.echo(f"NoModelUpTo({verdict.rank_bound})")
    elif isinstance(verdict, Unsat):
        click.echo("Unsat")
    else:
        click.echo(verdict.name)
        for v, val in report["model"].items():
            click.echo(f"  {v} = {_fmt(val)}")
    click.echo(f"completeness_bound: {report['completeness_bound']}")
    if "witness" in extras:
        click.echo(_dump(extras["witness"]))
    if "trace" in extras:
        click.echo(extras["trace"])
    if "board" in extras:
        click.echo(extras["board"])


def _fmt(data) -> str:
    if not data:
        return "0"
    return "{" + ",".join(_fmt(d) for d in data) + "}"


if __name__ == "__main__":  # pragma: no cover
    main()
