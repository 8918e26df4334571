"""``qmk`` command-line driver.

Exit status: 0 when every check passes, 1 when a report contains a FAIL
line, 2 on usage, parse or resource errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .algebroid import AlgebroidChart, verify_algebroid_axioms
from .derived_structure import (
    DerivedStructureError,
    HigherAlgebroid,
    InconsistentTables,
    NegativeBasis,
    TwoLayerStructure,
    basis_samples,
    linfty_brackets,
    random_samples,
    recover_Q,
    two_layer,
    verify_two_layer,
)
from .graded_algebra import (
    EVEN,
    Coordinate,
    GradedAlgebraError,
    GradedContext,
    Polynomial,
    TermLimitExceeded,
)
from .parsing import (
    ChartDocument,
    ParseError,
    format_block,
    format_coordinates,
    format_document,
    format_field,
    parse_document,
)
from .vector_fields import VectorField, check_f_related, is_homological

COMMANDS = ("check-q2", "two-layer", "verify-identities", "axioms", "morphism", "linfty",
            "recover", "print", "run")
DEFAULT_SAMPLES = 50


class UsageError(Exception):
    pass


@dataclass
class Outcome:
    command: str
    ok: bool
    lines: List[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> int:
        return 0 if self.ok else 1


def _field(doc: ChartDocument, name: str):
    if name not in doc.fields:
        known = ", ".join(doc.fields) or "none"
        raise UsageError(f"no field named {name!r} (fields: {known})")
    return doc.fields[name]


def _args(command, args, n, usage):
    if len(args) != n:
        raise UsageError(f"usage: {command} {usage}")
    return args


# -- commands -----------------------------------------------------------------


def cmd_check_q2(doc, args, opts) -> Outcome:
    (name,) = _args("check-q2", args, 1, "<field>")
    Q = _field(doc, name)
    try:
        res = is_homological(Q)
    except TermLimitExceeded:
        raise
    except GradedAlgebraError as exc:
        raise UsageError(f"check-q2: {exc}")
    if res:
        return Outcome("check-q2", True, ["Q2 OK"], {"field": name, "status": "OK"})
    line = f"Q2 FAIL witness={res.witness} component={res.witness_component}"
    data = {"field": name, "status": "FAIL", "witness": res.witness,
            "component": str(res.witness_component), "square": str(res.square)}
    return Outcome("check-q2", False, [line], data)


def _algebroid(doc, name) -> HigherAlgebroid:
    try:
        return HigherAlgebroid(_field(doc, name), require_homological=False, name=name)
    except TermLimitExceeded:
        raise
    except GradedAlgebraError as exc:
        raise UsageError(f"{name}: {exc}")


def _lc_text(ctx: GradedContext, B_names: List[str], lc) -> str:
    if not lc:
        return "0"
    lctx = ctx.extend(Coordinate(n, EVEN, 0) for n in B_names)
    total = lctx.zero
    for k, g in lc.items():
        lifted = Polynomial(lctx, {m: c for m, c in g.items()})
        total = total + lifted * lctx.var(B_names[k])
    return str(total)


def _basis_names(ctx: GradedContext, n: int) -> List[str]:
    names = [f"e{k + 1}" for k in range(n)]
    used = set(ctx.names)
    if used & set(names):
        names = [f"basis_e{k + 1}" for k in range(n)]
    return names


def format_tables(T: TwoLayerStructure) -> List[str]:
    ctx = T.context
    B = T.basis
    names = _basis_names(ctx, len(B))
    lines = [f"# two-layer tables of {T.name}"] + format_coordinates(ctx)
    lines.append(f"structure {T.name};")
    for k, X in enumerate(B):
        lines += format_block("basis", names[k], X.components, ctx)
    n = len(B)
    for i in range(n):
        for j in range(n):
            lc = T.bracket[(i, j)]
            if lc:
                lines.append(f"bracket {names[i]} {names[j]} = {_lc_text(ctx, names, lc)};")
    for i in range(n):
        lc = T.differential[i]
        if lc:
            lines.append(f"d {names[i]} = {_lc_text(ctx, names, lc)};")
    for i in range(n):
        for j in range(n):
            lc = T.derived[(i, j)]
            if lc:
                lines.append(f"derived {names[i]} {names[j]} = {_lc_text(ctx, names, lc)};")
    for i in range(n):
        if T.anchor[i]:
            lines += format_block("anchor", names[i], T.anchor[i].components, ctx)
    return lines


def tables_from_document(doc: ChartDocument) -> TwoLayerStructure:
    """Rebuild the table object; basis elements must be the canonical ones."""
    tab = doc.tables
    if tab is None:
        raise UsageError("document contains no two-layer tables")
    ctx = doc.context
    B = NegativeBasis(ctx)
    index: Dict[str, int] = {}
    for name, X in tab.basis.items():
        hits = [k for k, F in enumerate(B) if F == X]
        if not hits:
            raise UsageError(f"basis element {name} = {X} is not a canonical basis field")
        index[name] = hits[0]
    missing = [B.label(k) for k in range(len(B)) if k not in index.values()]
    if missing:
        raise UsageError("basis is incomplete; missing " + ", ".join(missing))

    def conv(lc):
        return {index[k]: g for k, g in sorted(lc.items(), key=lambda kv: index[kv[0]]) if g}

    n = len(B)
    bracket = {(i, j): {} for i in range(n) for j in range(n)}
    derived = {(i, j): {} for i in range(n) for j in range(n)}
    diff = {i: {} for i in range(n)}
    anchor = {i: VectorField(ctx) for i in range(n)}
    for (a, b), lc in tab.bracket.items():
        bracket[(index[a], index[b])] = conv(lc)
    for (a, b), lc in tab.derived.items():
        derived[(index[a], index[b])] = conv(lc)
    for a, lc in tab.differential.items():
        diff[index[a]] = conv(lc)
    for a, X in tab.anchor.items():
        anchor[index[a]] = X
    return TwoLayerStructure(ctx, B, bracket, diff, derived, anchor, tab.structure)


def cmd_two_layer(doc, args, opts) -> Outcome:
    (name,) = _args("two-layer", args, 1, "<field>")
    A = _algebroid(doc, name)
    T = two_layer(A)
    data = {
        "field": name,
        "basis": [T.basis.label(k) for k in range(len(T.basis))],
        "bracket": _json_table(T.bracket),
        "d": {str(i): _json_lc(lc) for i, lc in T.differential.items() if lc},
        "derived": _json_table(T.derived),
        "anchor": {str(i): {k: str(v) for k, v in X.components.items()}
                   for i, X in T.anchor.items() if X},
    }
    return Outcome("two-layer", True, format_tables(T), data)


def _json_lc(lc):
    return {str(k): str(g) for k, g in lc.items()}


def _json_table(tab):
    return {f"{i},{j}": _json_lc(lc) for (i, j), lc in tab.items() if lc}


def cmd_verify_identities(doc, args, opts) -> Outcome:
    (name,) = _args("verify-identities", args, 1, "<field>")
    A = _algebroid(doc, name)
    samples = random_samples(A, opts.samples, opts.seed) if opts.samples > 0 else []
    exhaustive = verify_two_layer(A, basis_samples(A))
    rand = {r.name: r for r in verify_two_layer(A, samples).results}
    results = []
    for r in exhaustive.results:
        r2 = rand.get(r.name)
        if r2 is not None:
            merged = r if not r.ok else r2
            merged.checked = r.checked + r2.checked
            merged.failures = r.failures + r2.failures
            r = merged
        results.append(r)
    lines = [r.line() for r in results]
    data = {"field": name, "seed": opts.seed, "random_samples": opts.samples,
            "identities": [r.to_dict() for r in results]}
    return Outcome("verify-identities", all(r.ok for r in results), lines, data)


def cmd_axioms(doc, args, opts) -> Outcome:
    (name,) = _args("axioms", args, 1, "<field>")
    Q = _field(doc, name)
    heavy = [c for c in Q.context if c.weight not in (0, 1)]
    if heavy:
        c = heavy[0]
        raise UsageError(
            f"axioms needs a degree-1 chart (weights 0 and 1 only); coordinate {c.name} has weight {c.weight}"
        )
    try:
        C = AlgebroidChart(Q, name)
    except GradedAlgebraError as exc:
        raise UsageError(f"axioms: {exc}")
    rep = verify_algebroid_axioms(C)
    return Outcome("axioms", rep.ok, rep.lines(), {"field": name, **rep.to_dict()})


def cmd_morphism(doc, args, opts) -> Outcome:
    mname, n1, n2 = _args("morphism", args, 3, "<map> <Q1> <Q2>")
    if mname not in doc.maps:
        raise UsageError(f"no map named {mname!r}")
    sigma = doc.maps[mname]
    Q1, Q2 = _field(doc, n1), _field(doc, n2)
    for c in doc.context:
        img = sigma[c.name]
        if img and img.weights() != {c.weight}:
            raise UsageError(f"map {mname} does not preserve weights at {c.name}")
    try:
        res = check_f_related(sigma, Q1, Q2)
    except TermLimitExceeded:
        raise
    except GradedAlgebraError as exc:
        raise UsageError(f"morphism: {exc}")
    if res:
        lines = ["MORPHISM OK"]
    else:
        lines = [f"MORPHISM FAIL {c} residual={r}" for c, r in res.failures().items()]
    data = {"map": mname, "source": n1, "target": n2, "status": "OK" if res else "FAIL",
            "residuals": {c: str(r) for c, r in res.failures().items()}}
    return Outcome("morphism", res.ok, lines, data)


def cmd_linfty(doc, args, opts) -> Outcome:
    (name,) = _args("linfty", args, 1, "<field>")
    A = _algebroid(doc, name)
    L = linfty_brackets(A)
    lines = [f"# L-infinity brackets of {name} on the classes " + ", ".join(L.classes)]
    data = {}
    for key, val in L.brackets.items():
        if not val:
            continue
        terms = " + ".join(_bracket_term(g, c) for c, g in val.items()).replace("+ -", "- ")
        lines.append(f"l({', '.join(key)}) = {terms}")
        data[",".join(key)] = {c: str(g) for c, g in val.items()}
    return Outcome("linfty", True, lines, {"field": name, "brackets": data})


def _bracket_term(g, cls):
    s = str(g)
    if s == "1":
        return f"[{cls}]"
    if s == "-1":
        return f"-[{cls}]"
    return f"{s}*[{cls}]" if len(g) == 1 else f"({s})*[{cls}]"


def cmd_recover(doc, args, opts) -> Outcome:
    if args:
        if len(args) != 1:
            raise UsageError("usage: recover [<tables-file>]")
        doc = _load(args[0])
    T = tables_from_document(doc)
    try:
        Q = recover_Q(T)
    except InconsistentTables as exc:
        line = f"RECOVER FAIL {exc}"
        return Outcome("recover", False, [line], {"status": "FAIL", "reason": str(exc)})
    lines = format_coordinates(T.context) + format_field(T.name, Q)
    return Outcome("recover", True, lines,
                   {"status": "OK", "field": T.name, "components": {k: str(v) for k, v in Q.components.items()}})


def cmd_print(doc, args, opts) -> Outcome:
    _args("print", args, 0, "")
    return Outcome("print", True, format_document(doc).splitlines(), {"document": format_document(doc)})


def cmd_run(doc, args, opts) -> Outcome:
    _args("run", args, 0, "")
    if not doc.commands:
        raise UsageError("document has no run directives")
    lines, data, ok = [], [], True
    for words in doc.commands:
        sub = run_command(doc, words[0], _split_directive(words[1:], opts))
        lines.append(f"# {' '.join(words)}")
        lines += sub.lines
        data.append({"command": " ".join(words), "ok": sub.ok, **sub.data})
        ok = ok and sub.ok
    return Outcome("run", ok, lines, {"runs": data})


def _split_directive(words, opts):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("args", nargs="*")
    p.add_argument("--seed", type=int, default=opts.seed)
    p.add_argument("--samples", type=int, default=opts.samples)
    ns = p.parse_args(words)
    return ns


_HANDLERS = {
    "check-q2": cmd_check_q2,
    "two-layer": cmd_two_layer,
    "verify-identities": cmd_verify_identities,
    "axioms": cmd_axioms,
    "morphism": cmd_morphism,
    "linfty": cmd_linfty,
    "recover": cmd_recover,
    "print": cmd_print,
    "run": cmd_run,
}


def run_command(doc: ChartDocument, command: str, opts) -> Outcome:
    """Run one command on a parsed document. ``opts`` carries ``args``,
    ``seed`` and ``samples``."""
    if command not in _HANDLERS:
        raise UsageError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    return _HANDLERS[command](doc, list(opts.args), opts)


def _load(path: str) -> ChartDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    try:
        return parse_document(text)
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, exc.column) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmk", description="Checks for homological vector fields on graded charts.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("args", nargs="*")
    p.add_argument("--input", "-i", help="chart document")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--seed", type=int, default=0, help="seed for random samples")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                   help="random samples for verify-identities (default %(default)s)")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    opts = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        if opts.input is None:
            if opts.command == "recover" and opts.args:
                doc = None
            else:
                raise UsageError("--input is required")
        else:
            doc = _load(opts.input)
        result = run_command(doc, opts.command, opts)
    except ParseError as exc:
        where = f"{opts.input}:{exc.line}:{exc.column}" if exc.line else (opts.input or "input")
        return _error(opts, f"{where}: parse error: {exc.message}")
    except TermLimitExceeded as exc:
        return _error(opts, f"resource limit: {exc}")
    except (UsageError, DerivedStructureError, GradedAlgebraError) as exc:
        return _error(opts, str(exc))
    if opts.format == "structured":
        payload = {"command": result.command, "ok": result.ok, "exit": result.status, **result.data}
        out.write(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    else:
        out.write("\n".join(result.lines) + "\n")
    return result.status


def _error(opts, message: str) -> int:
    if opts.format == "structured":
        sys.stdout.write(json.dumps({"command": opts.command, "ok": False, "exit": 2,
                                     "error": message}) + "\n")
    else:
        sys.stderr.write(f"qmk: error: {message}\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
