"""Command line front end: ``mtl analyze|generate|trace|validate|test``.

Exit status: 0 when there is at least one result (or a clean check), 1 when
there is none, 2 on usage, input or pack errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import (
    CorpusError,
    analysis_label,
    full_analyses,
    generate_forms,
    parse_corpus,
    parse_tape_spec,
    run_corpus,
)
from .engine import InputError, analyze
from .featlogic import format_fs
from .morphotactics import emit
from .packfmt import PackError, errors, find_pack, load_pack, validate

EXIT_OK, EXIT_NONE, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _split_pack_arg(args, positional: list, need: int) -> tuple:
    """Return (pack name, remaining positionals); ``-g`` takes precedence."""
    if args.grammar:
        pack = args.grammar
    else:
        if not positional:
            raise UsageError("no grammar pack given (use -g PACK or a positional pack)")
        pack, positional = positional[0], positional[1:]
    if len(positional) != need:
        raise UsageError(f"expected {need} argument(s) after the pack, got {len(positional)}")
    return pack, positional


def _cell(tokens) -> str:
    if not tokens:
        return ""
    if all(len(t) == 1 for t in tokens):
        return "".join(tokens)
    return " ".join(tokens)


def trace_table(d) -> str:
    """Alignment table: lexical tapes (highest first), rules, surface."""
    rows = []
    for i in reversed(range(d.tapes)):
        rows.append([f"T{i + 1}"] + [_cell(e.lex[i]) for e in d.elements])
    rows.append(["rule"] + [e.rule.name for e in d.elements])
    rows.append(["surface"] + [_cell(e.surface) for e in d.elements])
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return "\n".join(" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
                     for r in rows)


def _morpheme_lines(d) -> list:
    out = []
    for m in emit(d):
        line = f"  {m.tape}: {m.entry.key:<10} {m.category}[{format_fs(m.features)}]"
        if m.entry.gloss:
            line += f"  '{m.entry.gloss}'"
        out.append(line)
    return out


def cmd_analyze(args, positional) -> int:
    name, (word,) = _split_pack_arg(args, positional, 1)
    pack = load_pack(name)
    if args.no_parse or not pack.cf_rules:
        results = [(d, []) for d in analyze(word, pack)]
    else:
        results = full_analyses(word, pack, args.target)
    for n, (d, trees) in enumerate(results, 1):
        shown = trees if args.all else trees[:1]
        if args.porcelain:
            for t in shown or [None]:
                label = t.label() if t is not None else "-"
                print(f"{word}\t{label}\t{analysis_label(d)}\t{' '.join(d.rule_trace)}")
            continue
        head = shown[0].label() if shown else "(two-level only)"
        print(f"analysis {n}: {head}")
        print("\n".join(_morpheme_lines(d)))
        print(f"  rules: {' '.join(d.rule_trace)}")
        for t in shown:
            print("  parse:")
            print("\n".join("    " + ln for ln in t.render().splitlines()))
    return EXIT_OK if results else EXIT_NONE


def cmd_trace(args, positional) -> int:
    name, (word,) = _split_pack_arg(args, positional, 1)
    pack = load_pack(name)
    if args.no_parse or not pack.cf_rules:
        ds = analyze(word, pack)
    else:
        ds = [d for d, _ in full_analyses(word, pack, args.target)]
    for n, d in enumerate(ds if args.all else ds[:1], 1):
        if args.porcelain:
            print(f"{word}\t{analysis_label(d)}\t{' '.join(d.rule_trace)}")
            continue
        if args.all:
            print(f"derivation {n}: {analysis_label(d)}")
        print(trace_table(d))
    return EXIT_OK if ds else EXIT_NONE


def cmd_generate(args, positional) -> int:
    name, _ = _split_pack_arg(args, positional, 0)
    pack = load_pack(name)
    specs = {i: getattr(args, f"tape{i}") for i in range(1, 5)}
    for i, spec in specs.items():
        if spec and i > pack.tapes:
            raise UsageError(f"tape {i} given, pack has {pack.tapes} tapes")
    combos = [[]]
    for i in range(1, pack.tapes + 1):
        alts = parse_tape_spec(specs[i], i, pack) if specs.get(i) else [[]]
        combos = [c + [a] for c in combos for a in alts]
    forms = set()
    for tapes in combos:
        forms |= generate_forms(tapes, pack, not args.no_parse, args.target)
    for f in sorted(forms):
        print(f)
    return EXIT_OK if forms else EXIT_NONE


def cmd_validate(args, positional) -> int:
    name, _ = _split_pack_arg(args, positional, 0)
    pack = load_pack(name, check=False)
    diags = validate(pack)
    for d in diags:
        print(d)
    n_err = len(errors(diags))
    print(f"{n_err} error(s), {len(diags) - n_err} warning(s)")
    return EXIT_OK if n_err == 0 else EXIT_NONE


def cmd_test(args, positional) -> int:
    # the corpus defaults to the .corpus file beside the pack
    bare = len(positional) == (0 if args.grammar else 1)
    name, (corpus,) = _split_pack_arg(args, positional + [None] * bare, 1)
    pack = load_pack(name)
    if corpus is None:
        path = find_pack(name).with_suffix(".corpus")
    else:
        path = Path(corpus)
        if not path.exists():
            path = find_pack(corpus)
    report = run_corpus(pack, parse_corpus(path.read_text(encoding="utf-8")))
    if args.porcelain:
        for r in report.results:
            print(f"{'PASS' if r.passed else 'FAIL'}\t{r.case.line}\t{r.case.input}")
        print(f"{report.passed}/{report.total}")
    else:
        print(report.format())
    return EXIT_OK if report.ok else EXIT_NONE


COMMANDS = {
    "analyze": cmd_analyze,
    "generate": cmd_generate,
    "trace": cmd_trace,
    "validate": cmd_validate,
    "test": cmd_test,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtl", description="Multi-tape two-level morphology.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("args", nargs="*", help="[PACK] WORD | [PACK] CORPUS | [PACK]")
    p.add_argument("-g", "--grammar", help="grammar pack path or name (searched in MTL_PACK_PATH)")
    p.add_argument("--target", help="category the morphotactic parse must reach")
    p.add_argument("--all", action="store_true", help="show every derivation / parse")
    p.add_argument("--porcelain", action="store_true", help="one tab-separated result per line")
    p.add_argument("--no-parse", action="store_true", help="skip the morphotactic parser")
    for i in range(1, 5):
        p.add_argument(f"-{i}", dest=f"tape{i}", metavar="SPEC",
                       help=f"tape {i} morphemes for generate: key[fs]+key ...")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, list(args.args))
    except (UsageError, InputError, CorpusError, PackError, FileNotFoundError, ValueError) as exc:
        print(f"mtl: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
