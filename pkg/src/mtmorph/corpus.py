"""Conformance corpora: one case per line, tab separated.

    direction <TAB> input <TAB> expected    # citation

Directions:
  analyze        expected analyses must all be found
  analyze-exact  expected analyses must be exactly the analyses found
  generate       exact set of surface forms (morphotactically filtered)
  generate-raw   exact set of surface forms of the two-level module alone

An analysis is written as the entry keys of its morphemes in emission
order joined by ``+``; alternatives are separated by `` | `` and ``-``
stands for none.  Analysis input is ``word`` or ``word@category``.
Generation input is ``1=key[fs]+key 2=key ...``; expected forms are comma
separated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import analyze, generate_derivations
from .featlogic import parse_fs
from .morphotactics import emit, parse

DIRECTIONS = ("analyze", "analyze-exact", "generate", "generate-raw")


class CorpusError(ValueError):
    pass


@dataclass
class CorpusCase:
    direction: str
    input: str
    expected: frozenset
    citation: str = ""
    line: int = 0


@dataclass
class CaseResult:
    case: CorpusCase
    passed: bool
    got: frozenset
    error: str = ""

    def diff(self) -> str:
        if self.error:
            return self.error
        missing = sorted(self.case.expected - self.got)
        extra = sorted(self.got - self.case.expected)
        parts = []
        if missing:
            parts.append("missing: " + ", ".join(missing))
        if extra and self.case.direction != "analyze":
            parts.append("unexpected: " + ", ".join(extra))
        return "; ".join(parts)


@dataclass
class Report:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def format(self) -> str:
        lines = []
        for r in self.results:
            c = r.case
            status = "PASS" if r.passed else "FAIL"
            line = f"{status}  {c.direction:<13} {c.input}"
            if c.citation:
                line += f"  ({c.citation})"
            if not r.passed:
                line += "\n      " + r.diff()
            lines.append(line)
        lines.append(f"{self.passed}/{self.total} pass")
        return "\n".join(lines)


def _split_set(text: str, sep: str) -> frozenset:
    text = text.strip()
    if text == "-":
        return frozenset()
    return frozenset(t.strip() for t in text.split(sep) if t.strip())


def parse_corpus(text: str) -> list:
    cases = []
    for n, raw in enumerate(text.splitlines(), 1):
        body, _, citation = raw.partition("#")
        if not body.strip():
            continue
        cols = [c.strip() for c in body.rstrip().split("\t") if c.strip()]
        if len(cols) != 3:
            raise CorpusError(f"line {n}: expected 3 tab-separated fields, got {len(cols)}")
        direction, inp, expected = cols
        if direction not in DIRECTIONS:
            raise CorpusError(f"line {n}: unknown direction {direction!r}")
        sep = "," if direction.startswith("generate") else "|"
        cases.append(CorpusCase(direction, inp, _split_set(expected, sep), citation.strip(), n))
    return cases


def analysis_label(d) -> str:
    return "+".join(m.entry.key for m in emit(d))


def full_analyses(word, pack, target: Optional[str] = None) -> list:
    """(derivation, parse trees) pairs that the morphotactics accepts."""
    goal = target if target is not None else pack.start
    out = []
    for d in analyze(word, pack):
        trees = parse(emit(d), pack.cf_rules, goal) if pack.cf_rules else [None]
        if trees:
            out.append((d, trees))
    return out


def parse_tape_spec(spec: str, tree: int, pack) -> list:
    """``key[fs]+key`` -> list of alternatives, each a list of (entry, fs)."""
    options = [[]]
    for item in (s for s in spec.split("+") if s.strip()):
        item = item.strip()
        key, fs = item, None
        if "[" in item:
            key, rest = item.split("[", 1)
            fs = parse_fs("[" + rest)
        entries = pack.lexicon.lookup(tree, key)
        if not entries:
            raise CorpusError(f"no entry with key {key!r} on tree {tree}")
        options = [o + [(e, fs)] for o in options for e in entries]
    return options


def parse_generate_input(text: str, pack) -> list:
    """All per-tape input combinations described by ``1=key 2=key ...``."""
    specs = {}
    for part in text.split():
        tape, sep, spec = part.partition("=")
        if not sep or not tape.isdigit() or not 1 <= int(tape) <= pack.tapes:
            raise CorpusError(f"bad tape spec {part!r}")
        specs[int(tape)] = spec
    combos = [[]]
    for i in range(1, pack.tapes + 1):
        alts = parse_tape_spec(specs[i], i, pack) if i in specs else [[]]
        combos = [c + [a] for c in combos for a in alts]
    return combos


def generate_forms(tapes, pack, use_parser: bool = True, target: Optional[str] = None) -> set:
    out = set()
    for d in generate_derivations(tapes, pack):
        if use_parser and pack.cf_rules and not parse(emit(d), pack.cf_rules, target):
            continue
        out.add(d.word)
    return out


def run_case(pack, case: CorpusCase) -> CaseResult:
    try:
        if case.direction.startswith("analyze"):
            word, _, target = case.input.partition("@")
            got = frozenset(analysis_label(d) for d, _ in full_analyses(word, pack, target or None))
            if case.direction == "analyze":
                ok = case.expected <= got
            else:
                ok = got == case.expected
        else:
            got = set()
            for tapes in parse_generate_input(case.input, pack):
                got |= generate_forms(tapes, pack, case.direction == "generate")
            got = frozenset(got)
            ok = got == case.expected
    except (CorpusError, ValueError) as exc:
        return CaseResult(case, False, frozenset(), str(exc))
    return CaseResult(case, ok, got)


def run_corpus(pack, cases) -> Report:
    return Report([run_case(pack, c) for c in cases])
