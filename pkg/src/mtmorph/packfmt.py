"""Text format for grammar packs: parsing, printing and validation.

Syntax overview (line oriented, ``#`` starts a comment)::

    tapes 3
    surface a i u k t b
    class Cslot = c1 c2 c3 c4
    start verb
    rule R2 "Consonants": * - X - * => * - (C,X,_) - * where C in Cslot
    rule R9: * - _ - * => * - (_,_,_,_) - * feat: ([measure=(2,5)]; []; []; [])
    lexicon root tree 2 {
      k t b : root[measure=(1-8,10), perf_vowel=a]
    }
    grammar {
      verb[measure=M] -> verb_stem[measure=M] vim[]
    }

Surface contexts are token sequences; ``*`` alone means any context and
``.#.`` anchors the pattern at the word edge.  Lexical contexts and LEX are
n-tuples ``(p1,p2,...)`` whose positions are ``*`` (any string), ``_`` or
empty (nothing) or space separated tokens.  A trailing ``...`` on the left
lexical context requests the nearest-occurrence semantics.  Capitalised
tokens are variables; ``\\H`` writes a literal capital symbol.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .featlogic import FeatureStructure, format_fs, parse_fs
from .lexicon import DeclarationError, LexiconStore, LexVar, MorphemeEntry
from .morphotactics import CFRule
from .rules import (
    ANY,
    BOUNDARY,
    Constraint,
    LexContext,
    Rule,
    RVar,
    SurfaceContext,
    Sym,
)

EDGE = ".#."
ELLIPSIS = "..."


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.severity}: {self.message}"


class PackError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass
class GrammarPack:
    tapes: int
    classes: dict = field(default_factory=dict)
    surface_order: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    entries: list = field(default_factory=list)
    lexica: list = field(default_factory=list)  # (name, tree, vars)
    cf_rules: list = field(default_factory=list)
    start: Optional[str] = None
    source: str = "<pack>"
    lexicon: LexiconStore = None

    def __post_init__(self):
        if self.lexicon is None:
            self.lexicon = LexiconStore(self.tapes).extend(self.entries)

    @property
    def surface(self) -> frozenset:
        return frozenset(self.surface_order)

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def structure(self):
        """Comparable snapshot ignoring source positions."""
        rules = tuple((r.name, r.obligatory, r.lsc, r.surf, r.rsc, r.llc, r.lex, r.rlc,
                       r.features, r.constraints, r.description) for r in self.rules)
        cfs = tuple((c.lhs, c.lhs_fs, c.rhs) for c in self.cf_rules)
        return (self.tapes, tuple(sorted((k, tuple(sorted(v))) for k, v in self.classes.items())),
                tuple(self.surface_order), rules, tuple(self.entries), cfs, self.start)


# -- lexical helpers -------------------------------------------------------

_QUOTED = re.compile(r'"([^"]*)"')


def _strip_comment(line: str) -> str:
    inq = False
    for i, ch in enumerate(line):
        if ch == '"':
            inq = not inq
        elif ch == "#" and not inq and (i == 0 or line[i - 1].isspace()):
            if line[i:i + 2] != "#." and line[i - 1:i + 2] != ".#.":
                return line[:i]
    return line


def _split_top(text: str, sep: str) -> list:
    """Split on ``sep`` outside (), [] and {}."""
    out, cur, depth = [], [], 0
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def _tokens(text: str) -> list:
    """Whitespace tokens, keeping parenthesised groups whole."""
    out, cur, depth = [], [], 0
    for ch in text:
        if ch == "(":
            if depth == 0 and cur:
                out.append("".join(cur))
                cur = []
            depth += 1
            cur.append(ch)
        elif ch == ")":
            depth -= 1
            cur.append(ch)
            if depth == 0:
                out.append("".join(cur))
                cur = []
        elif ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if depth:
        raise ValueError(f"unbalanced parentheses in {text.strip()!r}")
    if cur:
        out.append("".join(cur))
    return out


def _symbol(tok: str):
    if tok.startswith("\\"):
        return Sym(tok[1:])
    if tok[:1].isupper():
        return RVar(tok)
    return Sym(tok)


def _sym_text(p) -> str:
    return str(p)


class _Parser:
    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.source = source
        self.diags: list = []
        self.tapes: Optional[int] = None
        self.classes: dict = {}
        self.surface: list = []
        self.rules: list = []
        self.entries: list = []
        self.lexica: list = []
        self.cf_rules: list = []
        self.start: Optional[str] = None

    def error(self, lineno: int, msg: str) -> None:
        self.diags.append(Diagnostic("error", f"{self.source}:{lineno}", msg))

    # -- driver
    def run(self) -> None:
        i = 0
        n = len(self.lines)
        while i < n:
            lineno = i + 1
            line = _strip_comment(self.lines[i]).strip()
            i += 1
            if not line:
                continue
            head = line.split(None, 1)[0]
            rest = line[len(head):].strip()
            try:
                if head == "tapes":
                    self.tapes = int(rest)
                    if self.tapes < 1:
                        raise ValueError("tape count must be >= 1")
                elif head == "surface":
                    for t in rest.split():
                        if t not in self.surface:
                            self.surface.append(t)
                elif head == "class":
                    name, _, members = rest.partition("=")
                    name = name.strip()
                    if not name or not members.strip():
                        raise ValueError("expected 'class Name = sym sym ...'")
                    self.classes[name] = frozenset(members.split())
                elif head == "start":
                    self.start = rest
                elif head == "rule":
                    self._need_tapes()
                    self.rules.append(self._rule(rest, lineno, len(self.rules) + 1))
                elif head in ("lexicon", "grammar"):
                    body, i = self._block(line, i, lineno)
                    if head == "lexicon":
                        self._lexicon(rest.split("{", 1)[0].strip(), body)
                    else:
                        self._grammar(body)
                else:
                    raise ValueError(f"unknown section {head!r}")
            except (ValueError, DeclarationError) as exc:
                self.error(lineno, str(exc))
        if self.tapes is None:
            self.error(1, "missing 'tapes' declaration")

    def _need_tapes(self) -> None:
        if self.tapes is None:
            raise ValueError("'tapes' must precede rules and lexica")

    def _block(self, line: str, i: int, lineno: int):
        """Collect the lines of a ``{ ... }`` block starting at ``line``."""
        if "{" not in line:
            raise ValueError("expected '{'")
        body = []
        first = line.split("{", 1)[1]
        if "}" in first:
            body.append((lineno, first.split("}", 1)[0]))
            return body, i
        if first.strip():
            body.append((lineno, first))
        while i < len(self.lines):
            raw = _strip_comment(self.lines[i])
            i += 1
            if "}" in raw:
                body.append((i, raw.split("}", 1)[0]))
                return body, i
            body.append((i, raw))
        raise ValueError("unterminated block")

    # -- rules
    def _rule(self, text: str, lineno: int, index: int) -> Rule:
        head, sep, body = text.partition(":")
        if not sep:
            raise ValueError("expected 'rule NAME: ...'")
        m = _QUOTED.search(head)
        desc = m.group(1) if m else ""
        name = _QUOTED.sub("", head).strip()
        if not name or " " in name:
            raise ValueError(f"bad rule name {name!r}")
        feats = ()
        if "feat:" in body:
            body, ftext = body.split("feat:", 1)
            feats = self._features(ftext.strip())
        constraints = ()
        parts = re.split(r"\bwhere\b", body, maxsplit=1)
        body = parts[0]
        if len(parts) == 2:
            constraints = self._constraints(parts[1])
        if "<=>" in body:
            surf_side, lex_side = body.split("<=>", 1)
            oblig = True
        elif "=>" in body:
            surf_side, lex_side = body.split("=>", 1)
            oblig = False
        else:
            raise ValueError("rule needs '=>' or '<=>'")
        s = self._three(surf_side)
        l = self._three(lex_side)
        lsc = self._surface_ctx(s[0], left=True)
        surf = tuple(_symbol(t) for t in s[1] if t != "_")
        rsc = self._surface_ctx(s[2], left=False)
        llc = self._lex_ctx(l[0], allow_ellipsis=True)
        lex = self._lex(l[1])
        rlc = self._lex_ctx(l[2], allow_ellipsis=False)
        return Rule(name, oblig, lsc, surf, rsc, llc, lex, rlc, feats, constraints,
                    desc, index, lineno)

    @staticmethod
    def _three(text: str) -> list:
        toks = _tokens(text)
        parts, cur = [], []
        for t in toks:
            if t == "-":
                parts.append(cur)
                cur = []
            else:
                cur.append(t)
        parts.append(cur)
        if len(parts) != 3:
            raise ValueError(f"expected 'A - B - C', got {text.strip()!r}")
        return parts

    def _surface_ctx(self, toks: list, left: bool) -> SurfaceContext:
        toks = list(toks)
        anchored = False
        edge = 0 if left else -1
        if toks and toks[edge] == EDGE:
            anchored = True
            toks.pop(edge)
        elif toks and toks[edge] == "*":
            toks.pop(edge)
        if "*" in toks or EDGE in toks:
            raise ValueError("'*' and '.#.' are only allowed at the open end of a surface context")
        return SurfaceContext(tuple(_symbol(t) for t in toks), anchored)

    def _tuple(self, tok: str, allow_any: bool) -> tuple:
        n = self.tapes
        if tok.startswith("("):
            slots = tok[1:-1].split(",")
        elif n == 1:
            slots = [tok]
        else:
            raise ValueError(f"bare symbol {tok!r} needs a {n}-tuple")
        if len(slots) != n:
            raise ValueError(f"tuple {tok} has arity {len(slots)}, pack has {n} tapes")
        out = []
        for s in slots:
            s = s.strip()
            if s == "*":
                if not allow_any:
                    raise ValueError("'*' is not allowed in LEX")
                out.append(ANY)
            elif s in ("", "_"):
                out.append(())
            else:
                out.append(tuple(_symbol(t) for t in s.split()))
        return tuple(out)

    def _lex(self, toks: list) -> tuple:
        if not toks:
            raise ValueError("empty LEX")
        if self.tapes == 1 and not any(t.startswith("(") for t in toks):
            if toks == ["_"]:
                return ((),)
            return (tuple(_symbol(t) for t in toks),)
        acc = [[] for _ in range(self.tapes)]
        for t in toks:
            for i, pos in enumerate(self._tuple(t, allow_any=False)):
                acc[i].extend(pos)
        return tuple(tuple(a) for a in acc)

    def _lex_ctx(self, toks: list, allow_ellipsis: bool) -> LexContext:
        toks = list(toks)
        ellipsis = False
        if toks and toks[-1] == ELLIPSIS:
            if not allow_ellipsis:
                raise ValueError("ellipsis is only allowed in the left lexical context")
            ellipsis = True
            toks.pop()
        if toks == ["*"]:
            if ellipsis:
                raise ValueError("ellipsis needs at least one tuple")
            return LexContext()
        if ellipsis and not toks:
            raise ValueError("ellipsis needs at least one tuple")
        return LexContext(tuple(self._tuple(t, allow_any=True) for t in toks), ellipsis)

    def _constraints(self, text: str) -> tuple:
        out = []
        for part in _split_top(text, ","):
            part = part.strip()
            if not part:
                continue
            m = re.match(r"^(\w+)\s*(not in|in|!=|=)\s*(.+)$", part)
            if not m:
                raise ValueError(f"bad constraint {part!r}")
            var, op, rhs = m.group(1), m.group(2), m.group(3).strip()
            if op in ("!=", "="):
                members, label = frozenset([rhs.lstrip("\\")]), rhs
            elif rhs.startswith("{"):
                if not rhs.endswith("}"):
                    raise ValueError(f"unbalanced set in {part!r}")
                members = frozenset(t.strip() for t in rhs[1:-1].split(",") if t.strip())
                label = ""
            else:
                if rhs not in self.classes:
                    raise ValueError(f"unknown class {rhs!r}")
                members, label = self.classes[rhs], rhs
            out.append(Constraint(var, members, op in ("not in", "!="), label if op not in ("!=", "=") else ""))
        return tuple(out)

    def _features(self, text: str) -> tuple:
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError("rule features must be written ([..]; [..]; ...)")
        parts = [p.strip() for p in text[1:-1].split(";")]
        if len(parts) != self.tapes:
            raise ValueError(f"{len(parts)} rule feature structures, pack has {self.tapes} tapes")
        return tuple(parse_fs(p or "[]") for p in parts)

    # -- lexica
    def _lexicon(self, header: str, body: list) -> None:
        self._need_tapes()
        m = re.match(r"^(\S+)(?:\s+tree\s+(\d+))?(?:\s+vars\s+(.+))?$", header)
        if not m:
            raise ValueError(f"bad lexicon header {header!r}")
        name = m.group(1)
        tree = int(m.group(2) or 1)
        if tree > self.tapes:
            raise ValueError(f"lexicon {name} on tree {tree}, but only {self.tapes} tapes")
        lvars = {}
        if m.group(3):
            for part in m.group(3).split(","):
                vm = re.match(r"^\s*(\w+)\s+in\s+(\w+)\s*$", part)
                if not vm or vm.group(2) not in self.classes:
                    raise ValueError(f"bad lexicon variable {part.strip()!r}")
                lvars[vm.group(1)] = LexVar(vm.group(1), self.classes[vm.group(2)], vm.group(2))
        self.lexica.append((name, tree, tuple(sorted((v.name, v.cls) for v in lvars.values()))))
        for lineno, raw in body:
            for chunk in raw.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                try:
                    self.entries.append(self._entry(chunk, name, tree, lvars))
                except (ValueError, DeclarationError) as exc:
                    self.error(lineno, str(exc))

    def _entry(self, text: str, lexicon: str, tree: int, lvars: dict) -> MorphemeEntry:
        gloss = ""
        m = _QUOTED.search(text)
        if m:
            gloss = m.group(1)
            text = _QUOTED.sub("", text)
        form_text, sep, rest = text.partition(":")
        if not sep:
            raise ValueError(f"expected 'FORM : cat[...]', got {text!r}")
        form = tuple(lvars.get(t, t) for t in form_text.split())
        key = ""
        km = re.search(r"@(\S+)", rest)
        if km:
            key = km.group(1)
            rest = rest[:km.start()] + rest[km.end():]
        rest = rest.strip()
        cm = re.match(r"^(\w+)\s*:?\s*(\[.*\])?\s*$", rest)
        if not cm:
            raise ValueError(f"bad category/features {rest!r}")
        fs = parse_fs(cm.group(2) or "[]")
        return MorphemeEntry(form, cm.group(1), fs, tree, key, gloss, lexicon)

    # -- grammar
    def _grammar(self, body: list) -> None:
        for lineno, raw in body:
            line = raw.strip()
            if not line:
                continue
            try:
                self.cf_rules.append(self._cf_rule(line, lineno))
            except ValueError as exc:
                self.error(lineno, str(exc))

    def _cf_rule(self, line: str, lineno: int) -> CFRule:
        lhs, sep, rhs = line.partition("->")
        if not sep:
            raise ValueError(f"expected 'lhs -> rhs', got {line!r}")
        scope: dict = {}
        cats = re.findall(r"(\w+)\s*:?\s*(\[[^\]]*\])?", lhs.strip())
        if len(cats) != 1:
            raise ValueError(f"bad grammar lhs {lhs.strip()!r}")
        lcat, lfs = cats[0][0], parse_fs(cats[0][1] or "[]", scope)
        items = re.findall(r"(\w+)\s*:?\s*(\[[^\]]*\])?", rhs)
        if not items:
            raise ValueError("empty grammar rhs")
        rhs_t = tuple((c, parse_fs(f or "[]", scope)) for c, f in items)
        return CFRule(lcat, lfs, rhs_t, lineno)


def parse_pack(text: str, source: str = "<pack>") -> GrammarPack:
    """Parse pack text; raises :class:`PackError` on syntax errors."""
    p = _Parser(text, source)
    p.run()
    if p.diags:
        raise PackError(p.diags)
    try:
        return GrammarPack(p.tapes, p.classes, p.surface, p.rules, p.entries, p.lexica,
                           p.cf_rules, p.start, source)
    except DeclarationError as exc:
        raise PackError([Diagnostic("error", source, str(exc))]) from exc


# -- validation ------------------------------------------------------------


def _seq_vars(items) -> set:
    return {t.name for t in items if isinstance(t, RVar)}


def _tuple_vars(tup) -> set:
    out = set()
    for pos in tup:
        if pos is not ANY:
            out |= _seq_vars(pos)
    return out


def validate(pack: GrammarPack) -> list:
    diags = []

    def add(sev, line, msg):
        diags.append(Diagnostic(sev, f"{pack.source}:{line}", msg))

    if not pack.surface_order:
        add("error", 1, "no surface alphabet declared")
    names = set()
    for r in pack.rules:
        if r.name in names:
            add("error", r.line, f"duplicate rule name {r.name}")
        names.add(r.name)
        if not r.surf and r.is_insertion:
            add("error", r.line, f"rule {r.name}: no progress (empty SURF and empty LEX)")
        bound = _tuple_vars(r.lex) | _seq_vars(r.lsc.tokens)
        for tup in r.llc.patterns:
            bound |= _tuple_vars(tup)
        free = _seq_vars(r.surf) | _seq_vars(r.rsc.tokens)
        for tup in r.rlc.patterns:
            free |= _tuple_vars(tup)
        for v in sorted(free - bound):
            if r.domain(v) is None:
                add("error", r.line, f"rule {r.name}: variable {v} is unbound and unclassed")
        for t in r.surf:
            if isinstance(t, Sym) and pack.surface_order and t.text not in pack.surface:
                add("error", r.line, f"rule {r.name}: surface symbol {t.text!r} not in alphabet")
        for c in r.constraints:
            if c.var not in r.variables():
                add("warning", r.line, f"rule {r.name}: constraint on unused variable {c.var}")
    for i in range(pack.tapes):
        tree = pack.lexicon.tree(i + 1)
        if tree.entries and not any(r.lex[i] for r in pack.rules):
            add("warning", 1, f"tree {i + 1} is never consumed by any rule")
    for r in pack.rules:
        if not r.obligatory:
            continue
        for i, pos in enumerate(r.lex):
            syms = pack.lexicon.tree(i + 1).symbols()
            for t in pos:
                if isinstance(t, Sym) and t.text not in syms:
                    add("warning", r.line,
                        f"obligatory rule {r.name}: LEX symbol {t.text!r} never occurs on tape {i + 1}")
    cats = {e.category for e in pack.entries} | {c.lhs for c in pack.cf_rules}
    for c in pack.cf_rules:
        for cat, _ in c.rhs:
            if cat not in cats:
                add("warning", c.line, f"grammar category {cat!r} is never produced")
    if pack.start is not None and pack.cf_rules and pack.start not in cats:
        add("error", 1, f"start category {pack.start!r} is never produced")
    return diags


def errors(diags) -> list:
    return [d for d in diags if d.severity == "error"]


# -- printing --------------------------------------------------------------


def _fmt_seq(items) -> str:
    return " ".join(_sym_text(t) for t in items)


def _fmt_tuple(tup) -> str:
    slots = []
    for pos in tup:
        if pos is ANY:
            slots.append("*")
        elif not pos:
            slots.append("_")
        else:
            slots.append(_fmt_seq(pos))
    return "(" + ",".join(slots) + ")"


def _fmt_surface_ctx(ctx: SurfaceContext, left: bool) -> str:
    if ctx.trivial:
        return "*"
    body = _fmt_seq(ctx.tokens)
    if ctx.anchored:
        return (EDGE + " " + body).strip() if left else (body + " " + EDGE).strip()
    return ("* " + body) if left else (body + " *")


def _fmt_lex_ctx(ctx: LexContext) -> str:
    if ctx.trivial:
        return "*"
    out = " ".join(_fmt_tuple(t) for t in ctx.patterns)
    return out + (" " + ELLIPSIS if ctx.ellipsis else "")


def format_rule(r: Rule) -> str:
    head = f"rule {r.name}" + (f' "{r.description}"' if r.description else "")
    surf = _fmt_seq(r.surf) or "_"
    arrow = "<=>" if r.obligatory else "=>"
    text = (f"{head}: {_fmt_surface_ctx(r.lsc, True)} - {surf} - {_fmt_surface_ctx(r.rsc, False)}"
            f" {arrow} {_fmt_lex_ctx(r.llc)} - {_fmt_tuple(r.lex)} - {_fmt_lex_ctx(r.rlc)}")
    if r.constraints:
        cs = []
        for c in r.constraints:
            op = "not in" if c.negated else "in"
            rhs = c.label if c.label else "{" + ",".join(sorted(c.members)) + "}"
            cs.append(f"{c.var} {op} {rhs}")
        text += " where " + ", ".join(cs)
    if r.features:
        text += " feat: (" + "; ".join(f"[{format_fs(f)}]" for f in r.features) + ")"
    return text


def format_pack(pack: GrammarPack) -> str:
    lines = [f"tapes {pack.tapes}", "surface " + " ".join(pack.surface_order)]
    for name, members in pack.classes.items():
        lines.append(f"class {name} = " + " ".join(sorted(members)))
    if pack.start:
        lines.append(f"start {pack.start}")
    lines.extend(format_rule(r) for r in pack.rules)
    for name, tree, lvars in pack.lexica:
        header = f"lexicon {name} tree {tree}"
        if lvars:
            header += " vars " + ", ".join(f"{v} in {c}" for v, c in lvars)
        lines.append(header + " {")
        for e in pack.entries:
            if e.lexicon != name or e.tree != tree:
                continue
            form = " ".join(str(t) for t in e.form)
            default = "".join(str(t) for t in e.form)
            item = f"  {form} : {e.category}[{format_fs(e.features)}]"
            if e.key != default:
                item += f" @{e.key}"
            if e.gloss:
                item += f' "{e.gloss}"'
            lines.append(item)
        lines.append("}")
    if pack.cf_rules:
        lines.append("grammar {")
        lines.extend(f"  {c}" for c in pack.cf_rules)
        lines.append("}")
    return "\n".join(lines) + "\n"


# -- loading ---------------------------------------------------------------

PACK_DIR = Path(__file__).parent / "packs"


def find_pack(name: str) -> Path:
    """Resolve a pack name via the filesystem, ``MTL_PACK_PATH`` and the
    shipped pack directory."""
    p = Path(name)
    if p.exists():
        return p
    dirs = [d for d in os.environ.get("MTL_PACK_PATH", "").split(os.pathsep) if d]
    dirs.append(str(PACK_DIR))
    for d in dirs:
        for cand in (Path(d) / name, Path(d) / (name + ".mtg")):
            if cand.exists():
                return cand
    raise FileNotFoundError(f"pack {name!r} not found")


def load_pack(name: str, check: bool = True) -> GrammarPack:
    path = find_pack(name)
    pack = parse_pack(path.read_text(encoding="utf-8"), str(path.name))
    if check:
        errs = errors(validate(pack))
        if errs:
            raise PackError(errs)
    return pack
