"""Multi-tape two-level interpreter.

Analysis and generation share one depth-first search.  A search state holds
the elements placed so far, one cursor per lexical tape and the right
contexts (RLC, and RSC when generating) still waiting for material to the
right.  Lexical tapes are read through the lexicon tries when analysing and
from the given morpheme sequences when generating.

Every derivation that reaches the goal is re-verified element by element
against the declarative rule semantics and then checked for coherence with
the obligatory rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Iterator, Optional, Sequence

from .featlogic import EMPTY_ENV, FeatureStructure, format_fs, instantiate, resolve, unify
from .lexicon import LexVar, MorphemeEntry
from .rules import (
    BOUNDARY,
    Element,
    Rule,
    RVar,
    Sym,
    bind,
    empty_tuple,
    features_for,
    llc_matches,
    match_lsc,
    match_rsc,
    match_seq,
    match_tuple,
    rlc_match,
    surf_instances,
)

if TYPE_CHECKING:
    from .packfmt import GrammarPack


class InputError(ValueError):
    """Bad analysis/generation input (unknown symbol, misplaced entry)."""


@dataclass(frozen=True)
class MorphemeInstance:
    entry: MorphemeEntry
    features: FeatureStructure
    tape: int
    ordinal: int
    closed_at: int
    bindings: tuple = ()

    @property
    def category(self) -> str:
        return self.entry.category

    def spelled(self) -> tuple:
        binds = dict(self.bindings)
        return tuple(binds.get(t.name, t.name) if isinstance(t, LexVar) else t
                     for t in self.entry.form)

    def __str__(self) -> str:
        return f"{{{''.join(self.spelled())}}} {self.category}:[{format_fs(self.features)}]"


@dataclass
class Derivation:
    elements: tuple
    morphemes: tuple  # per tape: tuple of MorphemeInstance
    tapes: int

    @property
    def surface(self) -> tuple:
        return tuple(t for e in self.elements for t in e.surface)

    @property
    def word(self) -> str:
        return "".join(self.surface)

    def tape_content(self, i: int) -> tuple:
        return tuple(t for e in self.elements for t in e.lex[i])

    @property
    def rule_trace(self) -> tuple:
        return tuple(e.rule.name for e in self.elements)

    def morpheme(self, tape: int, ordinal: Optional[int]) -> Optional[MorphemeInstance]:
        if ordinal is None:
            return None
        ms = self.morphemes[tape]
        return ms[ordinal] if 0 <= ordinal < len(ms) else None

    def all_morphemes(self) -> list:
        return [m for tape in self.morphemes for m in tape]

    def sort_key(self):
        return (len(self.elements),
                tuple(e.rule.index for e in self.elements),
                tuple(e.surface for e in self.elements),
                tuple(tuple(m.entry.key for m in tape) for tape in self.morphemes))

    def identity(self):
        return (tuple(e.key() for e in self.elements),
                tuple(tuple((m.entry, m.bindings) for m in tape) for tape in self.morphemes))


# -- tape cursors ----------------------------------------------------------


@dataclass(frozen=True)
class _TrieCursor:
    pos: object  # TreePosition
    pending: Optional[FeatureStructure] = None
    closed: tuple = ()  # (entry, fs, bindings, closed_at)
    consumed: int = 0


class _TrieTape:
    """Lexical tape read through a lexicon tree (analysis)."""

    def __init__(self, tree, cap: int):
        self.tree = tree
        self.cap = cap

    def start(self):
        return _TrieCursor(self.tree.start())

    def ordinal(self, cur) -> int:
        return len(cur.closed)

    def constrain(self, cur, fs, env):
        if cur.pending is None:
            return replace(cur, pending=fs), env
        res = unify(cur.pending, fs, env)
        if res is None:
            return None
        return replace(cur, pending=res[0]), res[1]

    def advance(self, cur, want, env, at: int):
        if cur.consumed >= self.cap:
            return
        syms = [want] if want is not None else self.tree.next_symbols(cur.pos)
        for sym in syms:
            for pos in self.tree.step(cur.pos, sym):
                if sym != BOUNDARY:
                    yield sym, replace(cur, pos=pos, consumed=cur.consumed + 1), env
                    continue
                for entry in self.tree.closed_entries(pos):
                    fs = instantiate(entry.features)
                    fenv = env
                    if cur.pending is not None:
                        res = unify(fs, cur.pending, env)
                        if res is None:
                            continue
                        fs, fenv = res
                    yield sym, _TrieCursor(self.tree.start(), None,
                                           cur.closed + ((entry, fs, pos.bindings, at),),
                                           cur.consumed + 1), fenv

    def done(self, cur) -> bool:
        return cur.pos.at_root and cur.pending is None

    def instances(self, cur, env, tape: int) -> tuple:
        return tuple(MorphemeInstance(entry, resolve(fs, env), tape, k, at, binds)
                     for k, (entry, fs, binds, at) in enumerate(cur.closed))


@dataclass(frozen=True)
class _FixedCursor:
    idx: int = 0
    fs: tuple = ()
    binds: tuple = ()  # ((ordinal, name), token)
    closed_at: tuple = ()


class _FixedTape:
    """Lexical tape with known contents (generation)."""

    def __init__(self, entries: Sequence[tuple]):
        self.entries = [e for e, _ in entries]
        self.overrides = [o for _, o in entries]
        self.tokens = []
        for k, entry in enumerate(self.entries):
            for tok in entry.path:
                self.tokens.append((tok, k))

    def start(self, env):
        fs = []
        for entry, override in zip(self.entries, self.overrides):
            inst = instantiate(entry.features)
            if override is not None:
                res = unify(inst, override, env)
                if res is None:
                    return None
                inst, env = res
            fs.append(inst)
        return _FixedCursor(0, tuple(fs), (), ()), env

    def ordinal(self, cur) -> Optional[int]:
        return self.tokens[cur.idx][1] if cur.idx < len(self.tokens) else None

    def constrain(self, cur, fs, env):
        k = self.ordinal(cur)
        if k is None:
            return None
        res = unify(cur.fs[k], fs, env)
        if res is None:
            return None
        return replace(cur, fs=cur.fs[:k] + (res[0],) + cur.fs[k + 1:]), res[1]

    def advance(self, cur, want, env, at: int):
        if cur.idx >= len(self.tokens):
            return
        tok, k = self.tokens[cur.idx]
        closed = cur.closed_at + ((at,) if tok == BOUNDARY else ())
        if not isinstance(tok, LexVar):
            if want is None or want == tok:
                yield tok, replace(cur, idx=cur.idx + 1, closed_at=closed), env
            return
        bound = dict(cur.binds).get((k, tok.name))
        if bound is not None:
            if want is None or want == bound:
                yield bound, replace(cur, idx=cur.idx + 1), env
            return
        cands = [want] if want is not None else sorted(tok.members)
        for sym in cands:
            if sym in tok.members:
                yield sym, replace(cur, idx=cur.idx + 1,
                                   binds=cur.binds + (((k, tok.name), sym),)), env

    def done(self, cur) -> bool:
        return cur.idx == len(self.tokens)

    def instances(self, cur, env, tape: int) -> tuple:
        binds = dict(cur.binds)
        out = []
        for k, entry in enumerate(self.entries):
            b = tuple(sorted((name, t) for (kk, name), t in binds.items() if kk == k))
            out.append(MorphemeInstance(entry, resolve(cur.fs[k], env), tape, k,
                                        cur.closed_at[k], b))
        return tuple(out)


# -- search ----------------------------------------------------------------


@dataclass(frozen=True)
class _Pending:
    rule: Rule
    env: tuple  # frozen rule bindings
    rlc: tuple = ()
    rsc: tuple = ()
    rsc_anchored: bool = False
    rsc_started: bool = False


@dataclass(frozen=True)
class _State:
    elements: tuple
    surface: tuple
    cursors: tuple
    env: object
    pending: tuple = ()


def _freeze(env: dict) -> tuple:
    return tuple(sorted(env.items()))


class _Search:
    def __init__(self, pack: "GrammarPack", tapes, word: Optional[tuple], surface_cap: int):
        self.pack = pack
        self.n = pack.tapes
        self.tapes = tapes
        self.word = word
        self.surface_cap = surface_cap
        self.results: dict = {}

    # public driver
    def run(self, state: _State) -> list:
        self._dfs(state)
        return sorted(self.results.values(), key=Derivation.sort_key)

    def _dfs(self, state: _State) -> None:
        if self._at_goal(state):
            self._finish(state)
        for rule in self.pack.rules:
            for nxt in self._expand(state, rule):
                self._dfs(nxt)

    def _at_goal(self, state: _State) -> bool:
        if self.word is not None and len(state.surface) != len(self.word):
            return False
        return all(t.done(c) for t, c in zip(self.tapes, state.cursors))

    # ---------------------------------------------------------------
    def _lex_options(self, state: _State, rule: Rule):
        at = len(state.elements)

        def tape_step(i, cursors, fenv, renv, lex, refs):
            if i == self.n:
                yield cursors, fenv, renv, tuple(lex), tuple(refs)
                return
            tape = self.tapes[i]
            cur = cursors[i]
            refs = refs + [tape.ordinal(cur)]
            fs = features_for(rule, i)
            if fs is not None:
                res = tape.constrain(cur, instantiate(fs), fenv)
                if res is None:
                    return
                cur, fenv = res
            pattern = rule.lex[i]

            def consume(j, cur, fenv, renv, acc):
                if j == len(pattern):
                    new = cursors[:i] + (cur,) + cursors[i + 1:]
                    yield from tape_step(i + 1, new, fenv, renv, lex + [tuple(acc)], refs)
                    return
                p = pattern[j]
                if isinstance(p, Sym):
                    want = p.text
                else:
                    want = renv.get(p.name)
                for tok, cur2, fenv2 in tape.advance(cur, want, fenv, at):
                    renv2 = renv if isinstance(p, Sym) else bind(rule, renv, p.name, tok)
                    if renv2 is None:
                        continue
                    yield from consume(j + 1, cur2, fenv2, renv2, acc + [tok])

            yield from consume(0, cur, fenv, renv, [])

        yield from tape_step(0, state.cursors, state.env, {}, [], [])

    def _expand(self, state: _State, rule: Rule) -> Iterator[_State]:
        history = [e.lex for e in state.elements]
        pos = len(state.surface)
        prev = state.elements[-1] if state.elements else None
        for cursors, fenv, renv0, lex, refs in self._lex_options(state, rule):
            for renv in llc_matches(rule, history, renv0, self.n):
                renv = match_lsc(rule, rule.lsc, state.surface, renv)
                if renv is None:
                    continue
                for seg, renv2 in self._surface_options(rule, pos, renv):
                    if (rule.is_insertion and prev is not None and prev.rule is rule
                            and prev.bindings == renv2):
                        continue
                    if not seg and not any(lex):
                        continue
                    pending_new = []
                    if self.word is not None:
                        renv3 = match_rsc(rule, rule.rsc, self.word[pos + len(seg):], renv2)
                        if renv3 is None:
                            continue
                    else:
                        renv3 = renv2
                    elem = Element(seg, lex, rule, renv3, refs)
                    surface = state.surface + seg
                    if self.word is None and len(surface) > self.surface_cap:
                        continue
                    pend = self._discharge(state.pending, elem)
                    if pend is None:
                        continue
                    if self.word is None and not rule.rsc.trivial:
                        pending_new.append(_Pending(rule, _freeze(renv3), (),
                                                    tuple(rule.rsc.tokens), rule.rsc.anchored))
                    if rule.rlc.patterns:
                        if pending_new:
                            pending_new[0] = replace(pending_new[0], rlc=rule.rlc.patterns)
                        else:
                            pending_new.append(_Pending(rule, _freeze(renv3), rule.rlc.patterns))
                    yield _State(state.elements + (elem,), surface, cursors, fenv,
                                 pend + tuple(pending_new))

    def _surface_options(self, rule: Rule, pos: int, renv: dict):
        k = len(rule.surf)
        if self.word is not None:
            seg = self.word[pos:pos + k]
            if len(seg) != k:
                return
            e = match_seq(rule, rule.surf, seg, renv)
            if e is not None:
                yield tuple(seg), e
            return
        alphabet = self.pack.surface
        for seg, e in surf_instances(rule, renv, alphabet):
            if all(t in alphabet for t in seg):
                yield seg, e

    def _discharge(self, pending: tuple, elem: Element) -> Optional[tuple]:
        out = []
        for p in pending:
            env = dict(p.env)
            rlc, rsc, started = p.rlc, p.rsc, p.rsc_started
            if rlc:
                env = match_tuple(p.rule, rlc[0], elem.lex, env)
                if env is None:
                    return None
                rlc = rlc[1:]
            if elem.surface:
                if rsc:
                    take = min(len(rsc), len(elem.surface))
                    env = match_seq(p.rule, rsc[:take], elem.surface[:take], env)
                    if env is None:
                        return None
                    if take < len(elem.surface) and p.rsc_anchored:
                        return None
                    rsc = rsc[take:]
                    started = True
                elif p.rsc_anchored:
                    return None
            if rlc or rsc or p.rsc_anchored:
                out.append(_Pending(p.rule, _freeze(env), rlc, rsc, p.rsc_anchored, started))
        return tuple(out)

    def _end_ok(self, pending: tuple) -> bool:
        end = empty_tuple(self.n)
        for p in pending:
            env = dict(p.env)
            for pat in p.rlc:
                env = match_tuple(p.rule, pat, end, env)
                if env is None:
                    return False
            if p.rsc:
                return False
        return True

    def _finish(self, state: _State) -> None:
        if not self._end_ok(state.pending):
            return
        morphemes = tuple(t.instances(c, state.env, i + 1)
                          for i, (t, c) in enumerate(zip(self.tapes, state.cursors)))
        elems = []
        for e in state.elements:
            refs = tuple(r if r is not None and r < len(morphemes[i]) else None
                         for i, r in enumerate(e.morphs))
            elems.append(Element(e.surface, e.lex, e.rule, e.bindings, refs))
        d = Derivation(tuple(elems), morphemes, self.n)
        if not verify(d, self.pack.rules):
            return
        key = d.identity()
        if key not in self.results:
            self.results[key] = d


# -- declarative checks ----------------------------------------------------


def _feature_ok(rule: Rule, d: Derivation, j: int) -> bool:
    e = d.elements[j]
    for i in range(d.tapes):
        fs = features_for(rule, i)
        if fs is None:
            continue
        m = d.morpheme(i, e.morphs[i])
        if m is None or unify(m.features, instantiate(fs), EMPTY_ENV) is None:
            return False
    return True


def _context_bindings(rule: Rule, d: Derivation, j: int, env: dict) -> Iterator[dict]:
    e = d.elements[j]
    left = tuple(t for x in d.elements[:j] for t in x.surface)
    right = tuple(t for x in d.elements[j + 1:] for t in x.surface)
    env = match_lsc(rule, rule.lsc, left, env)
    if env is None:
        return
    env = match_rsc(rule, rule.rsc, right, env)
    if env is None:
        return
    history = [x.lex for x in d.elements[:j]]
    following = [x.lex for x in d.elements[j + 1:]]
    anchor = match_tuple(rule, rule.lex, e.lex, {})
    for env2 in llc_matches(rule, history, env, d.tapes, anchor):
        env3 = rlc_match(rule, following, env2, d.tapes)
        if env3 is not None:
            yield env3


def licensing_bindings(rule: Rule, d: Derivation, j: int) -> Iterator[dict]:
    """Bindings under which ``rule`` licenses element ``j`` of ``d``."""
    e = d.elements[j]
    env = match_tuple(rule, rule.lex, e.lex, {})
    if env is None:
        return
    env = match_seq(rule, rule.surf, e.surface, env)
    if env is None or not _feature_ok(rule, d, j):
        return
    yield from _context_bindings(rule, d, j, env)


def element_match(rule: Rule, d: Derivation, j: int) -> Optional[dict]:
    """First binding licensing element ``j`` by ``rule``, or None."""
    return next(licensing_bindings(rule, d, j), None)


def coerced_violations(d: Derivation, rules: Iterable[Rule]) -> list:
    """(element index, rule) pairs where an obligatory rule's lexical side
    and contexts hold but the element's surface is not its SURF."""
    out = []
    for j, e in enumerate(d.elements):
        for r in rules:
            if not r.obligatory:
                continue
            env = match_tuple(r, r.lex, e.lex, {})
            if env is None or not _feature_ok(r, d, j):
                continue
            for env2 in _context_bindings(r, d, j, env):
                if match_seq(r, r.surf, e.surface, env2) is None:
                    out.append((j, r))
                    break
    return out


def coherence_check(d: Derivation, rules: Iterable[Rule]) -> bool:
    return not coerced_violations(d, rules)


def verify(d: Derivation, rules: Sequence[Rule]) -> bool:
    """Totality, licensing of every element, and coherence."""
    for j, e in enumerate(d.elements):
        if not e.surface and not any(e.lex):
            return False
        env = element_match(e.rule, d, j)
        if env is None:
            return False
        e.bindings = env
    for i, tape in enumerate(d.morphemes):
        spelled = tuple(t for m in tape for t in m.spelled() + (BOUNDARY,))
        if spelled != d.tape_content(i):
            return False
    return coherence_check(d, rules)


# -- entry points ----------------------------------------------------------


def tokenize(word: str, alphabet) -> tuple:
    """Split ``word`` into surface symbols by longest match."""
    if isinstance(word, (tuple, list)):
        toks = tuple(word)
        for t in toks:
            if t not in alphabet:
                raise InputError(f"unknown surface symbol {t!r}")
        return toks
    longest = max((len(a) for a in alphabet), default=1)
    out, i = [], 0
    while i < len(word):
        for k in range(min(longest, len(word) - i), 0, -1):
            if word[i:i + k] in alphabet:
                out.append(word[i:i + k])
                i += k
                break
        else:
            raise InputError(f"unknown surface symbol {word[i]!r} in {word!r}")
    return tuple(out)


def analyze(word, pack: "GrammarPack") -> list:
    """All licensed, coherent derivations of the surface ``word``."""
    toks = tokenize(word, pack.surface)
    cap = 2 * len(toks) + 8
    tapes = [_TrieTape(pack.lexicon.tree(i + 1), cap) for i in range(pack.tapes)]
    start = _State((), (), tuple(t.start() for t in tapes), EMPTY_ENV)
    return _Search(pack, tapes, toks, 0).run(start)


def _normalize_tapes(tapes, pack: "GrammarPack") -> list:
    if len(tapes) > pack.tapes:
        raise InputError(f"{len(tapes)} tapes given, pack has {pack.tapes}")
    out = []
    for i in range(pack.tapes):
        items = list(tapes[i]) if i < len(tapes) and tapes[i] else []
        norm = []
        for item in items:
            entry, override = item if isinstance(item, tuple) else (item, None)
            if entry.tree != i + 1:
                raise InputError(f"entry {entry.label()} belongs to tree {entry.tree}, "
                                 f"not tape {i + 1}")
            norm.append((entry, override))
        out.append(norm)
    return out


def generate_derivations(tapes, pack: "GrammarPack") -> list:
    norm = _normalize_tapes(tapes, pack)
    fixed = [_FixedTape(t) for t in norm]
    env = EMPTY_ENV
    cursors = []
    for t in fixed:
        res = t.start(env)
        if res is None:
            return []
        cur, env = res
        cursors.append(cur)
    total = sum(len(t.tokens) for t in fixed)
    return _Search(pack, fixed, None, 3 * total + 8).run(_State((), (), tuple(cursors), env))


def generate(tapes, pack: "GrammarPack") -> list:
    """Sorted unique surface words for the given per-tape morpheme lists.

    ``tapes[i]`` lists the entries of tape ``i + 1``, each a
    :class:`MorphemeEntry` or an ``(entry, FeatureStructure)`` pair whose
    structure is unified into the instance before the search.
    """
    return sorted({d.word for d in generate_derivations(tapes, pack)})
