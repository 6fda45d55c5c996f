"""Two-level rule representation and context matching primitives.

A rule is ``LSC - SURF - RSC (=>|<=>) LLC - LEX - RLC``.  Surface parts are
token patterns; lexical parts are n-tuples of per-tape patterns.  Rule
variables live in a plain ``dict`` (name -> token) scoped to one rule
application.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .featlogic import FeatureStructure

BOUNDARY = "+"


@dataclass(frozen=True)
class Sym:
    text: str

    def __str__(self) -> str:
        return "\\" + self.text if self.text[:1].isupper() else self.text


@dataclass(frozen=True)
class RVar:
    name: str

    def __str__(self) -> str:
        return self.name


class _Any:
    """Per-tape wildcard: any string, including the empty one."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "ANY"

    def __reduce__(self):
        return (_Any, ())


ANY = _Any()


# A position pattern is ANY or a tuple of Sym/RVar (the empty tuple is `_`).
# A tuple pattern is a tuple of position patterns, one per tape.


@dataclass(frozen=True)
class SurfaceContext:
    """Contiguous token pattern matched against text adjacent to SURF.

    ``anchored`` means the pattern must reach the word edge (written ``#``).
    An empty, unanchored pattern is the always-satisfied ``*``.
    """

    tokens: tuple = ()
    anchored: bool = False

    @property
    def trivial(self) -> bool:
        return not self.tokens and not self.anchored


@dataclass(frozen=True)
class LexContext:
    patterns: tuple = ()
    ellipsis: bool = False

    @property
    def trivial(self) -> bool:
        return not self.patterns


@dataclass(frozen=True)
class Constraint:
    """``var in {..}``, ``var not in {..}``."""

    var: str
    members: frozenset
    negated: bool = False
    label: str = ""

    def allows(self, token: str) -> bool:
        return (token in self.members) != self.negated


@dataclass(frozen=True)
class Rule:
    name: str
    obligatory: bool
    lsc: SurfaceContext
    surf: tuple
    rsc: SurfaceContext
    llc: LexContext
    lex: tuple
    rlc: LexContext
    features: tuple = ()  # one FeatureStructure per tape, or empty
    constraints: tuple = ()
    description: str = ""
    index: int = 0
    line: int = 0

    def constraints_for(self, var: str):
        return [c for c in self.constraints if c.var == var]

    def allows(self, var: str, token: str) -> bool:
        return all(c.allows(token) for c in self.constraints if c.var == var)

    def domain(self, var: str) -> Optional[frozenset]:
        """Positive class restriction of ``var`` (intersection), if any."""
        dom = None
        for c in self.constraints:
            if c.var == var and not c.negated:
                dom = c.members if dom is None else dom & c.members
        return dom

    @property
    def is_insertion(self) -> bool:
        return all(pos is not ANY and len(pos) == 0 for pos in self.lex)

    def variables(self) -> set:
        out = set()

        def seq(items):
            for t in items:
                if isinstance(t, RVar):
                    out.add(t.name)

        seq(self.surf)
        seq(self.lsc.tokens)
        seq(self.rsc.tokens)
        for tup in (self.lex, *self.llc.patterns, *self.rlc.patterns):
            for pos in tup:
                if pos is not ANY:
                    seq(pos)
        return out


@dataclass
class Element:
    """One partition element: a surface segment paired with an n-tuple of
    consumed lexical strings, licensed by ``rule`` under ``bindings``."""

    surface: tuple
    lex: tuple
    rule: Rule
    bindings: dict = field(default_factory=dict)
    # per tape: ordinal of the morpheme this element affects (None if the
    # tape has no morpheme there)
    morphs: tuple = ()

    def key(self):
        return (self.surface, self.lex, self.rule.name)


# -- matching --------------------------------------------------------------


def bind(rule: Rule, env: dict, var: str, token: str) -> Optional[dict]:
    cur = env.get(var)
    if cur is not None:
        return env if cur == token else None
    if not rule.allows(var, token):
        return None
    new = dict(env)
    new[var] = token
    return new


def match_seq(rule: Rule, pattern, tokens, env: dict) -> Optional[dict]:
    if len(pattern) != len(tokens):
        return None
    for p, t in zip(pattern, tokens):
        if isinstance(p, Sym):
            if p.text != t:
                return None
        else:
            env = bind(rule, env, p.name, t)
            if env is None:
                return None
    return env


def match_position(rule: Rule, pos, tokens, env: dict) -> Optional[dict]:
    if pos is ANY:
        return env
    return match_seq(rule, pos, tokens, env)


def match_tuple(rule: Rule, tup, lex, env: dict) -> Optional[dict]:
    for pos, tokens in zip(tup, lex):
        env = match_position(rule, pos, tokens, env)
        if env is None:
            return None
    return env


def match_lsc(rule: Rule, ctx: SurfaceContext, left, env: dict) -> Optional[dict]:
    """Right-anchored match against the surface text left of SURF."""
    if ctx.trivial:
        return env
    k = len(ctx.tokens)
    if len(left) < k or (ctx.anchored and len(left) != k):
        return None
    return match_seq(rule, ctx.tokens, left[len(left) - k:], env)


def match_rsc(rule: Rule, ctx: SurfaceContext, right, env: dict) -> Optional[dict]:
    """Left-anchored match against the surface text right of SURF."""
    if ctx.trivial:
        return env
    k = len(ctx.tokens)
    if len(right) < k or (ctx.anchored and len(right) != k):
        return None
    return match_seq(rule, ctx.tokens, right[:k], env)


def empty_tuple(n: int) -> tuple:
    return tuple(() for _ in range(n))


def llc_matches(rule: Rule, history, env: dict, n: int,
                anchor: Optional[dict] = None) -> Iterator[dict]:
    """All bindings under which the left lexical context holds.

    ``history`` is the list of lex tuples of prior elements.  Without
    ellipsis the patterns match the immediately preceding elements.  With a
    trailing ellipsis the block is the nearest one to the left that matches
    under ``anchor`` (the bindings made by LEX; defaults to ``env``); its
    remaining variables are then read off that block.
    """
    ctx = rule.llc
    if ctx.trivial:
        yield env
        return
    pats = ctx.patterns
    k = len(pats)
    if not ctx.ellipsis:
        pad = max(0, k - len(history))
        window = [empty_tuple(n)] * pad + list(history[len(history) - (k - pad):])
        e = env
        for p, lex in zip(pats, window):
            e = match_tuple(rule, p, lex, e)
            if e is None:
                return
        yield e
        return
    anchor = env if anchor is None else anchor

    def block(start, e):
        for p, lex in zip(pats, history[start:start + k]):
            e = match_tuple(rule, p, lex, e)
            if e is None:
                return None
        return e

    for start in range(len(history) - k, -1, -1):
        if block(start, anchor) is None:
            continue
        e = block(start, env)
        if e is not None:
            yield e
        return


def rlc_match(rule: Rule, following, env: dict, n: int) -> Optional[dict]:
    """Left-aligned match of the right lexical context.

    Missing elements past the end of the word are virtual all-empty tuples.
    """
    e = env
    for i, p in enumerate(rule.rlc.patterns):
        lex = following[i] if i < len(following) else empty_tuple(n)
        e = match_tuple(rule, p, lex, e)
        if e is None:
            return None
    return e


def surf_instances(rule: Rule, env: dict, alphabet) -> Iterator[tuple]:
    """Enumerate concrete surface strings for SURF under ``env``.

    Unbound variables range over their class, or the surface alphabet.
    """

    def go(i, e, acc):
        if i == len(rule.surf):
            yield tuple(acc), e
            return
        p = rule.surf[i]
        if isinstance(p, Sym):
            yield from go(i + 1, e, acc + [p.text])
            return
        if p.name in e:
            yield from go(i + 1, e, acc + [e[p.name]])
            return
        dom = rule.domain(p.name)
        cands = sorted(dom & alphabet) if dom is not None else sorted(alphabet)
        for tok in cands:
            e2 = bind(rule, e, p.name, tok)
            if e2 is not None:
                yield from go(i + 1, e2, acc + [tok])

    yield from go(0, env, [])


def rule_number(name: str) -> Optional[int]:
    """Numeric part of a rule name (``R4v`` -> 4), used to compare traces."""
    digits = "".join(ch for ch in name if ch.isdigit())
    return int(digits) if digits else None


FeatureTuple = tuple  # tuple[FeatureStructure, ...]


def has_features(rule: Rule) -> bool:
    return any(len(fs) for fs in rule.features)


def features_for(rule: Rule, tape: int) -> Optional[FeatureStructure]:
    if not rule.features:
        return None
    fs = rule.features[tape]
    return fs if len(fs) else None
