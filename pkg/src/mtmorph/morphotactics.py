"""Unification-based context-free morphotactics.

A derivation emits its morphemes in the order their boundaries were
consumed; an exhaustive backtracking shift-reduce recognizer then checks the
sequence against the pack grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .featlogic import EMPTY_ENV, FeatureStructure, format_fs, instantiate, resolve, unify


@dataclass(frozen=True)
class CFRule:
    lhs: str
    lhs_fs: FeatureStructure
    rhs: tuple  # ((category, FeatureStructure), ...)
    line: int = 0

    def __str__(self) -> str:
        def one(cat, fs):
            return f"{cat}[{format_fs(fs)}]"

        return one(self.lhs, self.lhs_fs) + " -> " + " ".join(one(c, f) for c, f in self.rhs)


@dataclass
class ParseTree:
    category: str
    features: FeatureStructure
    children: tuple = ()  # ParseTree nodes, or morpheme instances at the leaves
    rule: Optional[CFRule] = None

    def leaves(self) -> list:
        if self.rule is None:
            return list(self.children)
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def label(self) -> str:
        return f"{self.category}[{format_fs(self.features)}]"

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.rule is None:
            m = self.children[0]
            return f"{pad}{self.label()} {m.entry.label()}"
        lines = [pad + self.label()]
        lines.extend(c.render(indent + 1) for c in self.children)
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.label()


def emit(d) -> list:
    """Morphemes of a derivation in emission order.

    A morpheme sits at the index of the element that consumed its boundary;
    ties go to the lower tape.
    """
    ms = d.all_morphemes()
    return sorted(ms, key=lambda m: (m.closed_at, m.tape, m.ordinal))


@dataclass(frozen=True)
class _Item:
    category: str
    fs: FeatureStructure
    node: tuple  # ("leaf", morpheme) or ("rule", rule, children)
    unary: frozenset = field(default_factory=frozenset)


def _build(item: _Item, env) -> ParseTree:
    fs = resolve(item.fs, env)
    if item.node[0] == "leaf":
        return ParseTree(item.category, fs, (item.node[1],), None)
    _, rule, kids = item.node
    return ParseTree(item.category, fs, tuple(_build(k, env) for k in kids), rule)


def parse(seq: Sequence, rules: Iterable[CFRule], start: Optional[str] = None) -> list:
    """All parse trees spanning ``seq``.

    ``seq`` holds morpheme instances (anything with ``category`` and
    ``features``).  With ``start`` None any root category is accepted.
    """
    rules = list(rules)
    leaves = [_Item(m.category, m.features, ("leaf", m)) for m in seq]
    index = {id(m): i for i, m in enumerate(seq)}
    found: dict = {}

    def reduces(stack, env):
        for rule in rules:
            k = len(rule.rhs)
            if k == 0 or k > len(stack):
                continue
            top = stack[len(stack) - k:]
            if any(it.category != cat for it, (cat, _) in zip(top, rule.rhs)):
                continue
            if k == 1 and (rule.lhs in top[0].unary or rule.lhs == top[0].category):
                continue
            mapping: dict = {}
            lhs_fs = instantiate(rule.lhs_fs, mapping)
            e = env
            ok = True
            for it, (_, fs) in zip(top, rule.rhs):
                res = unify(it.fs, instantiate(fs, mapping), e)
                if res is None:
                    ok = False
                    break
                e = res[1]
            if not ok:
                continue
            unary = top[0].unary | {top[0].category} if k == 1 else frozenset()
            yield stack[:len(stack) - k] + (_Item(rule.lhs, lhs_fs, ("rule", rule, top), unary),), e

    def go(stack, i, env):
        if i == len(leaves) and len(stack) == 1:
            if start is None or stack[0].category == start:
                tree = _build(stack[0], env)
                found.setdefault(_tree_key(tree, index), tree)
        for nstack, nenv in reduces(stack, env):
            go(nstack, i, nenv)
        if i < len(leaves):
            go(stack + (leaves[i],), i + 1, env)

    go((), 0, EMPTY_ENV)
    return [found[k] for k in sorted(found)]


def _tree_key(tree: ParseTree, index: dict) -> str:
    if tree.rule is None:
        return f"{tree.label()}<{index[id(tree.children[0])]}>"
    return tree.label() + "(" + " ".join(_tree_key(c, index) for c in tree.children) + ")"


def replay(tree: ParseTree) -> bool:
    """Independent bottom-up check that every rule application unifies."""
    if tree.rule is None:
        return True
    if not all(replay(c) for c in tree.children):
        return False
    rule = tree.rule
    if [c.category for c in tree.children] != [cat for cat, _ in rule.rhs]:
        return False
    mapping: dict = {}
    env = EMPTY_ENV
    for c, (_, fs) in zip(tree.children, rule.rhs):
        res = unify(c.features, instantiate(fs, mapping), env)
        if res is None:
            return False
        env = res[1]
    res = unify(tree.features, instantiate(rule.lhs_fs, mapping), env)
    return res is not None
