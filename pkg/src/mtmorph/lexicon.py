"""Character-tree (trie) lexicon, one tree per lexical tape."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .featlogic import FeatureStructure, format_fs
from .rules import BOUNDARY


class DeclarationError(ValueError):
    pass


@dataclass(frozen=True)
class LexVar:
    """Entry-scoped symbol variable restricted to a class, e.g. V in {tV}."""

    name: str
    members: frozenset
    cls: str = ""

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class MorphemeEntry:
    form: tuple  # of str | LexVar
    category: str
    features: FeatureStructure
    tree: int = 1
    key: str = ""
    gloss: str = ""
    lexicon: str = ""

    def __post_init__(self):
        if not self.form:
            raise DeclarationError("empty morpheme form")
        if not self.key:
            object.__setattr__(self, "key", "".join(str(t) for t in self.form))

    @property
    def path(self) -> tuple:
        return self.form + (BOUNDARY,)

    def label(self) -> str:
        return f"{{{''.join(str(t) for t in self.form)}}}"

    def describe(self) -> str:
        return f"{self.category}:[{format_fs(self.features)}]"


class _Node:
    __slots__ = ("children", "var_children", "entries")

    def __init__(self):
        self.children: dict = {}
        self.var_children: dict = {}  # LexVar -> _Node
        self.entries: list = []


@dataclass(frozen=True)
class TreePosition:
    """A node of one tree plus the entry-variable bindings made on the way."""

    node: _Node = field(compare=False)
    path: tuple = ()
    bindings: tuple = ()  # ((name, token), ...)

    def binding(self, name: str) -> Optional[str]:
        for n, t in self.bindings:
            if n == name:
                return t
        return None

    @property
    def at_root(self) -> bool:
        return not self.path


class LexiconTree:
    def __init__(self, index: int):
        self.index = index
        self.root = _Node()
        self.entries: list = []

    def insert(self, entry: MorphemeEntry) -> None:
        node = self.root
        for tok in entry.path:
            if isinstance(tok, LexVar):
                node = node.var_children.setdefault(tok, _Node())
            else:
                node = node.children.setdefault(tok, _Node())
        node.entries.append(entry)
        self.entries.append(entry)

    def start(self) -> TreePosition:
        return TreePosition(self.root)

    def step(self, pos: TreePosition, sym: str) -> list:
        """Successor positions on symbol ``sym``; empty list is a dead end."""
        out = []
        child = pos.node.children.get(sym)
        if child is not None:
            out.append(TreePosition(child, pos.path + (sym,), pos.bindings))
        for var, child in pos.node.var_children.items():
            bound = pos.binding(var.name)
            if bound is None:
                if sym in var.members:
                    out.append(TreePosition(child, pos.path + (sym,),
                                            pos.bindings + ((var.name, sym),)))
            elif bound == sym:
                out.append(TreePosition(child, pos.path + (sym,), pos.bindings))
        return out

    def next_symbols(self, pos: TreePosition) -> list:
        """Every symbol that can be read next from ``pos``."""
        syms = set(pos.node.children)
        for var in pos.node.var_children:
            bound = pos.binding(var.name)
            syms.update(var.members if bound is None else (bound,))
        return sorted(syms)

    def closed_entries(self, pos: TreePosition) -> list:
        """Entries whose full form followed by ``+`` ends exactly at ``pos``."""
        return list(pos.node.entries)

    def symbols(self) -> set:
        out = set()
        for e in self.entries:
            for tok in e.path:
                out.update(tok.members if isinstance(tok, LexVar) else (tok,))
        return out


class LexiconStore:
    def __init__(self, tapes: int):
        if tapes < 1:
            raise DeclarationError("tape count must be >= 1")
        self.tapes = tapes
        self.trees = [LexiconTree(i + 1) for i in range(tapes)]

    def insert(self, entry: MorphemeEntry) -> "LexiconStore":
        if not 1 <= entry.tree <= self.tapes:
            raise DeclarationError(
                f"entry {entry.label()} on tree {entry.tree}, but only {self.tapes} tapes")
        self.trees[entry.tree - 1].insert(entry)
        return self

    def extend(self, entries: Iterable[MorphemeEntry]) -> "LexiconStore":
        for e in entries:
            self.insert(e)
        return self

    def tree(self, index: int) -> LexiconTree:
        return self.trees[index - 1]

    def lookup(self, tree: int, key: str) -> list:
        return [e for e in self.tree(tree).entries if e.key == key]

    @property
    def entries(self) -> list:
        return [e for t in self.trees for e in t.entries]
