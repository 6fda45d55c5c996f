"""Flat feature structures with disjunctive values and shared variables.

A feature structure maps attribute names to either a value set (a non-empty
frozenset of atoms) or a :class:`Var`.  Variables are bound in an
environment (a plain dict, treated as immutable: every successful
unification returns a fresh copy).  Unification is the only combinator.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

_fresh = itertools.count(1)


@dataclass(frozen=True)
class Var:
    name: str
    uid: int = 0

    def __str__(self) -> str:
        return self.name


Value = Union[frozenset, Var]
Env = Mapping[Var, Value]

EMPTY_ENV: dict = {}


class FeatureStructure(Mapping[str, Value]):
    """Immutable attribute -> value map.  Absent attributes are unconstrained."""

    __slots__ = ("_items", "_hash")

    def __init__(self, items: Optional[Mapping[str, Value]] = None, **kw: Value):
        data = dict(items or {})
        data.update(kw)
        for attr, val in data.items():
            if isinstance(val, frozenset):
                if not val:
                    raise ValueError(f"empty value set for attribute {attr!r}")
            elif not isinstance(val, Var):
                raise TypeError(f"bad value for {attr!r}: {val!r}")
        self._items = dict(sorted(data.items()))
        self._hash = None

    def __getitem__(self, key: str) -> Value:
        return self._items[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._items.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FeatureStructure):
            return self._items == other._items
        return NotImplemented

    def __repr__(self) -> str:
        return f"FeatureStructure({format_fs(self)})"

    def variables(self) -> set:
        return {v for v in self._items.values() if isinstance(v, Var)}


def _walk(x: Value, env: Env):
    """Follow variable links.  Returns (last variable or None, value set or None)."""
    last = None
    while isinstance(x, Var):
        last = x
        if x not in env:
            return x, None
        x = env[x]
    return last, x


def unify_values(x: Value, y: Value, env: Env):
    """Unify two values.  Returns (env, result) or None on failure."""
    vx, sx = _walk(x, env)
    vy, sy = _walk(y, env)
    if vx is not None and vx == vy:
        return env, vx
    # keep returning a variable so later narrowing reaches every occurrence
    if sx is None:  # vx unbound
        new = dict(env)
        if vy is not None:
            new[vx] = vy
            return new, vy
        new[vx] = sy
        return new, vx
    if sy is None:
        new = dict(env)
        if vx is not None:
            new[vy] = vx
            return new, vx
        new[vy] = sx
        return new, vy
    inter = sx & sy
    if not inter:
        return None
    if vx is None and vy is None:
        return env, inter
    new = dict(env)
    if vx is not None:
        new[vx] = inter
        if vy is not None:
            new[vy] = vx
        return new, vx
    new[vy] = inter
    return new, vy


def unify(a: FeatureStructure, b: FeatureStructure, env: Env = EMPTY_ENV):
    """Unify two feature structures under ``env``.

    Returns ``(result, new_env)`` or ``None``.  The input environment is
    never mutated, so a failed unification leaves it untouched.
    """
    out = dict(a)
    cur = env
    for attr, vb in b.items():
        if attr not in out:
            out[attr] = vb
            continue
        res = unify_values(out[attr], vb, cur)
        if res is None:
            return None
        cur, out[attr] = res
    return FeatureStructure(out), cur


def resolve(fs: FeatureStructure, env: Env) -> FeatureStructure:
    """Replace bound variables by their value sets; unbound ones stay."""
    out = {}
    for attr, val in fs.items():
        var, vals = _walk(val, env)
        out[attr] = vals if vals is not None else var
    return FeatureStructure(out)


def instantiate(template: FeatureStructure, mapping: Optional[dict] = None) -> FeatureStructure:
    """Copy ``template`` with fresh variable identities.

    Occurrences of the same variable map to the same fresh variable; pass a
    shared ``mapping`` to rename several structures consistently.
    """
    mapping = {} if mapping is None else mapping
    out = {}
    for attr, val in template.items():
        if isinstance(val, Var):
            if val not in mapping:
                mapping[val] = Var(val.name, next(_fresh))
            val = mapping[val]
        out[attr] = val
    return FeatureStructure(out)


# -- text form -------------------------------------------------------------

_RANGE = re.compile(r"^(\d+)-(\d+)$")


def _atom_key(atom: str):
    return (0, int(atom), "") if atom.isdigit() else (1, 0, atom)


def format_value(val: Value, env: Env = EMPTY_ENV) -> str:
    var, vals = _walk(val, env)
    if vals is None:
        return str(var)
    atoms = sorted(vals, key=_atom_key)
    return atoms[0] if len(atoms) == 1 else "(" + ",".join(atoms) + ")"


def format_fs(fs: FeatureStructure, env: Env = EMPTY_ENV) -> str:
    return ", ".join(f"{a}={format_value(v, env)}" for a, v in fs.items())


def parse_value(text: str, scope: dict) -> Value:
    text = text.strip()
    if not text:
        raise ValueError("empty feature value")
    if text[0].isupper():
        if text not in scope:
            scope[text] = Var(text)
        return scope[text]
    if text.startswith("("):
        if not text.endswith(")"):
            raise ValueError(f"unbalanced value {text!r}")
        atoms = set()
        for part in text[1:-1].split(","):
            part = part.strip()
            m = _RANGE.match(part)
            if m:
                atoms.update(str(i) for i in range(int(m.group(1)), int(m.group(2)) + 1))
            elif part:
                atoms.add(part)
        if not atoms:
            raise ValueError(f"empty disjunction {text!r}")
        return frozenset(atoms)
    return frozenset([text])


def parse_fs(text: str, scope: Optional[dict] = None) -> FeatureStructure:
    """Parse ``[a=v, b=(v1,v2), c=N]`` (brackets optional).

    ``scope`` maps variable names to :class:`Var` objects so that several
    structures parsed with one scope share variables.
    """
    scope = {} if scope is None else scope
    body = text.strip()
    if body.startswith("["):
        if not body.endswith("]"):
            raise ValueError(f"unbalanced feature structure {text!r}")
        body = body[1:-1]
    items = {}
    depth = 0
    parts, cur = [], []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    for part in parts:
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"expected attr=value, got {part!r}")
        attr, val = part.split("=", 1)
        attr = attr.strip()
        if attr in items:
            raise ValueError(f"attribute {attr!r} appears twice")
        items[attr] = parse_value(val, scope)
    return FeatureStructure(items)
