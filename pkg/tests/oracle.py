"""Brute-force reference analyser used to cross-check the engine.

It shares only the pack data structures with the engine.  Partitions are
enumerated element by element against the surface word; every lexical
variable is tried over its full domain, and tape contents are only pruned by
whether they can still be segmented into lexicon entries.  Each finished
candidate is then checked from scratch: segmentation into morphemes, rule
licensing with an independent context matcher, feature unification and
coherence with the obligatory rules.
"""

from __future__ import annotations

from functools import lru_cache

from mtmorph.engine import tokenize
from mtmorph.featlogic import EMPTY_ENV, instantiate, resolve, unify
from mtmorph.lexicon import LexVar
from mtmorph.rules import ANY, Sym

PLUS = "+"


# -- bindings ----------------------------------------------------------------


def _bind(rule, env, name, tok):
    if name in env:
        return env if env[name] == tok else None
    for c in rule.constraints:
        if c.var == name and (tok in c.members) == c.negated:
            return None
    out = dict(env)
    out[name] = tok
    return out


def _seq(rule, pattern, toks, env):
    if env is None or len(pattern) != len(toks):
        return None
    for p, t in zip(pattern, toks):
        if isinstance(p, Sym):
            if p.text != t:
                return None
        else:
            env = _bind(rule, env, p.name, t)
            if env is None:
                return None
    return env


def _tuple(rule, tup, lex, env):
    for pos, toks in zip(tup, lex):
        if env is None:
            return None
        if pos is not ANY:
            env = _seq(rule, pos, toks, env)
    return env


# -- contexts ----------------------------------------------------------------


def _surface_ctx(rule, ctx, text, env, left: bool):
    if not ctx.tokens and not ctx.anchored:
        return env
    k = len(ctx.tokens)
    if len(text) < k or (ctx.anchored and len(text) != k):
        return None
    window = text[len(text) - k:] if left else text[:k]
    return _seq(rule, ctx.tokens, window, env)


def _llc(rule, history, env, n, anchor=None):
    """Bindings for the left lexical context.  With ellipsis the block is the
    rightmost one matching under the LEX bindings ``anchor``."""
    pats = rule.llc.patterns
    if not pats:
        return [env]
    k = len(pats)
    empty = tuple(() for _ in range(n))
    if not rule.llc.ellipsis:
        padded = [empty] * k + list(history)
        e = env
        for p, lex in zip(pats, padded[-k:]):
            e = _tuple(rule, p, lex, e)
        return [e] if e is not None else []
    anchor = env if anchor is None else anchor
    candidates = [s for s in range(len(history) - k + 1)
                  if _block(rule, pats, history[s:s + k], anchor) is not None]
    if not candidates:
        return []
    e = _block(rule, pats, history[max(candidates):max(candidates) + k], env)
    return [e] if e is not None else []


def _block(rule, pats, lexes, env):
    for p, lex in zip(pats, lexes):
        env = _tuple(rule, p, lex, env)
    return env


def _rlc(rule, following, env, n):
    empty = tuple(() for _ in range(n))
    for i, p in enumerate(rule.rlc.patterns):
        env = _tuple(rule, p, following[i] if i < len(following) else empty, env)
    return env


def _context_envs(rule, elems, j, env, n):
    anchor = _tuple(rule, rule.lex, elems[j][1], {})
    left = tuple(t for s, _ in elems[:j] for t in s)
    right = tuple(t for s, _ in elems[j + 1:] for t in s)
    env = _surface_ctx(rule, rule.lsc, left, env, True)
    env = _surface_ctx(rule, rule.rsc, right, env, False) if env is not None else None
    if env is None:
        return []
    out = []
    for e in _llc(rule, [x for _, x in elems[:j]], env, n, anchor):
        e = _rlc(rule, [x for _, x in elems[j + 1:]], e, n)
        if e is not None:
            out.append(e)
    return out


# -- lexicon -----------------------------------------------------------------


class Lex:
    def __init__(self, pack):
        self.n = pack.tapes
        self.by_tree = {i: [e for e in pack.lexicon.entries if e.tree == i]
                        for i in range(1, pack.tapes + 1)}
        self.symbols = {}
        for i, entries in self.by_tree.items():
            syms = {PLUS}
            for e in entries:
                for t in e.form:
                    syms |= set(t.members) if isinstance(t, LexVar) else {t}
            self.symbols[i] = frozenset(syms)

    @staticmethod
    def _spell(entry, toks):
        """Bindings if ``toks`` spells ``entry`` (without boundary), else None."""
        if len(toks) != len(entry.form):
            return None
        b = {}
        for f, t in zip(entry.form, toks):
            if isinstance(f, LexVar):
                if t not in f.members or b.get(f.name, t) != t:
                    return None
                b[f.name] = t
            elif f != t:
                return None
        return tuple(sorted(b.items()))

    def segmentations(self, tree, toks):
        """All ways to read ``toks`` as entry+ entry+ ... ."""
        return self._segs(tree, tuple(toks))

    @lru_cache(maxsize=None)
    def _segs(self, tree, toks):
        if not toks:
            return [()]
        out = []
        for k, t in enumerate(toks):
            if t != PLUS:
                continue
            head = toks[:k]
            for entry in self.by_tree[tree]:
                b = self._spell(entry, head)
                if b is None:
                    continue
                for rest in self._segs(tree, toks[k + 1:]):
                    out.append(((entry, b),) + rest)
        return out

    @lru_cache(maxsize=None)
    def viable(self, tree, toks):
        """Can ``toks`` be extended to a full segmentation?"""
        if not toks:
            return True
        if PLUS in toks:
            k = toks.index(PLUS)
            head, rest = toks[:k], toks[k + 1:]
            return any(self._spell(e, head) is not None for e in self.by_tree[tree]) \
                and self.viable(tree, rest)
        for e in self.by_tree[tree]:
            if len(toks) <= len(e.form) and self._partial(e, toks):
                return True
        return False

    @staticmethod
    def _partial(entry, toks):
        b = {}
        for f, t in zip(entry.form, toks):
            if isinstance(f, LexVar):
                if t not in f.members or b.get(f.name, t) != t:
                    return False
                b[f.name] = t
            elif f != t:
                return False
        return True


# -- enumeration ---------------------------------------------------------------


def _lex_candidates(rule, lex: Lex, env):
    """Every concrete LEX tuple for ``rule`` under ``env``."""
    n = lex.n

    def pos_opts(i, e):
        pat = rule.lex[i]

        def go(j, e, acc):
            if j == len(pat):
                yield tuple(acc), e
                return
            p = pat[j]
            if isinstance(p, Sym):
                yield from go(j + 1, e, acc + [p.text])
                return
            if p.name in e:
                yield from go(j + 1, e, acc + [e[p.name]])
                return
            for tok in sorted(lex.symbols[i + 1]):
                e2 = _bind(rule, e, p.name, tok)
                if e2 is not None:
                    yield from go(j + 1, e2, acc + [tok])

        yield from go(0, e, [])

    def tapes(i, e, acc):
        if i == n:
            yield tuple(acc), e
            return
        for toks, e2 in pos_opts(i, e):
            yield from tapes(i + 1, e2, acc + [toks])

    yield from tapes(0, env, [])


def _check(pack, lex: Lex, elems, rules):
    """Full declarative check of a complete partition.

    Returns a list of identities (one per admissible segmentation)."""
    n = pack.tapes
    contents = [tuple(t for _, x, _ in elems for t in x[i]) for i in range(n)]
    # ordinal of the morpheme each element starts in, per tape
    ords = []
    seen = [0] * n
    for _, x, _ in elems:
        ords.append(tuple(seen))
        seen = [seen[i] + x[i].count(PLUS) for i in range(n)]

    per_tape = [lex.segmentations(i + 1, contents[i]) for i in range(n)]
    if any(not s for s in per_tape):
        return []

    def combos(i):
        if i == n:
            yield ()
            return
        for s in per_tape[i]:
            for rest in combos(i + 1):
                yield (s,) + rest

    out = []
    for seg in combos(0):
        feats = _features(elems, ords, seg)
        if feats is None:
            continue
        if not _licensed(elems, ords, feats, n):
            continue
        if not _coherent(elems, ords, feats, rules, n):
            continue
        ident = (tuple((s, x, r.name) for s, x, r in elems), tuple(seg))
        out.append(ident)
    return out


def _features(elems, ords, seg):
    """Unify each morpheme's features with every rule that targets it."""
    env = EMPTY_ENV
    fss = [[instantiate(entry.features) for entry, _ in tape] for tape in seg]
    for (_, _, rule), o in zip(elems, ords):
        if not rule.features:
            continue
        for i, fs in enumerate(rule.features):
            if not len(fs):
                continue
            if o[i] >= len(fss[i]):
                return None
            res = unify(fss[i][o[i]], instantiate(fs), env)
            if res is None:
                return None
            fss[i][o[i]], env = res
    return [[resolve(fs, env) for fs in tape] for tape in fss]


def _rule_feats_ok(rule, o, feats):
    if not rule.features:
        return True
    for i, fs in enumerate(rule.features):
        if not len(fs):
            continue
        if o[i] >= len(feats[i]) or unify(feats[i][o[i]], instantiate(fs), EMPTY_ENV) is None:
            return False
    return True


def _licensed(elems, ords, feats, n):
    pairs = [(s, x) for s, x, _ in elems]
    for j, (s, x, rule) in enumerate(elems):
        if not s and not any(x):
            return False
        env = _tuple(rule, rule.lex, x, {})
        env = _seq(rule, rule.surf, s, env) if env is not None else None
        if env is None or not _rule_feats_ok(rule, ords[j], feats):
            return False
        if not _context_envs(rule, pairs, j, env, n):
            return False
    return True


def _coherent(elems, ords, feats, rules, n):
    pairs = [(s, x) for s, x, _ in elems]
    for j, (s, x, _) in enumerate(elems):
        for r in rules:
            if not r.obligatory:
                continue
            env = _tuple(r, r.lex, x, {})
            if env is None or not _rule_feats_ok(r, ords[j], feats):
                continue
            for e in _context_envs(r, pairs, j, env, n):
                if _seq(r, r.surf, s, e) is None:
                    return False
    return True


def oracle_analyses(word, pack) -> set:
    """Identities ``((surface, lex, rule name) per element, morphemes)`` of
    every admissible partition of ``word``; morphemes are per tape tuples of
    (entry, sorted variable bindings)."""
    toks = tokenize(word, pack.surface)
    lex = Lex(pack)
    n = pack.tapes
    cap = 2 * len(toks) + 8
    rules = list(pack.rules)
    results = set()

    def go(pos, elems, contents):
        if pos == len(toks) and all(not c or c[-1] == PLUS for c in contents):
            results.update(_check(pack, lex, elems, rules))
        history = [x for _, x, _ in elems]
        for rule in rules:
            k = len(rule.surf)
            seg = toks[pos:pos + k]
            if len(seg) != k:
                continue
            env = _seq(rule, rule.surf, seg, {})
            if env is None:
                continue
            env = _surface_ctx(rule, rule.lsc, toks[:pos], env, True)
            if env is None:
                continue
            for x, e in _lex_candidates(rule, lex, env):
                if not seg and not any(x):
                    continue
                if not _llc(rule, history, e, n, _tuple(rule, rule.lex, x, {})):
                    continue
                if (rule.is_insertion and elems and elems[-1][2] is rule
                        and elems[-1][0] == seg):
                    continue
                new = tuple(contents[i] + x[i] for i in range(n))
                if any(len(c) > cap for c in new):
                    continue
                if not all(lex.viable(i + 1, new[i]) for i in range(n)):
                    continue
                go(pos + k, elems + [(seg, x, rule)], new)

    go(0, [], tuple(() for _ in range(n)))
    return results


def engine_identity(d) -> tuple:
    """Engine derivation identity in the oracle's normal form."""
    elems = tuple((e.surface, e.lex, e.rule.name) for e in d.elements)
    morphs = tuple(tuple((m.entry, tuple(sorted(m.bindings))) for m in tape)
                   for tape in d.morphemes)
    return elems, morphs


def recheck(d, pack) -> bool:
    """Independent licensing, feature and coherence re-check of an engine
    derivation."""
    elems = [(e.surface, e.lex, e.rule) for e in d.elements]
    return engine_identity(d) in _check(pack, Lex(pack), elems, list(pack.rules))
