import random

from mtmorph import load_pack
from mtmorph.corpus import parse_corpus
from mtmorph.packfmt import find_pack

PACKS = ["english", "cv", "moraic", "affix", "plural"]


def corpus_cases(name):
    return parse_corpus(find_pack(name + ".corpus").read_text(encoding="utf-8"))


def corpus_words(name):
    """Every surface word mentioned by a pack's corpus."""
    words = set()
    for c in corpus_cases(name):
        if c.direction.startswith("analyze"):
            words.add(c.input.split("@")[0])
        else:
            words |= set(c.expected)
    return sorted(words)


def random_tapes(pack, rng: random.Random):
    """Random per-tape entry sequences: mostly one entry, sometimes none or two."""
    tapes = []
    for i in range(1, pack.tapes + 1):
        ents = pack.lexicon.tree(i).entries
        k = rng.choice([0, 1, 1, 1, 2]) if ents else 0
        tapes.append([rng.choice(ents) for _ in range(k)])
    return tapes


_cache = {}


def pack(name):
    if name not in _cache:
        _cache[name] = load_pack(name)
    return _cache[name]
