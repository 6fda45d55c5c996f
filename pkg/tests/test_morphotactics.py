from dataclasses import dataclass

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtmorph import analyze, load_pack, parse_fs
from mtmorph.corpus import full_analyses
from mtmorph.featlogic import instantiate
from mtmorph.morphotactics import CFRule, emit, parse, replay


@dataclass
class M:
    category: str
    features: object


def morph(pack, tree, key):
    e = pack.lexicon.lookup(tree, key)[0]
    return M(e.category, instantiate(e.features))


@pytest.fixture(scope="module")
def cv():
    return load_pack("cv")


@pytest.fixture(scope="module")
def plural():
    return load_pack("plural")


@pytest.mark.parametrize("pack, word, cats", [
    ("cv", "dHunrija", ["pattern", "root", "vocalism", "vim"]),
    ("affix", "takattaba", ["verb_affix", "pattern", "root", "vocalism", "vim"]),
    ("plural", "nufuus", ["pl_vocalism", "pattern", "root", "vocalism"]),
])
def test_emission_order(pack, word, cats):
    ((d, _),) = full_analyses(word, load_pack(pack))
    assert [m.category for m in emit(d)] == cats


def test_measure_5_affix_emitted_first():
    pack = load_pack("affix")
    (d,) = [d for d, _ in full_analyses("takattaba", pack)]
    affix = d.morphemes[3][0]
    pattern = d.morphemes[0][0]
    assert affix.closed_at < pattern.closed_at


def test_parse_kataba(cv):
    seq = [morph(cv, 1, "m1act.a"), morph(cv, 2, "ktb"), morph(cv, 3, "a"), morph(cv, 1, "a")]
    (tree,) = parse(seq, cv.cf_rules, "verb")
    f = tree.features
    assert f["measure"] == frozenset({"1"}) and f["gender"] == frozenset({"masc"})
    assert f["person"] == frozenset({"3"}) and f["voice"] == frozenset({"act"})
    assert replay(tree)
    assert tree.leaves() == seq


def test_parse_arity_mismatch(cv):
    assert parse([morph(cv, 1, "m1act.a"), morph(cv, 2, "ktb")], cv.cf_rules, "verb") == []


def test_parse_plural(plural):
    seq = [morph(plural, 4, "uu"), morph(plural, 1, "h"), morph(plural, 2, "nfs"), morph(plural, 3, "a")]
    (tree,) = parse(seq, plural.cf_rules, "noun_stem")
    assert tree.features["number"] == frozenset({"pl"})
    assert replay(tree)


def test_perf_vowel_clash(cv):
    seq = [morph(cv, 1, "m1act.ui"), morph(cv, 2, "smH"), morph(cv, 3, "a")]
    rules = cv.cf_rules
    assert parse(seq, rules, "verb_stem") == []
    good = [morph(cv, 1, "m1act.ui"), morph(cv, 2, "smH"), morph(cv, 3, "au")]
    assert len(parse(good, rules, "verb_stem")) == 1


def test_unary_cycle_terminates():
    rules = [CFRule("a", parse_fs("[]"), (("b", parse_fs("[]")),)),
             CFRule("b", parse_fs("[]"), (("a", parse_fs("[]")),))]
    trees = parse([M("a", parse_fs("[]"))], rules)
    assert {t.category for t in trees} == {"a", "b"}


def test_unrelated_rule_keeps_parses(cv):
    seq = [morph(cv, 1, "m1act.a"), morph(cv, 2, "ktb"), morph(cv, 3, "a"), morph(cv, 1, "a")]
    before = parse(seq, cv.cf_rules, "verb")
    extra = CFRule("foo", parse_fs("[]"), (("vim", parse_fs("[]")), ("root", parse_fs("[]"))))
    after = parse(seq, list(cv.cf_rules) + [extra], "verb")
    assert [t.label() for t in before] == [t.label() for t in after]


CATS = ["x", "y", "z"]
ATOMS = ["1", "2"]
fs_text = st.lists(st.tuples(st.sampled_from(["p", "q"]), st.sampled_from(ATOMS + ["A"])),
                   max_size=2).map(lambda kv: "[" + ", ".join(f"{k}={v}" for k, v in dict(kv).items()) + "]")
cf_rules = st.lists(
    st.tuples(st.sampled_from(CATS), fs_text,
              st.lists(st.tuples(st.sampled_from(CATS), fs_text), min_size=1, max_size=2)),
    min_size=1, max_size=4)
leaves = st.lists(st.tuples(st.sampled_from(CATS), fs_text), min_size=1, max_size=4)


def build_rules(spec):
    out = []
    for lhs, lfs, rhs in spec:
        scope = {}
        out.append(CFRule(lhs, parse_fs(lfs, scope), tuple((c, parse_fs(f, scope)) for c, f in rhs)))
    return out


@settings(max_examples=200, deadline=None)
@given(cf_rules, leaves, st.sampled_from(CATS))
def test_parses_replay_and_preserve_leaves(rule_spec, leaf_spec, extra_cat):
    rules = build_rules(rule_spec)
    seq = [M(c, instantiate(parse_fs(f))) for c, f in leaf_spec]
    trees = parse(seq, rules)
    for t in trees:
        assert replay(t)
        assert t.leaves() == seq
    extra = build_rules([(extra_cat, "[]", [(extra_cat, "[]"), (extra_cat, "[]")])])
    more = parse(seq, rules + extra)
    assert {t.label() for t in trees} <= {t.label() for t in more}
