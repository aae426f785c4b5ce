"""Language model training, ARPA I/O, and the failure-backoff automaton."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fstkey.fst import EPSILON, compose, linear_acceptor, shortest_path
from fstkey.lm import (
    LN10,
    UNK,
    CharLm,
    DynamicModel,
    LmError,
    NgramAutomaton,
    NgramModel,
    cost_to_log10,
    format_arpa,
    log10_to_cost,
    ngram_counts,
    parse_arpa,
    train_ngram,
)
from fstkey.oracles import direct_backoff_score

TINY = [["a", "b"], ["a", "b"], ["a", "c"]]


def nats(model, gram):
    return {g: log10_to_cost(lp) for g, lp in model.probs.items()}[gram]


def test_log_conversions():
    assert log10_to_cost(-1.0) == pytest.approx(LN10)
    assert cost_to_log10(LN10) == pytest.approx(-1.0)
    assert log10_to_cost(0.0) == 0.0


def test_ngram_counts_within_sentences():
    counts = ngram_counts([["a", "b", "a"], ["b"]], 2)
    assert counts == {("a",): 2, ("b",): 2, ("a", "b"): 1, ("b", "a"): 1}


# -- training: values worked out by hand for the tiny corpus ----------------
# counts: a=3 b=2 c=1 (total 6, 3 types); after a: b=2 c=1 (total 3, 2 types)
# discount 0.5 -> p(a)=2.5/6 p(b)=1.5/6 p(c)=0.5/6 p(unk)=0.25
# p(b|a)=1.5/3 p(c|a)=0.5/3; freed=1/3; unseen-below mass=1-(0.25+1/12)=2/3
# so the backoff weight for context (a) is (1/3)/(2/3) = 0.5


def test_training_matches_hand_computation():
    model = train_ngram(TINY, order=2, discount=0.5)
    assert model.vocab == ("a", "b", "c")
    assert nats(model, ("a",)) == pytest.approx(-math.log(2.5 / 6))
    assert nats(model, ("b",)) == pytest.approx(-math.log(1.5 / 6))
    assert nats(model, ("c",)) == pytest.approx(-math.log(0.5 / 6))
    assert nats(model, (UNK,)) == pytest.approx(-math.log(0.25))
    assert nats(model, ("a", "b")) == pytest.approx(-math.log(0.5))
    assert nats(model, ("a", "c")) == pytest.approx(-math.log(0.5 / 3))
    assert model.backoffs[("a",)] == pytest.approx(math.log10(0.5))
    assert model.probability_mass(()) == pytest.approx(1.0)
    assert model.probability_mass(("a",)) == pytest.approx(1.0)
    assert model.backoff_anomalies() == []


def test_cost_backs_off_through_missing_context():
    model = train_ngram(TINY, order=2)
    # nothing ever follows b, so the context has no explicit row at all
    assert model.cost(("b",), "a") == pytest.approx(-math.log(2.5 / 6))
    # seen bigram uses the explicit entry
    assert model.cost(("a",), "b") == pytest.approx(-math.log(0.5))
    # unseen continuation of a seen context pays the backoff weight
    assert model.cost(("a",), "a") == pytest.approx(
        -math.log(0.5) + -math.log(2.5 / 6))


def test_cost_matches_direct_recursion():
    model = train_ngram(TINY, order=2)
    probs_nats = {g: log10_to_cost(lp) for g, lp in model.probs.items()}
    backs_nats = {g: log10_to_cost(lp) for g, lp in model.backoffs.items()}
    for ctx in [(), ("a",), ("b",), ("c",)]:
        for w in ("a", "b", "c", UNK):
            assert model.cost(ctx, w) == pytest.approx(
                direct_backoff_score(probs_nats, backs_nats, ctx, w))


def test_unseen_vocab_word_gets_unigram_floor():
    model = train_ngram(TINY, order=2, vocabulary=["a", "b", "c", "zz"])
    assert "zz" in model.vocab
    # 0.25 of mass split between zz and the unknown word
    assert nats(model, ("zz",)) == pytest.approx(-math.log(0.125))
    assert nats(model, (UNK,)) == pytest.approx(-math.log(0.125))
    assert model.probability_mass(()) == pytest.approx(1.0)


def test_out_of_vocab_word_scores_as_unknown():
    model = train_ngram(TINY, order=2)
    assert model.cost((), "qqq") == pytest.approx(nats(model, (UNK,)))


def test_training_validation():
    with pytest.raises(LmError):
        train_ngram(TINY, order=4)
    with pytest.raises(LmError):
        train_ngram(TINY, order=2, discount=1.5)
    with pytest.raises(LmError):
        train_ngram([], order=2)


def corpora():
    word = st.sampled_from(["a", "b", "c", "d"])
    sentence = st.lists(word, min_size=1, max_size=4)
    return st.lists(sentence, min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(corpora(), st.integers(1, 3))
def test_trained_model_is_well_formed(corpus, order):
    model = train_ngram(corpus, order=order)
    for lp in model.probs.values():
        assert lp <= 1e-12  # probability never above 1
    for lp in model.backoffs.values():
        assert lp <= 1e-12  # backoff weight capped at 1
    contexts = [()] + sorted(model.backoffs)
    for ctx in contexts:
        assert model.probability_mass(ctx) <= 1.0 + 1e-6
    assert model.probability_mass(()) == pytest.approx(1.0)


# -- ARPA ------------------------------------------------------------------

ARPA_FIXTURE = """\
\\data\\
ngram 1=3
ngram 2=2

\\1-grams:
-0.5000000\ta\t-0.3010300
-0.8000000\tb
-1.0000000\t<unk>

\\2-grams:
-0.3010300\ta a
-0.6020600\ta b

\\end\\
"""


def test_parse_arpa_fixture():
    model = parse_arpa(ARPA_FIXTURE)
    assert model.order == 2
    assert model.vocab == ("a", "b")
    assert model.probs[("a",)] == pytest.approx(-0.5)
    assert model.probs[("a", "b")] == pytest.approx(-0.60206)
    assert model.backoffs[("a",)] == pytest.approx(-0.30103)
    assert ("b",) not in model.backoffs  # omitted column defaults to zero
    assert model.cost(("b",), "a") == pytest.approx(log10_to_cost(-0.5))
    assert model.cost(("a",), "a") == pytest.approx(log10_to_cost(-0.30103))


def test_parse_arpa_errors():
    with pytest.raises(LmError):
        parse_arpa("\\data\\\nngram 1=2\n\\1-grams:\n-0.5\ta\n\\end\\\n")
    with pytest.raises(LmError):
        parse_arpa("just some text\n")
    with pytest.raises(LmError):
        parse_arpa("\\data\\\nngram 1=1\n\\1-grams:\n-0.5\ta\tb\tc\td\n\\end\\\n")


def test_arpa_roundtrip():
    model = train_ngram(TINY + [["b", "c", "a"]], order=3)
    back = parse_arpa(format_arpa(model))
    assert back.order == model.order
    assert back.vocab == model.vocab
    assert set(back.probs) == set(model.probs)
    for gram in model.probs:
        assert back.probs[gram] == pytest.approx(model.probs[gram], abs=1e-6)
    for gram in model.backoffs:
        assert back.backoffs[gram] == pytest.approx(model.backoffs[gram],
                                                    abs=1e-6)


# -- compiled automaton ----------------------------------------------------


def test_automaton_advance_matches_model():
    model = train_ngram(TINY + [["c", "a", "b"]], order=3)
    auto = NgramAutomaton(model)
    for ctx in [(), ("a",), ("b",), ("c", "a"), ("b", "c")]:
        state = auto.state_for(ctx)
        for w in model.vocab + (UNK,):
            _, cost = auto.advance(state, w)
            assert cost == pytest.approx(model.cost(ctx, w)), (ctx, w)


def test_automaton_tracks_context_exactly():
    model = train_ngram(TINY + [["c", "a", "b"]], order=3)
    auto = NgramAutomaton(model)
    state = auto.start
    history = []
    for w in ["a", "b", "c", "a", "b", "a"]:
        state, _ = auto.advance(state, w)
        history.append(w)
        assert state == auto.state_for(history)


def test_automaton_sequence_cost():
    model = train_ngram(TINY, order=2)
    auto = NgramAutomaton(model)
    seq = ["a", "b", "a", "c"]
    assert auto.sequence_cost(seq) == pytest.approx(model.sequence_cost(seq))


def test_automaton_consumable_words():
    model = train_ngram(TINY, order=2)
    auto = NgramAutomaton(model)
    everything = set(model.vocab) | {UNK}
    for state in range(auto.num_states):
        # every state reaches the root by backoff, so everything is consumable
        assert auto.words_consumable(state) == everything


def test_automaton_out_of_vocab():
    auto = NgramAutomaton(train_ngram(TINY, order=2))
    nxt, cost = auto.advance(auto.start, "qqq")
    assert cost == pytest.approx(log10_to_cost(math.log10(0.25)))
    assert nxt == auto.state_for((UNK,))


@settings(max_examples=60, deadline=None)
@given(corpora(), st.integers(1, 3))
def test_automaton_matches_model_everywhere(corpus, order):
    model = train_ngram(corpus, order=order)
    auto = NgramAutomaton(model)
    for sid, ctx in enumerate(auto.contexts):
        for w in model.vocab:
            _, cost = auto.advance(sid, w)
            assert cost == pytest.approx(model.cost(ctx, w))


# -- epsilon-backoff machine view ------------------------------------------


def test_as_fst_structure():
    model = train_ngram(TINY + [["c", "a"]], order=2)
    auto = NgramAutomaton(model)
    fst = auto.as_fst()
    assert fst.start == auto.start
    for sid in fst.states():
        assert fst.is_final(sid)
        eps_arcs = [a for a in fst.arcs(sid) if a.ilabel == EPSILON]
        if sid == auto.start:
            assert eps_arcs == []
        else:
            assert len(eps_arcs) == 1  # exactly one backoff route
            assert eps_arcs[0].nextstate == auto.backoff[sid][1]
        for arc in fst.arcs(sid):
            assert arc.weight >= 0.0


def test_as_fst_scores_match_on_anomaly_free_model():
    model = train_ngram(TINY + [["c", "a", "b"], ["b", "c"]], order=2)
    assert model.backoff_anomalies() == []  # precondition for equivalence
    auto = NgramAutomaton(model)
    fst = auto.as_fst()
    for seq in [["a"], ["a", "b"], ["b", "a", "c"], ["c", "c", "a", "b"]]:
        ids = [fst.isymbols.find(w) for w in seq]
        assert all(i is not None for i in ids)
        chain = linear_acceptor(ids, fst.isymbols)
        best = shortest_path(compose(chain, fst), 1)
        assert len(best) == 1
        assert best[0][1] == pytest.approx(model.sequence_cost(seq))


# -- character model -------------------------------------------------------


def make_charlm():
    lm = CharLm(alphabet="abcdef", order=3, delta=0.01)
    lm.train([("abc", 1.0), ("abd", 0.5), ("face", 0.25)])
    return lm


def test_charlm_distributions_sum_to_one():
    lm = make_charlm()
    for prefix in ["", "a", "ab", "fa", "zz", "abcdef"]:
        mass = sum(math.exp(-lm.cost(prefix, ch)) for ch in "abcdef")
        mass += math.exp(-lm.end_cost(prefix))
        assert mass == pytest.approx(1.0, abs=1e-6)


def test_charlm_prefers_trained_sequences():
    lm = make_charlm()
    assert lm.cost("ab", "c") < lm.cost("ab", "f")
    assert lm.word_cost("abc") < lm.word_cost("fff")


def test_charlm_unknown_character_floor():
    lm = make_charlm()
    assert lm.cost("ab", "!") == pytest.approx(-math.log(1e-4))
    assert lm.cost("ab", "Z") == pytest.approx(-math.log(1e-4))


def test_charlm_word_cost_is_sum_of_steps():
    lm = make_charlm()
    total = (lm.cost("", "a") + lm.cost("a", "b") + lm.cost("ab", "c")
             + lm.end_cost("abc"))
    assert lm.word_cost("abc") == pytest.approx(total)


def test_charlm_every_word_finite():
    lm = make_charlm()
    for word in ["a", "fedcba", "aaaaaaaaaa", "zzz"]:
        assert math.isfinite(lm.word_cost(word))


def test_charlm_validation():
    with pytest.raises(LmError):
        CharLm(alphabet="")
    with pytest.raises(LmError):
        CharLm(alphabet="ab", order=9)
    with pytest.raises(LmError):
        CharLm(alphabet="ab", delta=0.0)
    lm = make_charlm()
    with pytest.raises(LmError):
        lm.word_cost("")
    with pytest.raises(LmError):
        lm.train([("", 1.0)])


def test_charlm_training_weight_matters():
    light = CharLm(alphabet="ab")
    light.train([("ab", 0.1), ("ba", 1.0)])
    heavy = CharLm(alphabet="ab")
    heavy.train([("ab", 1.0), ("ba", 0.1)])
    assert heavy.word_cost("ab") < light.word_cost("ab")


# -- dynamic model ---------------------------------------------------------


def test_dynamic_model_counts_and_costs():
    dyn = DynamicModel()
    dyn.observe(["hello", "there", "hello"])
    assert "hello" in dyn and "nope" not in dyn
    assert dyn.unigram_cost("hello") < dyn.unigram_cost("there")
    assert dyn.unigram_cost("nope") == pytest.approx(DynamicModel.FLOOR_COST)
    assert dyn.vocabulary == ["hello", "there"]


def test_dynamic_model_bigram_conditioning():
    dyn = DynamicModel()
    for _ in range(5):
        dyn.observe(["good", "luck"])
        dyn.observe(["good", "grief"])
        dyn.observe(["grief"])
    assert dyn.cost(["good"], "luck") == pytest.approx(
        dyn.cost(["good"], "grief"))
    assert dyn.cost(["luck"], "good") > dyn.cost(["good"], "luck")


def test_dynamic_model_jsonl_roundtrip():
    dyn = DynamicModel()
    dyn.observe(["one", "two"])
    dyn.observe(["two"])
    back = DynamicModel.from_jsonl(dyn.to_jsonl())
    assert back.unigrams == dyn.unigrams
    assert back.bigrams == dyn.bigrams
    assert back.total == dyn.total


def test_dynamic_model_empty_observation():
    dyn = DynamicModel()
    dyn.observe([])
    dyn.observe(["", ""])
    assert dyn.total == 0
    assert dyn.to_jsonl() == ""
