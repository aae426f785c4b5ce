"""Acceptance gate: one test per core guarantee of the engine.

Each test pins a user-facing behavior at full precision — exhaustive
oracles for search and ranking, frozen scenarios for correction
behavior, and explicit budgets for accuracy, size, and latency.  A
failure here means the engine no longer honors a promised behavior,
not merely that an implementation detail moved.
"""

import math
import random
import time

import pytest

from helpers import (build_engine, oracle_completions, random_letter_point,
                     tap_word)
from test_graph import build_plain_graph, relation_by_strings, rebind_osymbols

from fstkey.bundle import build_bundle, bundle_bytes
from fstkey.config import EngineConfig, GraphParams
from fstkey.data import VOCABULARY, big_lexicon, eval_corpus, training_corpus
from fstkey.decoder import Session, render_tokens
from fstkey.features import completions, predict_next
from fstkey.fst import EPSILON, SymbolTable, WeightedFst, compose, connect
from fstkey.harness import evaluate
from fstkey.lm import UNK, log10_to_cost
from fstkey.oracles import (brute_decode_tap, brute_next_labels,
                            brute_quiet_finish, direct_backoff_score,
                            enumerate_relation, materialize_lazy_graph,
                            naive_compose)
from fstkey.reachability import LabelReachability

BASIC_WORDS = ["i", "if", "it", "this", "that", "a", "at", "hat", "his",
               "sit"]
BASIC_CORPUS = [
    ["i", "sit", "at", "this"],
    ["if", "i", "sit"],
    ["that", "hat"],
    ["his", "hat"],
    ["i", "sit", "at", "that"],
    ["if", "it", "a", "hat"],
]

# dilutes the character model so no single spelling looks overly natural
FILLER = ["the", "quick", "brown", "jumps", "over", "lazy", "dog", "hello",
          "world", "keyboard", "typing", "model", "sentence", "window"]


@pytest.fixture(scope="module")
def basic_engine():
    return build_engine(BASIC_WORDS, BASIC_CORPUS)


@pytest.fixture(scope="module")
def vocab_bundle():
    return build_bundle(VOCABULARY, training_corpus(), config=EngineConfig())


# -- exhaustive search parity ----------------------------------------------


def test_beam_decode_matches_exhaustive_enumeration(basic_engine):
    """With pruning disabled, beam decoding returns exactly the texts and
    costs of a brute-force enumeration of every tap interpretation."""
    graph, touch, layout = basic_engine
    exhaustive = EngineConfig().replaced(
        {"decoder": {"beam_size": 10 ** 6, "beam_width": math.inf}})
    rng = random.Random(5)
    t0 = time.perf_counter()
    checked = 0
    for length in range(1, 6):
        for _ in range(8):
            s = Session(graph, exhaustive, touch)
            for i in range(length):
                x, y = random_letter_point(rng, layout)
                s.tap(x, y, 100.0 * i)
            got = dict(s.n_best(10 ** 6).candidates)
            want = brute_decode_tap(
                graph, list(s.pending_frames), exhaustive.decoder,
                render_tokens,
                start=graph.root_state_of(graph.grammar.start))
            assert set(got) == set(want), (length, set(got) ^ set(want))
            for text, cost in want.items():
                assert abs(got[text] - cost) <= 1e-9, (text, got[text], cost)
            checked += 1
    elapsed = time.perf_counter() - t0
    assert checked == 40
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"


# -- revision of committed words -------------------------------------------


def test_later_context_revises_committed_word():
    """A word committed under one reading is revised once following words
    make another reading clearly better; disabling the revision window
    leaves the original commit in place."""
    words = ["it", "meant", "a", "whole", "while", "lot", "of", "something",
             "ago"]
    corpus = ([["it", "meant", "a", "whole", "lot", "of", "something"]] * 20
              + [["a", "while", "ago"]] * 8)
    cfg = EngineConfig().replaced({"graph": {"order": 2}})
    graph, touch, layout = build_engine(words, corpus, cfg)

    def run(config):
        s = Session(graph, config, touch)
        t = 0.0
        revisions = []
        for w in ["it", "meant", "a", "while", "lot", "of", "something"]:
            tap_word(s, layout, w, t0=t)
            t += 1000.0
            r = s.commit(timestamp=t)
            if r.post_correction is not None:
                revisions.append(r.post_correction)
            t += 500.0
        return s.committed_text(), revisions

    with_pc, revisions = run(cfg)
    without_pc, none = run(cfg.replaced(
        {"autocorrect": {"post_window_words": 0}}))
    assert with_pc == "it meant a whole lot of something"
    assert [(r.old, r.new) for r in revisions] == [("while", "whole")]
    assert without_pc == "it meant a while lot of something"
    assert none == []

    # a bigram-supported revision of the immediately preceding word
    words2 = ["good", "food", "luck", "fight"]
    corpus2 = [["good", "luck"]] * 30 + [["food", "fight"]] * 30
    graph2, touch2, layout2 = build_engine(words2, corpus2)

    def run2(config):
        s = Session(graph2, config, touch2)
        tap_word(s, layout2, "food")
        s.commit(timestamp=1000.0)
        tap_word(s, layout2, "luck", t0=2000.0)
        s.commit(timestamp=3000.0)
        return s.committed_text()

    assert run2(EngineConfig()) == "good luck"
    assert run2(EngineConfig().replaced(
        {"autocorrect": {"post_window_words": 0}})) == "food luck"


# -- single-edit typo recovery ---------------------------------------------


def test_single_edit_typos_recovered_and_valid_words_kept(basic_engine):
    """One substituted, one missing, and one extra letter each still
    surface the intended word in the n-best and win autocorrection at
    default settings; a real word with a stronger-context near-miss is
    left alone."""
    # substituted letter: tjis -> this
    graph, touch, layout = basic_engine
    s = Session(graph, EngineConfig(), touch)
    up = tap_word(s, layout, "tjis")
    assert "this" in [t for t, _ in up.candidates]
    r = s.commit()
    assert r.committed == "this" and r.autocorrected

    # missing letter: farenheit -> fahrenheit
    words = ["fahrenheit", "fare", "rent", "he", "it"]
    corpus = [["fahrenheit"]] * 12 + [["fare"], ["rent"], ["he", "it"]]
    graph, touch, layout = build_engine(words, corpus,
                                        charlm_corpus=words + FILLER)
    s = Session(graph, EngineConfig(), touch)
    up = tap_word(s, layout, "farenheit")
    assert "fahrenheit" in [t for t, _ in up.candidates]
    r = s.commit()
    assert r.committed == "fahrenheit" and r.autocorrected

    # extra letter: truely -> truly
    words = ["truly", "true", "rule"]
    corpus = [["truly"]] * 10 + [["true"], ["rule"]]
    graph, touch, layout = build_engine(words, corpus,
                                        charlm_corpus=words + FILLER)
    s = Session(graph, EngineConfig(), touch)
    up = tap_word(s, layout, "truely")
    assert "truly" in [t for t, _ in up.candidates]
    r = s.commit()
    assert r.committed == "truly" and r.autocorrected

    # negative control: "you're far" stays even though "fat" is likelier
    words = ["you're", "far", "fat"]
    corpus = [["you're", "fat"]] * 8 + [["you're", "far"]]
    graph, touch, layout = build_engine(words, corpus,
                                        charlm_corpus=words + FILLER)
    s = Session(graph, EngineConfig(), touch)
    tap_word(s, layout, "you're")
    s.commit(timestamp=900.0)
    up = tap_word(s, layout, "far", t0=1000.0)
    assert "fat" in [t for t, _ in up.candidates]  # near-miss is considered
    r = s.commit(timestamp=2000.0)
    assert r.committed == "far" and not r.autocorrected


# -- gesture ambiguity ------------------------------------------------------


def test_ambiguous_swipe_yields_every_consistent_word():
    """A straight swipe across a whole key row, under a model with no
    preference among the readings, ranks every consistent word on top."""
    graph, touch, layout = build_engine(["pit", "pot", "put"],
                                        [["pit"], ["pot"], ["put"]])
    s = Session(graph, EngineConfig(), touch)
    x0, y0 = layout.center("p")
    x1, y1 = layout.center("t")
    pts = [(x0 + (x1 - x0) * i / 20, y0 + (y1 - y0) * i / 20, 100.0 * i)
           for i in range(21)]
    up = s.gesture(pts)
    assert {t for t, _ in up.candidates[:3]} == {"pit", "pot", "put"}


# -- corpus-level accuracy --------------------------------------------------


def test_decoder_beats_literal_transcription_on_noisy_corpus(vocab_bundle):
    """On a reproducible noisy corpus the decoder reduces word error rate
    versus raw key transcription, and the revision pass never makes it
    worse — in both tap and gesture entry."""
    corpus = eval_corpus(200)
    cfg = EngineConfig()
    t0 = time.perf_counter()
    for mode in ("tap", "gesture"):
        rep = evaluate(corpus, vocab_bundle, cfg, mode=mode,
                       variants=("literal", "fst", "fst_pc"))
        wer = {name: rep.variants[name].wer
               for name in ("literal", "fst", "fst_pc")}
        assert wer["fst"] < wer["literal"], (mode, wer)
        assert wer["fst_pc"] <= wer["fst"], (mode, wer)
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"evaluation took {elapsed:.0f}s"


# -- completion and prediction parity ---------------------------------------


def test_completions_and_predictions_match_brute_scans(vocab_bundle):
    """Ranked completions match a graph-walk oracle and next-word
    predictions match a full vocabulary scoring scan — same words, same
    order, same costs — across 100 random contexts."""
    graph = vocab_bundle.new_graph()
    touch = vocab_bundle.touch_model()
    layout = vocab_bundle.layout
    model = vocab_bundle.model
    known = sorted(g[0] for g in model.probs if len(g) == 1 and g[0] != UNK)
    rng = random.Random(99)

    for _ in range(50):
        s = Session(graph, EngineConfig(), touch)
        word = rng.choice(VOCABULARY)
        prefix = word[:rng.randint(1, len(word))]
        t = 0.0
        for ch in prefix:
            x, y = layout.center(ch)
            s.tap(x, y, t)
            t += 120.0
        k = rng.choice([3, 5, 10])
        got = completions(s, k)
        want = oracle_completions(s, k)
        assert [w for w, _ in got] == [w for w, _ in want], (prefix, got, want)
        for (gw, gc), (_, wc) in zip(got, want):
            assert abs(gc - wc) <= 1e-9, (prefix, gw, gc, wc)

    for _ in range(50):
        s = Session(graph, EngineConfig(), touch)
        history = [rng.choice(VOCABULARY) for _ in range(rng.randint(0, 3))]
        for w in history:
            s.select(w)
        k = rng.choice([3, 5, 10])
        got = predict_next(s, k)
        scores = {w: model.cost(history, w) for w in known}
        want = sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))[:k]
        assert [w for w, _ in got] == [w for w, _ in want], (history, got,
                                                            want)
        for (gw, gc), (_, wc) in zip(got, want):
            assert abs(gc - wc) <= 1e-9, (history, gw, gc, wc)


# -- the literal reading is never lost --------------------------------------


def test_literal_text_always_among_candidates(basic_engine):
    """No matter how unlikely the tapped letters are as a word, the exact
    keys touched remain available as a result."""
    graph, touch, layout = basic_engine
    rng = random.Random(17)
    for _ in range(1000):
        s = Session(graph, EngineConfig(), touch)
        typed = []
        for i in range(rng.randint(1, 5)):
            x, y = random_letter_point(rng, layout)
            typed.append(layout.key_at(x, y).code)
            s.tap(x, y, 100.0 * i)
        up = s.n_best(10)
        assert up.literal is not None
        assert up.literal[0] == "".join(typed)


# -- algebraic building blocks against reference implementations ------------


def _random_dag(rng, table, weights):
    n = rng.randint(2, 5)
    fst = WeightedFst(table, table)
    fst.add_states(n)
    fst.set_start(0)
    for _ in range(rng.randint(1, 2 * n)):
        src = rng.randint(0, n - 2)
        dst = rng.randint(src + 1, n - 1)
        fst.add_arc(src, rng.choice((0, 1, 2, 3)), rng.choice((0, 1, 2, 3)),
                    rng.choice(weights), dst)
    for sid in range(n):
        if rng.random() < 0.5 or sid == n - 1:
            fst.set_final(sid, rng.choice(weights))
    return fst


def test_core_algebra_matches_reference_implementations(vocab_bundle):
    """Composition, the lazily composed decoding graph, reachable-label
    intervals, and the word-model automaton each agree exactly with a
    slow reference evaluation."""
    # composition versus the all-pairs reference construction
    table = SymbolTable()
    for sym in ("a", "b", "c"):
        table.add(sym)
    weights = [0.0, 0.25, 0.5, 1.0, 2.0]
    rng = random.Random(23)
    for _ in range(100):
        a = _random_dag(rng, table, weights)
        b = _random_dag(rng, table, weights)
        fast = enumerate_relation(compose(a, b), 5)
        slow = enumerate_relation(naive_compose(a, b), 5)
        assert set(fast) == set(slow)
        for key, cost in slow.items():
            assert abs(fast[key] - cost) <= 1e-9, key

    # lazy on-demand composition versus a static composed machine
    for pushing in (False, True):
        params = GraphParams(enable_pushing=pushing)
        cl, model, auto, grammar, graph = build_plain_graph(params)
        gsyms = cl.osymbols.copy()
        gsyms.add(UNK)
        static = connect(compose(rebind_osymbols(cl, gsyms),
                                 auto.as_fst(gsyms)))
        want = relation_by_strings(static, 5)
        got = relation_by_strings(materialize_lazy_graph(graph), 5)
        assert set(got) == set(want)
        for key, cost in want.items():
            assert abs(got[key] - cost) <= 1e-9, key

    # reachable-label intervals versus a reverse scan, on the real machine
    graph, _, _ = build_engine(BASIC_WORDS, BASIC_CORPUS)
    cl = graph.cl
    reach = LabelReachability(cl)
    for state in cl.states():
        fast_labels = {reach.unrelabel(lab) for lab in reach.labels(state)}
        assert fast_labels == brute_next_labels(cl, state)
        assert reach.can_finish[state] == brute_quiet_finish(cl, state)

    # word-model automaton versus the textbook backoff recursion
    model = vocab_bundle.model
    auto = vocab_bundle.auto
    probs_nats = {g: log10_to_cost(lp) for g, lp in model.probs.items()}
    backs_nats = {g: log10_to_cost(lp) for g, lp in model.backoffs.items()}
    vocab = model.vocab
    span = model.order - 1
    rng = random.Random(41)
    for _ in range(1000):
        sentence = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
        state, total = auto.start, 0.0
        for w in sentence:
            state, cost = auto.advance(state, w)
            total += cost
        direct, ctx = 0.0, []
        for w in sentence:
            direct += direct_backoff_score(probs_nats, backs_nats,
                                           tuple(ctx[-span:]), w)
            ctx.append(w)
        assert abs(total - direct) <= 1e-9, sentence


# -- size and latency budgets ----------------------------------------------


def test_large_vocabulary_meets_size_and_latency_budget():
    """A ten-thousand-word bundle serializes within 10 MB and, once warm,
    answers a median tap within the 20 ms interactive budget."""
    bundle = build_bundle(big_lexicon(10000), training_corpus(),
                          config=EngineConfig())
    size = len(bundle_bytes(bundle))
    assert size <= 10 ** 7, f"bundle is {size} bytes"

    graph = bundle.new_graph()
    touch = bundle.touch_model()
    layout = bundle.layout
    samples = []
    for si, sent in enumerate(eval_corpus(40, seed=3)):
        s = Session(graph, EngineConfig(), touch)
        t = 0.0
        for word in sent:
            for ch in word:
                x, y = layout.center(ch)
                tic = time.perf_counter()
                s.tap(x, y, t)
                toc = time.perf_counter()
                if si >= 10:            # first sentences warm shared caches
                    samples.append((toc - tic) * 1000.0)
                t += 120.0
            s.commit(timestamp=t)
            t += 200.0
    samples.sort()
    p50 = samples[len(samples) // 2]
    assert p50 < 20.0, f"median tap took {p50:.2f} ms"
