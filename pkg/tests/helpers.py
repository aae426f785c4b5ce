"""Shared construction helpers for decoder-level test suites."""

from fstkey.config import EngineConfig
from fstkey.decoder import Session
from fstkey.graph import (MARKER, DecoderGraph, Grammar, build_search_fst,
                          lexicon_entries)
from fstkey.lm import CharLm, NgramAutomaton, train_ngram
from fstkey.oracles import brute_first_words
from fstkey.reachability import LabelReachability
from fstkey.spatial import TouchModel, qwerty_layout


def build_engine(words, sentences, config=EngineConfig(), *, keys=None,
                 literal_track=True, char_track=True, charlm_corpus=None,
                 layout=None, vocabulary=None):
    """Graph + touch model over a small lexicon and training corpus."""
    layout = layout or qwerty_layout()
    if keys is None:
        keys = [k.code for k in layout.keys if k.code != " "]
    entries = lexicon_entries(words, keys)
    cl = build_search_fst(entries, keys, config.graph,
                          literal_track=literal_track,
                          char_track=char_track)
    model = train_ngram(sentences, order=config.graph.order,
                        discount=config.graph.discount,
                        vocabulary=words if vocabulary is None else vocabulary)
    auto = NgramAutomaton(model)
    charlm = CharLm(alphabet=keys, delta=config.graph.charlm_delta)
    source = charlm_corpus if charlm_corpus is not None else words
    charlm.train([(w, 1.0) for w in source])
    grammar = Grammar(auto, charlm, config.graph)
    reach = LabelReachability(cl)
    graph = DecoderGraph(cl, reach, grammar, config.graph)
    touch = TouchModel(layout, config.spatial)
    return graph, touch, layout


def build_session(words, sentences, config=EngineConfig(), **kwargs):
    graph, touch, layout = build_engine(words, sentences, config, **kwargs)
    return Session(graph, config, touch), layout


def random_letter_point(rng, layout):
    """A uniform point over the board that avoids the separator bar."""
    while True:
        x = rng.uniform(0.0, layout.width)
        y = rng.uniform(0.0, layout.height)
        if layout.key_at(x, y).code != " ":
            return x, y


def tap_word(session, layout, text, t0=0.0, step=150.0):
    """Tap the exact centers of a word's keys; returns the last update."""
    update = None
    t = t0
    for ch in text:
        x, y = layout.center(ch)
        update = session.tap(x, y, t)
        t += step
    return update


def oracle_completions(session, k):
    """Completion list with word sets found by graph search, not intervals."""
    graph = session.graph
    grammar = graph.grammar
    found = {}

    def offer(word, cost):
        if word not in found or cost < found[word]:
            found[word] = cost

    for hyp in session.beam_hypotheses:
        _, g_s, _ = graph.parts(hyp.state)
        family = grammar.kind(g_s)
        if family[0] == "w":
            if graph.is_pushed(hyp.state):
                for tok in reversed(hyp.words):
                    if tok and tok[0] not in "+&" and tok != MARKER:
                        offer(tok, hyp.cost)
                        break
            else:
                for word in brute_first_words(graph, hyp.state):
                    offer(word, hyp.cost + grammar.word_cost(g_s, word))
        elif family[0] == "cw":
            offer(family[1], hyp.cost)
    return tuple(sorted(found.items(), key=lambda kv: (kv[1], kv[0]))[:k])
