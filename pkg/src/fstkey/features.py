"""Keyboard feature layer: correction decisions, completions,
next-word prediction with caching, post-correction, and dynamic-model
rescoring.

These functions operate on a decoder :class:`~fstkey.decoder.Session`
but are written against its public surface, so the decoder module does
not need to import this one at load time.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Sequence

from .config import AutocorrectParams
from .graph import MARKER
from .lm import UNK, DynamicModel


@dataclass(frozen=True)
class PostCorrection:
    """A revision of an already-committed word."""
    position: int       # index into session history
    old: str
    new: str
    gain: float         # joint-cost improvement in nats


def autocorrect_decision(candidates: Sequence[tuple[str, float]],
                         literal: tuple[str, float],
                         params: AutocorrectParams,
                         vocab: frozenset = frozenset()
                         ) -> tuple[str, bool]:
    """Choose between the verbatim string and the best candidate.

    ``literal`` carries the verbatim text with its ranking cost (spatial
    cost of the touched keys plus the character-model cost of the
    string).  The candidate wins only when it beats that cost by the
    base margin, stiffened by the valid-word penalty when the verbatim
    string is itself a known word.
    """
    text, lit_cost = literal
    if not candidates:
        return text, False
    top_text, top_cost = candidates[0]
    if top_text == text:
        return text, False
    threshold = params.base_margin
    if text in vocab:
        threshold += params.vocab_margin
    if lit_cost - top_cost > threshold:
        return top_text, True
    return text, False


# -- completions ------------------------------------------------------------


def completions(session, k: int) -> tuple[tuple[str, float], ...]:
    """Most likely whole words extending the current beam's prefixes.

    Each surviving hypothesis contributes the dictionary words still
    reachable from its lexicon position, scored as the hypothesis cost
    plus the word's language-model cost in that hypothesis's sentence
    context.  Hypotheses that already carry the word (early emission, or
    a spliced user word) contribute it at their path cost directly.
    """
    if session.mode != "tap" or not session.pending_frames:
        return ()
    graph = session.graph
    grammar = graph.grammar
    found: dict[str, float] = {}

    def offer(word: str, cost: float) -> None:
        cur = found.get(word)
        if cur is None or cost < cur:
            found[word] = cost

    for hyp in session.beam_hypotheses:
        _, g_s, _ = graph.parts(hyp.state)
        family = grammar.kind(g_s)
        if family[0] == "w":
            if graph.is_pushed(hyp.state):
                word = _last_word_token(hyp.words)
                if word is not None:
                    offer(word, hyp.cost)
            else:
                for word in graph.upcoming_words(hyp.state):
                    offer(word, hyp.cost + grammar.word_cost(g_s, word))
        elif family[0] == "cw":
            offer(family[1], hyp.cost)
        # verbatim-track states spell arbitrary strings: no dictionary word
    ranked = sorted(found.items(), key=lambda kv: (kv[1], kv[0]))
    return tuple(ranked[:max(k, 0)])


def _last_word_token(tokens: Sequence[str]) -> Optional[str]:
    for tok in reversed(tokens):
        if tok and tok[0] not in "+&" and tok != MARKER:
            return tok
    return None


# -- next-word prediction ---------------------------------------------------


class PredictionCache:
    """Bounded LRU cache of per-state prediction lists, shareable across
    sessions of one graph."""

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self._map: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        with self._lock:
            hit = self._map.get(key)
            if hit is not None:
                self._map.move_to_end(key)
                self.hits += 1
            else:
                self.misses += 1
            return hit

    def put(self, key, value) -> None:
        with self._lock:
            self._map[key] = value
            self._map.move_to_end(key)
            while len(self._map) > self.maxsize:
                self._map.popitem(last=False)


def predicted_continuations(auto, state: int) -> dict[str, float]:
    """Conditional next-word costs at an automaton state, resolved through
    the backoff chain: a word's cost comes from the first state along the
    chain that has an explicit arc for it, plus the backoff weights walked
    to get there."""
    out: dict[str, float] = {}
    backed = 0.0
    for s in auto.chain_states(state):
        for word, (cost, _dest) in auto.arcs[s].items():
            if word not in out:
                out[word] = backed + cost
        back = auto.backoff[s]
        if back is None:
            break
        backed += back[0]
    return out


def predict_next(session, k: int) -> tuple[tuple[str, float], ...]:
    """Best next words for the committed sentence prefix."""
    grammar = session.graph.grammar
    auto = grammar.auto
    history = session._flat_history()
    g_state = grammar.word_context_state(history)
    state = grammar.kind(g_state)[1]
    dyn: Optional[DynamicModel] = session.dynamic_model
    dyn_active = dyn is not None and len(dyn.vocabulary) > 0
    prev = history[-1] if history else None
    cache: Optional[PredictionCache] = session.prediction_cache
    key = (state, k,
           (dyn.total, len(dyn.unigrams), prev) if dyn_active else None)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    table = predicted_continuations(auto, state)
    anchor = table.get(UNK)
    table.pop(UNK, None)
    if dyn_active and anchor is not None:
        weight = session.dynamic_weight or session.config.dynamic.weight
        ctx = [prev] if prev is not None else []
        for word in dyn.vocabulary:
            bonus = weight * (dyn.cost(ctx, word) - dyn.FLOOR_COST)
            cand = anchor + bonus
            cur = table.get(word)
            if cur is None or cand < cur:
                table[word] = cand
    ranked = sorted(table.items(), key=lambda kv: (kv[1], kv[0]))
    result = tuple(ranked[:max(k, 0)])
    if cache is not None:
        cache.put(key, result)
    return result


# -- post-correction --------------------------------------------------------


def post_correct(session, just_committed) -> Optional[PostCorrection]:
    """Revise a recently committed word in light of the newest commit.

    Each revisable history entry is re-ranked by joint cost: the stored
    candidate cost for the replacement word plus the language-model cost
    of every word committed after it.  A revision is applied only when
    it beats the committed interpretation by the confidence threshold
    and the entry is still inside the time window.
    """
    params = session.config.autocorrect
    history = session.history
    grammar = session.graph.grammar
    n = len(history)
    for offset in range(2, 2 + max(params.post_window_words, 0)):
        idx = n - offset
        if idx < 0:
            break
        entry = history[idx]
        if not entry.candidates:
            continue
        age = just_committed.time - entry.time
        if age < 0 or age > params.post_window_ms:
            continue
        followers = [w for e in history[idx + 1:]
                     for w in e.text.split(" ") if w]
        if not followers:
            continue
        options: dict[str, float] = {}
        for text, cost in entry.candidates:
            if text and (text not in options or cost < options[text]):
                options[text] = cost
        if entry.literal is not None and entry.literal[0]:
            text, cost = entry.literal
            if text not in options or cost < options[text]:
                options[text] = cost
        if entry.text not in options or len(options) < 2:
            continue

        def joint(text: str) -> float:
            g = grammar.word_context_state(
                _words_before(history, idx) + text.split(" "))
            total = options[text]
            for w in followers:
                g, c = _advance_any(grammar, g, w)
                total += c
            return total

        committed_cost = joint(entry.text)
        best_text = entry.text
        best_cost = committed_cost
        for text in sorted(options):
            if text == entry.text:
                continue
            c = joint(text)
            if c < best_cost - 1e-12 or (c < best_cost and text < best_text):
                best_text, best_cost = text, c
        gain = committed_cost - best_cost
        if best_text != entry.text and gain > params.post_gain:
            correction = PostCorrection(position=idx, old=entry.text,
                                        new=best_text, gain=gain)
            entry.text = best_text
            return correction
    return None


def _words_before(history, idx: int) -> list[str]:
    return [w for e in history[:idx] for w in e.text.split(" ") if w]


def _advance_any(grammar, g_state: int, word: str) -> tuple[int, float]:
    """Word-model advance that tolerates out-of-vocabulary words."""
    if (word,) not in grammar.auto.model.probs:
        word = UNK
    return grammar.advance_word(g_state, word)


# -- dynamic rescoring ------------------------------------------------------


def rescore_with_dynamic(session, model: DynamicModel,
                         weight: Optional[float] = None) -> None:
    """Bias candidate ranking toward the user's own history.

    Ranking-only: candidate word costs are adjusted at extraction time
    by ``weight x (dynamic cost - floor)``; the decoder graph itself is
    untouched.
    """
    if weight is None:
        weight = session.config.dynamic.weight
    session.dynamic_model = model
    session.dynamic_weight = weight
    session._dyn_version += 1
