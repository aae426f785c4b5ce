"""Backoff n-gram language models: training, ARPA I/O, compiled automata.

Probabilities are stored as log10 (the ARPA convention) and converted to
costs in nats (negative natural log) at the point of use.  Word models go
up to order 3; sentences are scored without boundary markers, so the first
word of a sentence is scored from the empty context.

Three model families live here:

* :class:`NgramModel` / :class:`NgramAutomaton` -- the word model.  The
  automaton resolves backoff by *failure* semantics: on a query it walks
  the backoff chain to the first state with an explicit arc, so the score
  is exactly the textbook recursion (never a min over alternative routes).
* :class:`CharLm` -- an additive-smoothed character model used to score
  out-of-vocabulary letter sequences.
* :class:`DynamicModel` -- a small count-based unigram/bigram model fed by
  the user's committed text.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from typing import Iterable, Iterator, Optional, Sequence

from fstkey.fst import EPSILON, SymbolTable, WeightedFst

LN10 = math.log(10.0)
UNK = "<unk>"

MAX_ORDER = 3
MAX_VOCAB = 65536


class LmError(Exception):
    pass


def log10_to_cost(lp: float) -> float:
    """log10 probability to cost in nats."""
    return -lp * LN10


def cost_to_log10(cost: float) -> float:
    return -cost / LN10


Gram = tuple[str, ...]


def ngram_counts(sentences: Iterable[Sequence[str]], order: int
                 ) -> dict[Gram, int]:
    """Counts of every 1..order-gram inside sentences (no crossing)."""
    counts: dict[Gram, int] = defaultdict(int)
    for sentence in sentences:
        words = tuple(sentence)
        for k in range(1, order + 1):
            for i in range(len(words) - k + 1):
                counts[words[i:i + k]] += 1
    return dict(counts)


class NgramModel:
    """Backoff tables: explicit gram log10-probs plus context backoff weights."""

    def __init__(self, order: int, probs: dict[Gram, float],
                 backoffs: dict[Gram, float], vocab: Sequence[str]):
        if not 1 <= order <= MAX_ORDER:
            raise LmError(f"order must be 1..{MAX_ORDER}, got {order}")
        if len(vocab) > MAX_VOCAB:
            raise LmError(f"vocabulary of {len(vocab)} exceeds {MAX_VOCAB}")
        self.order = order
        self.probs = probs
        self.backoffs = backoffs
        self.vocab = tuple(vocab)

    def cost(self, context: Sequence[str], word: str) -> float:
        """Cost in nats of ``word`` after ``context`` (backoff recursion).

        Words outside the vocabulary fall back to the unknown-word entry.
        """
        if (word,) not in self.probs:
            if (UNK,) not in self.probs:
                raise LmError(f"word {word!r} not in model and no {UNK} entry")
            word = UNK
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        total = 0.0
        while True:
            gram = ctx + (word,)
            if gram in self.probs:
                return total + log10_to_cost(self.probs[gram])
            if not ctx:
                raise LmError(f"missing unigram for {word!r}")
            total += log10_to_cost(self.backoffs.get(ctx, 0.0))
            ctx = ctx[1:]

    def sequence_cost(self, words: Sequence[str],
                      context: Sequence[str] = ()) -> float:
        total = 0.0
        ctx = list(context)
        for w in words:
            total += self.cost(ctx, w)
            ctx.append(w)
        return total

    def probability_mass(self, context: Sequence[str]) -> float:
        """Sum of p(w | context) over the vocabulary plus the unknown word.

        Exactly 1 for a normalized model; capped backoff weights may leave
        it slightly below 1 (never meaningfully above).
        """
        words = set(self.vocab) | {UNK}
        return sum(math.exp(-self.cost(context, w)) for w in words
                   if (w,) in self.probs)

    def backoff_anomalies(self) -> list[tuple[Gram, str]]:
        """(context, word) pairs where the explicit gram is costlier than the
        backoff route.  An epsilon-arc machine would pick the cheaper route,
        so any entry here makes such a machine differ from this model."""
        out = []
        for gram in self.probs:
            ctx = gram[:-1]
            if not ctx:
                continue
            word = gram[-1]
            explicit = log10_to_cost(self.probs[gram])
            via_backoff = (log10_to_cost(self.backoffs.get(ctx, 0.0))
                           + self.cost(ctx[1:], word))
            if explicit > via_backoff + 1e-12:
                out.append((ctx, word))
        return out


def train_ngram(sentences: Iterable[Sequence[str]], order: int = 3,
                discount: float = 0.5,
                vocabulary: Optional[Iterable[str]] = None) -> NgramModel:
    """Absolute-discounted backoff model from whole sentences.

    Each seen gram keeps (count - discount) / context-total of the mass;
    the freed mass funds the backoff weight.  At the unigram level the
    freed mass is split uniformly between the unknown word and any
    vocabulary words never seen in training, so every vocabulary word is
    guaranteed an explicit unigram.
    """
    if not 0.0 < discount < 1.0:
        raise LmError(f"discount must be in (0, 1), got {discount}")
    if not 1 <= order <= MAX_ORDER:
        raise LmError(f"order must be 1..{MAX_ORDER}, got {order}")
    sentences = [tuple(s) for s in sentences]
    counts = ngram_counts(sentences, order)
    seen_words = sorted({g[0] for g in counts if len(g) == 1})
    if vocabulary is None:
        vocab = seen_words
    else:
        vocab = sorted(set(vocabulary) | set(seen_words))
    if not vocab:
        raise LmError("cannot train on an empty corpus")

    by_context: dict[Gram, dict[str, int]] = defaultdict(dict)
    for gram, c in counts.items():
        by_context[gram[:-1]][gram[-1]] = c

    probs: dict[Gram, float] = {}
    backoffs: dict[Gram, float] = {}

    # unigrams: discounted mass plus a uniform floor for unseen words + UNK
    root = by_context.get((), {})
    total = sum(root.values())
    freed = discount * len(root) / total
    unseen = [w for w in vocab if w not in root] + [UNK]
    floor = freed / len(unseen)
    for w, c in root.items():
        probs[(w,)] = math.log10((c - discount) / total)
    for w in unseen:
        probs[(w,)] = math.log10(floor)

    # the helper shares the tables being filled; level k only ever reads
    # grams of length < k, which are complete by then
    helper = NgramModel(order, probs, backoffs, vocab)
    for k in range(2, order + 1):
        for ctx, row in by_context.items():
            if len(ctx) != k - 1:
                continue
            ctx_total = sum(row.values())
            for w, c in row.items():
                probs[ctx + (w,)] = math.log10((c - discount) / ctx_total)
            freed = discount * len(row) / ctx_total
            lower_seen = sum(math.exp(-helper.cost(ctx[1:], w)) for w in row)
            remaining = 1.0 - lower_seen
            if remaining <= 1e-12:
                alpha = 1.0
            else:
                # capped at 1 so backoff arcs never carry negative cost
                alpha = min(1.0, freed / remaining)
            backoffs[ctx] = math.log10(alpha)

    return NgramModel(order, probs, backoffs, vocab)


# -- ARPA text format ------------------------------------------------------


def format_arpa(model: NgramModel) -> str:
    by_order: dict[int, list[Gram]] = defaultdict(list)
    for gram in model.probs:
        by_order[len(gram)].append(gram)
    lines = ["\\data\\"]
    for k in range(1, model.order + 1):
        lines.append(f"ngram {k}={len(by_order.get(k, []))}")
    for k in range(1, model.order + 1):
        lines.append("")
        lines.append(f"\\{k}-grams:")
        for gram in sorted(by_order.get(k, [])):
            entry = f"{model.probs[gram]:.7f}\t{' '.join(gram)}"
            if gram in model.backoffs:
                entry += f"\t{model.backoffs[gram]:.7f}"
            lines.append(entry)
    lines.append("")
    lines.append("\\end\\")
    return "\n".join(lines) + "\n"


def parse_arpa(text: str) -> NgramModel:
    """Standard ARPA reader.  Backoff weights default to 0 when omitted."""
    declared: dict[int, int] = {}
    probs: dict[Gram, float] = {}
    backoffs: dict[Gram, float] = {}
    section = 0
    in_data = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "\\data\\":
            in_data = True
            continue
        if line == "\\end\\":
            section = 0
            continue
        if line.endswith("-grams:") and line.startswith("\\"):
            section = int(line[1:line.index("-")])
            in_data = False
            continue
        if in_data:
            if line.startswith("ngram "):
                k, n = line[6:].split("=")
                declared[int(k)] = int(n)
            continue
        if section:
            parts = line.split()
            has_backoff = len(parts) == section + 2
            if not (has_backoff or len(parts) == section + 1):
                raise LmError(f"malformed {section}-gram line: {raw!r}")
            gram = tuple(parts[1:section + 1])
            probs[gram] = float(parts[0])
            if has_backoff:
                backoffs[gram] = float(parts[-1])
    if not probs:
        raise LmError("no n-gram entries found")
    order = max(len(g) for g in probs)
    for k, n in declared.items():
        have = sum(1 for g in probs if len(g) == k)
        if have != n:
            raise LmError(f"header declares {n} {k}-grams, file has {have}")
    vocab = sorted(w for (w,) in (g for g in probs if len(g) == 1)
                   if w != UNK)
    return NgramModel(order, probs, backoffs, vocab)


# -- compiled automaton ----------------------------------------------------


class NgramAutomaton:
    """The model as a word-labelled automaton with failure backoff.

    One state per context that can be observed; state 0 is the empty
    context.  ``advance`` resolves a word by walking the backoff chain to
    the first explicit arc, accumulating backoff costs, which reproduces
    :meth:`NgramModel.cost` exactly.
    """

    def __init__(self, model: NgramModel):
        self.model = model
        contexts = {g[:-1] for g in model.probs if len(g) > 1}
        contexts.update(g for g in model.backoffs)
        contexts.add(())
        # shorter contexts first so backoff targets always exist
        self.contexts: list[Gram] = sorted(contexts, key=lambda c: (len(c), c))
        self.state_of: dict[Gram, int] = {c: i for i, c
                                          in enumerate(self.contexts)}
        for ctx in self.contexts:
            if ctx and ctx[1:] not in self.state_of:
                raise LmError(f"context {ctx} lacks backoff context {ctx[1:]}")
        self.arcs: list[dict[str, tuple[float, int]]] = [
            {} for _ in self.contexts]
        self.backoff: list[Optional[tuple[float, int]]] = [
            None for _ in self.contexts]
        for ctx, sid in self.state_of.items():
            if ctx:
                self.backoff[sid] = (
                    log10_to_cost(model.backoffs.get(ctx, 0.0)),
                    self.state_of[ctx[1:]],
                )
        for gram, lp in model.probs.items():
            ctx = gram[:-1]
            sid = self.state_of.get(ctx)
            if sid is None:
                continue  # gram whose context never extends: unreachable arc
            self.arcs[sid][gram[-1]] = (
                log10_to_cost(lp), self._dest_state(gram))

    def _dest_state(self, history: Gram) -> int:
        keep = history[-(self.model.order - 1):] if self.model.order > 1 else ()
        while keep not in self.state_of:
            keep = keep[1:]
        return self.state_of[keep]

    @property
    def start(self) -> int:
        return self.state_of[()]

    @property
    def num_states(self) -> int:
        return len(self.contexts)

    def advance(self, state: int, word: str) -> tuple[int, float]:
        """(next state, cost in nats) after consuming ``word``."""
        if (word,) not in self.model.probs:
            word = UNK
            if (word,) not in self.model.probs:
                raise LmError(f"word {word!r} unknown and no {UNK} entry")
        cost = 0.0
        s = state
        while True:
            hit = self.arcs[s].get(word)
            if hit is not None:
                return hit[1], cost + hit[0]
            back = self.backoff[s]
            if back is None:
                raise LmError(f"no unigram arc for {word!r}")
            cost += back[0]
            s = back[1]

    def state_for(self, history: Sequence[str]) -> int:
        """State encoding the longest usable suffix of a word history."""
        keep = tuple(history)[-(self.model.order - 1):] \
            if self.model.order > 1 else ()
        while keep not in self.state_of:
            keep = keep[1:]
        return self.state_of[keep]

    def chain_states(self, state: int) -> Iterator[int]:
        """The state itself, then its backoff chain down to the root."""
        s: Optional[int] = state
        while s is not None:
            yield s
            back = self.backoff[s]
            s = back[1] if back else None

    def words_consumable(self, state: int) -> set[str]:
        """Every word with an explicit arc somewhere along the chain."""
        out: set[str] = set()
        for s in self.chain_states(state):
            out.update(self.arcs[s])
        return out

    def sequence_cost(self, words: Sequence[str], state: int = 0) -> float:
        total = 0.0
        for w in words:
            state, c = self.advance(state, w)
            total += c
        return total

    def as_fst(self, symbols: Optional[SymbolTable] = None) -> WeightedFst:
        """Epsilon-backoff transducer over word labels.

        The standard approximation: backoff becomes a free-choice epsilon
        arc, so a path may score a seen gram through the backoff route if
        that happens to be cheaper.  Models without backoff anomalies give
        identical best-path scores to the failure automaton.
        """
        if symbols is None:
            symbols = SymbolTable()
            for w in sorted(set(self.model.vocab) | {UNK}):
                symbols.add(w)
        fst = WeightedFst(symbols, symbols)
        fst.add_states(self.num_states)
        fst.set_start(self.start)
        for sid in range(self.num_states):
            fst.set_final(sid)  # any context may end a buffer
            for word, (cost, dest) in sorted(self.arcs[sid].items()):
                wid = symbols.find(word)
                if wid is None:
                    raise LmError(f"word {word!r} missing from symbol table")
                fst.add_arc(sid, wid, wid, cost, dest)
            back = self.backoff[sid]
            if back is not None:
                fst.add_arc(sid, EPSILON, EPSILON, back[0], back[1])
        return fst


# -- character model -------------------------------------------------------


class CharLm:
    """Additive-smoothed character model over a fixed alphabet.

    Context length is order-1 characters with an implicit word-begin
    marker; every word is closed by an end-of-word event.  Characters
    outside the alphabet cost a fixed floor. Smoothing gives every
    in-alphabet character positive probability in every context, so any
    letter string has finite cost.
    """

    BEGIN = "\x02"
    END = "\x03"
    UNKNOWN_COST = -math.log(1e-4)

    def __init__(self, alphabet: Iterable[str], order: int = 3,
                 delta: float = 0.01):
        if not 1 <= order <= MAX_ORDER:
            raise LmError(f"order must be 1..{MAX_ORDER}, got {order}")
        if delta <= 0:
            raise LmError("smoothing delta must be positive")
        self.alphabet = sorted(set(alphabet))
        if not self.alphabet:
            raise LmError("alphabet is empty")
        for marker in (self.BEGIN, self.END):
            if marker in self.alphabet:
                raise LmError("alphabet collides with internal markers")
        self.order = order
        self.delta = delta
        # events = alphabet plus end-of-word
        self._events = self.alphabet + [self.END]
        self._counts: dict[str, dict[str, float]] = defaultdict(
            lambda: defaultdict(float))
        self._totals: dict[str, float] = defaultdict(float)

    def train(self, weighted_words: Iterable[tuple[str, float]]) -> None:
        for word, weight in weighted_words:
            if not word:
                raise LmError("cannot train on an empty word")
            if weight <= 0:
                continue
            for ctx, ev in self._word_events(word):
                self._counts[ctx][ev] += weight
                self._totals[ctx] += weight

    def _context_key(self, prefix: str) -> str:
        padded = self.BEGIN * (self.order - 1) + prefix
        return padded[len(padded) - (self.order - 1):] if self.order > 1 else ""

    def _word_events(self, word: str) -> Iterator[tuple[str, str]]:
        for i, ch in enumerate(word):
            yield self._context_key(word[:i]), ch
        yield self._context_key(word), self.END

    def _event_cost(self, ctx: str, event: str) -> float:
        counts = self._counts.get(ctx)
        total = self._totals.get(ctx, 0.0)
        c = counts.get(event, 0.0) if counts else 0.0
        p = (c + self.delta) / (total + self.delta * len(self._events))
        return -math.log(p)

    def cost(self, prefix: str, ch: str) -> float:
        """Cost of the next character given the in-word prefix so far."""
        if ch not in self._event_set():
            return self.UNKNOWN_COST
        return self._event_cost(self._context_key(prefix), ch)

    def end_cost(self, prefix: str) -> float:
        return self._event_cost(self._context_key(prefix), self.END)

    # explicit-context variants for callers that maintain their own context
    # string (always order-1 characters, begin-padded)

    def begin_context(self) -> str:
        return self.BEGIN * (self.order - 1)

    def shift(self, ctx: str, ch: str) -> str:
        return (ctx + ch)[-(self.order - 1):] if self.order > 1 else ""

    def cost_after(self, ctx: str, ch: str) -> float:
        if ch not in self._event_set():
            return self.UNKNOWN_COST
        return self._event_cost(ctx, ch)

    def end_after(self, ctx: str) -> float:
        return self._event_cost(ctx, self.END)

    def word_cost(self, word: str) -> float:
        if not word:
            raise LmError("cannot score an empty word")
        total = 0.0
        for i, ch in enumerate(word):
            total += self.cost(word[:i], ch)
        return total + self.end_cost(word)

    def _event_set(self) -> set[str]:
        cached = getattr(self, "_event_cache", None)
        if cached is None:
            cached = set(self.alphabet)
            self._event_cache = cached
        return cached


# -- dynamic user model ----------------------------------------------------


class DynamicModel:
    """Unigram/bigram counts over words the user actually committed.

    Scores are smoothed relative frequencies; words never observed get a
    fixed floor cost so interpolation with the static model is neutral for
    them.  Persistence is a replayable JSON-lines log of observations.
    """

    FLOOR_COST = -math.log(1e-6)

    def __init__(self, delta: float = 0.1):
        self.delta = delta
        self.unigrams: dict[str, int] = defaultdict(int)
        self.bigrams: dict[tuple[str, str], int] = defaultdict(int)
        self.total = 0
        self._log: list[list[str]] = []

    def observe(self, words: Sequence[str]) -> None:
        words = [w for w in words if w]
        if not words:
            return
        for w in words:
            self.unigrams[w] += 1
            self.total += 1
        for a, b in zip(words, words[1:]):
            self.bigrams[(a, b)] += 1
        self._log.append(list(words))

    def __contains__(self, word: str) -> bool:
        return word in self.unigrams

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.unigrams)

    def unigram_cost(self, word: str) -> float:
        if self.total == 0 or word not in self.unigrams:
            return self.FLOOR_COST
        v = len(self.unigrams)
        p = (self.unigrams[word] + self.delta) / (self.total + self.delta * v)
        return -math.log(p)

    def cost(self, context: Sequence[str], word: str) -> float:
        """Bigram score against the last context word, else unigram."""
        if context:
            prev = context[-1]
            row_total = self.unigrams.get(prev, 0)
            if row_total:
                v = len(self.unigrams)
                c = self.bigrams.get((prev, word), 0)
                if c or word in self.unigrams:
                    p = (c + self.delta) / (row_total + self.delta * v)
                    return -math.log(p)
        return self.unigram_cost(word)

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"words": w}) + "\n" for w in self._log)

    @classmethod
    def from_jsonl(cls, text: str, delta: float = 0.1) -> "DynamicModel":
        model = cls(delta=delta)
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            model.observe(json.loads(line)["words"])
        return model
