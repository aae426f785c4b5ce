"""The decoder search graph: key context, lexicon, and grammar sides.

Three machines are involved:

* the context transducer ``C`` rewrites key-pair labels (``a_b`` = key b
  typed after key a) into plain keys, tracking the previous key in its
  state so a later spatial model may condition on it;
* the lexicon transducer ``L`` maps key sequences to words over a shared
  trie, with optional arcs for apostrophes, doubled letters and missing
  separators, plus two escape tracks: a verbatim track consuming exact-key
  labels (``*k``) and emitting per-letter tokens (``+k`` closed by a
  marker), and a character track emitting ``&k`` tokens that spliced-in
  user words consume;
* the grammar side scores word continuations with a backoff n-gram model
  (failure semantics) extended by two splices anchored at the empty
  context: character-model scoring for the verbatim track and per-word
  chains for user-dictionary words.

``C`` and ``L`` are composed statically up front; the grammar is composed
on the fly by :class:`DecoderGraph`, which blocks epsilon moves into
lexicon regions whose upcoming words the grammar state cannot consume,
using the precomputed label intervals.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional, Sequence

from fstkey.config import GraphParams
from fstkey.fst import (
    EPSILON,
    Arc,
    FstError,
    SymbolTable,
    WeightedFst,
    arc_sort,
    compose,
    connect,
)
from fstkey.lm import UNK, CharLm, NgramAutomaton
from fstkey.reachability import LabelIntervalSet, LabelReachability

BEGIN_KEY = "^"          # context marker for "no previous key"
SEPARATOR = " "
MARKER = "+/"            # closes a verbatim-letters run


class GraphError(Exception):
    pass


def context_label(prev: str, key: str) -> str:
    return f"{prev}_{key}"


def literal_label(key: str) -> str:
    return f"*{key}"


def literal_token(key: str) -> str:
    return f"+{key}"


def char_token(key: str) -> str:
    return f"&{key}"


class InputKind:
    KEY = 0   # ordinary key via a context-pair label
    LIT = 1   # exact-key label on the verbatim track
    SEP = 2   # the separator key
    EPS = 3


def classify_input(text: str) -> tuple[int, str]:
    """(kind, key) for a composed-graph input label."""
    if text.startswith("*"):
        return InputKind.LIT, text[1:]
    if "_" in text:
        key = text.split("_", 1)[1]
        return (InputKind.SEP if key == SEPARATOR else InputKind.KEY), key
    raise GraphError(f"unclassifiable input label {text!r}")


# -- context transducer ----------------------------------------------------


def build_context_fst(keys: Sequence[str], *, space_key: Optional[str] = None,
                      literal_keys: Sequence[str] = ()) -> WeightedFst:
    """Key-pair labels to plain keys; one state per possible previous key.

    The separator resets the context to the begin state.  Exact-key labels
    pass through on self-loops so the verbatim track is reachable from any
    context without disturbing it.
    """
    keys = list(keys)
    if space_key in keys:
        raise GraphError("separator must not be listed among plain keys")
    isym = SymbolTable()
    osym = SymbolTable()
    fst = WeightedFst(isym, osym)
    begin = fst.add_state()
    fst.set_start(begin)
    state_of = {BEGIN_KEY: begin}
    for k in keys:
        state_of[k] = fst.add_state()
    for prev, src in state_of.items():
        fst.set_final(src)
        for k in keys:
            fst.add_arc(src, isym.add(context_label(prev, k)),
                        osym.add(k), 0.0, state_of[k])
        if space_key is not None:
            fst.add_arc(src, isym.add(context_label(prev, space_key)),
                        osym.add(space_key), 0.0, begin)
        for k in literal_keys:
            lab = literal_label(k)
            fst.add_arc(src, isym.add(lab), osym.add(lab), 0.0, src)
    return fst


# -- lexicon transducer ----------------------------------------------------


class LexiconEntry(NamedTuple):
    word: str
    keys: tuple[str, ...]


def lexicon_entries(words: Sequence[str],
                    valid_keys: Sequence[str]) -> list[LexiconEntry]:
    """One entry per word, spelled by its own characters as key codes."""
    keyset = set(valid_keys)
    entries = []
    bad = []
    for w in sorted(set(words)):
        if not w:
            continue
        if all(ch in keyset for ch in w):
            entries.append(LexiconEntry(w, tuple(w)))
        else:
            bad.append(w)
    if bad:
        raise GraphError(f"words not typeable with this layout: {bad[:5]}"
                         + ("..." if len(bad) > 5 else ""))
    if not entries:
        raise GraphError("empty lexicon")
    return entries


def build_lexicon_fst(entries: Sequence[LexiconEntry], keys: Sequence[str],
                      *, optional_space: bool = True,
                      bypass_penalty: float = 0.7,
                      literal_track: bool = True,
                      char_track: bool = True) -> WeightedFst:
    """Shared-trie lexicon over key sequences.

    Word labels are emitted on the arc that leaves the trie: either the
    separator arc back to the root or, when ``optional_space`` is on, a
    penalized silent arc enabling run-together words.  Apostrophes and
    doubled letters get silent bypass arcs with the same penalty.  The
    verbatim track requires a separator to close and emits its marker
    there; the character track accepts any key run and closes silently.
    """
    keys = list(keys)
    seen: dict[str, tuple[str, ...]] = {}
    for e in entries:
        if e.word in seen and seen[e.word] != e.keys:
            raise GraphError(f"conflicting key sequences for {e.word!r}")
        seen[e.word] = e.keys
        if not e.keys:
            raise GraphError(f"empty key sequence for {e.word!r}")
    isym = SymbolTable()
    osym = SymbolTable()
    for k in keys:
        isym.add(k)
    isym.add(SEPARATOR)
    fst = WeightedFst(isym, osym)
    root = fst.add_state()
    fst.set_start(root)
    fst.set_final(root)

    trie: dict[tuple[int, str], int] = {}

    for word, keyseq in sorted(seen.items()):
        state = root
        prev_key = None
        for key in keyseq:
            kid = isym.find(key)
            if kid is None:
                raise GraphError(f"key {key!r} of {word!r} not in key set")
            nxt = trie.get((state, key))
            if nxt is None:
                # each trie edge gets its arcs exactly once, no matter how
                # many words share the prefix
                nxt = trie[(state, key)] = fst.add_state()
                fst.add_arc(state, kid, EPSILON, 0.0, nxt)
                if key == "'" or key == prev_key:
                    # the silent bypass makes this key optional to type
                    fst.add_arc(state, EPSILON, EPSILON, bypass_penalty, nxt)
            state = nxt
            prev_key = key
        wid = osym.add(word)
        fst.add_arc(state, isym.find(SEPARATOR), wid, 0.0, root)
        if optional_space:
            fst.add_arc(state, EPSILON, wid, bypass_penalty, root)

    if char_track:
        chw = fst.add_state()
        for k in keys:
            tok = osym.add(char_token(k))
            fst.add_arc(root, isym.find(k), tok, 0.0, chw)
            fst.add_arc(chw, isym.find(k), tok, 0.0, chw)
        fst.add_arc(chw, isym.find(SEPARATOR), EPSILON, 0.0, root)
        fst.add_arc(chw, EPSILON, EPSILON, bypass_penalty, root)

    if literal_track:
        lit = fst.add_state()
        for k in keys:
            lab = isym.add(literal_label(k))
            tok = osym.add(literal_token(k))
            fst.add_arc(root, lab, tok, 0.0, lit)
            fst.add_arc(lit, lab, tok, 0.0, lit)
        fst.add_arc(lit, isym.find(SEPARATOR), osym.add(MARKER), 0.0, root)

    return fst


def build_search_fst(entries: Sequence[LexiconEntry], keys: Sequence[str],
                     params: GraphParams = GraphParams(),
                     *, literal_track: bool = True,
                     char_track: bool = True) -> WeightedFst:
    """The composed, trimmed, sorted key-to-word machine (context applied)."""
    context = build_context_fst(
        keys, space_key=SEPARATOR,
        literal_keys=keys if literal_track else ())
    lexicon = build_lexicon_fst(
        entries, keys, optional_space=True,
        bypass_penalty=params.optional_bypass_penalty,
        literal_track=literal_track, char_track=char_track)
    if context.osymbols != lexicon.isymbols:
        # align alphabets: rebuild the context over the lexicon's table
        raise GraphError("context/lexicon alphabets diverge")
    composed = connect(compose(context, lexicon))
    return arc_sort(composed, "ilabel")


# -- grammar side ----------------------------------------------------------


class Grammar:
    """Word-model states plus verbatim and user-word splices.

    States are interned ints over three families: ``("w", s)`` wraps word
    automaton state ``s``; ``("lit", ctx)`` is the verbatim track carrying
    a character-model context; ``("cw", word, i)`` is position ``i`` inside
    a spliced user word.  The splice entry arcs live at the empty context,
    so reaching them from a rich context pays that state's backoff costs,
    exactly like any other failure-resolved label.
    """

    def __init__(self, auto: NgramAutomaton, charlm: CharLm,
                 params: GraphParams = GraphParams()):
        self.auto = auto
        self.charlm = charlm
        self.params = params
        self._keys: list[tuple] = []
        self._ids: dict[tuple, int] = {}
        self._dynamic: dict[str, float] = {}   # user word -> entry cost
        self.generation = 0
        self.start = self._intern(("w", auto.start))
        self._unk_state = self._intern(("w", auto.state_for((UNK,))))

    def _intern(self, key: tuple) -> int:
        gid = self._ids.get(key)
        if gid is None:
            gid = len(self._keys)
            self._keys.append(key)
            self._ids[key] = gid
        return gid

    def kind(self, gid: int) -> tuple:
        return self._keys[gid]

    def is_final(self, gid: int) -> bool:
        key = self._keys[gid]
        if key[0] == "w":
            return True
        if key[0] == "cw":
            return key[2] == len(key[1])
        return False  # verbatim track must close through its marker

    # -- user dictionary ---------------------------------------------------

    def add_dynamic_word(self, word: str, entry_cost: float) -> None:
        """Register (or re-price) a user word for spliced decoding."""
        if not word:
            raise GraphError("cannot splice an empty word")
        changed = self._dynamic.get(word) != entry_cost
        self._dynamic[word] = entry_cost
        if changed:
            self.generation += 1

    @property
    def dynamic_words(self) -> list[str]:
        return sorted(self._dynamic)

    # -- transitions -------------------------------------------------------

    def consume(self, gid: int, label: str) -> list[tuple[int, float]]:
        """All (next state, cost) moves reading one output label."""
        key = self._keys[gid]
        family = key[0]
        if family == "w":
            return self._consume_word_state(key[1], label)
        if family == "lit":
            return self._consume_lit(key[1], label)
        _, word, i = key
        if i < len(word) and label == char_token(word[i]):
            return [(self._intern(("cw", word, i + 1)), 0.0)]
        return []

    def _consume_word_state(self, s: int, label: str
                            ) -> list[tuple[int, float]]:
        auto = self.auto
        backed = 0.0
        while True:
            hits = self._arcs_at(s, label)
            if hits:
                return [(gid, backed + c) for gid, c in hits]
            back = auto.backoff[s]
            if back is None:
                return []
            backed += back[0]
            s = back[1]

    def _arcs_at(self, s: int, label: str) -> list[tuple[int, float]]:
        hit = self.auto.arcs[s].get(label)
        if hit is not None:
            return [(self._intern(("w", hit[1])), hit[0])]
        if s != self.auto.start:
            return []
        # splice entries are anchored at the empty context only
        if label.startswith("+") and label != MARKER:
            ch = label[1:]
            ctx0 = self.charlm.begin_context()
            cost = (self.params.literal_entry_penalty
                    + self.charlm.cost_after(ctx0, ch))
            return [(self._intern(("lit", self.charlm.shift(ctx0, ch))),
                     cost)]
        if label.startswith("&") and self._dynamic:
            ch = label[1:]
            out = []
            for word, entry in sorted(self._dynamic.items()):
                if word[0] == ch:
                    out.append((self._intern(("cw", word, 1)),
                                self.params.charword_entry_penalty + entry))
            return out
        return []

    def _consume_lit(self, ctx: str, label: str) -> list[tuple[int, float]]:
        if label == MARKER:
            cost = self.charlm.end_after(ctx) + self.params.literal_marker_cost
            return [(self._unk_state, cost)]
        if label.startswith("+"):
            ch = label[1:]
            return [(self._intern(("lit", self.charlm.shift(ctx, ch))),
                     self.charlm.cost_after(ctx, ch))]
        return []

    # -- word-model conveniences (used at commit boundaries) ---------------

    def word_context_state(self, history: Sequence[str]) -> int:
        """Grammar state for a word history, unknown words included."""
        mapped = [w if (w,) in self.auto.model.probs else UNK
                  for w in history]
        return self._intern(("w", self.auto.state_for(mapped)))

    def advance_word(self, gid: int, word: str) -> tuple[int, float]:
        key = self._keys[gid]
        if key[0] != "w":
            raise GraphError("advance_word from a non-word grammar state")
        nxt, cost = self.auto.advance(key[1], word)
        return self._intern(("w", nxt)), cost

    def word_cost(self, gid: int, word: str) -> float:
        return self.advance_word(gid, word)[1]


# -- lazy composition ------------------------------------------------------


class GArc(NamedTuple):
    kind: int     # InputKind
    key: str      # the key consumed ("" for EPS)
    emit: str     # output token text ("" for none)
    weight: float
    nextstate: int
    ilabel: int   # original input label id (for inspection and oracles)


class StateArcs(NamedTuple):
    eps: tuple[GArc, ...]
    by_key: dict[str, tuple[GArc, ...]]   # consumable arcs grouped by key
    lit: dict[str, tuple[GArc, ...]]      # verbatim arcs grouped by key
    sep: tuple[GArc, ...]                 # separator arcs
    keyed: tuple[GArc, ...]               # plain KEY arcs (skippable)


FILTER_NONE = 0
FILTER_PUSHED = 1


class DecoderGraph:
    """On-the-fly composition of the search machine with the grammar.

    A composed state is the (search state, grammar state, filter) triple
    packed arithmetically into one integer: the search machine is frozen,
    so ``sid = (g * 2 + filter) * cl.num_states + cl_state`` is a stable
    bijection with no interning table.  Expansion is cached per state; a
    cache generation tied to the grammar invalidates arc caches when user
    words are added (packed ids stay stable, so live decoder states
    survive).
    """

    def __init__(self, cl: WeightedFst, reach: LabelReachability,
                 grammar: Grammar, params: GraphParams = GraphParams()):
        self.cl = cl
        self.reach = reach
        self.grammar = grammar
        self.params = params
        self._input_kinds: list[tuple[int, str]] = [(InputKind.EPS, "")]
        for lid in range(1, len(cl.isymbols)):
            self._input_kinds.append(classify_input(cl.isymbols.text(lid)))
        self._emit_text: list[str] = [""]
        for lid in range(1, len(cl.osymbols)):
            self._emit_text.append(cl.osymbols.text(lid))
        self._stride = max(1, cl.num_states)
        self._cache: dict[int, StateArcs] = {}
        self._cache_generation = grammar.generation
        self._word_interval_cache: Optional[LabelIntervalSet] = None
        self._lit_interval: Optional[LabelIntervalSet] = None
        self._key_bits: dict[str, int] = {}
        self._ckey_memo: dict[int, int] = {}
        self.start = self._pack(cl.start, grammar.start, FILTER_NONE)

    def _pack(self, cl_s: int, g_s: int, filt: int) -> int:
        return (g_s * 2 + filt) * self._stride + cl_s

    def parts(self, sid: int) -> tuple[int, int, int]:
        gf, cl_s = divmod(sid, self._stride)
        return (cl_s, gf >> 1, gf & 1)

    def is_final(self, sid: int) -> bool:
        cl_s, g_s, filt = self.parts(sid)
        return (filt == FILTER_NONE and self.cl.is_final(cl_s)
                and self.grammar.is_final(g_s))

    def state_for(self, cl_state: int, g_state: int) -> int:
        return self._pack(cl_state, g_state, FILTER_NONE)

    def root_state_of(self, g_state: int) -> int:
        """Composed state at the word boundary with the given grammar state."""
        return self._pack(self.cl.start, g_state, FILTER_NONE)

    def is_pushed(self, sid: int) -> bool:
        return (sid // self._stride) & 1 == FILTER_PUSHED

    def all_arcs(self, sid: int) -> list[GArc]:
        sa = self.arcs(sid)
        out = list(sa.eps)
        out.extend(sa.keyed)
        out.extend(sa.sep)
        for arcs in sa.lit.values():
            out.extend(arcs)
        return out

    # -- consumable-key summaries ------------------------------------------

    def key_bits(self, keys: Iterable[str]) -> int:
        """Bitmask over key codes, with bits assigned on first sight."""
        bits = self._key_bits
        mask = 0
        for key in keys:
            bit = bits.get(key)
            if bit is None:
                bit = 1 << len(bits)
                bits[key] = bit
            mask |= bit
        return mask

    def consumable_keys(self, sid: int) -> int:
        """Keys some arc from the state's lexicon position can consume,
        looking through input-epsilon arcs.

        Grammar effects are ignored, so the mask may overestimate; a zero
        intersection with a frame's scored keys still proves the state
        cannot consume that frame.
        """
        cl_s = sid % self._stride
        mask = self._ckey_memo.get(cl_s)
        if mask is None:
            mask = self._consumable_from(cl_s, set())
            self._ckey_memo[cl_s] = mask
        return mask

    def _consumable_from(self, cl_s: int, active: set[int]) -> int:
        memo = self._ckey_memo
        kinds = self._input_kinds
        bits = self._key_bits
        mask = 0
        active.add(cl_s)
        for arc in self.cl.arcs(cl_s):
            kind, key = kinds[arc.ilabel]
            if kind == InputKind.EPS:
                nxt = arc.nextstate
                got = memo.get(nxt)
                if got is None:
                    if nxt in active:
                        continue  # cycle adds nothing new along this path
                    got = self._consumable_from(nxt, active)
                    memo[nxt] = got
                mask |= got
            else:
                bit = bits.get(key)
                if bit is None:
                    bit = 1 << len(bits)
                    bits[key] = bit
                mask |= bit
        active.discard(cl_s)
        return mask

    # -- expansion ---------------------------------------------------------

    def arcs(self, sid: int) -> StateArcs:
        if self._cache_generation != self.grammar.generation:
            self._cache.clear()
            self._word_interval_cache = None
            self._cache_generation = self.grammar.generation
        got = self._cache.get(sid)
        if got is None:
            got = self._expand(sid)
            self._cache[sid] = got
        return got

    def _expand(self, sid: int) -> StateArcs:
        cl_s, g_s, filt = self.parts(sid)
        out: list[GArc] = []
        if filt == FILTER_PUSHED:
            self._expand_pushed(cl_s, g_s, out)
        else:
            self._expand_plain(cl_s, g_s, out)
        eps = tuple(a for a in out if a.kind == InputKind.EPS)
        sep = tuple(a for a in out if a.kind == InputKind.SEP)
        keyed = tuple(a for a in out if a.kind == InputKind.KEY)
        by_key: dict[str, list[GArc]] = {}
        lit: dict[str, list[GArc]] = {}
        for a in out:
            if a.kind in (InputKind.KEY, InputKind.SEP):
                by_key.setdefault(a.key, []).append(a)
            elif a.kind == InputKind.LIT:
                lit.setdefault(a.key, []).append(a)
        return StateArcs(
            eps=eps,
            by_key={k: tuple(v) for k, v in by_key.items()},
            lit={k: tuple(v) for k, v in lit.items()},
            sep=sep,
            keyed=keyed,
        )

    def _expand_plain(self, cl_s: int, g_s: int, out: list[GArc]) -> None:
        reach = self.reach
        grammar = self.grammar
        push = self.params.enable_pushing
        block = self.params.enable_blocking
        g_mask = -1  # lazily replaced by the grammar state's label bitmask
        # hot loop: beam search expands thousands of states per keystroke
        kinds = self._input_kinds
        emit = self._emit_text
        append = out.append
        can_finish = reach.can_finish
        future_of = reach.labels
        consume = grammar.consume
        stride = self._stride
        plain_base = g_s * 2 * stride      # same grammar state, no filter
        for arc in self.cl.arcs(cl_s):
            kind, key = kinds[arc.ilabel]
            if arc.olabel == EPSILON:
                nxt = arc.nextstate
                if block and not can_finish[nxt]:
                    if g_mask < 0:
                        g_mask = self._grammar_intervals(g_s).mask
                    future = future_of(nxt)
                    if not future.mask & g_mask:
                        continue  # the grammar can never consume what follows
                    if push:
                        only = future.only_label()
                        if only is not None:
                            self._push_arc(arc, kind, key, only, g_s, out)
                            continue
                append(GArc(kind, key, "", arc.weight, plain_base + nxt,
                            arc.ilabel))
            else:
                label = emit[arc.olabel]
                for g2, g_cost in consume(g_s, label):
                    append(GArc(kind, key, label, arc.weight + g_cost,
                                g2 * 2 * stride + arc.nextstate,
                                arc.ilabel))

    def _push_arc(self, arc: Arc, kind: int, key: str, only_new: int,
                  g_s: int, out: list[GArc]) -> None:
        """Emit the single reachable word early, grammar cost included."""
        label = self._emit_text[self.reach.unrelabel(only_new)]
        for g2, g_cost in self.grammar.consume(g_s, label):
            out.append(GArc(kind, key, label, arc.weight + g_cost,
                            self._pack(arc.nextstate, g2, FILTER_PUSHED),
                            arc.ilabel))

    def _expand_pushed(self, cl_s: int, g_s: int, out: list[GArc]) -> None:
        # grammar already advanced; consume the pending emission silently
        for arc in self.cl.arcs(cl_s):
            kind, key = self._input_kinds[arc.ilabel]
            if arc.olabel == EPSILON:
                out.append(GArc(kind, key, "", arc.weight,
                                self._pack(arc.nextstate, g_s,
                                           FILTER_PUSHED),
                                arc.ilabel))
            else:
                out.append(GArc(kind, key, "", arc.weight,
                                self._pack(arc.nextstate, g_s,
                                           FILTER_NONE),
                                arc.ilabel))

    # -- grammar-side label intervals (relabeled space) --------------------

    def _grammar_intervals(self, g_s: int) -> LabelIntervalSet:
        key = self.grammar.kind(g_s)
        family = key[0]
        if family == "w":
            return self._word_state_intervals()
        if family == "lit":
            if self._lit_interval is None:
                labels = [self._new_label(MARKER)]
                for osym in self.cl.osymbols:
                    if osym.startswith("+") and osym != MARKER:
                        labels.append(self._new_label(osym))
                self._lit_interval = LabelIntervalSet.from_labels(
                    lab for lab in labels if lab is not None)
            return self._lit_interval
        _, word, i = key
        if i >= len(word):
            return LabelIntervalSet.EMPTY
        lab = self._new_label(char_token(word[i]))
        if lab is None:
            return LabelIntervalSet.EMPTY
        return LabelIntervalSet.from_labels([lab])

    def _word_state_intervals(self) -> LabelIntervalSet:
        if self._word_interval_cache is None:
            labels = []
            heads = {w[0] for w in self.grammar.dynamic_words}
            for lid in range(1, len(self.cl.osymbols)):
                text = self.cl.osymbols.text(lid)
                if text == MARKER:
                    continue
                if text.startswith("&"):
                    if text[1:] in heads:
                        labels.append(self.reach.relabel(lid))
                elif text.startswith("+"):
                    labels.append(self.reach.relabel(lid))
                else:
                    labels.append(self.reach.relabel(lid))
            self._word_interval_cache = LabelIntervalSet.from_labels(labels)
        return self._word_interval_cache

    def _new_label(self, text: str) -> Optional[int]:
        old = self.cl.osymbols.find(text)
        return None if old is None else self.reach.relabel(old)

    # -- word lookups for completions --------------------------------------

    def upcoming_words(self, sid: int) -> list[str]:
        """Lexicon words still reachable from this state's search side."""
        cl_s = sid % self._stride
        out = []
        for new_label in self.reach.labels(cl_s):
            text = self._emit_text[self.reach.unrelabel(new_label)]
            if text and text[0] not in "+&":
                out.append(text)
        return out
