"""Frame-synchronous beam decoding over the lazy keyboard graph.

A :class:`Session` consumes touch frames one at a time, maintaining a
bounded beam of scored hypotheses plus one protected verbatim hypothesis
that types exactly the touched keys.  It exposes n-best candidate
extraction with word-boundary lookahead, commits that collapse the beam
to the language-model state after the chosen word, and frame-accurate
backspace replay.

Tap frames are consumed with three edit options: substitution (any key
the frame scores), deletion (skip one key-consuming graph arc without
input, then consume), and insertion (consume the frame in place without
moving).  Gesture frames instead choose between aligning to a key and
passing through in transit, with the first and last sample of a stroke
forced to align.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

from .config import EngineConfig
from .graph import MARKER, SEPARATOR, DecoderGraph, InputKind
from .spatial import Frame, TouchModel, gesture_frames

if TYPE_CHECKING:  # pragma: no cover
    from .features import PostCorrection

NBEST_DEFAULT = 5
SNAPSHOT_SIZE = 8
USER_WORD_COST = 2.0
_CLOSURE_LIMIT = 1_000_000


class DecoderError(ValueError):
    pass


class Hypothesis:
    """One scored path through the decoder graph.

    ``words`` holds the output tokens emitted since the last commit;
    ``parent``/``via`` form the traceback chain to the segment root.
    ``last_key`` is the most recently aligned key (gesture mode only);
    hypotheses differing in it are kept apart because the stroke's final
    sample constrains it.
    """

    __slots__ = ("state", "cost", "words", "parent", "via", "last_key")

    def __init__(self, state: int, cost: float, words: tuple[str, ...],
                 parent: Optional["Hypothesis"] = None,
                 via: Optional[tuple] = None, last_key: str = ""):
        self.state = state
        self.cost = cost
        self.words = words
        self.parent = parent
        self.via = via
        self.last_key = last_key

    def key(self) -> tuple[int, tuple[str, ...], str]:
        return (self.state, self.words, self.last_key)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Hypothesis(state={self.state}, cost={self.cost:.3f}, " \
               f"words={self.words!r})"


def render_tokens(tokens: Iterable[str]) -> str:
    """Collapse emitted output tokens into display text.

    Verbatim per-key tokens (``+x``) and spelled user-word tokens
    (``&x``) concatenate into single words; the verbatim end marker and
    any ordinary word token flush a pending run.  Ordinary words join
    with single spaces.
    """
    parts: list[str] = []
    run: list[str] = []
    for tok in tokens:
        if tok == MARKER:
            if run:
                parts.append("".join(run))
                run = []
        elif tok and tok[0] in "+&":
            run.append(tok[1:])
        else:
            if run:
                parts.append("".join(run))
                run = []
            parts.append(tok)
    if run:
        parts.append("".join(run))
    return " ".join(parts)


@dataclass
class DecodeUpdate:
    """Candidate snapshot returned after every decode step."""
    candidates: tuple[tuple[str, float], ...]
    literal: Optional[tuple[str, float]]
    completions: tuple[tuple[str, float], ...] = ()
    autocorrect_preview: bool = False


@dataclass
class CommitResult:
    committed: str
    autocorrected: bool
    post_correction: Optional["PostCorrection"]
    predictions: tuple[tuple[str, float], ...]
    update: Optional[DecodeUpdate]


@dataclass
class CommittedWord:
    """History entry with enough context to revise or un-commit it."""
    text: str
    candidates: tuple[tuple[str, float], ...]
    literal: Optional[tuple[str, float]]
    time: float
    mode: Optional[str]
    g_before: int                      # grammar state entering this word
    frames: Optional[tuple[Frame, ...]]
    autocorrected: bool
    source: str                        # "auto" | "literal" | "select"


def _extend(words: tuple[str, ...], emit: str) -> tuple[str, ...]:
    return words + (emit,) if emit else words


class Session:
    """Single-writer decoding session over a shared immutable graph."""

    def __init__(self, graph: DecoderGraph,
                 config: EngineConfig = EngineConfig(),
                 touch: Optional[TouchModel] = None):
        self.graph = graph
        self.config = config
        self.touch = touch
        self.history: list[CommittedWord] = []
        from .features import PredictionCache
        self.dynamic_model = None
        self.dynamic_weight = 0.0
        self.prediction_cache = PredictionCache()
        self._dyn_version = 0
        self._lex_vocab = frozenset(
            t for t in self._output_texts()
            if t and t[0] not in "+&" and t != MARKER)
        self._finish_cache: dict[int, Optional[tuple[float,
                                                     tuple[str, ...]]]] = {}
        self._finish_generation = graph.grammar.generation
        self._root_g = graph.grammar.start
        self._beam: dict[tuple, Hypothesis] = {}
        self._literal: Optional[Hypothesis] = None
        self._frames: list[Frame] = []
        self._mode: Optional[str] = None
        self._reset_segment()

    def _output_texts(self) -> Iterable[str]:
        syms = self.graph.cl.osymbols
        for lid in range(1, len(syms)):
            yield syms.text(lid)

    # -- vocabulary -------------------------------------------------------

    @property
    def vocab(self) -> frozenset:
        dyn = self.graph.grammar.dynamic_words
        return self._lex_vocab | frozenset(dyn) if dyn else self._lex_vocab

    def add_user_word(self, word: str,
                      entry_cost: Optional[float] = None) -> None:
        """Teach the graph a new word, spliced letter by letter."""
        if entry_cost is None:
            entry_cost = USER_WORD_COST
            if self.dynamic_model is not None and word in self.dynamic_model:
                entry_cost = min(entry_cost,
                                 self.dynamic_model.unigram_cost(word))
        self.graph.grammar.add_dynamic_word(word, entry_cost)

    # -- segment plumbing -------------------------------------------------

    def _reset_segment(self) -> None:
        root = self.graph.root_state_of(self._root_g)
        base = Hypothesis(root, 0.0, ())
        self._beam = self._closure([base])
        self._literal = Hypothesis(root, 0.0, ())
        self._frames = []
        self._mode = None

    def _closure(self, hyps: Iterable[Hypothesis],
                 bound: float = math.inf) -> dict[tuple, Hypothesis]:
        """Dedupe by (state, words, last key) and expand epsilon arcs.

        Hypotheses above ``bound`` are dropped before their states are
        expanded: with non-consuming arc weights >= 0 (true for backoff
        grammars) they could never re-enter the retained cost band, and
        skipping them avoids materializing arcs the pruner would discard.
        """
        out: dict[tuple, Hypothesis] = {}
        stack: list[Hypothesis] = []
        for h in hyps:
            if h.cost > bound:
                continue
            cur = out.get(h.key())
            if cur is None or h.cost < cur.cost:
                out[h.key()] = h
                stack.append(h)
        graph = self.graph
        steps = 0
        while stack:
            h = stack.pop()
            if out.get(h.key()) is not h:
                continue  # superseded by a cheaper arrival
            for arc in graph.arcs(h.state).eps:
                steps += 1
                if steps > _CLOSURE_LIMIT:
                    raise DecoderError("epsilon closure does not terminate")
                cost = h.cost + arc.weight
                if cost > bound:
                    continue
                nh = Hypothesis(arc.nextstate, cost,
                                _extend(h.words, arc.emit), h,
                                ("eps", arc.ilabel), h.last_key)
                cur = out.get(nh.key())
                if cur is None or nh.cost < cur.cost:
                    out[nh.key()] = nh
                    stack.append(nh)
        return out

    @staticmethod
    def _offer(dest: dict, h: Hypothesis) -> None:
        key = h.key()
        cur = dest.get(key)
        if cur is None or h.cost < cur.cost:
            dest[key] = h

    def _prune(self, hyps: dict) -> dict:
        p = self.config.decoder
        ordered = sorted(hyps.values(),
                         key=lambda h: (h.cost, h.state, h.words, h.last_key))
        if not ordered:
            return {}
        bound = ordered[0].cost + p.beam_width
        keep: dict[tuple, Hypothesis] = {}
        for h in ordered[:p.beam_size]:
            if h.cost > bound:
                break
            keep[h.key()] = h
        return keep

    @staticmethod
    def _check_frame(frame: Frame) -> None:
        if not frame.scores:
            raise DecoderError("frame has no key scores")
        for cost in frame.scores.values():
            if not math.isfinite(cost):
                raise DecoderError("frame has non-finite key scores")

    # -- tap decoding -----------------------------------------------------

    def tap(self, x: float, y: float, t: float = 0.0) -> DecodeUpdate:
        if self.touch is None:
            raise DecoderError("session has no touch model for raw points")
        return self.advance_tap(self.touch.tap_frame(x, y, t))

    def advance_tap(self, frame: Frame) -> DecodeUpdate:
        if self._mode == "gesture":
            raise DecoderError("cannot mix tap input into a gesture word")
        self._check_frame(frame)
        if frame.literal_key is None or frame.literal_key not in frame.scores:
            raise DecoderError("tap frame must score its verbatim key")
        if frame.literal_key == SEPARATOR:
            raise DecoderError(
                "tap landed on the separator; commit the word instead")
        self._mode = "tap"
        p = self.config.decoder
        graph = self.graph
        sources = list(self._beam.values())
        min_src = min(h.cost for h in sources)
        # Anything provably outside the retained band after this frame can
        # be dropped before expansion; exact at infinite width.
        ins_base = p.insertion_penalty + frame.best_cost()
        retain = min_src + ins_base + p.beam_width

        skipped: dict = {}
        skip_retain = retain - frame.best_cost()
        skip_bound = skip_retain - p.deletion_penalty
        frame_keys = graph.key_bits(frame.scores)
        consumable = graph.consumable_keys
        for h in sources:
            if h.cost > skip_bound:
                continue
            base = h.cost + p.deletion_penalty
            for arc in graph.arcs(h.state).keyed:
                # a deleted key only matters if the frame's keys remain
                # consumable afterwards; dead branches die in consumption
                # anyway, so dropping them here changes nothing
                if not consumable(arc.nextstate) & frame_keys:
                    continue
                cost = base + arc.weight
                if cost > skip_retain:
                    continue
                self._offer(skipped, Hypothesis(
                    arc.nextstate, cost,
                    _extend(h.words, arc.emit), h, ("del", arc.key)))
        skipped = self._closure(skipped.values(), skip_retain)

        new: dict = {}
        for h in sources:
            self._consume_tap(new, h, frame, retain)
            self._offer(new, Hypothesis(h.state, h.cost + ins_base,
                                        h.words, h, ("ins", frame.t)))
        for h in skipped.values():
            self._consume_tap(new, h, frame, retain)
        band = (min(h.cost for h in new.values()) + p.beam_width
                if new else math.inf)
        self._beam = self._prune(self._closure(new.values(), band))
        self._advance_literal(frame)
        self._frames.append(frame)
        return self.n_best(NBEST_DEFAULT)

    def _consume_tap(self, dest: dict, h: Hypothesis, frame: Frame,
                     retain: float) -> None:
        sa = self.graph.arcs(h.state)
        by_key = sa.by_key
        for key, s_cost in frame.scores.items():
            arcs = by_key.get(key)
            if arcs is None or h.cost + s_cost > retain:
                continue
            base = h.cost + s_cost
            for arc in arcs:
                cost = base + arc.weight
                if cost > retain:
                    continue
                self._offer(dest, Hypothesis(
                    arc.nextstate, cost,
                    _extend(h.words, arc.emit), h, ("tap", key)))
        lit_key = frame.literal_key
        if lit_key is not None and sa.lit:
            arcs = sa.lit.get(lit_key)
            if arcs:
                base = (h.cost + frame.scores[lit_key]
                        + self.config.decoder.literal_key_offset)
                if base <= retain:
                    for arc in arcs:
                        cost = base + arc.weight
                        if cost > retain:
                            continue
                        self._offer(dest, Hypothesis(
                            arc.nextstate, cost,
                            _extend(h.words, arc.emit), h, ("lit", lit_key)))

    def _advance_literal(self, frame: Frame) -> None:
        h = self._literal
        if h is None:
            return
        key = frame.literal_key
        arcs = self.graph.arcs(h.state).lit.get(key)
        if not arcs:
            raise DecoderError(f"no verbatim arc for key {key!r}")
        best = min(arcs, key=lambda a: a.weight)
        cost = (h.cost + frame.scores[key]
                + self.config.decoder.literal_key_offset + best.weight)
        self._literal = Hypothesis(best.nextstate, cost,
                                   _extend(h.words, best.emit), h,
                                   ("lit", key))

    # -- gesture decoding -------------------------------------------------

    def gesture(self, points: Sequence[tuple[float, float, float]]
                ) -> DecodeUpdate:
        if self.touch is None:
            raise DecoderError("session has no touch model for raw points")
        frames = gesture_frames(self.touch, points)
        if not frames:
            raise DecoderError("gesture produced no frames")
        update = None
        last = len(frames) - 1
        for i, frame in enumerate(frames):
            update = self.advance_gesture_frame(
                frame, force_aligned=(i == 0 or i == last))
        return update

    def advance_gesture_frame(self, frame: Frame,
                              force_aligned: bool = False) -> DecodeUpdate:
        """One gesture sample: align to a scored key or pass in transit.

        A forced frame (the stroke's down and up samples) must either
        align an arc or already stand on an aligned key the frame still
        scores; free transit is for interior samples only.
        """
        if self._mode == "tap":
            raise DecoderError("cannot mix gesture input into a tap word")
        self._check_frame(frame)
        self._mode = "gesture"
        self._literal = None
        graph = self.graph
        sources = list(self._beam.values())
        new: dict = {}
        bonus = frame.bonus
        for h in sources:
            by_key = graph.arcs(h.state).by_key
            for key, s_cost in frame.scores.items():
                arcs = by_key.get(key)
                if arcs is None:
                    continue
                base = h.cost + max(0.0, s_cost - bonus)
                for arc in arcs:
                    self._offer(new, Hypothesis(
                        arc.nextstate, base + arc.weight,
                        _extend(h.words, arc.emit), h, ("tap", key), key))
            if not force_aligned or (h.last_key
                                     and h.last_key in frame.scores):
                self._offer(new, Hypothesis(h.state, h.cost + bonus,
                                            h.words, h, ("transit", frame.t),
                                            h.last_key))
        if not new:
            # Forced alignment found no matching arc anywhere; keep the beam
            # alive by consuming the frame in place.
            ins = self.config.decoder.insertion_penalty + frame.best_cost()
            for h in sources:
                self._offer(new, Hypothesis(h.state, h.cost + ins, h.words,
                                            h, ("ins", frame.t), h.last_key))
        band = (min(h.cost for h in new.values())
                + self.config.decoder.beam_width if new else math.inf)
        self._beam = self._prune(self._closure(new.values(), band))
        self._frames.append(frame)
        return self.n_best(NBEST_DEFAULT)

    # -- n-best extraction ------------------------------------------------

    def _finish(self, sid: int) -> Optional[tuple[float, tuple[str, ...]]]:
        """Cheapest path to a final state over non-consuming arcs.

        Separator arcs are free to traverse here apart from their graph
        weight: the boundary tap has not happened yet, so no spatial cost
        is charged.  Returns (cost, emitted tokens) or None.
        """
        if self._finish_generation != self.graph.grammar.generation:
            self._finish_cache.clear()
            self._finish_generation = self.graph.grammar.generation
        if sid in self._finish_cache:
            return self._finish_cache[sid]
        graph = self.graph
        heap: list[tuple[float, tuple[str, ...], int]] = [(0.0, (), sid)]
        seen: set[int] = set()
        result: Optional[tuple[float, tuple[str, ...]]] = None
        while heap:
            cost, tail, s = heapq.heappop(heap)
            if s in seen:
                continue
            seen.add(s)
            if graph.is_final(s):
                result = (cost, tail)
                break
            sa = graph.arcs(s)
            for arc in sa.eps:
                if arc.nextstate not in seen:
                    heapq.heappush(heap, (cost + arc.weight,
                                          tail + (arc.emit,) if arc.emit
                                          else tail, arc.nextstate))
            for arc in sa.sep:
                if arc.nextstate not in seen:
                    heapq.heappush(heap, (cost + arc.weight,
                                          tail + (arc.emit,) if arc.emit
                                          else tail, arc.nextstate))
        self._finish_cache[sid] = result
        return result

    def _dynamic_adjust(self, words: tuple[str, ...]) -> float:
        model = self.dynamic_model
        if model is None or self.dynamic_weight == 0.0:
            return 0.0
        flat = self._flat_history()
        prev = flat[-1] if flat else None
        total = 0.0
        for w in render_tokens(words).split(" "):
            if w and w in model:
                ctx = [prev] if prev is not None else []
                total += self.dynamic_weight * (model.cost(ctx, w)
                                                - model.FLOOR_COST)
            prev = w
        return total

    def n_best(self, n: int) -> DecodeUpdate:
        entries: dict[str, float] = {}
        adjust = (self.dynamic_model is not None
                  and self.dynamic_weight != 0.0)
        for h in self._beam.values():
            fin = self._finish(h.state)
            if fin is None:
                continue
            fcost, tail = fin
            words = h.words + tail
            cost = h.cost + fcost
            if adjust:
                cost += self._dynamic_adjust(words)
            text = render_tokens(words)
            cur = entries.get(text)
            if cur is None or cost < cur:
                entries[text] = cost
        ranked = sorted(entries.items(), key=lambda kv: (kv[1], kv[0]))
        candidates = tuple((t, c) for t, c in ranked[:max(n, 0)])
        literal = None
        if self._mode != "gesture":
            if self._literal is not None and self._frames:
                fin = self._finish(self._literal.state)
                if fin is not None:
                    fcost, tail = fin
                    literal = (render_tokens(self._literal.words + tail),
                               self._literal.cost + fcost)
            elif not self._frames:
                literal = ("", 0.0)
        return DecodeUpdate(candidates=candidates, literal=literal)

    # -- commits ----------------------------------------------------------

    def _flat_history(self) -> list[str]:
        return [w for e in self.history for w in e.text.split(" ") if w]

    def committed_text(self) -> str:
        return " ".join(e.text for e in self.history if e.text)

    def _literal_rank_cost(self, text: str) -> float:
        """Literal string score used by the correction decision:
        spatial cost of the touched keys plus the character-model cost
        of the spelled word."""
        spatial = sum(f.scores[f.literal_key] for f in self._frames
                      if f.literal_key is not None)
        return spatial + self.graph.grammar.charlm.word_cost(text)

    def commit(self, separator: str = SEPARATOR, *,
               timestamp: Optional[float] = None) -> CommitResult:
        from .features import autocorrect_decision, predict_next
        if not self._frames:
            preds = predict_next(self, NBEST_DEFAULT)
            return CommitResult("", False, None, preds, None)
        update = self.n_best(SNAPSHOT_SIZE)
        nonempty = tuple(c for c in update.candidates if c[0])
        literal = update.literal
        if self._mode == "tap" and literal is not None and literal[0]:
            ranked_literal = (literal[0],
                              self._literal_rank_cost(literal[0]))
            chosen, corrected = autocorrect_decision(
                nonempty, ranked_literal, self.config.autocorrect,
                vocab=self.vocab)
            source = "auto" if corrected else "literal"
        else:
            if nonempty:
                chosen, corrected, source = nonempty[0][0], False, "auto"
            elif literal is not None and literal[0]:
                chosen, corrected, source = literal[0], False, "literal"
            else:
                chosen, corrected, source = "", False, "auto"
        return self._commit_chosen(chosen, corrected, source, update,
                                   timestamp)

    def select(self, text: str, *,
               timestamp: Optional[float] = None) -> CommitResult:
        """Commit an explicitly picked suggestion verbatim."""
        update = self.n_best(SNAPSHOT_SIZE) if self._frames else None
        return self._commit_chosen(text, False, "select", update, timestamp)

    def _commit_chosen(self, chosen: str, corrected: bool, source: str,
                       update: Optional[DecodeUpdate],
                       timestamp: Optional[float]) -> CommitResult:
        from .features import post_correct, predict_next
        if timestamp is None:
            timestamp = self._frames[-1].t if self._frames else 0.0
        entry = CommittedWord(
            text=chosen,
            candidates=update.candidates if update else (),
            literal=update.literal if update else None,
            time=timestamp,
            mode=self._mode,
            g_before=self._root_g,
            frames=tuple(self._frames),
            autocorrected=corrected,
            source=source,
        )
        self.history.append(entry)
        self._trim_snapshots()
        correction = post_correct(self, entry)
        self._root_g = self.graph.grammar.word_context_state(
            self._flat_history())
        self._reset_segment()
        predictions = predict_next(self, NBEST_DEFAULT)
        return CommitResult(chosen, corrected, correction, predictions,
                            update)

    def _trim_snapshots(self) -> None:
        keep = max(self.config.autocorrect.post_window_words, 1) + 1
        for entry in self.history[:-keep]:
            entry.candidates = ()
            entry.frames = None

    # -- backspace --------------------------------------------------------

    def backspace(self) -> DecodeUpdate:
        if self._frames:
            if self._mode == "gesture":
                frames: list[Frame] = []  # strokes erase atomically
            else:
                frames = self._frames[:-1]
            self._reset_segment()
            self._replay(frames, "tap")
            return self.n_best(NBEST_DEFAULT)
        if self.history:
            last = self.history[-1]
            if last.frames is None:
                return self.n_best(NBEST_DEFAULT)  # outside revision window
            self.history.pop()
            self._root_g = self.graph.grammar.word_context_state(
                self._flat_history())
            self._reset_segment()
            self._replay(list(last.frames), last.mode or "tap")
            return self.n_best(NBEST_DEFAULT)
        return self.n_best(NBEST_DEFAULT)

    def _replay(self, frames: Sequence[Frame], mode: str) -> None:
        if mode == "gesture":
            last = len(frames) - 1
            for i, frame in enumerate(frames):
                self.advance_gesture_frame(
                    frame, force_aligned=(i == 0 or i == last))
        else:
            for frame in frames:
                self.advance_tap(frame)

    # -- introspection ----------------------------------------------------

    @property
    def mode(self) -> Optional[str]:
        return self._mode

    @property
    def frame_count(self) -> int:
        return len(self._frames)

    @property
    def beam_hypotheses(self) -> list[Hypothesis]:
        return sorted(self._beam.values(),
                      key=lambda h: (h.cost, h.state, h.words))

    @property
    def literal_hypothesis(self) -> Optional[Hypothesis]:
        return self._literal

    @property
    def pending_frames(self) -> tuple[Frame, ...]:
        return tuple(self._frames)

    @property
    def root_grammar_state(self) -> int:
        return self._root_g


def begin_session(graph: DecoderGraph,
                  config: EngineConfig = EngineConfig(),
                  touch: Optional[TouchModel] = None) -> Session:
    return Session(graph, config, touch)
