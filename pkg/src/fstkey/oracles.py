"""Slow reference implementations used to validate the fast paths in tests.

Everything here trades efficiency for obviousness: naive pair-state
composition, exhaustive path enumeration, per-state graph scans.  Test
suites compare the production code against these on small inputs and
freeze the resulting values.
"""

from __future__ import annotations

import itertools
from typing import Iterable

from fstkey.fst import (
    EPSILON,
    NO_STATE,
    ONE,
    Arc,
    Weight,
    WeightedFst,
    ZERO,
)


def naive_compose(a: WeightedFst, b: WeightedFst) -> WeightedFst:
    """Pair-state composition without an epsilon filter.

    Epsilon moves on either side are always allowed, so a single relation
    path may appear several times; under min-plus weights the duplicates
    are harmless when comparing enumerated relations.
    """
    out = WeightedFst(a.isymbols, b.osymbols)
    if a.start == NO_STATE or b.start == NO_STATE:
        return out
    state_map: dict[tuple[int, int], int] = {}
    queue: list[tuple[int, int]] = []

    def get(key: tuple[int, int]) -> int:
        if key not in state_map:
            state_map[key] = out.add_state()
            queue.append(key)
            fa, fb = a.final(key[0]), b.final(key[1])
            if fa != ZERO and fb != ZERO:
                out.set_final(state_map[key], fa + fb)
        return state_map[key]

    out.set_start(get((a.start, b.start)))
    while queue:
        s1, s2 = key = queue.pop()
        src = state_map[key]
        for a1 in a.arcs(s1):
            if a1.olabel == EPSILON:
                out.add_arc(src, a1.ilabel, EPSILON, a1.weight,
                            get((a1.nextstate, s2)))
            else:
                for a2 in b.arcs(s2):
                    if a2.ilabel == a1.olabel:
                        out.add_arc(src, a1.ilabel, a2.olabel,
                                    a1.weight + a2.weight,
                                    get((a1.nextstate, a2.nextstate)))
        for a2 in b.arcs(s2):
            if a2.ilabel == EPSILON:
                out.add_arc(src, EPSILON, a2.olabel, a2.weight,
                            get((s1, a2.nextstate)))
    return out


Relation = dict[tuple[tuple[int, ...], tuple[int, ...]], Weight]


def enumerate_relation(fst: WeightedFst, max_len: int,
                       max_paths: int = 500_000,
                       max_depth: int = 0) -> Relation:
    """All (input string, output string) pairs with either side <= max_len,
    mapped to their minimum path cost.  Depth-first over whole paths.

    ``max_depth`` bounds path length in arcs (epsilon arcs included); the
    default suffices for machines without epsilon runs, but composed
    machines with backoff chains need more headroom.
    """
    rel: Relation = {}
    if fst.start == NO_STATE:
        return rel
    if max_depth <= 0:
        max_depth = 2 * max_len + 2
    count = 0

    def walk(state: int, istr: tuple[int, ...], ostr: tuple[int, ...],
             cost: Weight, depth: int) -> None:
        nonlocal count
        count += 1
        if count > max_paths:
            raise RuntimeError("enumerate_relation explored too many paths; "
                               "machine too large or epsilon-cyclic")
        fw = fst.final(state)
        if fw != ZERO:
            key = (istr, ostr)
            total = cost + fw
            if total < rel.get(key, ZERO):
                rel[key] = total
        if depth >= max_depth:  # bound epsilon chains too
            return
        for arc in fst.arcs(state):
            ni = istr if arc.ilabel == EPSILON else istr + (arc.ilabel,)
            no = ostr if arc.olabel == EPSILON else ostr + (arc.olabel,)
            if len(ni) > max_len or len(no) > max_len:
                continue
            walk(arc.nextstate, ni, no, cost + arc.weight, depth + 1)

    walk(fst.start, (), (), ONE, 0)
    return rel


def enumerate_paths(fst: WeightedFst, max_len: int,
                    max_paths: int = 500_000
                    ) -> list[tuple[tuple[int, ...], Weight]]:
    """Every accepting path's (output labels, cost), unsorted, one entry per
    path (not deduplicated)."""
    results: list[tuple[tuple[int, ...], Weight]] = []
    if fst.start == NO_STATE:
        return results
    count = 0

    def walk(state: int, ostr: tuple[int, ...], cost: Weight,
             depth: int) -> None:
        nonlocal count
        count += 1
        if count > max_paths:
            raise RuntimeError("enumerate_paths explored too many paths")
        fw = fst.final(state)
        if fw != ZERO:
            results.append((ostr, cost + fw))
        if depth >= 2 * max_len + 2:
            return
        for arc in fst.arcs(state):
            no = ostr if arc.olabel == EPSILON else ostr + (arc.olabel,)
            if len(no) > max_len:
                continue
            walk(arc.nextstate, no, cost + arc.weight, depth + 1)

    walk(fst.start, (), ONE, 0)
    return results


def brute_next_labels(fst: WeightedFst, state: int) -> set[int]:
    """Output labels reachable from ``state`` via zero or more output-epsilon
    arcs followed by one output-labeled arc (old label ids)."""
    labels: set[int] = set()
    seen = {state}
    stack = [state]
    while stack:
        s = stack.pop()
        for arc in fst.arcs(s):
            if arc.olabel != EPSILON:
                labels.add(arc.olabel)
            elif arc.nextstate not in seen:
                seen.add(arc.nextstate)
                stack.append(arc.nextstate)
    return labels


def brute_quiet_finish(fst: WeightedFst, state: int) -> bool:
    """True if a final state is reachable using only output-epsilon arcs."""
    seen = {state}
    stack = [state]
    while stack:
        s = stack.pop()
        if fst.is_final(s):
            return True
        for arc in fst.arcs(s):
            if arc.olabel == EPSILON and arc.nextstate not in seen:
                seen.add(arc.nextstate)
                stack.append(arc.nextstate)
    return False


def direct_backoff_score(probs: dict[tuple[str, ...], float],
                         backoffs: dict[tuple[str, ...], float],
                         context: tuple[str, ...], word: str) -> float:
    """Textbook backoff recursion over raw n-gram tables.

    ``probs`` maps (w1..wk) to the cost of wk after (w1..wk-1); ``backoffs``
    maps a context to its backoff cost.  Costs in nats.  Returns the cost of
    ``word`` after ``context``, recursing to shorter contexts as needed.
    """
    gram = context + (word,)
    if gram in probs:
        return probs[gram]
    if not context:
        raise KeyError(f"no unigram entry for {word!r}")
    penalty = backoffs.get(context, 0.0)
    return penalty + direct_backoff_score(probs, backoffs, context[1:], word)


def scan_completions(vocabulary: Iterable[str], prefix: str) -> list[str]:
    """Every vocabulary word beginning with ``prefix``, sorted."""
    return sorted(w for w in vocabulary if w.startswith(prefix))


def all_strings(alphabet: Iterable[int], max_len: int
                ) -> Iterable[tuple[int, ...]]:
    syms = list(alphabet)
    for n in range(max_len + 1):
        yield from itertools.product(syms, repeat=n)


def materialize_lazy_graph(graph) -> WeightedFst:
    """Force every state of an on-the-fly composed graph into a plain
    machine (same input alphabet; outputs are the emitted token texts)."""
    fst = WeightedFst(graph.cl.isymbols, graph.cl.osymbols)
    seen: dict[int, int] = {}
    queue: list[int] = []

    def get(sid: int) -> int:
        if sid not in seen:
            seen[sid] = fst.add_state()
            queue.append(sid)
            if graph.is_final(sid):
                fst.set_final(seen[sid])
        return seen[sid]

    fst.set_start(get(graph.start))
    while queue:
        sid = queue.pop()
        src = seen[sid]
        for arc in graph.all_arcs(sid):
            olabel = (graph.cl.osymbols.find(arc.emit) if arc.emit
                      else EPSILON)
            if olabel is None:
                raise RuntimeError(f"emitted token {arc.emit!r} missing from "
                                   "output symbols")
            fst.add_arc(src, arc.ilabel, olabel, arc.weight,
                        get(arc.nextstate))
    return fst


# -- decoding oracles -------------------------------------------------------


def _ext(words: tuple, emit: str) -> tuple:
    return words + (emit,) if emit else words


def _offer_layer(layer: dict, key: tuple, cost: float) -> bool:
    cur = layer.get(key)
    if cur is None or cost < cur - 1e-15:
        layer[key] = cost
        return True
    return False


def naive_eps_close(graph, layer: dict) -> dict:
    """Fixpoint relaxation over input-epsilon arcs of a lazy graph.

    ``layer`` maps (state id, emitted-token tuple, *extras) to cost; any
    trailing key components ride along unchanged.
    """
    layer = dict(layer)
    changed = True
    while changed:
        changed = False
        for key, cost in list(layer.items()):
            sid, words = key[0], key[1]
            for arc in graph.arcs(sid).eps:
                nk = (arc.nextstate, _ext(words, arc.emit)) + key[2:]
                if _offer_layer(layer, nk, cost + arc.weight):
                    changed = True
    return layer


def enumerate_finishes(graph, sid: int, max_depth: int = 60
                       ) -> list[tuple[float, tuple]]:
    """Every way to reach a final state without consuming input,
    as (cost, emitted tokens) pairs.  Depth-first, cycle-guarded."""
    out: list[tuple[float, tuple]] = []

    def walk(s: int, cost: float, toks: tuple, depth: int) -> None:
        if graph.is_final(s):
            out.append((cost, toks))
        if depth <= 0:
            return
        sa = graph.arcs(s)
        for arc in itertools.chain(sa.eps, sa.sep):
            walk(arc.nextstate, cost + arc.weight, _ext(toks, arc.emit),
                 depth - 1)

    walk(sid, 0.0, (), max_depth)
    return out


def brute_decode_tap(graph, frames, params, render,
                     start: int | None = None) -> dict[str, float]:
    """Exhaustive Viterbi over every tap interpretation.

    Mirrors the decoder's move set: substitution over each scored key,
    one skipped key arc per frame followed by a real consumption,
    in-place insertion, verbatim arcs at the touched key only, epsilon
    closure between frames, and a non-consuming finish to a final state.
    Returns minimum cost per rendered text.
    """
    if start is None:
        start = graph.start
    layer = naive_eps_close(graph, {(start, ()): 0.0})
    for frame in frames:
        skipped: dict = {}
        for (sid, words), cost in layer.items():
            for arc in graph.arcs(sid).keyed:
                _offer_layer(skipped,
                             (arc.nextstate, _ext(words, arc.emit)),
                             cost + params.deletion_penalty + arc.weight)
        skipped = naive_eps_close(graph, skipped)
        nxt: dict = {}
        ins = params.insertion_penalty + min(frame.scores.values())
        for (sid, words), cost in layer.items():
            _consume_tap_naive(graph, frame, params, sid, words, cost, nxt)
            _offer_layer(nxt, (sid, words), cost + ins)
        for (sid, words), cost in skipped.items():
            _consume_tap_naive(graph, frame, params, sid, words, cost, nxt)
        layer = naive_eps_close(graph, nxt)
    return _collect_texts(graph, layer, render)


def _consume_tap_naive(graph, frame, params, sid, words, cost, nxt) -> None:
    sa = graph.arcs(sid)
    for key, s_cost in frame.scores.items():
        for arc in sa.by_key.get(key, ()):
            _offer_layer(nxt, (arc.nextstate, _ext(words, arc.emit)),
                         cost + s_cost + arc.weight)
    lit_key = frame.literal_key
    if lit_key is not None and lit_key in frame.scores:
        for arc in sa.lit.get(lit_key, ()):
            _offer_layer(nxt, (arc.nextstate, _ext(words, arc.emit)),
                         cost + frame.scores[lit_key]
                         + params.literal_key_offset + arc.weight)


def brute_decode_gesture(graph, frames, params, render,
                         start: int | None = None) -> dict[str, float]:
    """Exhaustive Viterbi over gesture alignments: each frame either
    aligns to a scored key (dwell credit applied) or passes in transit.
    The first and last frames are forced: they must align an arc, or for
    the last frame the previously aligned key must still be scored."""
    if start is None:
        start = graph.start
    layer = naive_eps_close(graph, {(start, (), ""): 0.0})
    last = len(frames) - 1
    for i, frame in enumerate(frames):
        forced = i == 0 or i == last
        nxt: dict = {}
        for (sid, words, lk), cost in layer.items():
            sa = graph.arcs(sid)
            for key, s_cost in frame.scores.items():
                for arc in sa.by_key.get(key, ()):
                    _offer_layer(nxt,
                                 (arc.nextstate, _ext(words, arc.emit), key),
                                 cost + max(0.0, s_cost - frame.bonus)
                                 + arc.weight)
            if not forced or (lk and lk in frame.scores):
                _offer_layer(nxt, (sid, words, lk), cost + frame.bonus)
        if not nxt:
            ins = params.insertion_penalty + min(frame.scores.values())
            for (sid, words, lk), cost in layer.items():
                _offer_layer(nxt, (sid, words, lk), cost + ins)
        layer = naive_eps_close(graph, nxt)
    return _collect_texts(graph, layer, render)


def _collect_texts(graph, layer: dict, render) -> dict[str, float]:
    results: dict[str, float] = {}
    for key, cost in layer.items():
        sid, words = key[0], key[1]
        for fcost, tail in enumerate_finishes(graph, sid):
            text = render(words + tail)
            total = cost + fcost
            if total < results.get(text, ZERO):
                results[text] = total
    return results


def brute_first_words(graph, sid: int, max_depth: int = 60) -> set:
    """Dictionary words reachable from a state before any other word is
    emitted, by depth-first search over non-verbatim arcs."""
    memo: dict[int, set] = {}
    active: set[int] = set()

    def walk(s: int, depth: int) -> set:
        if s in memo:
            return memo[s]
        if s in active or depth <= 0:
            return set()
        active.add(s)
        sa = graph.arcs(s)
        out: set = set()
        for arc in itertools.chain(sa.eps, sa.sep, sa.keyed):
            emit = arc.emit
            if emit and emit[0] not in "+&":
                out.add(emit)
            else:
                out |= walk(arc.nextstate, depth - 1)
        active.discard(s)
        memo[s] = out
        return out

    return walk(sid, max_depth)
