"""Weighted finite-state transducers over the tropical semiring.

Weights are plain floats interpreted as costs (negative natural-log
probabilities): ``plus`` is ``min`` (best path wins), ``times`` is ``+``
(costs accumulate along a path).  ``ZERO`` (+inf) marks "no path" and is
only ever used as the missing-final-weight sentinel; arc weights stored in
a machine are finite.
"""

from __future__ import annotations

import heapq
import io
import math
import struct
from typing import Iterable, Iterator, NamedTuple, Optional

Weight = float

ZERO: Weight = math.inf
ONE: Weight = 0.0

EPSILON = 0
NO_STATE = -1


def wplus(a: Weight, b: Weight) -> Weight:
    return a if a <= b else b


def wtimes(a: Weight, b: Weight) -> Weight:
    return a + b


class FstError(Exception):
    """Raised for malformed machines or incompatible operation inputs."""


class Arc(NamedTuple):
    ilabel: int
    olabel: int
    weight: Weight
    nextstate: int


class SymbolTable:
    """Bidirectional symbol <-> dense id mapping; id 0 is reserved for epsilon."""

    def __init__(self, name: str = "", epsilon: str = "<eps>"):
        self.name = name
        self._syms: list[str] = [epsilon]
        self._ids: dict[str, int] = {epsilon: 0}

    def add(self, symbol: str) -> int:
        sid = self._ids.get(symbol)
        if sid is None:
            sid = len(self._syms)
            self._syms.append(symbol)
            self._ids[symbol] = sid
        return sid

    def find(self, symbol: str) -> Optional[int]:
        return self._ids.get(symbol)

    def text(self, sid: int) -> str:
        return self._syms[sid]

    def __len__(self) -> int:
        return len(self._syms)

    def __iter__(self) -> Iterator[str]:
        return iter(self._syms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymbolTable) and self._syms == other._syms

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def copy(self) -> "SymbolTable":
        t = SymbolTable(self.name)
        t._syms = list(self._syms)
        t._ids = dict(self._ids)
        return t


class WeightedFst:
    """Mutable-at-build, immutable-once-shared transducer.

    States are dense ints; each state holds a list of :class:`Arc`.  Final
    states map to a finite final weight (absence means non-final).  The
    ``sorted_ilabel`` / ``sorted_olabel`` flags record the arc-order
    invariant established by :func:`arc_sort`; any mutation clears them.
    """

    def __init__(self, isymbols: Optional[SymbolTable] = None,
                 osymbols: Optional[SymbolTable] = None):
        self.isymbols = isymbols if isymbols is not None else SymbolTable()
        self.osymbols = osymbols if osymbols is not None else SymbolTable()
        self._arcs: list[list[Arc]] = []
        self.start: int = NO_STATE
        self.finals: dict[int, Weight] = {}
        self.sorted_ilabel = False
        self.sorted_olabel = False

    # -- construction ------------------------------------------------------

    def add_state(self) -> int:
        self._arcs.append([])
        return len(self._arcs) - 1

    def add_states(self, n: int) -> None:
        for _ in range(n):
            self._arcs.append([])

    def set_start(self, state: int) -> None:
        self._check_state(state)
        self.start = state

    def set_final(self, state: int, weight: Weight = ONE) -> None:
        self._check_state(state)
        if weight == ZERO:
            self.finals.pop(state, None)
        else:
            self.finals[state] = weight

    def add_arc(self, src: int, ilabel: int, olabel: int, weight: Weight,
                dst: int) -> None:
        self._check_state(src)
        self._check_state(dst)
        if not math.isfinite(weight):
            raise FstError(f"arc weight must be finite, got {weight}")
        self._arcs[src].append(Arc(ilabel, olabel, weight, dst))
        self.sorted_ilabel = False
        self.sorted_olabel = False

    def _check_state(self, state: int) -> None:
        if not 0 <= state < len(self._arcs):
            raise FstError(f"state {state} not in machine with "
                           f"{len(self._arcs)} states")

    # -- inspection --------------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self._arcs)

    @property
    def num_arcs(self) -> int:
        return sum(len(a) for a in self._arcs)

    def arcs(self, state: int) -> list[Arc]:
        return self._arcs[state]

    def states(self) -> range:
        return range(len(self._arcs))

    def final(self, state: int) -> Weight:
        return self.finals.get(state, ZERO)

    def is_final(self, state: int) -> bool:
        return state in self.finals

    def __repr__(self) -> str:
        return (f"WeightedFst({self.num_states} states, {self.num_arcs} arcs, "
                f"start={self.start}, {len(self.finals)} finals)")

    # -- text dump (golden-test format) ------------------------------------

    def dump_text(self) -> str:
        """One arc per line "src dst ilabel olabel weight"; finals as "state weight"."""
        lines = []
        for s in self.states():
            for a in self._arcs[s]:
                lines.append(f"{s} {a.nextstate} {a.ilabel} {a.olabel} "
                             f"{format_weight(a.weight)}")
        for s in sorted(self.finals):
            lines.append(f"{s} {format_weight(self.finals[s])}")
        return "\n".join(lines) + "\n"

    # -- binary serialization ----------------------------------------------

    MAGIC = b"FSTK1"

    def write_bytes(self) -> bytes:
        """Binary form: magic, little-endian counts, state table, arc table,
        then both symbol tables as length-prefixed UTF-8."""
        out = io.BytesIO()
        out.write(self.MAGIC)
        out.write(struct.pack("<iiq", self.num_states, self.start,
                              self.num_arcs))
        out.write(struct.pack("<i", len(self.finals)))
        for s in sorted(self.finals):
            out.write(struct.pack("<id", s, self.finals[s]))
        # per-state arc counts, then flat arc table in state order
        out.write(struct.pack(f"<{self.num_states}i",
                              *[len(a) for a in self._arcs]))
        for s in self.states():
            for a in self._arcs[s]:
                out.write(struct.pack("<iidi", a.ilabel, a.olabel, a.weight,
                                      a.nextstate))
        out.write(struct.pack("<bb", int(self.sorted_ilabel),
                              int(self.sorted_olabel)))
        _write_symbols(out, self.isymbols)
        _write_symbols(out, self.osymbols)
        return out.getvalue()

    @classmethod
    def read_bytes(cls, data: bytes) -> "WeightedFst":
        buf = io.BytesIO(data)
        magic = buf.read(5)
        if magic != cls.MAGIC:
            raise FstError(f"bad magic {magic!r}, expected {cls.MAGIC!r}")
        num_states, start, num_arcs = struct.unpack("<iiq", buf.read(16))
        fst = cls()
        fst.add_states(num_states)
        (num_finals,) = struct.unpack("<i", buf.read(4))
        for _ in range(num_finals):
            s, w = struct.unpack("<id", buf.read(12))
            fst.finals[s] = w
        counts = struct.unpack(f"<{num_states}i", buf.read(4 * num_states))
        total = 0
        for s, n in enumerate(counts):
            arcs = fst._arcs[s]
            for _ in range(n):
                il, ol, w, ns = struct.unpack("<iidi", buf.read(20))
                arcs.append(Arc(il, ol, w, ns))
            total += n
        if total != num_arcs:
            raise FstError(f"arc count mismatch: header {num_arcs}, read {total}")
        si, so = struct.unpack("<bb", buf.read(2))
        fst.isymbols = _read_symbols(buf)
        fst.osymbols = _read_symbols(buf)
        if start != NO_STATE:
            fst.set_start(start)
        fst.sorted_ilabel = bool(si)
        fst.sorted_olabel = bool(so)
        return fst


def format_weight(w: Weight) -> str:
    return repr(w)


def _write_symbols(out: io.BytesIO, table: SymbolTable) -> None:
    out.write(struct.pack("<i", len(table)))
    for sym in table:
        b = sym.encode("utf-8")
        out.write(struct.pack("<i", len(b)))
        out.write(b)


def _read_symbols(buf: io.BytesIO) -> SymbolTable:
    (n,) = struct.unpack("<i", buf.read(4))
    table = SymbolTable()
    for i in range(n):
        (ln,) = struct.unpack("<i", buf.read(4))
        sym = buf.read(ln).decode("utf-8")
        if i == 0:
            table._syms[0] = sym
            table._ids = {sym: 0}
        else:
            table.add(sym)
    return table


# -- connect / arc_sort ----------------------------------------------------


def connect(fst: WeightedFst) -> WeightedFst:
    """Drop states not on an accepting path; preserves the weighted language."""
    if fst.start == NO_STATE:
        return WeightedFst(fst.isymbols, fst.osymbols)
    reachable = _forward_reachable(fst)
    coreachable = _backward_reachable(fst)
    keep = reachable & coreachable
    out = WeightedFst(fst.isymbols, fst.osymbols)
    remap: dict[int, int] = {}
    for s in fst.states():  # stable renumbering in old-id order
        if s in keep:
            remap[s] = out.add_state()
    if fst.start in remap:
        out.set_start(remap[fst.start])
    for s in fst.states():
        if s not in remap:
            continue
        for a in fst.arcs(s):
            if a.nextstate in remap:
                out.add_arc(remap[s], a.ilabel, a.olabel, a.weight,
                            remap[a.nextstate])
    for s, w in fst.finals.items():
        if s in remap:
            out.set_final(remap[s], w)
    return out


def is_trim(fst: WeightedFst) -> bool:
    if fst.start == NO_STATE:
        return fst.num_states == 0
    keep = _forward_reachable(fst) & _backward_reachable(fst)
    return len(keep) == fst.num_states


def _forward_reachable(fst: WeightedFst) -> set[int]:
    seen = {fst.start}
    stack = [fst.start]
    while stack:
        s = stack.pop()
        for a in fst.arcs(s):
            if a.nextstate not in seen:
                seen.add(a.nextstate)
                stack.append(a.nextstate)
    return seen


def _backward_reachable(fst: WeightedFst) -> set[int]:
    radj: dict[int, list[int]] = {}
    for s in fst.states():
        for a in fst.arcs(s):
            radj.setdefault(a.nextstate, []).append(s)
    seen = set(fst.finals)
    stack = list(fst.finals)
    while stack:
        s = stack.pop()
        for p in radj.get(s, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def arc_sort(fst: WeightedFst, tape: str = "ilabel") -> WeightedFst:
    """Return a copy with each state's arcs sorted on the given tape.

    Sorting is total — (label, other label, weight, nextstate) — so builds
    are byte-reproducible.  Idempotent on already-sorted machines.
    """
    if tape not in ("ilabel", "olabel"):
        raise FstError(f"tape must be 'ilabel' or 'olabel', got {tape!r}")
    out = WeightedFst(fst.isymbols, fst.osymbols)
    out.add_states(fst.num_states)
    if fst.start != NO_STATE:
        out.set_start(fst.start)
    if tape == "ilabel":
        key = lambda a: (a.ilabel, a.olabel, a.weight, a.nextstate)
    else:
        key = lambda a: (a.olabel, a.ilabel, a.weight, a.nextstate)
    for s in fst.states():
        out._arcs[s] = sorted(fst.arcs(s), key=key)
    out.finals = dict(fst.finals)
    if tape == "ilabel":
        out.sorted_ilabel = True
        out.sorted_olabel = fst.sorted_olabel
    else:
        out.sorted_olabel = True
        out.sorted_ilabel = fst.sorted_ilabel
    return out


# -- composition -----------------------------------------------------------

# Epsilon-handling filter states for composition.  Between two synchronized
# (real-label) moves, epsilon moves are forced into a canonical order: all
# left-side output-epsilon moves first (filter 0), then right-side
# input-epsilon moves (filter 1).  The implicit third state is the blocked
# one.  This keeps each pair path represented exactly once.
_FILTER_ANY = 0
_FILTER_RIGHT_ONLY = 1


def compose(a: WeightedFst, b: WeightedFst) -> WeightedFst:
    """Static composition of the weighted relations of ``a`` and ``b``.

    Requires a's output alphabet to equal b's input alphabet.  Epsilons on
    the shared tape are sequenced by the canonical-order filter so no path
    is duplicated.
    """
    if a.osymbols != b.isymbols:
        raise FstError("composition alphabet mismatch: left output symbols "
                       "differ from right input symbols")
    out = WeightedFst(a.isymbols, b.osymbols)
    if a.start == NO_STATE or b.start == NO_STATE:
        return out

    # index right arcs by input label per state
    index: list[dict[int, list[Arc]]] = []
    for s in b.states():
        d: dict[int, list[Arc]] = {}
        for arc in b.arcs(s):
            d.setdefault(arc.ilabel, []).append(arc)
        index.append(d)

    state_map: dict[tuple[int, int, int], int] = {}
    queue: list[tuple[int, int, int]] = []

    def composed_state(key: tuple[int, int, int]) -> int:
        sid = state_map.get(key)
        if sid is None:
            sid = out.add_state()
            state_map[key] = sid
            queue.append(key)
            fa = a.final(key[0])
            fb = b.final(key[1])
            if fa != ZERO and fb != ZERO:
                out.set_final(sid, fa + fb)
        return sid

    start = composed_state((a.start, b.start, _FILTER_ANY))
    out.set_start(start)

    while queue:
        key = queue.pop()
        s1, s2, f = key
        src = state_map[key]
        for a1 in a.arcs(s1):
            if a1.olabel == EPSILON:
                if f == _FILTER_ANY:  # left-side epsilon move
                    dst = composed_state((a1.nextstate, s2, _FILTER_ANY))
                    out.add_arc(src, a1.ilabel, EPSILON, a1.weight, dst)
            else:
                for a2 in index[s2].get(a1.olabel, ()):
                    dst = composed_state((a1.nextstate, a2.nextstate,
                                          _FILTER_ANY))
                    out.add_arc(src, a1.ilabel, a2.olabel,
                                a1.weight + a2.weight, dst)
        for a2 in index[s2].get(EPSILON, ()):  # right-side epsilon move
            dst = composed_state((s1, a2.nextstate, _FILTER_RIGHT_ONLY))
            out.add_arc(src, EPSILON, a2.olabel, a2.weight, dst)
    return out


# -- shortest paths --------------------------------------------------------


def shortest_path(fst: WeightedFst, n: int,
                  max_expansions: int = 2_000_000
                  ) -> list[tuple[tuple[int, ...], Weight]]:
    """The ``n`` cheapest distinct output sequences as (output labels, cost).

    Cost-ascending; ties broken by lexicographic output-label sequence.
    Paths sharing an output sequence are collapsed to the cheapest one.
    Assumes no negative arc weights.  Raises if the search exceeds
    ``max_expansions`` queue pops (e.g. zero-cost cycles with large n).
    """
    if fst.start == NO_STATE or n <= 0:
        return []
    # heap entries: (cost, olabels, completed_flag, state); completed paths
    # sort before partial ones at equal (cost, labels).
    heap: list[tuple[Weight, tuple[int, ...], int, int]] = []
    heapq.heappush(heap, (ONE, (), 1, fst.start))
    results: list[tuple[tuple[int, ...], Weight]] = []
    emitted: set[tuple[int, ...]] = set()
    pops = 0
    while heap and len(results) < n:
        cost, olabels, partial, state = heapq.heappop(heap)
        pops += 1
        if pops > max_expansions:
            raise FstError(f"shortest_path exceeded {max_expansions} "
                           "expansions; machine may have zero-cost cycles")
        if not partial:
            if olabels not in emitted:
                emitted.add(olabels)
                results.append((olabels, cost))
            continue
        fw = fst.final(state)
        if fw != ZERO:
            heapq.heappush(heap, (cost + fw, olabels, 0, state))
        for arc in fst.arcs(state):
            nl = olabels if arc.olabel == EPSILON else olabels + (arc.olabel,)
            heapq.heappush(heap, (cost + arc.weight, nl, 1, arc.nextstate))
    return results


# -- small constructors (used by builders and tests) -----------------------


def linear_acceptor(labels: Iterable[int], table: SymbolTable,
                    weight: Weight = ONE) -> WeightedFst:
    """Single-path acceptor for a label sequence; weight on the final state."""
    fst = WeightedFst(table, table)
    prev = fst.add_state()
    fst.set_start(prev)
    for lab in labels:
        nxt = fst.add_state()
        fst.add_arc(prev, lab, lab, ONE, nxt)
        prev = nxt
    fst.set_final(prev, weight)
    return fst
