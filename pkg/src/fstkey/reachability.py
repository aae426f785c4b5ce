"""Per-state reachable-output-label intervals for composition look-ahead.

For every state of a machine we precompute the set of output labels that can
be produced *next*: labels reachable by zero or more output-epsilon arcs
followed by exactly one output-labeled arc.  Output labels are renumbered in
first-discovery (DFS) order so that in trie-shaped machines each subtree's
label set collapses to one contiguous interval; the sets are stored as
sorted half-open interval lists.

A lazy composition uses these to block dead-end epsilon moves (the grammar
side cannot consume anything the path could emit next) and to enumerate
word completions from mid-word states without walking the trie.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Iterable, Iterator

from fstkey.fst import EPSILON, FstError, WeightedFst, is_trim


class LabelIntervalSet:
    """Immutable set of label ids stored as merged half-open intervals."""

    __slots__ = ("intervals", "_mask")

    def __init__(self, intervals: list[tuple[int, int]]):
        # callers pass normalized data; from_labels() is the safe constructor
        self.intervals = intervals
        self._mask: int | None = None

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "LabelIntervalSet":
        ordered = sorted(set(labels))
        intervals: list[tuple[int, int]] = []
        for lab in ordered:
            if intervals and intervals[-1][1] == lab:
                intervals[-1] = (intervals[-1][0], lab + 1)
            else:
                intervals.append((lab, lab + 1))
        return cls(intervals)

    EMPTY: "LabelIntervalSet"

    def __contains__(self, label: int) -> bool:
        iv = self.intervals
        i = bisect_right(iv, (label, float("inf"))) - 1
        return i >= 0 and iv[i][0] <= label < iv[i][1]

    @property
    def mask(self) -> int:
        """Bitmask with bit ``i`` set iff label ``i`` is a member (cached)."""
        m = self._mask
        if m is None:
            m = 0
            for lo, hi in self.intervals:
                m |= (1 << hi) - (1 << lo)
            self._mask = m
        return m

    def intersects(self, other: "LabelIntervalSet") -> bool:
        return (self.mask & other.mask) != 0

    def intersect(self, other: "LabelIntervalSet") -> "LabelIntervalSet":
        a, b = self.intervals, other.intervals
        out: list[tuple[int, int]] = []
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return LabelIntervalSet(out)

    def is_empty(self) -> bool:
        return not self.intervals

    def only_label(self) -> int | None:
        """The single member if this set has exactly one, else None."""
        iv = self.intervals
        if len(iv) == 1 and iv[0][1] - iv[0][0] == 1:
            return iv[0][0]
        return None

    def __iter__(self) -> Iterator[int]:
        for lo, hi in self.intervals:
            yield from range(lo, hi)

    def __len__(self) -> int:
        return sum(hi - lo for lo, hi in self.intervals)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, LabelIntervalSet)
                and self.intervals == other.intervals)

    def __repr__(self) -> str:
        parts = ", ".join(f"[{lo},{hi})" for lo, hi in self.intervals)
        return f"LabelIntervalSet({parts})"


LabelIntervalSet.EMPTY = LabelIntervalSet([])


class LabelReachability:
    """Relabeling plus per-state next-output-label interval sets.

    ``old_to_new`` / ``new_to_old`` translate between the machine's output
    label ids and the dense DFS-order ids the intervals are expressed in;
    the machine itself is left unrelabeled.  ``can_finish[s]`` is True when
    ``s`` reaches a final state through output-epsilon arcs alone (such
    states must never be blocked by a look-ahead filter).
    """

    def __init__(self, fst: WeightedFst):
        if fst.start < 0:
            raise FstError("reachability needs a machine with a start state")
        if not is_trim(fst):
            raise FstError("reachability needs a trim machine; run connect() "
                           "first")
        self._fst = fst
        self.old_to_new: list[int] = []
        self.new_to_old: list[int] = []
        self._intervals: list[LabelIntervalSet] = []
        self.can_finish: list[bool] = []
        self._compute()

    def labels(self, state: int) -> LabelIntervalSet:
        """Interval set (new-id space) of labels emittable next from ``state``."""
        return self._intervals[state]

    # -- serialization -----------------------------------------------------

    def to_tables(self) -> dict:
        """JSON-friendly dump of the computed tables (no machine data)."""
        return {
            "old_to_new": list(self.old_to_new),
            "intervals": [[v for iv in s.intervals for v in iv]
                          for s in self._intervals],
            "can_finish": [1 if f else 0 for f in self.can_finish],
        }

    @classmethod
    def from_tables(cls, fst: WeightedFst, tables: dict
                    ) -> "LabelReachability":
        """Rebuild from :meth:`to_tables` output, skipping the computation."""
        self = object.__new__(cls)
        self._fst = fst
        self.old_to_new = [int(v) for v in tables["old_to_new"]]
        n_new = sum(1 for v in self.old_to_new if v >= 0)
        self.new_to_old = [0] * n_new
        for old, new in enumerate(self.old_to_new):
            if new >= 0:
                self.new_to_old[new] = old
        self._intervals = [
            LabelIntervalSet([(flat[i], flat[i + 1])
                              for i in range(0, len(flat), 2)])
            for flat in tables["intervals"]
        ]
        self.can_finish = [bool(v) for v in tables["can_finish"]]
        if len(self._intervals) != fst.num_states:
            raise FstError("reachability tables do not match the machine")
        return self

    def relabel(self, old_label: int) -> int:
        return self.old_to_new[old_label]

    def unrelabel(self, new_label: int) -> int:
        return self.new_to_old[new_label]

    @property
    def num_labels(self) -> int:
        return len(self.new_to_old) - 1

    # -- internals ---------------------------------------------------------

    def _compute(self) -> None:
        fst = self._fst
        self._assign_new_ids()
        comp, order = self._epsilon_sccs()
        old_to_new = self.old_to_new
        comp_labels: list[set[int] | None] = [None] * (max(comp) + 1)
        for c in order:  # dependencies already resolved in this order
            labels: set[int] = set()
            for s in self._comp_members[c]:
                for arc in fst.arcs(s):
                    if arc.olabel != EPSILON:
                        labels.add(old_to_new[arc.olabel])
                    elif comp[arc.nextstate] != c:
                        sub = comp_labels[comp[arc.nextstate]]
                        assert sub is not None
                        labels |= sub
            comp_labels[c] = labels
        self._intervals = [
            LabelIntervalSet.from_labels(comp_labels[comp[s]] or ())
            for s in fst.states()
        ]
        self._compute_can_finish()

    def _assign_new_ids(self) -> None:
        """DFS from the start; first-traversal order of output labels."""
        fst = self._fst
        n_old = len(fst.osymbols)
        old_to_new = [-1] * n_old
        new_to_old = [EPSILON]
        old_to_new[EPSILON] = EPSILON
        visited = [False] * fst.num_states
        # explicit stack of (state, arc index) to survive deep tries
        stack: list[tuple[int, int]] = [(fst.start, 0)]
        visited[fst.start] = True
        while stack:
            state, idx = stack[-1]
            arcs = fst.arcs(state)
            if idx >= len(arcs):
                stack.pop()
                continue
            stack[-1] = (state, idx + 1)
            arc = arcs[idx]
            if arc.olabel != EPSILON and old_to_new[arc.olabel] < 0:
                old_to_new[arc.olabel] = len(new_to_old)
                new_to_old.append(arc.olabel)
            if not visited[arc.nextstate]:
                visited[arc.nextstate] = True
                stack.append((arc.nextstate, 0))
        for old in range(n_old):  # symbols absent from any arc, stable order
            if old_to_new[old] < 0:
                old_to_new[old] = len(new_to_old)
                new_to_old.append(old)
        self.old_to_new = old_to_new
        self.new_to_old = new_to_old

    def _epsilon_sccs(self) -> tuple[list[int], list[int]]:
        """Tarjan components of the output-epsilon subgraph.

        Returns (component id per state, component ids in an order where
        every component precedes the ones that reach it).
        """
        fst = self._fst
        n = fst.num_states
        eps_next: list[list[int]] = [
            [a.nextstate for a in fst.arcs(s) if a.olabel == EPSILON]
            for s in fst.states()
        ]
        index = [-1] * n
        low = [0] * n
        on_stack = [False] * n
        comp = [-1] * n
        scc_stack: list[int] = []
        members: list[list[int]] = []
        order: list[int] = []
        counter = 0
        for root in range(n):
            if index[root] >= 0:
                continue
            work: list[tuple[int, int]] = [(root, 0)]
            while work:
                v, i = work[-1]
                if i == 0:
                    index[v] = low[v] = counter
                    counter += 1
                    scc_stack.append(v)
                    on_stack[v] = True
                advanced = False
                while i < len(eps_next[v]):
                    w = eps_next[v][i]
                    i += 1
                    if index[w] < 0:
                        work[-1] = (v, i)
                        work.append((w, 0))
                        advanced = True
                        break
                    if on_stack[w]:
                        low[v] = min(low[v], index[w])
                if advanced:
                    continue
                work.pop()
                if low[v] == index[v]:
                    cid = len(members)
                    group = []
                    while True:
                        w = scc_stack.pop()
                        on_stack[w] = False
                        comp[w] = cid
                        group.append(w)
                        if w == v:
                            break
                    members.append(group)
                    order.append(cid)
                if work:
                    pv, _ = work[-1]
                    low[pv] = min(low[pv], low[v])
        self._comp_members = members
        return comp, order

    def _compute_can_finish(self) -> None:
        fst = self._fst
        radj: dict[int, list[int]] = {}
        for s in fst.states():
            for a in fst.arcs(s):
                if a.olabel == EPSILON:
                    radj.setdefault(a.nextstate, []).append(s)
        marked = [False] * fst.num_states
        stack = [s for s in fst.finals]
        for s in stack:
            marked[s] = True
        while stack:
            s = stack.pop()
            for p in radj.get(s, ()):
                if not marked[p]:
                    marked[p] = True
                    stack.append(p)
        self.can_finish = marked
