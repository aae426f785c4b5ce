"""Synthetic typing, error-rate evaluation, and latency measurement.

Touch logs are sequences of down/move/up events, serializable as
JSON-lines.  Sentences are synthesized by sampling noisy taps (or
gesture trajectories) for each intended key, then decoded by the
session machinery; word error rate is computed from a word-level
Levenshtein alignment against the reference.
"""

from __future__ import annotations

import dataclasses
import json
import random
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .bundle import KeyboardBundle
from .config import EngineConfig, NoiseParams
from .decoder import Session
from .spatial import KeyboardLayout, gesture_frames


class HarnessError(Exception):
    pass


@dataclass(frozen=True)
class TouchEvent:
    kind: str            # "down" | "move" | "up"
    x: float
    y: float
    t: float


def events_to_jsonl(events: Sequence[TouchEvent]) -> str:
    return "".join(json.dumps({"kind": e.kind, "x": e.x, "y": e.y,
                               "t": e.t}) + "\n" for e in events)


def events_from_jsonl(text: str) -> list[TouchEvent]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(TouchEvent(d["kind"], float(d["x"]), float(d["y"]),
                              float(d["t"])))
    return out


def _check_noise(noise: NoiseParams) -> None:
    for rate in (noise.deletion_rate, noise.insertion_rate):
        if not 0.0 <= rate < 1.0:
            raise HarnessError(f"rate {rate} outside [0, 1)")
    if noise.spread < 0.0:
        raise HarnessError("spread must be nonnegative")


def _noisy_point(rng: random.Random, layout: KeyboardLayout, code: str,
                 spread: float) -> tuple[float, float]:
    key = layout.by_code[code]
    x = rng.gauss(key.cx, spread * key.w)
    y = rng.gauss(key.cy, spread * key.h)
    return layout.clamp(x, y)


def synthesize_taps(sentence: Sequence[str], layout: KeyboardLayout,
                    noise: NoiseParams = NoiseParams()
                    ) -> list[TouchEvent]:
    """A noisy tap log for the sentence, separator taps included."""
    _check_noise(noise)
    intended: list[str] = []
    for word in sentence:
        for ch in word:
            if ch not in layout.by_code:
                raise HarnessError(f"character {ch!r} not on the board")
            intended.append(ch)
        intended.append(" ")
    rng = random.Random(noise.seed)
    events: list[TouchEvent] = []
    t = 0.0
    for code in intended:
        if rng.random() < noise.deletion_rate:
            continue
        copies = 2 if rng.random() < noise.insertion_rate else 1
        for _ in range(copies):
            x, y = _noisy_point(rng, layout, code, noise.spread)
            events.append(TouchEvent("down", x, y, t))
            events.append(TouchEvent("up", x, y, t + 40.0))
            t += 130.0
    return events


def synthesize_gesture(word: str, layout: KeyboardLayout,
                       noise: NoiseParams = NoiseParams(), *,
                       speed: float = 0.35, dwell_ms: float = 140.0,
                       dt: float = 20.0) -> list[TouchEvent]:
    """A jittered constant-speed trajectory through the word's keys.

    The path is the polyline through the key centers; the pointer slows
    to a stop for ``dwell_ms`` at each letter.  Jitter is Gaussian with
    the same spread convention as taps, at quarter strength (a guided
    drag is steadier than discrete aims).
    """
    _check_noise(noise)
    if not word:
        raise HarnessError("cannot gesture an empty word")
    for ch in word:
        if ch not in layout.by_code:
            raise HarnessError(f"character {ch!r} not on the board")
    rng = random.Random(noise.seed)
    centers = [layout.center(ch) for ch in word]

    # piecewise timeline: hold at each center, glide between them
    anchors: list[tuple[float, float, float]] = []      # (x, y, t)
    t = 0.0
    for i, (cx, cy) in enumerate(centers):
        anchors.append((cx, cy, t))
        if dwell_ms > 0.0:
            t += dwell_ms
            anchors.append((cx, cy, t))
        if i + 1 < len(centers):
            nx, ny = centers[i + 1]
            dist = ((nx - cx) ** 2 + (ny - cy) ** 2) ** 0.5
            t += max(dist / speed, dt)

    events: list[TouchEvent] = []
    total = anchors[-1][2]
    n = max(int(total / dt), 1)
    seg = 0
    for i in range(n + 1):
        ti = min(i * dt, total)
        while seg + 1 < len(anchors) - 1 and anchors[seg + 1][2] <= ti:
            seg += 1
        x0, y0, t0 = anchors[seg]
        x1, y1, t1 = anchors[seg + 1]
        frac = 0.0 if t1 <= t0 else (ti - t0) / (t1 - t0)
        x = x0 + (x1 - x0) * frac + rng.gauss(0.0, noise.spread * 10.0)
        y = y0 + (y1 - y0) * frac + rng.gauss(0.0, noise.spread * 15.0)
        x, y = layout.clamp(x, y)
        kind = "down" if i == 0 else ("up" if ti >= total else "move")
        events.append(TouchEvent(kind, x, y, ti))
    if events[-1].kind != "up":
        events.append(TouchEvent("up", events[-1].x, events[-1].y, total))
    return events


def literal_keys(layout: KeyboardLayout,
                 events: Sequence[TouchEvent]) -> list[str]:
    """Per tap (down event), the key whose box contains it."""
    return [layout.key_at(e.x, e.y).code for e in events
            if e.kind == "down"]


# -- word-level alignment ---------------------------------------------------


@dataclass(frozen=True)
class Alignment:
    substitutions: int
    deletions: int        # reference words the hypothesis missed
    insertions: int       # hypothesis words with no reference source
    length: int           # reference word count
    ops: tuple[tuple[str, int, int], ...]   # (op, ref index, hyp index)

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return self.errors / self.length if self.length else 0.0


def align_words(ref: Sequence[str], hyp: Sequence[str]) -> Alignment:
    """Levenshtein alignment over words with a backtrace of operations."""
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            same = ref[i - 1] == hyp[j - 1]
            dist[i][j] = min(dist[i - 1][j - 1] + (0 if same else 1),
                             dist[i - 1][j] + 1,
                             dist[i][j - 1] + 1)
    ops: list[tuple[str, int, int]] = []
    i, j = n, m
    subs = dels = ins = 0
    while i > 0 or j > 0:
        if i > 0 and j > 0 and \
                dist[i][j] == dist[i - 1][j - 1] + \
                (0 if ref[i - 1] == hyp[j - 1] else 1):
            op = "match" if ref[i - 1] == hyp[j - 1] else "sub"
            subs += op == "sub"
            ops.append((op, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            dels += 1
            ops.append(("del", i - 1, -1))
            i -= 1
        else:
            ins += 1
            ops.append(("ins", -1, j - 1))
            j -= 1
    ops.reverse()
    return Alignment(subs, dels, ins, n, tuple(ops))


def _percentile(values: Sequence[float], q: float) -> float:
    if not values:
        return 0.0
    ordered = sorted(values)
    idx = min(int(q * len(ordered)), len(ordered) - 1)
    return ordered[idx]


# -- evaluation -------------------------------------------------------------


@dataclass
class VariantReport:
    name: str
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_words: int = 0
    autocorrect_applied: int = 0
    autocorrect_right: int = 0
    autocorrect_wrong: int = 0
    post_applied: int = 0
    post_right: int = 0
    post_wrong: int = 0
    latencies_ms: list = dataclasses.field(default_factory=list)

    @property
    def wer(self) -> float:
        errs = self.substitutions + self.deletions + self.insertions
        return errs / self.ref_words if self.ref_words else 0.0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "wer": round(self.wer, 4),
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "ref_words": self.ref_words,
            "autocorrect": {"applied": self.autocorrect_applied,
                            "right": self.autocorrect_right,
                            "wrong": self.autocorrect_wrong},
            "post_correction": {"applied": self.post_applied,
                                "right": self.post_right,
                                "wrong": self.post_wrong},
            "latency_ms": {"p50": round(_percentile(self.latencies_ms, 0.50),
                                        3),
                           "p95": round(_percentile(self.latencies_ms, 0.95),
                                        3)},
        }


@dataclass
class EvalReport:
    mode: str
    sentences: int
    variants: dict

    @property
    def literal_wer(self) -> float:
        return self.variants["literal"].wer

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "sentences": self.sentences,
            "variants": {k: v.as_dict() for k, v in self.variants.items()},
        }


VARIANTS = ("literal", "baseline", "fst", "fst_pc")


def _variant_config(name: str, config: EngineConfig) -> EngineConfig:
    if name == "fst_pc":
        return config
    # everything else runs without the revision pass
    return config.replaced({"autocorrect": {"post_window_words": 0}})


def _variant_graph(name: str, bundle: KeyboardBundle):
    if name == "baseline":
        params = dataclasses.replace(bundle.graph_params,
                                     enable_blocking=False)
        return bundle.new_graph(params)
    return bundle.new_graph()


def _sentence_noise(noise: NoiseParams, index: int) -> NoiseParams:
    return dataclasses.replace(noise, seed=noise.seed * 1000003 + index)


def _decode_tap_sentence(session: Session, layout: KeyboardLayout,
                         events: Sequence[TouchEvent],
                         report: VariantReport) -> list:
    """Feed a tap log through the session; returns the commit results."""
    commits = []
    for e in events:
        if e.kind != "down":
            continue
        code = layout.key_at(e.x, e.y).code
        if code == " ":
            commits.append(session.commit(timestamp=e.t))
        else:
            frame = session.touch.tap_frame(e.x, e.y, e.t)
            t0 = time.perf_counter()
            session.advance_tap(frame)
            report.latencies_ms.append((time.perf_counter() - t0) * 1e3)
    if session.frame_count:
        commits.append(session.commit())
    return commits


def _decode_gesture_word(session: Session, events: Sequence[TouchEvent],
                         report: VariantReport) -> None:
    points = [(e.x, e.y, e.t) for e in events]
    frames = gesture_frames(session.touch, points)
    last = len(frames) - 1
    for i, frame in enumerate(frames):
        t0 = time.perf_counter()
        session.advance_gesture_frame(
            frame, force_aligned=(i == 0 or i == last))
        report.latencies_ms.append((time.perf_counter() - t0) * 1e3)


def _score_sentence(ref: Sequence[str], session: Session,
                    commits, report: VariantReport) -> None:
    revised_positions = {r.post_correction.position
                         for r in commits
                         if getattr(r, "post_correction", None)}
    flat = []
    for pos, entry in enumerate(session.history):
        for w in (w for w in entry.text.split(" ") if w):
            flat.append((w, entry.autocorrected,
                         pos in revised_positions))
    hyp = [w for w, _, _ in flat]
    al = align_words(ref, hyp)
    report.substitutions += al.substitutions
    report.deletions += al.deletions
    report.insertions += al.insertions
    report.ref_words += al.length
    matched = {hi: op == "match" for op, _, hi in al.ops if hi >= 0}
    for hi, (word, autoc, rev) in enumerate(flat):
        if autoc:
            report.autocorrect_applied += 1
            if matched.get(hi):
                report.autocorrect_right += 1
            else:
                report.autocorrect_wrong += 1
        if rev:
            report.post_applied += 1
            if matched.get(hi):
                report.post_right += 1
            else:
                report.post_wrong += 1


def _score_literal(ref: Sequence[str], hyp: Sequence[str],
                   report: VariantReport) -> None:
    al = align_words(ref, hyp)
    report.substitutions += al.substitutions
    report.deletions += al.deletions
    report.insertions += al.insertions
    report.ref_words += al.length


def _literal_tap_words(layout: KeyboardLayout,
                       events: Sequence[TouchEvent]) -> list[str]:
    words, current = [], []
    for code in literal_keys(layout, events):
        if code == " ":
            if current:
                words.append("".join(current))
            current = []
        else:
            current.append(code)
    if current:
        words.append("".join(current))
    return words


def _trail_word(layout: KeyboardLayout,
                events: Sequence[TouchEvent]) -> str:
    trail: list[str] = []
    for e in events:
        code = layout.key_at(e.x, e.y).code
        if code != " " and (not trail or trail[-1] != code):
            trail.append(code)
    return "".join(trail)


def evaluate(corpus: Sequence[Sequence[str]], bundle: KeyboardBundle,
             config: EngineConfig = EngineConfig(), *, mode: str = "tap",
             variants: Sequence[str] = VARIANTS,
             noise: Optional[NoiseParams] = None) -> EvalReport:
    """Decode a synthesized corpus under each decoder variant.

    ``literal`` is the no-model baseline (verbatim key boxes for taps, the
    key trail for gestures).  ``baseline`` is the decoder with dead-end
    blocking disabled and no revision pass.  ``fst`` adds blocking;
    ``fst_pc`` adds the revision pass.  Reproducible given (corpus,
    noise seed, config).
    """
    if mode not in ("tap", "gesture"):
        raise HarnessError(f"unknown mode {mode!r}")
    unknown = set(variants) - set(VARIANTS)
    if unknown:
        raise HarnessError(f"unknown variants {sorted(unknown)}")
    noise = noise if noise is not None else config.noise
    layout = bundle.layout
    touch = bundle.touch_model(config.spatial)

    # synthesize once; identical logs go to every variant
    logs: list[list] = []
    for i, sentence in enumerate(corpus):
        sn = _sentence_noise(noise, i)
        if mode == "tap":
            logs.append(synthesize_taps(sentence, layout, sn))
        else:
            per_word = []
            for j, word in enumerate(sentence):
                wn = dataclasses.replace(sn, seed=sn.seed * 31 + j)
                per_word.append(synthesize_gesture(word, layout, wn))
            logs.append(per_word)

    reports: dict[str, VariantReport] = {}
    for name in variants:
        report = VariantReport(name)
        reports[name] = report
        if name == "literal":
            for sentence, log in zip(corpus, logs):
                if mode == "tap":
                    hyp = _literal_tap_words(layout, log)
                else:
                    hyp = [_trail_word(layout, ev) for ev in log]
                _score_literal(sentence, hyp, report)
            continue
        graph = _variant_graph(name, bundle)
        cfg = _variant_config(name, config)
        for sentence, log in zip(corpus, logs):
            session = Session(graph, cfg, touch)
            if mode == "tap":
                commits = _decode_tap_sentence(session, layout, log,
                                               report)
            else:
                commits = []
                clock = 0.0
                for ev in log:
                    _decode_gesture_word(session, ev, report)
                    clock += ev[-1].t + 500.0
                    commits.append(session.commit(timestamp=clock))
            _score_sentence(sentence, session, commits, report)
    return EvalReport(mode=mode, sentences=len(corpus), variants=reports)
