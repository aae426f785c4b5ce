"""Keyboard geometry and the conversion of touch input into scored frames.

A touch point is scored against every key with an axis-aligned gaussian
centred on the key (sigma proportional to that key's width on both axes).
Only the closest few keys are kept and their probabilities renormalized,
so per-frame scores form a proper distribution and all costs are
nonnegative.

Gestures are resampled onto a fixed time grid; each sample gets the same
spatial scores plus a dwell bonus that grows as the finger slows, letting
the decoder credit alignment at places the user lingered.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from fstkey.config import SpatialParams


class SpatialError(Exception):
    pass


@dataclass(frozen=True)
class Key:
    code: str
    x: float
    y: float
    w: float
    h: float

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0

    def contains(self, x: float, y: float) -> bool:
        return self.x <= x < self.x + self.w and self.y <= y < self.y + self.h

    def center_distance(self, x: float, y: float) -> float:
        return math.hypot(x - self.cx, y - self.cy)


class KeyboardLayout:
    """A named set of rectangular keys on one plane."""

    def __init__(self, name: str, keys: Sequence[Key]):
        if not keys:
            raise SpatialError("layout has no keys")
        codes = [k.code for k in keys]
        if len(set(codes)) != len(codes):
            raise SpatialError("duplicate key codes in layout")
        self.name = name
        self.keys = list(keys)
        self.by_code = {k.code: k for k in self.keys}
        self.width = max(k.x + k.w for k in self.keys)
        self.height = max(k.y + k.h for k in self.keys)

    def key_at(self, x: float, y: float) -> Key:
        """The key under a point: containing box first, else nearest centre.

        Overlapping boxes and exact ties resolve to the earliest-declared
        key, so lookup is deterministic.
        """
        x, y = self.clamp(x, y)
        best: Optional[Key] = None
        best_dist = math.inf
        for k in self.keys:
            if k.contains(x, y):
                d = k.center_distance(x, y)
                if d < best_dist - 1e-9:
                    best, best_dist = k, d
        if best is not None:
            return best
        for k in self.keys:
            d = k.center_distance(x, y)
            if d < best_dist - 1e-9:
                best, best_dist = k, d
        assert best is not None
        return best

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, 0.0), self.width - 1e-9),
                min(max(y, 0.0), self.height - 1e-9))

    def center(self, code: str) -> tuple[float, float]:
        key = self.by_code.get(code)
        if key is None:
            raise SpatialError(f"no key {code!r} in layout {self.name!r}")
        return key.cx, key.cy

    def letter_codes(self) -> list[str]:
        """Key codes that produce text (everything except the separator)."""
        return [k.code for k in self.keys if k.code != " "]

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        unit = min(k.w for k in self.keys)
        return json.dumps({
            "layout_id": self.name,
            "unit": unit,
            "keys": [{"code": k.code, "label": k.code,
                      "cx": k.cx, "cy": k.cy,
                      "left": k.x, "top": k.y, "w": k.w, "h": k.h}
                     for k in self.keys],
        }, indent=2, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "KeyboardLayout":
        data = json.loads(text)
        keys = [Key(d["code"], float(d["left"]), float(d["top"]),
                    float(d["w"]), float(d["h"])) for d in data["keys"]]
        return cls(data["layout_id"], keys)


def qwerty_layout(unit_w: float = 40.0, unit_h: float = 60.0
                  ) -> KeyboardLayout:
    """The standard three-row board plus apostrophe and a space bar."""
    keys: list[Key] = []
    rows = [
        (0.0, "qwertyuiop"),
        (0.5, "asdfghjkl'"),
        (1.5, "zxcvbnm"),
    ]
    for r, (offset, letters) in enumerate(rows):
        for i, ch in enumerate(letters):
            keys.append(Key(ch, (offset + i) * unit_w, r * unit_h,
                            unit_w, unit_h))
    keys.append(Key(" ", 2 * unit_w, 3 * unit_h, 6 * unit_w, unit_h))
    return KeyboardLayout("qwerty", keys)


def accented_qwerty_layout(accents: dict[str, str] = {"é": "e", "è": "e"},
                           unit_w: float = 40.0,
                           unit_h: float = 60.0) -> KeyboardLayout:
    """Qwerty plus accented variants that share their base key's box.

    The base key is declared first, so plain lookup still resolves to it;
    the variants exist for lexicons whose spellings carry accents.
    """
    base = qwerty_layout(unit_w, unit_h)
    keys = list(base.keys)
    for code, base_code in accents.items():
        b = base.by_code[base_code]
        keys.append(Key(code, b.x, b.y, b.w, b.h))
    return KeyboardLayout("qwerty_accents", keys)


@dataclass
class Frame:
    """One decode step: per-key costs plus the verbatim interpretation.

    ``scores`` maps key codes to nonnegative costs in nats.  ``literal_key``
    is the key whose box the touch landed in (None for gesture samples).
    ``bonus`` is the dwell credit, only meaningful for gesture samples.
    """
    scores: dict[str, float]
    literal_key: Optional[str]
    t: float
    kind: str = "tap"
    bonus: float = 0.0
    point: tuple[float, float] = (0.0, 0.0)

    def best_cost(self) -> float:
        return min(self.scores.values())


class TouchModel:
    """Scores touch points against a layout."""

    def __init__(self, layout: KeyboardLayout,
                 params: SpatialParams = SpatialParams()):
        if params.sigma_ratio <= 0:
            raise SpatialError("sigma_ratio must be positive")
        if params.top_k < 1:
            raise SpatialError("top_k must be at least 1")
        self.layout = layout
        self.params = params
        # per-key gaussian constants; sigma tracks the key's own width
        self._consts: list[tuple[Key, float, float]] = []
        for k in layout.keys:
            sigma = params.sigma_ratio * k.w
            self._consts.append((k, sigma, math.log(2 * math.pi * sigma
                                                    * sigma)))

    def raw_costs(self, x: float, y: float) -> dict[str, float]:
        """Unnormalized negative log density for every key."""
        x, y = self.layout.clamp(x, y)
        out = {}
        for key, sigma, log_norm in self._consts:
            dx = (x - key.cx) / sigma
            dy = (y - key.cy) / sigma
            out[key.code] = 0.5 * (dx * dx + dy * dy) + log_norm
        return out

    def scores(self, x: float, y: float,
               include: Iterable[str] = ()) -> dict[str, float]:
        """Top-k keys by density, shifted to a proper distribution.

        Keys named in ``include`` are kept even when they fall outside the
        top k, so downstream consumers that need a particular key scored
        (the verbatim interpretation of a tap) always find it.
        """
        raw = self.raw_costs(x, y)
        kept = sorted(raw.items(), key=lambda kv: (kv[1], kv[0]))
        chosen = dict(kept[:self.params.top_k])
        for code in include:
            if code in raw:
                chosen[code] = raw[code]
        log_total = _log_sum_neg(chosen.values())
        return {code: cost + log_total for code, cost in chosen.items()}

    def tap_frame(self, x: float, y: float, t: float) -> Frame:
        literal = self.layout.key_at(x, y).code
        return Frame(scores=self.scores(x, y, include=(literal,)),
                     literal_key=literal,
                     t=t, kind="tap", point=self.layout.clamp(x, y))


def _log_sum_neg(costs: Iterable[float]) -> float:
    """log(sum(exp(-c))) computed stably."""
    items = list(costs)
    m = min(items)
    return -m + math.log(sum(math.exp(m - c) for c in items))


# -- gestures --------------------------------------------------------------


def resample_gesture(points: Sequence[tuple[float, float, float]],
                     period_ms: float) -> list[tuple[float, float, float]]:
    """Linear resampling of a touch trace onto a fixed time grid.

    The grid starts at the first point's timestamp; samples are produced
    while the grid time is within half a millisecond of the trace.
    """
    if len(points) < 2:
        raise SpatialError("a gesture needs at least two points")
    times = [p[2] for p in points]
    for a, b in zip(times, times[1:]):
        if b < a:
            raise SpatialError("gesture timestamps must be nondecreasing")
    t0 = times[0]
    duration = times[-1] - t0
    n = int((duration + 0.5) // period_ms) + 1
    out = []
    seg = 0
    for i in range(n):
        ts = t0 + i * period_ms
        while seg + 1 < len(points) - 1 and times[seg + 1] <= ts:
            seg += 1
        pa, pb = points[seg], points[seg + 1]
        dt = pb[2] - pa[2]
        frac = 0.0 if dt <= 0 else min(max((ts - pa[2]) / dt, 0.0), 1.0)
        out.append((pa[0] + frac * (pb[0] - pa[0]),
                    pa[1] + frac * (pb[1] - pa[1]), ts))
    return out


def gesture_speeds(samples: Sequence[tuple[float, float, float]]
                   ) -> list[float]:
    """Speed at each sample in px/ms; central differences inside, one-sided
    at the ends.  A single sample has speed zero."""
    n = len(samples)
    if n == 1:
        return [0.0]
    speeds = []
    for i in range(n):
        lo = max(i - 1, 0)
        hi = min(i + 1, n - 1)
        (x1, y1, t1) = samples[lo]
        (x2, y2, t2) = samples[hi]
        dt = t2 - t1
        speeds.append(math.hypot(x2 - x1, y2 - y1) / dt if dt > 0 else 0.0)
    return speeds


def gesture_frames(model: TouchModel,
                   points: Sequence[tuple[float, float, float]]
                   ) -> list[Frame]:
    """Scored frames for a gesture trace: spatial costs plus dwell bonus."""
    params = model.params
    samples = resample_gesture(points, params.period_ms)
    speeds = gesture_speeds(samples)
    frames = []
    for (x, y, t), v in zip(samples, speeds):
        slowness = 1.0 - v / params.dwell_speed_max
        bonus = params.dwell_weight * min(max(slowness, 0.0), 1.0)
        frames.append(Frame(scores=model.scores(x, y), literal_key=None,
                            t=t, kind="gesture", bonus=bonus,
                            point=model.layout.clamp(x, y)))
    return frames
