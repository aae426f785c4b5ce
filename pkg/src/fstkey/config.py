"""Tunable parameters grouped by subsystem, with JSON override support."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SpatialParams:
    """Touch-point scoring and gesture sampling."""
    sigma_ratio: float = 0.5        # gaussian sigma as a fraction of key width
    top_k: int = 6                  # keys kept per touch point
    period_ms: float = 100.0        # gesture resampling interval
    dwell_weight: float = 1.0       # max credit for slowing down mid-gesture
    dwell_speed_max: float = 0.2    # px/ms above which no dwell credit is given


@dataclass(frozen=True)
class GraphParams:
    """Search graph construction: lexicon, grammar and splices."""
    order: int = 3
    discount: float = 0.5
    optional_bypass_penalty: float = 0.7   # skipping apostrophe/space/doubles
    literal_entry_penalty: float = 3.5     # entering the verbatim-letters track
    literal_marker_cost: float = 0.0       # closing the verbatim track
    charlm_delta: float = 0.01
    charword_entry_penalty: float = 2.0    # spliced user-word entry arcs
    enable_pushing: bool = False           # emit a word early once unambiguous
    enable_blocking: bool = True           # prune subtrees the grammar rejects


@dataclass(frozen=True)
class DecoderParams:
    """Beam search over the composed graph."""
    beam_size: int = 128
    beam_width: float = 12.0        # nats over the best live hypothesis
    deletion_penalty: float = 3.0   # key the user failed to tap
    insertion_penalty: float = 2.5  # stray tap to ignore
    literal_key_offset: float = 0.4  # per-tap surcharge on the verbatim track


@dataclass(frozen=True)
class AutocorrectParams:
    """Replacing the typed letters with a better-scoring word."""
    base_margin: float = 0.5        # required win over the verbatim text
    vocab_margin: float = 1.5       # extra margin when the text is a word
    post_gain: float = 3.0          # required win to rewrite a past commit
    post_window_words: int = 1      # how far back a rewrite may reach
    post_window_ms: float = 10000.0


@dataclass(frozen=True)
class DynamicParams:
    """Blending the user-history model into candidate scores."""
    weight: float = 0.3
    delta: float = 0.1


@dataclass(frozen=True)
class NoiseParams:
    """Synthetic touch noise for evaluation."""
    # per-axis sigma as a fraction of the key extent; 0.245 yields a
    # measured per-letter verbatim error rate near 8.5% on the board
    spread: float = 0.245
    deletion_rate: float = 0.01
    insertion_rate: float = 0.01
    seed: int = 0


@dataclass(frozen=True)
class EngineConfig:
    spatial: SpatialParams = field(default_factory=SpatialParams)
    graph: GraphParams = field(default_factory=GraphParams)
    decoder: DecoderParams = field(default_factory=DecoderParams)
    autocorrect: AutocorrectParams = field(default_factory=AutocorrectParams)
    dynamic: DynamicParams = field(default_factory=DynamicParams)
    noise: NoiseParams = field(default_factory=NoiseParams)

    def replaced(self, overrides: dict[str, Any]) -> "EngineConfig":
        """New config with nested {"section": {"param": value}} overrides."""
        kwargs = {}
        for section, values in overrides.items():
            current = getattr(self, section, None)
            if current is None or not dataclasses.is_dataclass(current):
                raise ConfigError(f"unknown config section {section!r}")
            names = {f.name for f in dataclasses.fields(current)}
            bad = set(values) - names
            if bad:
                raise ConfigError(
                    f"unknown parameter(s) {sorted(bad)} in {section!r}")
            kwargs[section] = dataclasses.replace(current, **values)
        return dataclasses.replace(self, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "EngineConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls().replaced(data)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
