"""Self-contained decoding bundles.

A bundle is one zip archive holding everything a device needs to decode:
the composed key-to-word machine, its label-reachability tables, the
word model (ARPA text), the board geometry, and the word list.  Writing
is deterministic: the same inputs always produce byte-identical
archives.
"""

from __future__ import annotations

import dataclasses
import io
import json
import zipfile
from typing import Optional, Sequence

from .config import EngineConfig, GraphParams, SpatialParams
from .fst import WeightedFst
from .graph import (DecoderGraph, Grammar, build_search_fst,
                    lexicon_entries)
from .lm import (CharLm, NgramAutomaton, NgramModel, format_arpa,
                 parse_arpa, train_ngram)
from .reachability import LabelReachability
from .spatial import KeyboardLayout, TouchModel, qwerty_layout

FORMAT = "fstkey-bundle-1"

META_NAME = "meta.json"
LAYOUT_NAME = "layout.json"
LEXICON_NAME = "lexicon.txt"
ARPA_NAME = "model.arpa"
FST_NAME = "cl.fstk"
REACH_NAME = "reach.json"

# fixed archive timestamp so writes are reproducible
_EPOCH = (1980, 1, 1, 0, 0, 0)


class BundleError(Exception):
    pass


class KeyboardBundle:
    """Loaded bundle: shared immutable parts plus per-session factories.

    The machine, reachability tables, compiled word model, and character
    model are immutable and shared.  ``new_graph`` wraps them in a fresh
    mutable decoding graph (interned grammar states, arc caches, dynamic
    words) so concurrent sessions never share mutable state.
    """

    def __init__(self, layout: KeyboardLayout, words: Sequence[str],
                 model: NgramModel, graph_params: GraphParams,
                 cl: WeightedFst, reach: LabelReachability):
        self.layout = layout
        self.words = list(words)
        self.model = model
        self.graph_params = graph_params
        self.cl = cl
        self.reach = reach
        self.auto = NgramAutomaton(model)
        charlm = CharLm(alphabet=layout.letter_codes(),
                        delta=graph_params.charlm_delta)
        charlm.train([(w, 1.0) for w in self.words])
        self.charlm = charlm

    def new_graph(self, params: Optional[GraphParams] = None
                  ) -> DecoderGraph:
        params = params if params is not None else self.graph_params
        grammar = Grammar(self.auto, self.charlm, params)
        return DecoderGraph(self.cl, self.reach, grammar, params)

    def touch_model(self, params: SpatialParams = SpatialParams()
                    ) -> TouchModel:
        return TouchModel(self.layout, params)


def build_bundle(words: Sequence[str],
                 corpus: Optional[Sequence[Sequence[str]]] = None,
                 *, model: Optional[NgramModel] = None,
                 layout: Optional[KeyboardLayout] = None,
                 config: EngineConfig = EngineConfig()) -> KeyboardBundle:
    """Compile a bundle from a word list and either a corpus or a model."""
    if (corpus is None) == (model is None):
        raise BundleError("provide exactly one of corpus or model")
    layout = layout or qwerty_layout()
    words = list(dict.fromkeys(words))
    keys = layout.letter_codes()
    params = config.graph
    entries = lexicon_entries(words, keys)
    cl = build_search_fst(entries, keys, params)
    if model is None:
        model = train_ngram(corpus, order=params.order,
                            discount=params.discount, vocabulary=words)
    reach = LabelReachability(cl)
    return KeyboardBundle(layout, words, model, params, cl, reach)


def _members(bundle: KeyboardBundle) -> list[tuple[str, bytes]]:
    meta = {
        "format": FORMAT,
        "graph_params": dataclasses.asdict(bundle.graph_params),
        "words": len(bundle.words),
        "states": bundle.cl.num_states,
        "arcs": bundle.cl.num_arcs,
    }
    return [
        (META_NAME, json.dumps(meta, sort_keys=True, indent=2)
         .encode() + b"\n"),
        (LAYOUT_NAME, bundle.layout.to_json().encode() + b"\n"),
        (LEXICON_NAME, "".join(w + "\n" for w in bundle.words).encode()),
        (ARPA_NAME, format_arpa(bundle.model).encode()),
        (FST_NAME, bundle.cl.write_bytes()),
        (REACH_NAME, json.dumps(bundle.reach.to_tables(),
                                separators=(",", ":")).encode()),
    ]


def bundle_bytes(bundle: KeyboardBundle) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, payload in _members(bundle):
            info = zipfile.ZipInfo(name, date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, payload, compresslevel=6)
    return buf.getvalue()


def save_bundle(bundle: KeyboardBundle, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(bundle_bytes(bundle))


def load_bundle(path: str) -> KeyboardBundle:
    try:
        zf = zipfile.ZipFile(path)
    except (OSError, zipfile.BadZipFile) as exc:
        raise BundleError(f"cannot open bundle {path!r}: {exc}") from exc
    with zf:
        try:
            meta = json.loads(zf.read(META_NAME))
        except KeyError:
            raise BundleError(f"{path!r} has no {META_NAME}")
        if meta.get("format") != FORMAT:
            raise BundleError(
                f"unsupported bundle format {meta.get('format')!r}")
        try:
            params = GraphParams(**meta["graph_params"])
        except TypeError as exc:
            raise BundleError(f"bad graph params: {exc}") from exc
        layout = KeyboardLayout.from_json(zf.read(LAYOUT_NAME).decode())
        words = zf.read(LEXICON_NAME).decode().splitlines()
        model = parse_arpa(zf.read(ARPA_NAME).decode())
        cl = WeightedFst.read_bytes(zf.read(FST_NAME))
        reach = LabelReachability.from_tables(
            cl, json.loads(zf.read(REACH_NAME)))
    return KeyboardBundle(layout, words, model, params, cl, reach)
