"""Command-line front end: build bundles, decode logs, evaluate, serve.

Sentence files hold one sentence per line (words separated by spaces);
word lists hold one word per line; touch logs are JSON-lines of
``{"kind", "x", "y", "t"}`` events.  ``--config`` accepts either inline
JSON or a path to a JSON file with ``{"section": {"param": value}}``
overrides of the engine defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .bundle import BundleError, build_bundle, load_bundle, save_bundle
from .config import ConfigError, EngineConfig, NoiseParams
from .data import eval_corpus
from .decoder import DecoderError, Session
from .fst import FstError
from .harness import HarnessError, evaluate, events_from_jsonl
from .lm import LmError, format_arpa, parse_arpa, train_ngram
from .service import KeyboardService, ServiceError, serve
from .spatial import KeyboardLayout, SpatialError

KNOWN_ERRORS = (BundleError, ConfigError, DecoderError, FstError,
                HarnessError, LmError, ServiceError, SpatialError,
                OSError, ValueError)


def _read_config(raw: Optional[str]) -> EngineConfig:
    if raw is None:
        return EngineConfig()
    text = raw if raw.lstrip().startswith("{") else \
        Path(raw).read_text(encoding="utf-8")
    return EngineConfig.from_json(text)


def _read_words(path: str) -> list[str]:
    words = [line.strip() for line in
             Path(path).read_text(encoding="utf-8").splitlines()]
    return [w for w in words if w]


def _read_sentences(path: str) -> list[list[str]]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        words = line.split()
        if words:
            out.append(words)
    return out


def _read_layout(path: Optional[str]) -> Optional[KeyboardLayout]:
    if path is None:
        return None
    return KeyboardLayout.from_json(Path(path).read_text(encoding="utf-8"))


def _read_log(path: str) -> list:
    text = sys.stdin.read() if path == "-" else \
        Path(path).read_text(encoding="utf-8")
    return events_from_jsonl(text)


# -- subcommands ------------------------------------------------------------


def cmd_build(args: argparse.Namespace) -> int:
    config = _read_config(args.config)
    words = _read_words(args.words)
    model = parse_arpa(Path(args.arpa).read_text(encoding="utf-8")) \
        if args.arpa else None
    corpus = _read_sentences(args.corpus) if args.corpus else None
    bundle = build_bundle(words, corpus, model=model,
                          layout=_read_layout(args.layout), config=config)
    save_bundle(bundle, args.out)
    size = Path(args.out).stat().st_size
    print(f"wrote {args.out}: {len(bundle.words)} words, "
          f"{bundle.cl.num_states} states, {bundle.cl.num_arcs} arcs, "
          f"{size} bytes")
    return 0


def cmd_lm_train(args: argparse.Namespace) -> int:
    config = _read_config(args.config)
    corpus = _read_sentences(args.corpus)
    vocabulary = _read_words(args.words) if args.words else None
    order = args.order if args.order is not None else config.graph.order
    discount = args.discount if args.discount is not None \
        else config.graph.discount
    model = train_ngram(corpus, order=order, discount=discount,
                        vocabulary=vocabulary)
    Path(args.out).write_text(format_arpa(model), encoding="utf-8")
    print(f"wrote {args.out}: order {model.order}, "
          f"{len(model.probs)} entries")
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    config = _read_config(args.config)
    bundle = load_bundle(args.bundle)
    events = _read_log(args.log)
    layout = bundle.layout
    session = Session(bundle.new_graph(), config,
                      bundle.touch_model(config.spatial))
    if args.mode == "tap":
        for e in events:
            if e.kind != "down":
                continue
            if layout.key_at(*layout.clamp(e.x, e.y)).code == " ":
                session.commit(timestamp=e.t)
            else:
                session.tap(e.x, e.y, e.t)
        if session.frame_count:
            session.commit()
    else:
        stroke: list[tuple[float, float, float]] = []
        for e in events:
            stroke.append((e.x, e.y, e.t))
            if e.kind == "up":
                session.gesture(stroke)
                session.commit(timestamp=e.t + 500.0)
                stroke = []
        if stroke:
            session.gesture(stroke)
            session.commit()
    if args.json:
        print(json.dumps({
            "text": session.committed_text(),
            "words": [{"text": w.text, "autocorrected": w.autocorrected,
                       "source": w.source} for w in session.history],
        }, indent=2))
    else:
        print(session.committed_text())
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _read_config(args.config)
    bundle = load_bundle(args.bundle)
    corpus = _read_sentences(args.corpus) if args.corpus \
        else eval_corpus(args.sentences)
    noise = None
    if args.seed is not None:
        noise = NoiseParams(seed=args.seed)
    variants = tuple(v.strip() for v in args.variants.split(",")
                     if v.strip())
    started = time.perf_counter()
    report = evaluate(corpus, bundle, config, mode=args.mode,
                      variants=variants, noise=noise)
    payload = report.as_dict()
    payload["wall_seconds"] = round(time.perf_counter() - started, 3)
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    config = _read_config(args.config)
    bundles = {}
    for path in args.bundle:
        bundle = load_bundle(path)
        bundles[bundle.layout.name] = bundle
    service = KeyboardService(bundles, config)
    print(f"serving layouts {sorted(bundles)} "
          f"on http://{args.host}:{args.port}")
    serve(service, host=args.host, port=args.port)
    return 0


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fstkey",
        description="Keyboard decoding engine: build, decode, evaluate, "
                    "and serve.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="compile a decoding bundle")
    p.add_argument("--layout", help="board geometry JSON "
                                    "(default: built-in qwerty)")
    p.add_argument("--words", required=True, help="word list file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--arpa", help="ARPA word model file")
    src.add_argument("--corpus", help="sentence file to train the word "
                                      "model from")
    p.add_argument("--out", required=True, help="output bundle path")
    p.add_argument("--config", help="engine config overrides "
                                    "(JSON text or file)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("lm-train", help="train an ARPA word model")
    p.add_argument("--corpus", required=True, help="sentence file")
    p.add_argument("--words", help="restrict the vocabulary to this "
                                   "word list")
    p.add_argument("--order", type=int, help="n-gram order")
    p.add_argument("--discount", type=float, help="absolute discount")
    p.add_argument("--out", required=True, help="output ARPA path")
    p.add_argument("--config", help="engine config overrides")
    p.set_defaults(func=cmd_lm_train)

    p = sub.add_parser("decode", help="decode a touch log")
    p.add_argument("--bundle", required=True, help="bundle path")
    p.add_argument("--log", required=True,
                   help="touch event JSON-lines file, or - for stdin")
    p.add_argument("--mode", choices=("tap", "gesture"), default="tap")
    p.add_argument("--json", action="store_true",
                   help="emit per-word detail as JSON")
    p.add_argument("--config", help="engine config overrides")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="synthesize noisy input and score "
                                    "decoder variants")
    p.add_argument("--bundle", required=True, help="bundle path")
    p.add_argument("--corpus", help="sentence file "
                                    "(default: built-in sampler)")
    p.add_argument("--sentences", type=int, default=200,
                   help="built-in sentence count (default 200)")
    p.add_argument("--mode", choices=("tap", "gesture"), default="tap")
    p.add_argument("--variants", default="literal,fst,fst_pc",
                   help="comma list from literal,baseline,fst,fst_pc")
    p.add_argument("--seed", type=int, help="noise seed override")
    p.add_argument("--out", help="write the JSON report here instead "
                                 "of stdout")
    p.add_argument("--config", help="engine config overrides")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="serve sessions over HTTP")
    p.add_argument("--bundle", required=True, action="append",
                   help="bundle path (repeat for more layouts)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8900)
    p.add_argument("--config", help="engine config overrides")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except KNOWN_ERRORS as exc:
        print(f"fstkey: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
