#!/usr/bin/env python3
"""Score decoder variants on the seeded noisy corpus.

Reproduces the headline accuracy comparison: word error rate of the raw
key transcription versus the decoder, with and without the revision
pass, in tap and gesture modes.  All inputs are synthesized from fixed
seeds, so the numbers are reproducible.
"""

import argparse
import json
import time

from fstkey.bundle import build_bundle
from fstkey.config import EngineConfig
from fstkey.data import VOCABULARY, eval_corpus, training_corpus
from fstkey.harness import evaluate


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sentences", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--modes", default="tap,gesture",
                    help="comma-separated subset of tap,gesture")
    ap.add_argument("--variants", default="literal,baseline,fst,fst_pc",
                    help="comma-separated subset of "
                         "literal,baseline,fst,fst_pc")
    ap.add_argument("--json", action="store_true",
                    help="emit the full report as JSON")
    args = ap.parse_args()

    cfg = EngineConfig()
    print("building bundle ...")
    bundle = build_bundle(VOCABULARY, training_corpus(), config=cfg)
    corpus = eval_corpus(args.sentences, seed=args.seed)
    variants = tuple(v for v in args.variants.split(",") if v)

    for mode in args.modes.split(","):
        t0 = time.perf_counter()
        report = evaluate(corpus, bundle, cfg, mode=mode, variants=variants)
        elapsed = time.perf_counter() - t0
        if args.json:
            print(json.dumps(report.as_dict(), indent=2))
            continue
        print(f"\n{mode}: {args.sentences} sentences in {elapsed:.1f}s")
        for name in variants:
            rep = report.variants[name]
            lat = ""
            if rep.latencies_ms:
                xs = sorted(rep.latencies_ms)
                lat = (f"  p50 {xs[len(xs) // 2]:.1f} ms"
                       f"  p95 {xs[int(len(xs) * 0.95)]:.1f} ms")
            print(f"  {name:10s} WER {rep.wer:.4f}{lat}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
