#!/usr/bin/env python3
"""Measure bundle size and per-tap decoding latency at scale.

Builds a large-vocabulary bundle, reports its serialized size, then
types a held-out corpus and prints latency percentiles for the
interactive path (one call per tap).  The first sentences warm shared
caches and are excluded from the statistics.
"""

import argparse
import time

from fstkey.bundle import build_bundle, bundle_bytes
from fstkey.config import EngineConfig
from fstkey.data import big_lexicon, eval_corpus, training_corpus
from fstkey.decoder import Session


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--words", type=int, default=10000)
    ap.add_argument("--sentences", type=int, default=40)
    ap.add_argument("--warmup", type=int, default=10,
                    help="sentences excluded from the statistics")
    args = ap.parse_args()

    cfg = EngineConfig()
    t0 = time.perf_counter()
    bundle = build_bundle(big_lexicon(args.words), training_corpus(),
                          config=cfg)
    print(f"built {args.words}-word bundle in {time.perf_counter()-t0:.2f}s")
    size = len(bundle_bytes(bundle))
    print(f"serialized size {size:,} bytes ({size / 2**20:.2f} MiB)")
    graph = bundle.new_graph()
    print(f"machine: {graph.cl.num_states:,} states, "
          f"{graph.cl.num_arcs:,} arcs")

    touch = bundle.touch_model()
    layout = bundle.layout
    samples: list[float] = []
    t0 = time.perf_counter()
    for si, sent in enumerate(eval_corpus(args.sentences, seed=3)):
        session = Session(graph, cfg, touch)
        t = 0.0
        for word in sent:
            for ch in word:
                x, y = layout.center(ch)
                tic = time.perf_counter()
                session.tap(x, y, t)
                toc = time.perf_counter()
                if si >= args.warmup:
                    samples.append((toc - tic) * 1000.0)
                t += 120.0
            session.commit(timestamp=t)
            t += 200.0
    print(f"decoded {args.sentences} sentences in "
          f"{time.perf_counter()-t0:.1f}s")

    samples.sort()
    n = len(samples)
    print(f"{n} measured taps:"
          f"  p50 {samples[n // 2]:.2f} ms"
          f"  p90 {samples[int(n * 0.9)]:.2f} ms"
          f"  p95 {samples[int(n * 0.95)]:.2f} ms"
          f"  max {samples[-1]:.2f} ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
