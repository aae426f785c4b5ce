#!/usr/bin/env python3
"""Type a sentence with synthetic noise and watch the decoder work.

Builds the bundled demo vocabulary, feeds noisy taps (or gestures) for
each word, and prints the candidate list, the committed word, and any
autocorrections or later revisions as they happen.
"""

import argparse
import random

from fstkey.bundle import build_bundle
from fstkey.config import EngineConfig, NoiseParams
from fstkey.data import VOCABULARY, training_corpus
from fstkey.decoder import Session
from fstkey.harness import synthesize_gesture, synthesize_taps
from fstkey.spatial import gesture_frames


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("sentence", nargs="*",
                    default=["the", "whole", "point", "of", "this"],
                    help="words to type (default: a short demo sentence)")
    ap.add_argument("--mode", choices=("tap", "gesture"), default="tap")
    ap.add_argument("--spread", type=float, default=0.245,
                    help="noise spread as a fraction of key size")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--top", type=int, default=5, help="candidates to show")
    args = ap.parse_args()

    print("building bundle ...")
    bundle = build_bundle(VOCABULARY, training_corpus(),
                          config=EngineConfig())
    graph = bundle.new_graph()
    session = Session(graph, EngineConfig(), bundle.touch_model())
    layout = bundle.layout
    noise = NoiseParams(spread=args.spread, seed=args.seed)

    clock = 0.0
    for word in args.sentence:
        if args.mode == "tap":
            events = synthesize_taps([word], layout, noise)
            update = None
            for ev in events:
                if ev.kind != "down":
                    continue
                if layout.key_at(ev.x, ev.y).code == " ":
                    continue
                update = session.advance_tap(
                    session.touch.tap_frame(ev.x, ev.y, clock + ev.t))
        else:
            events = synthesize_gesture(word, layout, noise)
            frames = gesture_frames(session.touch,
                                    [(e.x, e.y, clock + e.t) for e in events])
            update = None
            last = len(frames) - 1
            for i, frame in enumerate(frames):
                update = session.advance_gesture_frame(
                    frame, force_aligned=(i == 0 or i == last))
        noise = NoiseParams(spread=args.spread, seed=noise.seed + 1)

        print(f"\nintended {word!r}")
        if update is not None:
            for text, cost in update.candidates[:args.top]:
                print(f"  {cost:8.3f}  {text}")
            if update.literal is not None:
                print(f"  literal: {update.literal[0]!r}")
        clock += 2000.0
        result = session.commit(timestamp=clock)
        note = " (autocorrected)" if result.autocorrected else ""
        print(f"  committed: {result.committed!r}{note}")
        pc = result.post_correction
        if pc is not None:
            print(f"  revised earlier word {pc.position}: "
                  f"{pc.old!r} -> {pc.new!r} (gain {pc.gain:.2f})")
        clock += 500.0

    print(f"\nfinal text: {session.committed_text()!r}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
