import { beforeEach, describe, expect, it, vi } from "vitest";

import { BoardInput, KeyboardView } from "../src/board.js";
import type { Layout } from "../src/protocol.js";

// two key rows: a b c on top, the separator bar below
const LAYOUT: Layout = {
  layout_id: "tiny",
  unit: 40,
  keys: [
    { code: "a", label: "a", left: 0, top: 0, w: 40, h: 60, cx: 20, cy: 30 },
    { code: "b", label: "b", left: 40, top: 0, w: 40, h: 60, cx: 60, cy: 30 },
    { code: "c", label: "c", left: 80, top: 0, w: 40, h: 60, cx: 100, cy: 30 },
    { code: " ", label: " ", left: 0, top: 60, w: 120, h: 60, cx: 60, cy: 90 },
  ],
};

function boardAt(rect: { width: number; height: number }, onInput: (i: BoardInput) => void) {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  root.getBoundingClientRect = () =>
    ({ left: 10, top: 20, width: rect.width, height: rect.height,
       right: 10 + rect.width, bottom: 20 + rect.height, x: 10, y: 20,
       toJSON: () => ({}) }) as DOMRect;
  const view = new KeyboardView(root, LAYOUT, onInput, () => 1234);
  return { root, view };
}

function pointer(root: HTMLElement, type: string, clientX: number, clientY: number) {
  root.dispatchEvent(new MouseEvent(type, { clientX, clientY, bubbles: true }));
}

describe("KeyboardView", () => {
  beforeEach(() => {
    document.body.replaceChildren();
  });

  it("renders one element per key", () => {
    const { root } = boardAt({ width: 120, height: 120 }, () => {});
    expect(root.querySelectorAll(".key")).toHaveLength(4);
    expect(root.querySelector('[data-code="b"]')?.textContent).toBe("b");
    expect(root.querySelector('[data-code=" "]')?.textContent).toBe("space");
  });

  it("maps a click to a tap at the key's layout position", () => {
    const seen: BoardInput[] = [];
    const { root, view } = boardAt({ width: 120, height: 120 }, (i) => seen.push(i));
    const { clientX, clientY } = view.toClientPoint(60, 30); // center of b
    pointer(root, "pointerdown", clientX, clientY);
    pointer(root, "pointerup", clientX, clientY);
    expect(seen).toHaveLength(1);
    const tap = seen[0];
    expect(tap.kind).toBe("tap");
    if (tap.kind === "tap") {
      expect(tap.x).toBeCloseTo(60, 5);
      expect(tap.y).toBeCloseTo(30, 5);
      expect(tap.code).toBe("b");
      expect(tap.t).toBe(1234);
    }
  });

  it("keeps layout coordinates when the board is resized", () => {
    const seen: BoardInput[] = [];
    const { root, view } = boardAt({ width: 120, height: 120 }, (i) => seen.push(i));
    // same physical key, twice the on-screen size
    root.getBoundingClientRect = () =>
      ({ left: 10, top: 20, width: 240, height: 240, right: 250, bottom: 260,
         x: 10, y: 20, toJSON: () => ({}) }) as DOMRect;
    const { clientX, clientY } = view.toClientPoint(100, 30); // center of c
    pointer(root, "pointerdown", clientX, clientY);
    pointer(root, "pointerup", clientX, clientY);
    expect(seen).toHaveLength(1);
    if (seen[0].kind === "tap") {
      expect(seen[0].x).toBeCloseTo(100, 5);
      expect(seen[0].y).toBeCloseTo(30, 5);
    }
  });

  it("emits a separator for the space bar", () => {
    const seen: BoardInput[] = [];
    const { root, view } = boardAt({ width: 120, height: 120 }, (i) => seen.push(i));
    const { clientX, clientY } = view.toClientPoint(60, 90);
    pointer(root, "pointerdown", clientX, clientY);
    pointer(root, "pointerup", clientX, clientY);
    expect(seen).toEqual([{ kind: "separator", t: 1234 }]);
  });

  it("turns a drag across keys into one trail sent on release", () => {
    const seen: BoardInput[] = [];
    const { root, view } = boardAt({ width: 120, height: 120 }, (i) => seen.push(i));
    const a = view.toClientPoint(20, 30);
    const b = view.toClientPoint(60, 30);
    const c = view.toClientPoint(100, 30);
    pointer(root, "pointerdown", a.clientX, a.clientY);
    pointer(root, "pointermove", b.clientX, b.clientY);
    pointer(root, "pointermove", c.clientX, c.clientY);
    pointer(root, "pointerup", c.clientX, c.clientY);
    expect(seen).toHaveLength(1);
    const trail = seen[0];
    expect(trail.kind).toBe("trail");
    if (trail.kind === "trail") {
      expect(trail.points).toHaveLength(4);
      expect(trail.points[0].x).toBeCloseTo(20, 5);
      expect(trail.points[3].x).toBeCloseTo(100, 5);
    }
  });

  it("treats a short wobble as a tap, not a gesture", () => {
    const seen: BoardInput[] = [];
    const { root, view } = boardAt({ width: 120, height: 120 }, (i) => seen.push(i));
    const at = view.toClientPoint(20, 30);
    const nudge = view.toClientPoint(25, 32);
    pointer(root, "pointerdown", at.clientX, at.clientY);
    pointer(root, "pointermove", nudge.clientX, nudge.clientY);
    pointer(root, "pointerup", nudge.clientX, nudge.clientY);
    expect(seen).toHaveLength(1);
    expect(seen[0].kind).toBe("tap");
  });

  it("sends every pointer press as exactly one input", () => {
    const onInput = vi.fn();
    const { root, view } = boardAt({ width: 120, height: 120 }, onInput);
    for (const [x, y] of [[20, 30], [60, 30], [100, 30]] as const) {
      const { clientX, clientY } = view.toClientPoint(x, y);
      pointer(root, "pointerdown", clientX, clientY);
      pointer(root, "pointerup", clientX, clientY);
    }
    expect(onInput).toHaveBeenCalledTimes(3);
  });
});
