import type { Layout, TrailPoint } from "./protocol.js";

export interface TapInput {
  kind: "tap";
  x: number;
  y: number;
  t: number;
  code: string;
}

export interface TrailInput {
  kind: "trail";
  points: TrailPoint[];
}

export interface SeparatorInput {
  kind: "separator";
  t: number;
}

export type BoardInput = TapInput | TrailInput | SeparatorInput;

/**
 * Renders the key layout and turns pointer activity into input events.
 *
 * Keys are positioned proportionally, so the board scales with its
 * container; every pointer position is mapped back to layout
 * coordinates through the container's current rectangle, which keeps
 * the mapping correct across resizes.  A press that travels beyond a
 * fraction of a key before release is a gesture trail (sent whole on
 * release); anything shorter is a tap at the press position.  The
 * separator bar produces a separator event instead of a letter tap.
 */
export class KeyboardView {
  private width: number;
  private height: number;
  private trail: TrailPoint[] = [];
  private down = false;
  private gestureLimit: number;

  constructor(
    private root: HTMLElement,
    private layout: Layout,
    private onInput: (input: BoardInput) => void,
    private now: () => number = () => Date.now(),
  ) {
    this.width = Math.max(...layout.keys.map((k) => k.left + k.w));
    this.height = Math.max(...layout.keys.map((k) => k.top + k.h));
    this.gestureLimit = 0.75 * layout.unit;
    this.render();
    this.wire();
  }

  private render(): void {
    this.root.classList.add("board");
    this.root.style.position = "relative";
    this.root.style.touchAction = "none";
    for (const key of this.layout.keys) {
      const el = document.createElement("div");
      el.className = "key";
      el.dataset.code = key.code;
      el.textContent = key.code === " " ? "space" : key.label;
      el.style.position = "absolute";
      el.style.left = `${(key.left / this.width) * 100}%`;
      el.style.top = `${(key.top / this.height) * 100}%`;
      el.style.width = `${(key.w / this.width) * 100}%`;
      el.style.height = `${(key.h / this.height) * 100}%`;
      this.root.appendChild(el);
    }
  }

  /** Client pixels -> layout coordinates, via the current board size. */
  toLayoutPoint(clientX: number, clientY: number): { x: number; y: number } {
    const rect = this.root.getBoundingClientRect();
    const sx = rect.width > 0 ? this.width / rect.width : 1;
    const sy = rect.height > 0 ? this.height / rect.height : 1;
    return { x: (clientX - rect.left) * sx, y: (clientY - rect.top) * sy };
  }

  /** Layout coordinates -> client pixels (used by scripted drivers). */
  toClientPoint(x: number, y: number): { clientX: number; clientY: number } {
    const rect = this.root.getBoundingClientRect();
    const sx = rect.width > 0 ? rect.width / this.width : 1;
    const sy = rect.height > 0 ? rect.height / this.height : 1;
    return { clientX: rect.left + x * sx, clientY: rect.top + y * sy };
  }

  keyAt(x: number, y: number): string | null {
    for (const key of this.layout.keys) {
      if (x >= key.left && x < key.left + key.w && y >= key.top && y < key.top + key.h) {
        return key.code;
      }
    }
    return null;
  }

  private wire(): void {
    this.root.addEventListener("pointerdown", (ev) => this.onDown(ev as PointerEvent));
    this.root.addEventListener("pointermove", (ev) => this.onMove(ev as PointerEvent));
    this.root.addEventListener("pointerup", (ev) => this.onUp(ev as PointerEvent));
    this.root.addEventListener("pointercancel", () => {
      this.down = false;
      this.trail = [];
    });
  }

  private onDown(ev: PointerEvent): void {
    this.down = true;
    const { x, y } = this.toLayoutPoint(ev.clientX, ev.clientY);
    this.trail = [{ x, y, t: this.now() }];
    if (typeof this.root.setPointerCapture === "function" && ev.pointerId !== undefined) {
      try {
        this.root.setPointerCapture(ev.pointerId);
      } catch {
        // capture is cosmetic; boards without it still work
      }
    }
  }

  private onMove(ev: PointerEvent): void {
    if (!this.down) {
      return;
    }
    const { x, y } = this.toLayoutPoint(ev.clientX, ev.clientY);
    this.trail.push({ x, y, t: this.now() });
  }

  private onUp(ev: PointerEvent): void {
    if (!this.down) {
      return;
    }
    this.down = false;
    const { x, y } = this.toLayoutPoint(ev.clientX, ev.clientY);
    this.trail.push({ x, y, t: this.now() });
    const start = this.trail[0];
    const travel = Math.max(
      ...this.trail.map((p) => Math.hypot(p.x - start.x, p.y - start.y)),
    );
    const points = this.trail;
    this.trail = [];
    if (travel > this.gestureLimit && points.length >= 2) {
      this.onInput({ kind: "trail", points });
      return;
    }
    if (this.keyAt(start.x, start.y) === " ") {
      this.onInput({ kind: "separator", t: start.t });
      return;
    }
    this.onInput({ kind: "tap", x: start.x, y: start.y, t: start.t, code: this.keyAt(start.x, start.y) ?? "" });
  }
}
