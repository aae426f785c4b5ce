import type { ScoredText } from "./protocol.js";

export const STRIP_LIMIT = 3;

/**
 * A row of clickable suggestion chips above the board.
 *
 * Shows at most three entries.  While the connection to the service is
 * down the strip greys out and stops accepting clicks; entries reappear
 * live once the link recovers.
 */
export class SuggestionStrip {
  private stalled = false;

  constructor(
    private root: HTMLElement,
    private onPick: (text: string) => void,
  ) {
    this.root.classList.add("strip");
  }

  show(entries: ScoredText[]): void {
    this.root.textContent = "";
    for (const entry of entries.slice(0, STRIP_LIMIT)) {
      if (!entry.text) {
        continue;
      }
      const chip = document.createElement("button");
      chip.type = "button";
      chip.className = "chip";
      chip.textContent = entry.text;
      chip.title = `cost ${entry.cost.toFixed(2)}`;
      chip.addEventListener("click", () => {
        if (!this.stalled) {
          this.onPick(entry.text);
        }
      });
      this.root.appendChild(chip);
    }
  }

  clear(): void {
    this.root.textContent = "";
  }

  setStalled(stalled: boolean): void {
    this.stalled = stalled;
    this.root.classList.toggle("stalled", stalled);
  }

  get isStalled(): boolean {
    return this.stalled;
  }

  entries(): string[] {
    return Array.from(this.root.querySelectorAll(".chip"), (el) => el.textContent ?? "");
  }
}
