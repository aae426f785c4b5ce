import type { Commit, PostCorrection } from "./protocol.js";

/**
 * The visible text: committed words plus the current composition.
 *
 * Committed content is driven purely by the commit results received
 * from the service — each commit appends its word and applies its
 * revision, so the buffer can always be rebuilt by replaying the same
 * commit sequence.  A revision highlights the rewritten word and keeps
 * the original available behind an undo affordance.
 */
interface BufferWord {
  text: string;
  autocorrected: boolean;
}

export class TextBuffer {
  private words: BufferWord[] = [];
  private composition = "";
  private revision: PostCorrection | null = null;

  constructor(
    private root: HTMLElement,
    private onUndo: (revision: PostCorrection) => void = () => {},
  ) {
    this.root.classList.add("buffer");
    this.render();
  }

  applyCommit(commit: Commit): void {
    this.words.push({ text: commit.committed, autocorrected: commit.autocorrected });
    this.composition = "";
    if (commit.post_correction !== null) {
      const pc = commit.post_correction;
      if (pc.position >= 0 && pc.position < this.words.length) {
        // the revision rewrites the text; whether the original was
        // autocorrected at commit time is unchanged history
        this.words[pc.position].text = pc.new;
        this.revision = pc;
      }
    }
    this.render();
  }

  setComposition(text: string): void {
    this.composition = text;
    this.render();
  }

  /** Mirror of a word-level backspace; used by the undo flow only. */
  popWord(): string | undefined {
    const popped = this.words.pop();
    if (this.revision !== null && this.revision.position >= this.words.length) {
      this.revision = null;
    }
    this.composition = "";
    this.render();
    return popped?.text;
  }

  clearRevision(): void {
    this.revision = null;
    this.render();
  }

  text(): string {
    return this.words.map((w) => w.text).join(" ");
  }

  /** Per-word history, for comparing against the service's account. */
  committedWords(): BufferWord[] {
    return this.words.map((w) => ({ ...w }));
  }

  wordCount(): number {
    return this.words.length;
  }

  currentComposition(): string {
    return this.composition;
  }

  revisedPosition(): number | null {
    return this.revision === null ? null : this.revision.position;
  }

  private render(): void {
    this.root.textContent = "";
    this.words.forEach((word, i) => {
      const span = document.createElement("span");
      span.className = "word";
      span.textContent = word.text;
      if (word.autocorrected) {
        span.classList.add("autocorrected");
      }
      if (this.revision !== null && this.revision.position === i) {
        const pc = this.revision;
        span.classList.add("revised");
        span.title = `was "${pc.old}" — click to restore`;
        span.addEventListener("click", () => this.onUndo(pc));
      }
      this.root.appendChild(span);
      this.root.appendChild(document.createTextNode(" "));
    });
    if (this.composition) {
      const span = document.createElement("span");
      span.className = "composing";
      span.textContent = this.composition;
      this.root.appendChild(span);
    }
  }
}
