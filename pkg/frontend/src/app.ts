import { BoardInput, KeyboardView, TapInput, TrailInput } from "./board.js";
import { TextBuffer } from "./buffer.js";
import {
  ApiError,
  Commit,
  PostCorrection,
  ProtocolClient,
  Reply,
  Update,
} from "./protocol.js";
import { InputQueue } from "./queue.js";
import { SuggestionStrip } from "./strip.js";

export interface AppElements {
  board: HTMLElement;
  strip: HTMLElement;
  row: HTMLElement;
  buffer: HTMLElement;
  status: HTMLElement;
}

/**
 * Wires the board, suggestion strip, prediction row, and text buffer to
 * one decoding session.
 *
 * Every pointer interaction becomes exactly one protocol call, sent
 * through a strictly ordered queue: taps and gesture trails advance the
 * composition, the space bar commits, chip clicks select.  The buffer
 * only changes on commit results, so its content always equals the
 * replay of the commits received.  Transport failures grey the strip
 * and buffer events until the service answers again.
 */
export class KeyboardApp {
  readonly queue: InputQueue;
  readonly buffer: TextBuffer;
  readonly strip: SuggestionStrip;
  readonly row: SuggestionStrip;
  board!: KeyboardView;
  sessionId = "";

  /** Inputs behind each committed word, for replay during undo. */
  private wordEvents: (TapInput | TrailInput)[][] = [];
  private currentEvents: (TapInput | TrailInput)[] = [];

  constructor(
    private client: ProtocolClient,
    private els: AppElements,
    retryMs = 500,
  ) {
    this.queue = new InputQueue(
      (stalled) => {
        this.strip.setStalled(stalled);
        this.row.setStalled(stalled);
        this.els.status.textContent = stalled ? "connection lost — retrying" : "";
      },
      (err) => {
        this.els.status.textContent = err instanceof ApiError ? err.message : String(err);
      },
      retryMs,
    );
    this.buffer = new TextBuffer(this.els.buffer, (pc) => this.undo(pc));
    this.strip = new SuggestionStrip(this.els.strip, (text) => this.pick(text));
    this.row = new SuggestionStrip(this.els.row, (text) => this.pick(text));
  }

  async start(layoutId?: string): Promise<void> {
    const layout = await this.client.layout(layoutId);
    this.sessionId = await this.client.createSession(layout.layout_id);
    this.board = new KeyboardView(this.els.board, layout, (input) => this.onInput(input));
  }

  idle(): Promise<void> {
    return this.queue.idle();
  }

  private onInput(input: BoardInput): void {
    switch (input.kind) {
      case "tap": {
        this.currentEvents.push(input);
        this.queue.push(async () => {
          this.applyReply(await this.client.tap(this.sessionId, input.x, input.y, input.t));
        });
        break;
      }
      case "trail": {
        this.currentEvents.push(input);
        this.queue.push(async () => {
          this.applyUpdate(await this.client.gesture(this.sessionId, input.points));
        });
        break;
      }
      case "separator": {
        this.queue.push(async () => {
          this.applyCommit(await this.client.separator(this.sessionId, input.t));
        });
        break;
      }
    }
  }

  /** A chip click: commit the suggestion (or prediction) verbatim. */
  private pick(text: string): void {
    this.queue.push(async () => {
      this.applyCommit(await this.client.select(this.sessionId, text, Date.now()));
    });
  }

  backspace(): void {
    if (this.currentEvents.length > 0) {
      this.currentEvents.pop();
    }
    this.queue.push(async () => {
      this.applyUpdate(await this.client.backspace(this.sessionId));
    });
  }

  /**
   * Restore the original word of a revision.
   *
   * Unwinds the committed tail with word-level backspaces, clearing each
   * returned composition so the original is re-committed by explicit
   * selection with nothing pending — which the engine treats as the
   * user's final choice and never revises again — then replays the
   * recorded inputs of the following words.
   */
  private undo(pc: PostCorrection): void {
    const followers = this.wordEvents.slice(pc.position + 1);
    const unwindTo = pc.position;
    this.queue.push(async () => {
      while (this.wordEvents.length > unwindTo) {
        const events = this.wordEvents[this.wordEvents.length - 1];
        await this.client.backspace(this.sessionId); // word -> composition
        const clears = events.length > 0 && events[events.length - 1].kind === "trail"
          ? 1
          : events.length;
        for (let i = 0; i < clears; i++) {
          await this.client.backspace(this.sessionId);
        }
        this.wordEvents.pop();
        this.buffer.popWord();
      }
      const commit = await this.client.select(this.sessionId, pc.old, Date.now());
      this.currentEvents = [];
      this.applyCommit(commit);
      this.buffer.clearRevision();
      for (const events of followers) {
        for (const ev of events) {
          if (ev.kind === "tap") {
            this.applyReply(await this.client.tap(this.sessionId, ev.x, ev.y, Date.now()));
          } else {
            this.applyUpdate(await this.client.gesture(this.sessionId, ev.points));
          }
        }
        this.currentEvents = events;
        this.applyCommit(await this.client.separator(this.sessionId, Date.now()));
      }
    });
  }

  private applyReply(reply: Reply): void {
    if (reply.kind === "commit") {
      this.applyCommit(reply);
    } else {
      this.applyUpdate(reply);
    }
  }

  private applyUpdate(update: Update): void {
    this.strip.show(update.candidates);
    this.row.show(update.completions);
    this.buffer.setComposition(update.literal?.text ?? "");
  }

  private applyCommit(commit: Commit): void {
    this.wordEvents.push(this.currentEvents);
    this.currentEvents = [];
    this.buffer.applyCommit(commit);
    this.strip.clear();
    this.row.show(commit.predictions);
  }
}
