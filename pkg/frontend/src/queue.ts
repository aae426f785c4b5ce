import { TransportError } from "./protocol.js";

/** One queued protocol interaction; runs only after all earlier ones. */
export type Step = () => Promise<void>;

/**
 * Strictly ordered sender with offline buffering.
 *
 * Steps run one at a time in arrival order.  A step that fails with a
 * transport error stays at the head of the queue and is retried until
 * it succeeds, so no input is lost and order is preserved; while the
 * head is stuck the queue reports itself stalled (the strip greys out).
 * Service-level errors (bad request) are surfaced and the step dropped,
 * since retrying a rejected input can never succeed.
 */
export class InputQueue {
  private steps: Step[] = [];
  private running = false;
  private stalled = false;
  private waiters: (() => void)[] = [];

  constructor(
    private onStall: (stalled: boolean) => void = () => {},
    private onError: (err: unknown) => void = () => {},
    private retryMs = 500,
  ) {}

  get length(): number {
    return this.steps.length;
  }

  get isStalled(): boolean {
    return this.stalled;
  }

  push(step: Step): void {
    this.steps.push(step);
    void this.drain();
  }

  /** Resolves once every queued step has completed. */
  idle(): Promise<void> {
    if (!this.running && this.steps.length === 0) {
      return Promise.resolve();
    }
    return new Promise((resolve) => this.waiters.push(resolve));
  }

  private setStalled(value: boolean): void {
    if (this.stalled !== value) {
      this.stalled = value;
      this.onStall(value);
    }
  }

  private async drain(): Promise<void> {
    if (this.running) {
      return;
    }
    this.running = true;
    try {
      while (this.steps.length > 0) {
        const head = this.steps[0];
        try {
          await head();
        } catch (err) {
          if (err instanceof TransportError) {
            this.setStalled(true);
            await new Promise((r) => setTimeout(r, this.retryMs));
            continue; // same head, same order
          }
          this.onError(err);
        }
        this.steps.shift();
        this.setStalled(false);
      }
    } finally {
      this.running = false;
      const waiters = this.waiters;
      this.waiters = [];
      for (const w of waiters) {
        w();
      }
    }
  }
}
