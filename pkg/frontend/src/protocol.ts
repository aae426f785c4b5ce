/** Typed client for the decoding service's JSON-over-HTTP session protocol. */

export interface ScoredText {
  text: string;
  cost: number;
}

export interface LayoutKey {
  code: string;
  label: string;
  cx: number;
  cy: number;
  left: number;
  top: number;
  w: number;
  h: number;
}

export interface Layout {
  layout_id: string;
  unit: number;
  keys: LayoutKey[];
}

export interface Update {
  kind: "update";
  candidates: ScoredText[];
  literal: ScoredText | null;
  completions: ScoredText[];
  committed_text: string;
}

export interface PostCorrection {
  position: number;
  old: string;
  new: string;
  gain: number;
}

export interface Commit {
  kind: "commit";
  committed: string;
  autocorrected: boolean;
  post_correction: PostCorrection | null;
  predictions: ScoredText[];
  committed_text: string;
}

export type Reply = Update | Commit;

export interface SessionState {
  layout_id: string;
  committed_text: string;
  words: { text: string; autocorrected: boolean; source: string }[];
  pending: Update;
  predictions: ScoredText[];
}

export interface TrailPoint {
  x: number;
  y: number;
  t: number;
}

/** The service rejected the request (bad input, unknown session, ...). */
export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/** The request never reached the service; the caller may retry it. */
export class TransportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TransportError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ProtocolClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.base = base.replace(/\/+$/, "");
  }

  private async call(method: string, path: string, body?: object): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new TransportError(err instanceof Error ? err.message : String(err));
    }
    const payload = (await response.json().catch(() => ({}))) as Record<string, unknown>;
    if (!response.ok) {
      const detail = typeof payload.error === "string" ? payload.error : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return payload;
  }

  async createSession(layoutId?: string): Promise<string> {
    const body = layoutId === undefined ? {} : { layout_id: layoutId };
    const reply = (await this.call("POST", "/v1/session", body)) as { session_id: string };
    return reply.session_id;
  }

  async layout(layoutId?: string): Promise<Layout> {
    const query = layoutId === undefined ? "" : `?layout_id=${encodeURIComponent(layoutId)}`;
    return (await this.call("GET", `/v1/layout${query}`)) as Layout;
  }

  async state(sessionId: string): Promise<SessionState> {
    return (await this.call("GET", `/v1/session/${sessionId}`)) as SessionState;
  }

  async tap(sessionId: string, x: number, y: number, t: number): Promise<Reply> {
    return (await this.call("POST", `/v1/session/${sessionId}/tap`, { x, y, t })) as Reply;
  }

  async gesture(sessionId: string, points: TrailPoint[]): Promise<Update> {
    return (await this.call("POST", `/v1/session/${sessionId}/gesture`, { points })) as Update;
  }

  async separator(sessionId: string, t: number): Promise<Commit> {
    return (await this.call("POST", `/v1/session/${sessionId}/separator`, { t })) as Commit;
  }

  async select(sessionId: string, text: string, t: number): Promise<Commit> {
    return (await this.call("POST", `/v1/session/${sessionId}/select`, { text, t })) as Commit;
  }

  async backspace(sessionId: string): Promise<Update> {
    return (await this.call("POST", `/v1/session/${sessionId}/backspace`, {})) as Update;
  }

  async close(sessionId: string): Promise<void> {
    await this.call("DELETE", `/v1/session/${sessionId}`);
  }
}
