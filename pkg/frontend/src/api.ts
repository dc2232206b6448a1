/** Types mirroring the annotation service JSON payloads, plus a thin
 * fetch-based client.  The fetch implementation is injectable so the
 * controller can be tested without a browser or a running server. */

export type Channel = "agent" | "client";

export type Label = "competitive" | "non_competitive" | "undefined";

export interface Turn {
  dialogue_id: string;
  turn_index: number;
  channel: Channel;
  start_ms: number;
  end_ms: number;
  text: string;
  audio_uri?: string | null;
}

export interface SwitchEvent {
  event_id: string;
  dialogue_id: string;
  k_index: number;
  kind: string;
  turn_k: Turn;
  turn_k1: Turn;
  successful?: boolean;
  overlap_duration_ms?: number;
  client_is_interrupter?: boolean;
}

export interface Progress {
  competitive: number;
  non_competitive: number;
  undefined: number;
  unlabeled: number;
  total: number;
}

export interface Candidate {
  event: SwitchEvent;
  context_before: Turn[];
  context_after: Turn[];
  audio_clip_uri: string | null;
  progress: Progress;
}

export interface SubmittedLabel {
  event_id: string;
  label: Label;
  annotator_id: string;
  labeled_at: string;
}

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<{ status: number; ok: boolean; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly doFetch: FetchLike,
    private readonly baseUrl = ""
  ) {}

  /** Next unlabeled candidate, or null when the queue is drained (204). */
  async nextCandidate(): Promise<Candidate | null> {
    const response = await this.doFetch(`${this.baseUrl}/api/queue/next`);
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, `queue fetch failed (${response.status})`);
    }
    return (await response.json()) as Candidate;
  }

  async submitLabel(
    eventId: string,
    label: Label,
    annotatorId: string
  ): Promise<SubmittedLabel> {
    const response = await this.doFetch(`${this.baseUrl}/api/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ event_id: eventId, label, annotator_id: annotatorId }),
    });
    if (response.status !== 201) {
      throw new ApiError(response.status, `label rejected (${response.status})`);
    }
    return (await response.json()) as SubmittedLabel;
  }

  async progress(): Promise<Progress> {
    const response = await this.doFetch(`${this.baseUrl}/api/progress`);
    if (!response.ok) {
      throw new ApiError(response.status, `progress fetch failed (${response.status})`);
    }
    return (await response.json()) as Progress;
  }
}
