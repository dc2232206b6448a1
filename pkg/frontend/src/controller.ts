/** View-independent annotation flow: load the next candidate, submit one of
 * the three labels, advance.  All state transitions live here so they can be
 * unit-tested; the DOM layer only renders the state it is handed. */

import { ApiClient, ApiError, Candidate, Label, Progress } from "./api.js";

export type ViewState =
  | { kind: "loading" }
  | { kind: "candidate"; candidate: Candidate; toast: string | null }
  | { kind: "done"; progress: Progress | null }
  | { kind: "retry"; message: string };

export const KEY_BINDINGS: Record<string, Label> = {
  "1": "competitive",
  "2": "non_competitive",
  "3": "undefined",
};

export function keyToLabel(key: string): Label | null {
  return KEY_BINDINGS[key] ?? null;
}

export class AnnotationController {
  private state: ViewState = { kind: "loading" };
  private submitting = false;

  constructor(
    private readonly api: ApiClient,
    private readonly annotatorId: string,
    private readonly onChange: (state: ViewState) => void
  ) {}

  getState(): ViewState {
    return this.state;
  }

  private setState(state: ViewState): void {
    this.state = state;
    this.onChange(state);
  }

  /** Fetch and show the next unlabeled candidate, or the done-screen. */
  async loadNext(): Promise<void> {
    this.setState({ kind: "loading" });
    try {
      const candidate = await this.api.nextCandidate();
      if (candidate === null) {
        let progress: Progress | null = null;
        try {
          progress = await this.api.progress();
        } catch {
          // done-screen still renders without final counts
        }
        this.setState({ kind: "done", progress });
      } else {
        this.setState({ kind: "candidate", candidate, toast: null });
      }
    } catch (err) {
      this.setState({ kind: "retry", message: describe(err) });
    }
  }

  /** Submit a label for the displayed candidate and advance.  A second call
   * while a submission is in flight is a no-op (double-submit protection);
   * a rejected submission keeps the candidate on screen with a toast. */
  async submit(label: Label): Promise<void> {
    if (this.state.kind !== "candidate" || this.submitting) {
      return;
    }
    const candidate = this.state.candidate;
    this.submitting = true;
    try {
      await this.api.submitLabel(candidate.event.event_id, label, this.annotatorId);
    } catch (err) {
      if (err instanceof ApiError && err.status >= 400 && err.status < 500) {
        this.setState({ kind: "candidate", candidate, toast: describe(err) });
      } else {
        this.setState({ kind: "retry", message: describe(err) });
      }
      return;
    } finally {
      this.submitting = false;
    }
    await this.loadNext();
  }

  /** Keyboard path: 1/2/3 map to the three labels; other keys are ignored. */
  async handleKey(key: string): Promise<void> {
    const label = keyToLabel(key);
    if (label !== null) {
      await this.submit(label);
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof Error) {
    return err.message;
  }
  return String(err);
}
