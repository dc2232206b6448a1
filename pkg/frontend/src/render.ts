/** Pure HTML rendering for the annotation view.  Every function returns a
 * string, so rendering is testable without a DOM.  Transcript text is never
 * altered beyond HTML escaping: what the API sent is what the annotator
 * reads. */

import { Candidate, Progress, Turn } from "./api.js";

export type TurnRole = "context" | "interrupted" | "interrupter";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatMs(ms: number): string {
  return (ms / 1000).toFixed(1) + "s";
}

export function renderTurn(turn: Turn, role: TurnRole = "context"): string {
  const highlight = role === "context" ? "" : ` turn-${role}`;
  return (
    `<div class="turn${highlight}">` +
    `<span class="badge badge-${turn.channel}">${turn.channel}</span>` +
    `<span class="time">${formatMs(turn.start_ms)}–${formatMs(turn.end_ms)}</span>` +
    `<span class="text">${escapeHtml(turn.text)}</span>` +
    `</div>`
  );
}

export function renderProgress(progress: Progress): string {
  const labeled = progress.total - progress.unlabeled;
  const pct = progress.total === 0 ? 0 : Math.round((100 * labeled) / progress.total);
  return (
    `<div class="progress" role="progressbar" aria-valuenow="${pct}">` +
    `<div class="progress-fill" style="width:${pct}%"></div>` +
    `<span class="progress-text">${labeled} / ${progress.total} labeled</span>` +
    `</div>`
  );
}

export function renderCandidate(candidate: Candidate): string {
  const { event } = candidate;
  const parts: string[] = [];
  parts.push(renderProgress(candidate.progress));
  parts.push(`<div class="transcript">`);
  for (const turn of candidate.context_before) {
    parts.push(renderTurn(turn));
  }
  parts.push(renderTurn(event.turn_k, "interrupted"));
  parts.push(renderTurn(event.turn_k1, "interrupter"));
  for (const turn of candidate.context_after) {
    parts.push(renderTurn(turn));
  }
  parts.push(`</div>`);
  const duration =
    event.overlap_duration_ms === undefined ? "" : formatMs(event.overlap_duration_ms);
  parts.push(
    `<div class="overlap-meta">overlap <strong>${duration}</strong>, ` +
      `interrupter: <strong>${event.turn_k1.channel}</strong></div>`
  );
  if (candidate.audio_clip_uri) {
    parts.push(
      `<audio controls src="${escapeHtml(candidate.audio_clip_uri)}"></audio>`
    );
  }
  return parts.join("\n");
}

export function renderDone(progress: Progress | null): string {
  if (progress === null) {
    return `<div class="done"><h2>All candidates labeled</h2></div>`;
  }
  return (
    `<div class="done"><h2>All candidates labeled</h2>` +
    `<p>competitive: ${progress.competitive}, ` +
    `non-competitive: ${progress.non_competitive}, ` +
    `undefined: ${progress.undefined}</p></div>`
  );
}

export function renderRetry(message: string): string {
  return (
    `<div class="banner banner-retry">` +
    `<span>${escapeHtml(message)}</span>` +
    `<button id="retry-button">Retry</button>` +
    `</div>`
  );
}
