/** DOM entry point: wires the controller to the page, the three label
 * buttons, and the 1/2/3 keyboard shortcuts. */

import { ApiClient, FetchLike, Label } from "./api.js";
import { AnnotationController, ViewState } from "./controller.js";
import { renderCandidate, renderDone, renderRetry } from "./render.js";

const LABEL_BUTTONS: Array<{ id: string; label: Label; caption: string; key: string }> = [
  { id: "btn-competitive", label: "competitive", caption: "Competitive", key: "1" },
  { id: "btn-non-competitive", label: "non_competitive", caption: "Non-competitive", key: "2" },
  { id: "btn-undefined", label: "undefined", caption: "Undefined / skip", key: "3" },
];

function annotatorId(): string {
  const stored = window.localStorage.getItem("annotator_id");
  if (stored) {
    return stored;
  }
  const generated = "annotator-" + Math.random().toString(36).slice(2, 10);
  window.localStorage.setItem("annotator_id", generated);
  return generated;
}

function render(state: ViewState): void {
  const view = document.getElementById("view")!;
  const buttons = document.getElementById("buttons")!;
  const toast = document.getElementById("toast")!;
  toast.textContent = "";
  toast.classList.add("hidden");
  switch (state.kind) {
    case "loading":
      view.innerHTML = `<div class="loading">Loading…</div>`;
      buttons.classList.add("hidden");
      break;
    case "candidate":
      view.innerHTML = renderCandidate(state.candidate);
      buttons.classList.remove("hidden");
      if (state.toast) {
        toast.textContent = state.toast;
        toast.classList.remove("hidden");
      }
      break;
    case "done":
      view.innerHTML = renderDone(state.progress);
      buttons.classList.add("hidden");
      break;
    case "retry":
      view.innerHTML = renderRetry(state.message);
      buttons.classList.add("hidden");
      document
        .getElementById("retry-button")
        ?.addEventListener("click", () => void controller.loadNext());
      break;
  }
}

const api = new ApiClient(window.fetch.bind(window) as FetchLike);
const controller = new AnnotationController(api, annotatorId(), render);

function setUpButtons(): void {
  const container = document.getElementById("buttons")!;
  for (const spec of LABEL_BUTTONS) {
    const button = document.createElement("button");
    button.id = spec.id;
    button.className = "label-button";
    button.innerHTML = `<kbd>${spec.key}</kbd> ${spec.caption}`;
    button.addEventListener("click", () => void controller.submit(spec.label));
    container.appendChild(button);
  }
}

window.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement) {
    return;
  }
  void controller.handleKey(event.key);
});

setUpButtons();
void controller.loadNext();
