// Turn rendering: reformulations, dataset chips, collapsed step
// accordions (plan + code + output), artifact viewers, and the
// rejection/error banners. The audit design: everything inspectable,
// collapsed by default.

import { renderArtifact } from "./artifacts";
import { datasetUrl } from "./api";
import { StepView, TurnView } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderReformulations(texts: string[]): HTMLElement {
  const box = el("div", "reformulations");
  box.appendChild(el("h4", "section-label", "Reformulated subqueries"));
  const list = el("ul", "reformulation-list");
  for (const text of texts) {
    list.appendChild(el("li", "reformulation", text));
  }
  box.appendChild(list);
  return box;
}

function renderDatasetChips(ids: string[], titles: Record<string, string>): HTMLElement {
  const box = el("div", "datasets");
  box.appendChild(el("h4", "section-label", "Datasets used"));
  for (const id of ids) {
    const chip = document.createElement("a");
    chip.className = "dataset-chip";
    chip.href = datasetUrl(id);
    chip.target = "_blank";
    chip.rel = "noopener";
    chip.textContent = titles[id] ?? id;
    chip.dataset.datasetId = id;
    box.appendChild(chip);
  }
  return box;
}

function renderStep(step: StepView): HTMLElement {
  const details = document.createElement("details");
  details.className = "step-accordion";
  // collapsed by default: inspect on demand
  const summary = el("summary");
  const status = step.status ?? "running";
  summary.textContent = `Step ${step.index} — ${status}`;
  summary.className = `step-summary step-${status}`;
  details.appendChild(summary);

  if (step.plan) {
    details.appendChild(el("p", "step-plan", step.plan));
  }
  if (step.code) {
    const pre = el("pre", "step-code");
    const code = el("code", undefined, step.code);
    pre.appendChild(code);
    details.appendChild(pre);
  }
  if (step.log) {
    const pre = el("pre", "step-log", step.log);
    details.appendChild(pre);
  }
  if (step.error) {
    details.appendChild(el("div", "step-error", step.error));
  }
  return details;
}

export function renderTurn(view: TurnView): HTMLElement {
  const section = el("section", "turn");
  section.dataset.turn = String(view.turn);

  if (view.reformulations.length > 0) {
    section.appendChild(renderReformulations(view.reformulations));
  }
  if (view.rejectionMessage !== undefined) {
    const banner = el("div", "rejection-banner");
    banner.appendChild(el("strong", undefined, "No matching datasets. "));
    banner.appendChild(document.createTextNode(view.rejectionMessage));
    section.appendChild(banner);
    return section; // rejection turns have no dataset/step/artifact area
  }
  if (view.datasetIds.length > 0) {
    section.appendChild(renderDatasetChips(view.datasetIds, view.datasetTitles));
  }
  if (view.steps.length > 0) {
    const steps = el("div", "steps");
    steps.appendChild(el("h4", "section-label", "Analysis steps"));
    for (const step of view.steps) steps.appendChild(renderStep(step));
    section.appendChild(steps);
  }
  for (const artifact of view.artifacts) {
    section.appendChild(renderArtifact(artifact.kind, artifact.payload));
  }
  if (view.finalText !== undefined) {
    section.appendChild(el("div", "final-answer", view.finalText));
  }
  if (view.errorMessage !== undefined) {
    section.appendChild(el("div", "error-banner", view.errorMessage));
  }
  for (const message of view.malformed) {
    section.appendChild(el("div", "error-card", message));
  }
  return section;
}

export function renderConversation(turns: TurnView[]): HTMLElement {
  const box = el("div", "conversation");
  for (const view of turns) box.appendChild(renderTurn(view));
  return box;
}
