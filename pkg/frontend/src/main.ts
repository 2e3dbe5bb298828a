// App wiring: composer, submit flow, SSE subscription, trace download.

import { ApiError, createConversation, fetchTrace, submitQuestion, traceBlob } from "./api";
import { renderConversation } from "./render";
import { streamEvents } from "./sse";
import { applyEvent } from "./state";
import { ViewState, emptyState } from "./types";

const state: ViewState = emptyState();

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function toast(message: string): void {
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  $("toasts").appendChild(node);
  setTimeout(() => node.remove(), 6000);
}

function redraw(): void {
  const host = $("conversation-host");
  host.replaceChildren(renderConversation(state.turns));
  const spinner = $("spinner");
  spinner.style.display = state.inFlight ? "" : "none";
  (($("question-input") as HTMLTextAreaElement)).disabled = state.inFlight;
  (($("send-button") as HTMLButtonElement)).disabled = state.inFlight;
  $("connection-state").textContent = state.connection;
}

async function subscribe(): Promise<void> {
  if (!state.conversationId) return;
  state.connection = "streaming";
  redraw();
  await streamEvents(state.conversationId, state.lastSeq, {
    onEvent: (envelope) => {
      applyEvent(state, envelope);
      redraw();
    },
    onClose: () => {
      state.connection = "closed";
      redraw();
    },
    onError: (message) => {
      state.connection = "error";
      toast(message);
      redraw();
    },
  });
}

async function onSubmit(): Promise<void> {
  const input = $("question-input") as HTMLTextAreaElement;
  const text = input.value.trim();
  if (!text || state.inFlight) return;
  try {
    if (!state.conversationId) {
      state.conversationId = await createConversation();
    }
    const image = ($("image-input") as HTMLInputElement).files?.[0] ?? null;
    const pdf = ($("pdf-input") as HTMLInputElement).files?.[0] ?? null;
    state.inFlight = true;
    redraw();
    await submitQuestion(state.conversationId, text, { image, pdf });
    input.value = "";
    void subscribe();
  } catch (err) {
    state.inFlight = false;
    if (err instanceof ApiError && err.status === 409) {
      toast("A turn is already running; wait for it to finish.");
    } else if (err instanceof ApiError && err.status === 413) {
      toast("Attachment too large (limit 10 MB).");
    } else {
      toast(String(err));
    }
    redraw();
  }
}

async function onDownloadTrace(): Promise<void> {
  if (!state.conversationId) return;
  try {
    // the downloaded file is byte-identical to GET /conversations/{id}/trace
    const text = await fetchTrace(state.conversationId);
    const url = URL.createObjectURL(traceBlob(text));
    const link = document.createElement("a");
    link.href = url;
    link.download = `${state.conversationId}-trace.jsonl`;
    link.click();
    URL.revokeObjectURL(url);
  } catch (err) {
    toast(`trace download failed: ${String(err)}`);
  }
}

export function boot(): void {
  $("send-button").addEventListener("click", () => void onSubmit());
  ($("question-input") as HTMLTextAreaElement).addEventListener("keydown", (event) => {
    if (event.key === "Enter" && (event.ctrlKey || event.metaKey)) void onSubmit();
  });
  $("trace-button").addEventListener("click", () => void onDownloadTrace());
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("conversation-host")) {
  boot();
}
