// Pure state reducer: the UI renders exclusively from the event stream;
// nothing here computes an answer client-side.

import {
  EventEnvelope,
  StepView,
  TERMINAL_TYPES,
  TurnView,
  ViewState,
  emptyState,
} from "./types";

function newTurn(turn: number): TurnView {
  return {
    turn,
    reformulations: [],
    datasetIds: [],
    datasetTitles: {},
    steps: [],
    artifacts: [],
    malformed: [],
    terminal: false,
  };
}

function turnFor(state: ViewState, turn: number): TurnView {
  let view = state.turns.find((t) => t.turn === turn);
  if (!view) {
    view = newTurn(turn);
    state.turns.push(view);
    state.turns.sort((a, b) => a.turn - b.turn);
  }
  return view;
}

function stepFor(view: TurnView, index: number): StepView {
  let step = view.steps.find((s) => s.index === index);
  if (!step) {
    step = { index, plan: "", code: "" };
    view.steps.push(step);
    view.steps.sort((a, b) => a.index - b.index);
  }
  return step;
}

export function applyEvent(state: ViewState, event: EventEnvelope): ViewState {
  if (event.seq <= state.lastSeq) return state; // replay overlap
  state.events.push(event);
  state.lastSeq = event.seq;
  const view = turnFor(state, event.turn);
  const payload = event.payload as Record<string, any>;
  try {
    switch (event.type) {
      case "reformulation":
        view.reformulations.push(String(payload.text ?? ""));
        break;
      case "datasets_selected":
        view.datasetIds = (payload.dataset_ids ?? []).map(String);
        view.datasetTitles = { ...(payload.titles ?? {}) };
        break;
      case "step_started": {
        const step = stepFor(view, Number(payload.index));
        step.plan = String(payload.plan ?? "");
        step.code = String(payload.code ?? "");
        break;
      }
      case "step_result": {
        const step = stepFor(view, Number(payload.index));
        step.status = String(payload.status ?? "");
        step.log = payload.log == null ? "" : String(payload.log);
        step.error = payload.error == null ? null : String(payload.error);
        break;
      }
      case "artifact":
        view.artifacts.push({ kind: String(payload.kind), payload: payload.payload });
        break;
      case "final":
        view.finalText = String(payload.text ?? "");
        break;
      case "rejection":
        view.rejectionMessage = String(payload.message ?? "");
        break;
      case "error":
        view.errorMessage = String(payload.message ?? "");
        break;
      default:
        view.malformed.push(`unknown event type ${String(event.type)}`);
    }
  } catch (err) {
    // a malformed event renders as an inline error card; the rest of the
    // turn still renders
    view.malformed.push(`bad ${event.type} event: ${String(err)}`);
  }
  if (TERMINAL_TYPES.has(event.type)) {
    view.terminal = true;
    state.inFlight = false;
  }
  return state;
}

export function applyEvents(events: EventEnvelope[], base?: ViewState): ViewState {
  const state = base ?? emptyState();
  for (const event of events) applyEvent(state, event);
  return state;
}
