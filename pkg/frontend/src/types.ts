// Mirror of the service's audit event envelope (docs/audit_events.md).

export type EventType =
  | "reformulation"
  | "datasets_selected"
  | "rejection"
  | "step_started"
  | "step_result"
  | "artifact"
  | "final"
  | "error";

export const TERMINAL_TYPES: ReadonlySet<string> = new Set(["rejection", "final", "error"]);

export interface EventEnvelope {
  v: number;
  conversation_id: string;
  seq: number;
  turn: number;
  type: EventType;
  ts: number;
  payload: Record<string, unknown>;
}

export interface TableArtifact {
  columns: string[];
  rows: unknown[][];
}

export interface PlotSpec {
  mark: "bar" | "line" | "point" | "area";
  title?: string;
  x: { field: string };
  y: { field: string };
  series?: string | null;
  data: Record<string, unknown>[];
}

export interface MapLayer {
  name: string;
  geojson: { type: "FeatureCollection"; features: GeoFeature[] };
  style?: Record<string, unknown>;
}

export interface MapSpec {
  base: string;
  crs?: string;
  layers: MapLayer[];
}

export interface GeoFeature {
  type: "Feature";
  properties: Record<string, unknown>;
  geometry: { type: string; coordinates: unknown };
}

export interface StepView {
  index: number;
  plan: string;
  code: string;
  status?: string;
  log?: string;
  error?: string | null;
}

export interface TurnView {
  turn: number;
  reformulations: string[];
  datasetIds: string[];
  datasetTitles: Record<string, string>;
  steps: StepView[];
  artifacts: { kind: string; payload: unknown }[];
  finalText?: string;
  rejectionMessage?: string;
  errorMessage?: string;
  malformed: string[];
  terminal: boolean;
}

export interface ViewState {
  conversationId: string | null;
  events: EventEnvelope[];
  turns: TurnView[];
  inFlight: boolean;
  connection: "idle" | "streaming" | "closed" | "error";
  lastSeq: number;
}

export function emptyState(): ViewState {
  return {
    conversationId: null,
    events: [],
    turns: [],
    inFlight: false,
    connection: "idle",
    lastSeq: 0,
  };
}
