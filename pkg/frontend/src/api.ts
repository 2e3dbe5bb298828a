// REST client for the opendataqa service. The UI never talks to an LLM
// or a catalog directly; this module is its only data channel.

declare const __API_BASE__: string;

export const API_BASE: string =
  typeof __API_BASE__ !== "undefined" ? __API_BASE__ : "";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson(response: Response): Promise<any> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      detail = ((await response.json()) as { error?: string }).error ?? detail;
    } catch {
      // keep statusText
    }
    throw new ApiError(response.status, detail);
  }
  return response.json();
}

export async function createConversation(): Promise<string> {
  const response = await fetch(`${API_BASE}/conversations`, { method: "POST" });
  const body = await expectJson(response);
  return body.conversation_id as string;
}

export interface QuestionAttachments {
  image?: File | null;
  pdf?: File | null;
}

export async function submitQuestion(
  conversationId: string,
  text: string,
  attachments: QuestionAttachments = {}
): Promise<number> {
  const form = new FormData();
  form.append("text", text);
  if (attachments.image) form.append("image", attachments.image);
  if (attachments.pdf) form.append("pdf", attachments.pdf);
  const response = await fetch(
    `${API_BASE}/conversations/${encodeURIComponent(conversationId)}/questions`,
    { method: "POST", body: form }
  );
  const body = await expectJson(response);
  return body.turn as number;
}

export function datasetUrl(datasetId: string): string {
  return `${API_BASE}/datasets/${encodeURIComponent(datasetId)}`;
}

export function eventsUrl(conversationId: string, afterSeq = 0): string {
  const suffix = afterSeq > 0 ? `?after=${afterSeq}` : "";
  return `${API_BASE}/conversations/${encodeURIComponent(conversationId)}/events${suffix}`;
}

/** Raw trace bytes; the download button must write these bytes verbatim. */
export async function fetchTrace(conversationId: string): Promise<string> {
  const response = await fetch(
    `${API_BASE}/conversations/${encodeURIComponent(conversationId)}/trace`
  );
  if (!response.ok) throw new ApiError(response.status, response.statusText);
  return response.text();
}

export function traceBlob(traceText: string): Blob {
  return new Blob([traceText], { type: "application/x-ndjson" });
}
