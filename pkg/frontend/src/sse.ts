// Fetch-based SSE reader: parses `id:`/`event:`/`data:` frames and hands
// decoded envelopes to the caller. Resumes from the last seen sequence
// number on reconnect (the service accepts ?after= as well as the
// Last-Event-ID header).

import { EventEnvelope } from "./types";
import { eventsUrl } from "./api";

export interface StreamHandlers {
  onEvent: (envelope: EventEnvelope) => void;
  onClose: () => void;
  onError: (message: string) => void;
}

export async function streamEvents(
  conversationId: string,
  afterSeq: number,
  handlers: StreamHandlers,
  signal?: AbortSignal
): Promise<void> {
  let response: Response;
  try {
    response = await fetch(eventsUrl(conversationId, afterSeq), {
      headers: afterSeq > 0 ? { "Last-Event-ID": String(afterSeq) } : {},
      signal,
    });
  } catch (err) {
    handlers.onError(`stream connection failed: ${String(err)}`);
    return;
  }
  if (!response.ok || !response.body) {
    handlers.onError(`stream returned ${response.status}`);
    return;
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder("utf-8");
  let buffer = "";
  for (;;) {
    let chunk;
    try {
      chunk = await reader.read();
    } catch (err) {
      handlers.onError(`stream aborted: ${String(err)}`);
      return;
    }
    if (chunk.done) break;
    buffer += decoder.decode(chunk.value, { stream: true });
    const frames = buffer.split(/\r?\n\r?\n/);
    buffer = frames.pop() ?? "";
    for (const frame of frames) {
      const envelope = parseFrame(frame);
      if (envelope) handlers.onEvent(envelope);
    }
  }
  handlers.onClose();
}

export function parseFrame(frame: string): EventEnvelope | null {
  const dataLines: string[] = [];
  for (const line of frame.split(/\r?\n/)) {
    if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
  }
  if (dataLines.length === 0) return null;
  try {
    return JSON.parse(dataLines.join("\n")) as EventEnvelope;
  } catch {
    return null;
  }
}
