import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, createConversation, fetchTrace, submitQuestion, traceBlob } from "../src/api";
import { parseFrame } from "../src/sse";
import { EventEnvelope } from "../src/types";
import fixture from "./fixture_events.json";

const answerEvents = fixture.answer as EventEnvelope[];

afterEach(() => {
  vi.unstubAllGlobals();
});

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("rest client", () => {
  it("creates a conversation", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse(201, { conversation_id: "abc123" }))
    );
    expect(await createConversation()).toBe("abc123");
  });

  it("submits questions as multipart form data", async () => {
    const fetchMock = vi.fn(async (_url: unknown, init?: RequestInit) => {
      expect(init?.body).toBeInstanceOf(FormData);
      expect((init?.body as FormData).get("text")).toBe("How many fountains?");
      return jsonResponse(202, { turn: 1 });
    });
    vi.stubGlobal("fetch", fetchMock);
    expect(await submitQuestion("abc123", "How many fountains?")).toBe(1);
    expect(fetchMock).toHaveBeenCalledWith(
      "/conversations/abc123/questions",
      expect.objectContaining({ method: "POST" })
    );
  });

  it("surfaces 409 and 413 as ApiError with the status", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse(409, { error: "a turn is already in flight" }))
    );
    await expect(submitQuestion("abc", "again")).rejects.toMatchObject({ status: 409 });
  });

  it("trace download is byte-identical to the endpoint body", async () => {
    const body = answerEvents.map((e) => JSON.stringify(e)).join("\n") + "\n";
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => new Response(body, { status: 200 }))
    );
    const text = await fetchTrace("abc123");
    expect(text).toBe(body);
    // jsdom's Blob lacks .text(); read it back with a FileReader
    const blobText = await new Promise<string>((resolve, reject) => {
      const reader = new FileReader();
      reader.onload = () => resolve(String(reader.result));
      reader.onerror = () => reject(reader.error);
      reader.readAsText(traceBlob(text));
    });
    expect(blobText).toBe(body); // what the download button writes
  });

  it("fetchTrace raises on 404", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => new Response("nope", { status: 404 })));
    await expect(fetchTrace("ghost")).rejects.toBeInstanceOf(ApiError);
  });
});

describe("sse frame parsing", () => {
  it("decodes the service frame format", () => {
    const envelope = answerEvents[0];
    const frame = `id: ${envelope.seq}\nevent: ${envelope.type}\ndata: ${JSON.stringify(envelope)}`;
    expect(parseFrame(frame)).toEqual(envelope);
  });

  it("returns null for keep-alive frames", () => {
    expect(parseFrame(": ping")).toBeNull();
  });
});
