// Thin fetch client for the task server. The base URL is injectable so
// tests can point it at a spawned server instance.

import type { Condition, Direction, InfoMode, RecallPayload, SessionStart, View } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class TaskClient {
  constructor(readonly base: string = "") {}

  createSession(participant: string, condition: Condition, infoMode: InfoMode): Promise<SessionStart> {
    return request<SessionStart>(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify({ participant, condition, info_mode: infoMode }),
    });
  }

  getView(sessionId: string): Promise<View> {
    return request<View>(this.base, `/sessions/${sessionId}`);
  }

  move(sessionId: string, direction: Direction): Promise<View> {
    return request<View>(this.base, `/sessions/${sessionId}/move`, {
      method: "POST",
      body: JSON.stringify({ direction }),
    });
  }

  nextEpisode(sessionId: string): Promise<View> {
    return request<View>(this.base, `/sessions/${sessionId}/next-episode`, {
      method: "POST",
    });
  }

  submitRecall(sessionId: string, payload: RecallPayload): Promise<{ ok: boolean }> {
    return request<{ ok: boolean }>(this.base, `/sessions/${sessionId}/recall`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  async exportCsv(kind: "steps" | "summary"): Promise<string> {
    const response = await fetch(`${this.base}/export?kind=${kind}`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }
}
