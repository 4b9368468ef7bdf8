// Browser bootstrap: session setup, keyboard/button movement with a
// single in-flight request, and the recall questionnaire. All game
// rules live on the server; refreshing resumes from server state.

import { ApiError, TaskClient } from "./api.js";
import { renderRecallForm, renderView } from "./render.js";
import type { Direction, View } from "./types.js";

const SESSION_KEY = "gridcredit_session";
const KEY_DIRECTIONS: Record<string, Direction> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
};

const client = new TaskClient("");

let sessionId: string | null = null;
let view: View | null = null;
let inFlight = false;
let queued: Direction | null = null;

function root(): HTMLElement {
  return document.getElementById("app")!;
}

function renderSetup(): void {
  root().innerHTML = `
<section class="setup">
  <h1>Find the best target</h1>
  <label>participant id <input id="participant" value=""></label>
  <label>condition
    <select id="condition"><option>simple</option><option>complex</option></select>
  </label>
  <label>view
    <select id="info-mode">
      <option value="full_grid">full grid</option>
      <option value="restricted">one cell</option>
    </select>
  </label>
  <button id="start">Start</button>
</section>`;
  document.getElementById("start")!.addEventListener("click", () => void startSession());
}

async function startSession(): Promise<void> {
  const participant = (document.getElementById("participant") as HTMLInputElement).value || "anon";
  const condition = (document.getElementById("condition") as HTMLSelectElement).value as
    | "simple"
    | "complex";
  const infoMode = (document.getElementById("info-mode") as HTMLSelectElement).value as
    | "full_grid"
    | "restricted";
  const started = await client.createSession(participant, condition, infoMode);
  sessionId = started.session_id;
  localStorage.setItem(SESSION_KEY, sessionId);
  update(started.view);
}

function update(next: View): void {
  view = next;
  if (next.completed_all && !next.recall_done) {
    root().innerHTML = renderView(next) + renderRecallForm();
    wireRecall();
  } else if (next.completed_all && next.recall_done) {
    root().innerHTML =
      renderView(next) + `<p class="thanks">Thank you! You can close this page.</p>`;
    localStorage.removeItem(SESSION_KEY);
  } else {
    root().innerHTML = renderView(next) + movementButtons();
    wireControls();
  }
}

function movementButtons(): string {
  return `
<div class="pad">
  <button data-dir="up">&uarr;</button>
  <div><button data-dir="left">&larr;</button>
  <button data-dir="down">&darr;</button>
  <button data-dir="right">&rarr;</button></div>
</div>`;
}

function wireControls(): void {
  for (const button of root().querySelectorAll<HTMLButtonElement>("button[data-dir]")) {
    button.addEventListener("click", () => void tryMove(button.dataset.dir as Direction));
  }
  const next = document.getElementById("next-episode");
  if (next) next.addEventListener("click", () => void advanceEpisode());
}

function wireRecall(): void {
  document.getElementById("recall-submit")!.addEventListener("click", () => void submitRecall());
}

async function tryMove(direction: Direction): Promise<void> {
  if (!sessionId || !view || view.terminal) return;
  if (inFlight) {
    queued = direction; // one pending press; issued after the response lands
    return;
  }
  inFlight = true;
  try {
    update(await client.move(sessionId, direction));
  } catch (error) {
    if (!(error instanceof ApiError && error.status === 409)) throw error;
  } finally {
    inFlight = false;
  }
  const followUp = queued;
  queued = null;
  if (followUp) await tryMove(followUp);
}

async function advanceEpisode(): Promise<void> {
  if (!sessionId || inFlight) return;
  inFlight = true;
  try {
    update(await client.nextEpisode(sessionId));
  } finally {
    inFlight = false;
  }
}

async function submitRecall(): Promise<void> {
  if (!sessionId) return;
  const positions: number[][] = [];
  for (let i = 0; i < 4; i++) {
    const x = (document.getElementById(`recall-x-${i}`) as HTMLInputElement).value;
    const y = (document.getElementById(`recall-y-${i}`) as HTMLInputElement).value;
    if (x !== "" && y !== "") positions.push([Number(x), Number(y)]);
  }
  const bx = (document.getElementById("recall-best-x") as HTMLInputElement).value;
  const by = (document.getElementById("recall-best-y") as HTMLInputElement).value;
  await client.submitRecall(sessionId, {
    target_positions: positions,
    judged_preferred: bx !== "" && by !== "" ? [Number(bx), Number(by)] : null,
    notes: "",
  });
  update(await client.getView(sessionId));
}

document.addEventListener("keydown", (event) => {
  const direction = KEY_DIRECTIONS[event.key];
  if (!direction) return;
  if ((event.target as HTMLElement | null)?.tagName === "INPUT") return;
  event.preventDefault();
  void tryMove(direction);
});

async function boot(): Promise<void> {
  const stored = localStorage.getItem(SESSION_KEY);
  if (stored) {
    try {
      sessionId = stored;
      update(await client.getView(stored));
      return;
    } catch {
      localStorage.removeItem(SESSION_KEY);
      sessionId = null;
    }
  }
  renderSetup();
}

void boot();
