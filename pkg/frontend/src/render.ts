// Pure view -> HTML string rendering. Keeping these functions free of
// DOM state lets the information-ceiling tests assert on exact output.

import type { RevealedCell, View } from "./types.js";

// Fixed palette: target colors by index.
export const TARGET_COLORS = ["blue", "green", "orange", "purple"] as const;

export function formatPoints(x100: number): string {
  const rounded = Math.round(x100 * 100) / 100;
  return String(rounded);
}

function episodeLabel(view: View): string {
  return view.practice ? "practice" : `episode ${view.episode} / ${view.episodes_total}`;
}

function statusBar(view: View): string {
  const reward =
    view.last_reward_x100 === null ? "&mdash;" : formatPoints(view.last_reward_x100);
  return `
  <div class="status">
    <span class="episode">${episodeLabel(view)}</span>
    <span class="steps">steps: ${view.steps_taken} / 31</span>
    <span class="reward">last reward: <b class="reward-value">${reward}</b></span>
    <span class="score">episode score: ${formatPoints(view.episode_score_x100)}</span>
    <span class="total">total score: ${formatPoints(view.cumulative_score_x100)}</span>
  </div>`;
}

function terminalBanner(view: View): string {
  if (!view.terminal) return "";
  if (view.completed_all) {
    return `<div class="banner done">All ${view.episodes_total} episodes complete.</div>`;
  }
  const outcome =
    view.mode === "full_grid" && view.consumed_target
      ? "You reached a target!"
      : view.last_reward_x100 !== null && view.last_reward_x100 > 0
        ? "You reached a target!"
        : "Out of steps.";
  return `<div class="banner">${outcome}
    <button id="next-episode">Next episode</button></div>`;
}

export function renderRestricted(view: View): string {
  const [x, y] = view.position;
  return `
<section class="restricted" data-mode="restricted">
  ${statusBar(view)}
  <div class="one-cell">
    <div class="cell-frame"><span class="player-dot"></span></div>
    <div class="coords">position: (${x}, ${y})</div>
  </div>
  ${terminalBanner(view)}
</section>`;
}

function cellMarkup(cell: RevealedCell | undefined, isPlayer: boolean): string {
  let cls = "unknown";
  let body = "";
  if (cell) {
    cls = cell.kind;
    if (cell.kind === "target") {
      const idx = cell.target_index ?? 0;
      cls += ` target-${TARGET_COLORS[idx % TARGET_COLORS.length]}`;
      if (cell.value_x100 !== undefined) {
        body = `<span class="value">${formatPoints(cell.value_x100)}</span>`;
      }
    }
  }
  const player = isPlayer ? '<span class="player-dot"></span>' : "";
  return `<td class="${cls}">${body}${player}</td>`;
}

export function renderFullGrid(view: View): string {
  const width = view.width ?? 0;
  const height = view.height ?? 0;
  const revealed = new Map<string, RevealedCell>();
  for (const cell of view.revealed ?? []) {
    revealed.set(`${cell.x},${cell.y}`, cell);
  }
  const [px, py] = view.position;
  const rows: string[] = [];
  for (let y = 0; y < height; y++) {
    const cells: string[] = [];
    for (let x = 0; x < width; x++) {
      cells.push(cellMarkup(revealed.get(`${x},${y}`), x === px && y === py));
    }
    rows.push(`<tr>${cells.join("")}</tr>`);
  }
  return `
<section class="full-grid" data-mode="full_grid">
  ${statusBar(view)}
  <table class="grid"><tbody>${rows.join("")}</tbody></table>
  ${terminalBanner(view)}
</section>`;
}

export function renderView(view: View): string {
  return view.mode === "restricted" ? renderRestricted(view) : renderFullGrid(view);
}

export function renderRecallForm(): string {
  const rows = [0, 1, 2, 3]
    .map(
      (i) => `
    <div class="recall-row">
      <label>target ${i + 1}: x <input type="number" id="recall-x-${i}" min="0" max="10"></label>
      <label>y <input type="number" id="recall-y-${i}" min="0" max="10"></label>
    </div>`,
    )
    .join("");
  return `
<section class="recall">
  <h2>One last thing</h2>
  <p>Where do you think the targets were? Which position held the most valuable one?
     Leave fields empty to skip.</p>
  ${rows}
  <div class="recall-row">
    <label>most valuable at: x <input type="number" id="recall-best-x" min="0" max="10"></label>
    <label>y <input type="number" id="recall-best-y" min="0" max="10"></label>
  </div>
  <button id="recall-submit">Submit</button>
</section>`;
}
