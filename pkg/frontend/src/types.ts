// Wire types for the task server's JSON views.

export type Direction = "up" | "down" | "left" | "right";
export type Condition = "simple" | "complex";
export type InfoMode = "full_grid" | "restricted";

export interface RevealedCell {
  x: number;
  y: number;
  kind: "empty" | "obstacle" | "target";
  target_index?: number;
  value_x100?: number;
}

export interface View {
  mode: InfoMode;
  session_id: string;
  condition: Condition;
  practice: boolean;
  episode: number;
  episodes_total: number;
  steps_taken: number;
  position: [number, number];
  last_reward_x100: number | null;
  episode_score_x100: number;
  cumulative_score_x100: number;
  terminal: boolean;
  completed_all: boolean;
  recall_done: boolean;
  // full-grid sessions only
  width?: number;
  height?: number;
  consumed_target?: boolean;
  revealed?: RevealedCell[];
}

export interface SessionStart {
  session_id: string;
  view: View;
}

export interface RecallPayload {
  target_positions: number[][];
  judged_preferred: number[] | null;
  notes: string;
}
