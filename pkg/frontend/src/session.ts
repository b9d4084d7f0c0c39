// Session state machine: all state derives from service responses; the view
// layer only renders what this controller holds.

import { DialogueApi, SessionView, Turn } from "./api.js";

export type Outcome = "achieved" | "failed" | "abandoned";

export type GoalChoice =
  | { mode: "sampled" }
  | { mode: "manual"; bits: number[] };

export interface ControllerState {
  sessionId: string | null;
  status: "idle" | "open" | "ended";
  humanGoals: number[];
  agentGoals: number[];
  turns: Turn[];
  doneProb: number | null;
  outcome: Outcome | null;
  error: string | null;
}

export class SessionController {
  state: ControllerState = {
    sessionId: null,
    status: "idle",
    humanGoals: [],
    agentGoals: [],
    turns: [],
    doneProb: null,
    outcome: null,
    error: null,
  };

  constructor(private api: DialogueApi) {}

  async start(choice: GoalChoice): Promise<void> {
    this.state.error = null;
    const humanBits = choice.mode === "manual" ? choice.bits : null;
    try {
      const created = await this.api.createSession(null, humanBits);
      this.state.sessionId = created.id;
      this.state.agentGoals = created.goals;
      this.state.humanGoals = created.human_goals;
      this.state.status = "open";
      this.state.turns = [];
      this.state.doneProb = null;
      this.state.outcome = null;
    } catch (err) {
      this.state.error = String(err instanceof Error ? err.message : err);
      this.state.sessionId = null;
      this.state.status = "idle";
      throw err;
    }
  }

  async send(text: string): Promise<void> {
    if (this.state.status !== "open" || !this.state.sessionId) {
      throw new Error("session is not open");
    }
    const reply = await this.api.sendMessage(this.state.sessionId, text);
    this.state.turns.push({ speaker: "A", text });
    this.state.turns.push({ speaker: "B", text: reply.reply });
    this.state.doneProb = reply.done_prob;
    if (reply.status === "ended") {
      this.state.status = "ended";
    }
  }

  // rebuilds the view from the server (page refresh, reconnect)
  async refresh(): Promise<void> {
    if (!this.state.sessionId) return;
    const view: SessionView = await this.api.getSession(this.state.sessionId);
    this.state.turns = view.turns;
    this.state.agentGoals = view.goals;
    this.state.humanGoals = view.human_goals;
    this.state.status = view.status;
  }

  async end(): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session");
    await this.api.endSession(this.state.sessionId);
    this.state.status = "ended";
  }

  markOutcome(outcome: Outcome): void {
    if (this.state.status !== "ended") {
      throw new Error("outcome can only be marked after the session ends");
    }
    this.state.outcome = outcome;
  }

  // One corpus-format record (JSON line) importable by the training pipeline.
  exportLog(): string {
    if (this.state.status !== "ended" || this.state.outcome === null) {
      throw new Error("finish the session and mark an outcome before exporting");
    }
    if (this.state.outcome === "abandoned") {
      throw new Error("abandoned sessions are not exported");
    }
    const record = {
      goals_a: this.state.humanGoals,
      goals_b: this.state.agentGoals,
      turns: this.state.turns.map((t) => ({ speaker: t.speaker, text: t.text })),
      outcome: this.state.outcome === "achieved" ? 1 : 0,
    };
    return JSON.stringify(record);
  }
}
