// DOM layer: renders the controller state; every mutation goes through the
// service round-trip first.

import { DialogueApi, ModelInfo } from "./api.js";
import { Outcome, SessionController } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ChatView {
  private root: HTMLElement;
  private transcript!: HTMLElement;
  private gauge!: HTMLElement;
  private checklist!: HTMLElement;
  private statusLine!: HTMLElement;
  private input!: HTMLInputElement;
  private exportArea!: HTMLElement;
  private labels: string[] = [];

  constructor(
    root: HTMLElement,
    private api: DialogueApi,
    private controller: SessionController,
  ) {
    this.root = root;
  }

  async init(): Promise<void> {
    let info: ModelInfo | null = null;
    try {
      info = await this.api.modelInfo();
    } catch {
      this.root.appendChild(el("div", "banner error", "dialogue service unreachable"));
      return;
    }
    this.labels = info.goal_labels.customer;
    this.build();
  }

  private build(): void {
    const header = el("div", "header");
    header.appendChild(el("h1", undefined, "table reservation chat"));
    const sampled = el("button", undefined, "new session (sampled goals)");
    sampled.onclick = () => this.start({ mode: "sampled" });
    const manual = el("button", undefined, "new session (choose goals)");
    manual.onclick = () => this.startManual();
    header.append(sampled, manual);
    this.root.appendChild(header);

    this.checklist = el("div", "checklist");
    this.root.appendChild(this.checklist);

    this.transcript = el("div", "transcript");
    this.root.appendChild(this.transcript);

    this.gauge = el("div", "gauge");
    this.root.appendChild(this.gauge);

    const form = el("div", "composer");
    this.input = el("input") as HTMLInputElement;
    this.input.placeholder = "say something to the restaurant";
    const send = el("button", undefined, "send");
    send.onclick = () => this.send();
    this.input.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") this.send();
    });
    const endBtn = el("button", undefined, "end session");
    endBtn.onclick = () => this.end();
    form.append(this.input, send, endBtn);
    this.root.appendChild(form);

    this.statusLine = el("div", "status");
    this.root.appendChild(this.statusLine);

    const outcomes = el("div", "outcomes");
    for (const o of ["achieved", "failed", "abandoned"] as Outcome[]) {
      const b = el("button", undefined, `mark ${o}`);
      b.onclick = () => this.mark(o);
      outcomes.appendChild(b);
    }
    const exportBtn = el("button", undefined, "export log");
    exportBtn.onclick = () => this.export();
    outcomes.appendChild(exportBtn);
    this.root.appendChild(outcomes);

    this.exportArea = el("pre", "export");
    this.root.appendChild(this.exportArea);
    this.render();
  }

  private async start(choice: Parameters<SessionController["start"]>[0]): Promise<void> {
    try {
      await this.controller.start(choice);
    } catch {
      // controller records the error; render shows it
    }
    this.render();
  }

  private startManual(): void {
    const raw = window.prompt(
      `your goal bits, comma separated (${this.labels.join(", ")})`,
      "1,0,1,1,0,0",
    );
    if (!raw) return;
    const bits = raw.split(",").map((b) => (b.trim() === "1" ? 1 : 0));
    void this.start({ mode: "manual", bits });
  }

  private async send(): Promise<void> {
    const text = this.input.value.trim();
    if (!text) return;
    this.input.value = "";
    try {
      await this.controller.send(text);
    } catch (err) {
      this.controller.state.error = String(err instanceof Error ? err.message : err);
    }
    this.render();
  }

  private async end(): Promise<void> {
    try {
      await this.controller.end();
    } catch (err) {
      this.controller.state.error = String(err instanceof Error ? err.message : err);
    }
    this.render();
  }

  private mark(outcome: Outcome): void {
    try {
      this.controller.markOutcome(outcome);
      this.controller.state.error = null;
    } catch (err) {
      this.controller.state.error = String(err instanceof Error ? err.message : err);
    }
    this.render();
  }

  private export(): void {
    let line: string;
    try {
      line = this.controller.exportLog();
      this.controller.state.error = null;
    } catch (err) {
      this.controller.state.error = String(err instanceof Error ? err.message : err);
      this.render();
      return;
    }
    this.exportArea.textContent = line;
    const blob = new Blob([line + "\n"], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = `session-${this.controller.state.sessionId}.jsonl`;
    a.click();
    URL.revokeObjectURL(a.href);
    this.render();
  }

  render(): void {
    const s = this.controller.state;
    this.checklist.replaceChildren();
    if (s.humanGoals.length) {
      this.checklist.appendChild(el("h2", undefined, "your goals"));
      s.humanGoals.forEach((bit, i) => {
        const item = el("div", bit ? "goal on" : "goal off");
        item.textContent = `${bit ? "[x]" : "[ ]"} ${this.labels[i] ?? `bit ${i}`}`;
        this.checklist.appendChild(item);
      });
    }
    this.transcript.replaceChildren();
    for (const turn of s.turns) {
      const who = turn.speaker === "A" ? "you" : "agent";
      this.transcript.appendChild(el("div", `turn ${who}`, `${who}: ${turn.text}`));
    }
    this.gauge.textContent =
      s.doneProb === null ? "" : `agent believes goals met: ${s.doneProb.toFixed(2)}`;
    this.statusLine.textContent =
      `status: ${s.status}` +
      (s.outcome ? ` | outcome: ${s.outcome}` : "") +
      (s.error ? ` | ${s.error}` : "");
  }
}
