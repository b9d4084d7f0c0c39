// Typed client for the dialogue service HTTP API.

export interface Turn {
  speaker: string;
  text: string;
}

export interface SessionView {
  id: string;
  goals: number[];
  human_goals: number[];
  turns: Turn[];
  status: "open" | "ended";
}

export interface MessageReply {
  reply: string;
  done_prob: number;
  status: "open" | "ended";
}

export interface ModelInfo {
  k: number;
  dims: { embedding: number; goal_hidden: number; hidden: number };
  vocab_size: number;
  version: string;
  goal_labels: { customer: string[]; server: string[] };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, (body as { error?: string }).error ?? resp.statusText);
  }
  return body as T;
}

export class DialogueApi {
  constructor(private baseUrl: string) {}

  modelInfo(): Promise<ModelInfo> {
    return request<ModelInfo>(`${this.baseUrl}/model/info`);
  }

  createSession(agentGoals: number[] | null, humanGoals: number[] | null) {
    return request<{ id: string; goals: number[]; human_goals: number[] }>(
      `${this.baseUrl}/session`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ goals: agentGoals, human_goals: humanGoals }),
      },
    );
  }

  sendMessage(id: string, text: string): Promise<MessageReply> {
    return request<MessageReply>(`${this.baseUrl}/session/${id}/message`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return request<SessionView>(`${this.baseUrl}/session/${id}`);
  }

  endSession(id: string): Promise<{ status: string }> {
    return request<{ status: string }>(`${this.baseUrl}/session/${id}/end`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
  }
}
