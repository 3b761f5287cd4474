/**
 * Thin client for the versioned service API.
 *
 * Unwraps response envelopes, raises ApiError with the service's error
 * code/message, and offers a long-poll loop for round-status updates.
 */

import type {
  CatalogDoc,
  ConsensusReport,
  Envelope,
  EvaluationPayload,
  MyEstimates,
  SessionView,
  SnapshotDoc,
} from "./types";

export class ApiError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private token: string,
    private base: string = "/api/v1",
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.base}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const envelope = (await response.json()) as Envelope<T>;
    if (envelope.error) {
      throw new ApiError(envelope.error.code, envelope.error.message);
    }
    if (envelope.payload === null) {
      throw new ApiError("empty_payload", "service returned no payload");
    }
    return envelope.payload;
  }

  // -- sessions --------------------------------------------------------------

  sessionState(sessionId: string): Promise<SessionView> {
    return this.call("GET", `/sessions/${sessionId}`);
  }

  openRound(sessionId: string): Promise<{ round: number }> {
    return this.call("POST", `/sessions/${sessionId}/rounds`);
  }

  closeRound(sessionId: string): Promise<ConsensusReport> {
    return this.call("POST", `/sessions/${sessionId}/rounds/current/close`);
  }

  finalize(sessionId: string, force = false): Promise<{ final_estimates: Record<string, string> }> {
    return this.call("POST", `/sessions/${sessionId}/finalize`, { force });
  }

  submitEstimate(
    sessionId: string,
    quantity: string,
    value: number,
  ): Promise<{ recorded: boolean }> {
    return this.call("POST", `/sessions/${sessionId}/estimates`, {
      quantity,
      value,
    });
  }

  myEstimates(sessionId: string): Promise<MyEstimates> {
    return this.call("GET", `/sessions/${sessionId}/my-estimates`);
  }

  lastReport(sessionId: string): Promise<ConsensusReport> {
    return this.call("GET", `/sessions/${sessionId}/report`);
  }

  /**
   * Long-poll `events` until the session version moves past `since`.
   * Returns the fresh view; the caller loops as long as it wants updates.
   */
  awaitChange(sessionId: string, since: number, timeoutS = 25): Promise<SessionView> {
    return this.call(
      "GET",
      `/sessions/${sessionId}/events?since=${since}&timeout=${timeoutS}`,
    );
  }

  // -- assessments and treatment ------------------------------------------------

  snapshot(snapshotId: string): Promise<SnapshotDoc> {
    return this.call("GET", `/assessments/${snapshotId}`);
  }

  catalog(): Promise<{ document: CatalogDoc }> {
    return this.call("GET", "/catalog");
  }

  whatIf(
    orgId: string,
    snapshotId: string,
    plan: string[],
    toggle: string,
    roundingMode: string,
  ): Promise<EvaluationPayload> {
    return this.call("POST", "/treatment/what-if", {
      org_id: orgId,
      snapshot_id: snapshotId,
      plan,
      toggle,
      rounding_mode: roundingMode,
    });
  }

  evaluate(
    orgId: string,
    snapshotId: string,
    plan: string[],
    roundingMode: string,
  ): Promise<EvaluationPayload> {
    return this.call("POST", "/treatment/evaluate", {
      org_id: orgId,
      snapshot_id: snapshotId,
      plan,
      rounding_mode: roundingMode,
    });
  }
}

/**
 * Repeatedly long-polls a session and invokes `onUpdate` per change.
 * Returns a stop function. Errors back off briefly and retry.
 */
export function followSession(
  api: ApiClient,
  sessionId: string,
  onUpdate: (view: SessionView) => void,
): () => void {
  let stopped = false;
  let since = 0;

  const loop = async () => {
    while (!stopped) {
      try {
        const view = await api.awaitChange(sessionId, since);
        if (stopped) return;
        since = view.version ?? since;
        onUpdate(view);
      } catch {
        await new Promise((resolve) => setTimeout(resolve, 1000));
      }
    }
  };
  void loop();
  return () => {
    stopped = true;
  };
}
