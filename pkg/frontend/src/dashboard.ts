/** Training-run launcher and poller (1 s interval while a run is live). */

import { ApiClient, ApiError } from "./api.js";
import type { RunRecord } from "./types.js";

export type DashboardPhase = "idle" | "launching" | "running" | "done" | "failed" | "conflict";

export interface DashboardState {
  phase: DashboardPhase;
  runId: string | null;
  record: RunRecord | null;
  message: string | null;
}

type Sleep = (ms: number) => Promise<void>;

const realSleep: Sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export class DashboardController {
  state: DashboardState = { phase: "idle", runId: null, record: null, message: null };

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: DashboardState) => void,
    private readonly pollIntervalMs: number = 1000,
    private readonly sleep: Sleep = realSleep,
  ) {}

  get launchDisabled(): boolean {
    return this.state.phase === "launching" || this.state.phase === "running";
  }

  private setState(patch: Partial<DashboardState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  /** Start a run and poll it to completion; resolves with the final state. */
  async launch(modelType: string, config: Record<string, unknown>): Promise<DashboardState> {
    this.setState({ phase: "launching", message: null, record: null, runId: null });
    let runId: string;
    try {
      ({ run_id: runId } = await this.api.startRun(modelType, config));
    } catch (error) {
      if (error instanceof ApiError && error.errorCode === "RUN_IN_PROGRESS") {
        this.setState({ phase: "conflict", message: error.message });
        return this.state;
      }
      this.setState({ phase: "failed", message: String(error) });
      return this.state;
    }
    this.setState({ phase: "running", runId });
    return this.poll(runId);
  }

  /** Poll an existing run until it leaves the running state. */
  async poll(runId: string): Promise<DashboardState> {
    for (;;) {
      let record: RunRecord;
      try {
        record = await this.api.getRun(runId);
      } catch (error) {
        this.setState({ phase: "failed", message: String(error) });
        return this.state;
      }
      if (record.status === "done") {
        this.setState({ phase: "done", record, message: null });
        return this.state;
      }
      if (record.status === "failed") {
        // keep the partial history for the charts
        this.setState({ phase: "failed", record, message: record.error ?? "training failed" });
        return this.state;
      }
      this.setState({ phase: "running", record });
      await this.sleep(this.pollIntervalMs);
    }
  }
}
