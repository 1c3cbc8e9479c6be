import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { DashboardController, DashboardState } from "../src/dashboard.js";
import type { RunEpochRow, RunRecord } from "../src/types.js";

function epochRow(epoch: number): RunEpochRow {
  return {
    epoch, training_loss: 2 / epoch, validation_loss: 1.8 / epoch,
    precision: 0.9, recall: 0.9, f1: 0.9, accuracy: 0.9,
  };
}

/** Server double: a run that finishes after `total` polls. */
function runServerDouble(total: number, finalStatus: "done" | "failed" = "done") {
  let polls = 0;
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    if (url === "/api/runs" && init?.method === "POST") {
      return new Response(JSON.stringify({ run_id: "r1" }), { status: 202 });
    }
    if (url === "/api/runs/r1") {
      polls += 1;
      const complete = polls >= total;
      const record: RunRecord = {
        run_id: "r1",
        model_type: "crf",
        status: complete ? finalStatus : "running",
        history: Array.from({ length: Math.min(polls, total) }, (_, i) => epochRow(i + 1)),
        error: complete && finalStatus === "failed" ? "corpus exploded" : null,
        corpus_fingerprint: "f",
        test_metrics: null,
      };
      return new Response(JSON.stringify(record), { status: 200 });
    }
    return new Response(JSON.stringify({ error_code: "UNKNOWN_RUN", message: url }), { status: 404 });
  };
  return fetchFn;
}

function controllerWith(fetchFn: (url: string, init?: RequestInit) => Promise<Response>) {
  const states: DashboardState[] = [];
  const controller = new DashboardController(
    new ApiClient("", fetchFn),
    (state) => states.push(state),
    0,
    async () => undefined, // no real sleeping in tests
  );
  return { controller, states };
}

describe("DashboardController", () => {
  it("launches, polls to completion, and ends up done with full history", async () => {
    const { controller, states } = controllerWith(runServerDouble(5));
    const final = await controller.launch("crf", { epochs: 5, seed: 42 });
    expect(final.phase).toBe("done");
    expect(final.record?.history).toHaveLength(5);
    // history grows monotonically across observed states
    const lengths = states
      .filter((s) => s.record !== null)
      .map((s) => s.record!.history.length);
    expect([...lengths].sort((a, b) => a - b)).toEqual(lengths);
    expect(lengths.some((n) => n > 0 && n < 5)).toBe(true); // live growth observed
  });

  it("disables launch while running", async () => {
    const { controller, states } = controllerWith(runServerDouble(3));
    const promise = controller.launch("crf", {});
    await promise;
    const sawRunning = states.some((s) => s.phase === "running");
    expect(sawRunning).toBe(true);
    // during running phases the button must be disabled
    expect(controller.launchDisabled).toBe(false); // finished now
  });

  it("409 maps to the conflict state with the launch disabled notice", async () => {
    const fetchFn = async () =>
      new Response(
        JSON.stringify({ error_code: "RUN_IN_PROGRESS", message: "another training run is in flight" }),
        { status: 409 },
      );
    const { controller } = controllerWith(fetchFn);
    const final = await controller.launch("crf", {});
    expect(final.phase).toBe("conflict");
    expect(final.message).toContain("in flight");
  });

  it("failed runs keep the partial history and surface the message", async () => {
    const { controller } = controllerWith(runServerDouble(3, "failed"));
    const final = await controller.launch("crf", {});
    expect(final.phase).toBe("failed");
    expect(final.message).toBe("corpus exploded");
    expect(final.record?.history.length).toBeGreaterThan(0); // partial curve retained
  });
});
