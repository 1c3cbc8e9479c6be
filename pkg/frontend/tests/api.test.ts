import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function clientWith(status: number, body: unknown): { client: ApiClient; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { client: new ApiClient("", fetchFn), calls };
}

describe("ApiClient", () => {
  it("posts tag requests with the documented body", async () => {
    const { client, calls } = clientWith(200, {
      tokens: [], entities: [], model_id: "m", language: "igbo",
    });
    await client.tag("Ngozi gara Abuja.", "igbo", "m");
    expect(calls[0].url).toBe("/api/tag");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      text: "Ngozi gara Abuja.", language: "igbo", model_id: "m",
    });
  });

  it("omits model_id when unset (server picks latest)", async () => {
    const { client, calls } = clientWith(200, {
      tokens: [], entities: [], model_id: "m", language: "igbo",
    });
    await client.tag("x", "igbo", null);
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ text: "x", language: "igbo" });
  });

  it("surfaces structured errors verbatim", async () => {
    const { client } = clientWith(400, { error_code: "EMPTY_TEXT", message: "nothing to tag" });
    const error = await client.tag("", "igbo").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.errorCode).toBe("EMPTY_TEXT");
    expect(error.status).toBe(400);
    expect(error.message).toBe("nothing to tag");
  });

  it("starts runs against /api/runs", async () => {
    const { client, calls } = clientWith(202, { run_id: "r1" });
    const out = await client.startRun("crf", { epochs: 5, seed: 42 });
    expect(out.run_id).toBe("r1");
    expect(calls[0].url).toBe("/api/runs");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      model_type: "crf", config: { epochs: 5, seed: 42 },
    });
  });

  it("polls runs by id and exposes the CSV URL", async () => {
    const { client, calls } = clientWith(200, {
      run_id: "r1", model_type: "crf", status: "running", history: [],
      error: null, corpus_fingerprint: "", test_metrics: null,
    });
    await client.getRun("r1");
    expect(calls[0].url).toBe("/api/runs/r1");
    expect(client.metricsCsvUrl("r1")).toBe("/api/runs/r1/metrics.csv");
  });

  it("sends OCR uploads as multipart form data", async () => {
    const { client, calls } = clientWith(200, {
      tokens: [], entities: [], model_id: "m", language: "igbo", extracted_text: "x",
    });
    await client.ocrTag(new Blob(["img-bytes"]), "scan.png", "igbo");
    expect(calls[0].url).toBe("/api/ocr-tag");
    const form = calls[0].init?.body as FormData;
    expect(form.get("language")).toBe("igbo");
    expect(form.get("image")).toBeTruthy();
  });
});
