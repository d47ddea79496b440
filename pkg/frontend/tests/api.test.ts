import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, Client } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("Client", () => {
  it("posts labels with the expected body shape", async () => {
    const mock = vi
      .spyOn(globalThis, "fetch")
      .mockResolvedValue(
        jsonResponse(200, {
          next_display: [],
          metrics: {
            iteration: 1,
            samp_pct: 10,
            eer: 0.1,
            reward: null,
            display_size: 2,
          },
          done: true,
        }),
      );
    const client = new Client("http://host");
    const resp = await client.submitLabels("abc", [
      { id: 1, label: 1 },
      { id: 2, label: 0 },
    ]);
    expect(resp.done).toBe(true);
    const [url, init] = mock.mock.calls[0];
    expect(url).toBe("http://host/sessions/abc/labels");
    expect(JSON.parse(String(init?.body))).toEqual({
      labels: [
        { id: 1, label: 1 },
        { id: 2, label: 0 },
      ],
    });
  });

  it("surfaces structured error details", async () => {
    vi.spyOn(globalThis, "fetch").mockResolvedValue(
      jsonResponse(409, {
        detail: { message: "mismatch", missing_ids: [3], extra_ids: [] },
      }),
    );
    const client = new Client();
    const err = await client
      .submitLabels("abc", [{ id: 1, label: 1 }])
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).detail).toMatchObject({ missing_ids: [3] });
  });

  it("fetches the run log as text", async () => {
    vi.spyOn(globalThis, "fetch").mockResolvedValue(
      new Response('{"type":"meta"}\n', { status: 200 }),
    );
    const client = new Client();
    expect(await client.runlog("abc")).toContain('"meta"');
  });

  it("propagates network failures", async () => {
    vi.spyOn(globalThis, "fetch").mockRejectedValue(new TypeError("offline"));
    const client = new Client();
    await expect(client.health()).rejects.toThrow("offline");
  });
});
