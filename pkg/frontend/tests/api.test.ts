import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiError, RateClient } from "../src/api.js";
import { debounce } from "../src/debounce.js";
import { buildRateRequest, stateFromBundle } from "../src/state.js";
import { goldenBundle, jsonResponse } from "./helpers.js";

describe("RateClient.rate", () => {
  it("posts the exact request body and parses the bundle", async () => {
    const bundle = goldenBundle();
    const bodies: string[] = [];
    const client = new RateClient("", async (url, init) => {
      expect(url).toBe("/api/rate");
      bodies.push(String(init?.body));
      return jsonResponse(bundle);
    });
    const request = buildRateRequest(stateFromBundle(bundle));
    const received = await client.rate(request);
    expect(bodies).toEqual([JSON.stringify(request)]);
    expect(received?.scheme_hash).toBe(bundle.scheme_hash);
  });

  it("discards responses superseded by a newer request", async () => {
    const bundle = goldenBundle();
    let releaseFirst!: (r: Response) => void;
    const first = new Promise<Response>((resolve) => (releaseFirst = resolve));
    let call = 0;
    const client = new RateClient("", async () => {
      call += 1;
      return call === 1 ? first : jsonResponse(bundle);
    });
    const request = buildRateRequest(stateFromBundle(bundle));
    const older = client.rate(request);
    const newer = client.rate(request);
    releaseFirst(jsonResponse(bundle));
    expect(await older).toBeNull();
    expect((await newer)?.scheme_hash).toBe(bundle.scheme_hash);
  });

  it("surfaces field-level 400s as ApiError", async () => {
    const client = new RateClient("", async () =>
      jsonResponse({ errors: [{ field: "bins", message: "must be strictly decreasing" }] }, 400),
    );
    const failure = await client
      .rate(buildRateRequest(stateFromBundle(goldenBundle())))
      .catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(400);
    expect(failure.fieldErrors[0].field).toBe("bins");
    expect(failure.message).toContain("bins");
  });

  it("explains 422 missing references", async () => {
    const client = new RateClient("", async () =>
      jsonResponse(
        {
          error: "missing_reference",
          group: { task: "inference", dataset: "mnist", environment: "wkst-01" },
        },
        422,
      ),
    );
    const failure = await client
      .rate(buildRateRequest(stateFromBundle(goldenBundle())))
      .catch((e) => e);
    expect(failure.message).toContain("mnist");
  });
});

describe("RateClient.label", () => {
  it("builds scheme-hash label urls and inlines the SVG", async () => {
    const urls: string[] = [];
    const client = new RateClient("", async (url) => {
      urls.push(url);
      return new Response("<svg/>", { status: 200 });
    });
    const svg = await client.label("covertype-lr", "abc123");
    expect(svg).toBe("<svg/>");
    expect(urls).toEqual(["/api/label/covertype-lr?scheme_hash=abc123"]);
  });

  it("maps 404 to 'experiment not found'", async () => {
    const client = new RateClient("", async () => jsonResponse({ error: "unknown experiment" }, 404));
    const failure = await client.label("ghost", "abc").catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.message).toBe("experiment not found");
  });
});

describe("slider round-trip", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("a settled slider move posts exactly the direct-call body", async () => {
    // The UI half of the round-trip: after the debounce settles, the wire
    // body equals buildRateRequest(state) verbatim, so (with the server's
    // determinism, proven on the backend) the bundle is identical too.
    const bundle = goldenBundle();
    const bodies: string[] = [];
    const client = new RateClient("", async (_url, init) => {
      bodies.push(String(init?.body));
      return jsonResponse(bundle);
    });
    const state = stateFromBundle(bundle);
    const refresh = debounce(() => void client.rate(buildRateRequest(state)), 250);

    state.weights.power_draw = 0.9;
    refresh.call();
    state.weights.power_draw = 1.1; // user keeps dragging
    refresh.call();
    vi.advanceTimersByTime(250);
    await vi.runAllTimersAsync();

    const direct = JSON.stringify(buildRateRequest(state));
    expect(bodies).toEqual([direct]); // one request, latest state, same body
  });
});
