import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { Bundle } from "../src/types.js";

/** The golden report produced by the rating CLI over the fixture corpus. */
export function goldenBundle(): Bundle {
  const here = dirname(fileURLToPath(import.meta.url));
  const path = join(here, "..", "..", "fixtures", "golden", "report.json");
  return JSON.parse(readFileSync(path, "utf-8")) as Bundle;
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}
