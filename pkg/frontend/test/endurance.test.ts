import fs from "node:fs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { augment, batchToRecords } from "../src/augment.js";
import { decodePacked, encodePacked } from "../src/packed.js";
import { loadPriors, validatePriorsDocument } from "../src/priors.js";
import { Fixtures, makeFixtures, removeFixtures } from "./helpers.js";

let fx: Fixtures;

beforeAll(() => {
  fx = makeFixtures();
});

afterAll(() => {
  removeFixtures(fx);
});

describe("handle endurance", () => {
  it("survives 10k in-process calls without memory growth", () => {
    const handle = loadPriors(fx.priorsPath);
    const doc = JSON.parse(fs.readFileSync(fx.priorsPath, "utf-8"));
    const stride = handle.config.T * handle.config.J * 3;
    const batch = new Float32Array(4 * stride).fill(0.25);

    const before = process.memoryUsage().rss;
    let checksum = 0;
    for (let i = 0; i < 10_000; i++) {
      const h = validatePriorsDocument(doc, fx.priorsPath);
      checksum += h.transforms[i % h.nTransforms][0];
      const records = batchToRecords(handle, batch);
      const back = decodePacked(encodePacked(records));
      checksum += back[i % back.length].frames[0];
    }
    const growth = process.memoryUsage().rss - before;
    expect(checksum).not.toBeNaN();
    // ~100 KB of typed arrays churn per call; full retention would exceed
    // 1 GB, so a modest bound catches genuine leaks despite GC slack
    expect(growth).toBeLessThan(200 * 1024 * 1024);
  });

  it("keeps the subprocess path stable across repeated calls", () => {
    // spawning the CLI 10k times would take tens of minutes, so the
    // subprocess path gets a reduced-count stability check instead
    const handle = loadPriors(fx.priorsPath);
    const stride = handle.config.T * handle.config.J * 3;
    const records = decodePacked(fs.readFileSync(fx.corpusPath)).slice(0, 2);
    const batch = new Float32Array(2 * stride);
    records.forEach((rec, i) => batch.set(rec.frames, i * stride));

    let reference: Buffer | null = null;
    for (let i = 0; i < 5; i++) {
      const result = augment(handle, batch, 1.0, 13);
      const bytes = Buffer.from(result.augmented.buffer.slice(0));
      if (reference === null) {
        reference = bytes;
      } else {
        expect(bytes.equals(reference)).toBe(true);
      }
    }
  });
});
