import fs from "node:fs";
import os from "node:os";
import path from "node:path";

import { runCli } from "../src/augment.js";

export interface Fixtures {
  dir: string;
  corpusPath: string;
  priorsPath: string;
}

/** Synthesize a corpus and learn default priors (10 poses, 20 transforms). */
export function makeFixtures(): Fixtures {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "skelaug-fixtures-"));
  const corpusPath = path.join(dir, "corpus.pkd");
  const priorsPath = path.join(dir, "priors.json");
  runCli(["synth", "--out", corpusPath, "--n", "40", "--classes", "4",
          "--noise", "0.05", "--seed", "21"]);
  runCli(["learn", "--corpus", corpusPath, "--out", priorsPath, "--seed", "21"]);
  return { dir, corpusPath, priorsPath };
}

export function removeFixtures(fx: Fixtures): void {
  fs.rmSync(fx.dir, { recursive: true, force: true });
}
