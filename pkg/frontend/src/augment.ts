/**
 * Batch augmentation by delegation to the skelaug CLI.
 *
 * The batch travels as a packed corpus whose record ids are the batch
 * positions "0".."B-1", so per-sample RNG streams are keyed exactly as the
 * CLI keys them and the returned frames are bit-identical to what
 * `skelaug augment` writes for the same data and seed.
 */

import { spawnSync } from "node:child_process";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";

import { decodePacked, encodePacked, PackedRecord } from "./packed.js";
import { PriorHandle } from "./priors.js";

export interface AugmentOptions {
  /** CLI entry point; override as e.g. ["python3", "-m", "skelaug.cli"]. */
  cli?: string[];
  /** Directory for scratch files (defaults to the OS temp dir). */
  tmpDir?: string;
}

export interface AugmentResult {
  /** Newly allocated B' * T * J * 3 floats, ascending by batch index. */
  augmented: Float32Array;
  /** Batch indices that received an augmentation, ascending. */
  selectedIndices: number[];
  batchSize: number;
}

const DEFAULT_CLI = process.env.SKELAUG_CLI
  ? process.env.SKELAUG_CLI.split(" ")
  : ["skelaug"];

export function runCli(args: string[], cli: string[] = DEFAULT_CLI): string {
  const [cmd, ...prefix] = cli;
  const proc = spawnSync(cmd, [...prefix, ...args], { encoding: "utf-8" });
  if (proc.error) {
    throw new Error(`skelaug: failed to launch CLI "${cli.join(" ")}": ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw new Error(
      `skelaug: CLI exited with status ${proc.status}: ${proc.stderr.trim() || proc.stdout.trim()}`,
    );
  }
  return proc.stdout;
}

export function batchToRecords(handle: PriorHandle, batch: Float32Array): PackedRecord[] {
  const { T, J } = handle.config;
  const stride = T * J * 3;
  if (stride <= 0 || batch.length === 0 || batch.length % stride !== 0) {
    throw new Error(
      `skelaug: batch of ${batch.length} floats is not a multiple of T*J*3 = ${stride}`,
    );
  }
  const B = batch.length / stride;
  const records: PackedRecord[] = [];
  for (let i = 0; i < B; i++) {
    records.push({
      id: String(i),
      label: null,
      T,
      J,
      // zero-copy view into the caller's batch
      frames: batch.subarray(i * stride, (i + 1) * stride),
    });
  }
  return records;
}

export function augment(
  handle: PriorHandle,
  batch: Float32Array,
  mAug: number,
  seed: number,
  options: AugmentOptions = {},
): AugmentResult {
  if (mAug < 0 || mAug > 1) {
    throw new Error(`skelaug: m_aug must be in [0, 1], got ${mAug}`);
  }
  const records = batchToRecords(handle, batch);
  const stride = handle.config.T * handle.config.J * 3;

  const scratch = fs.mkdtempSync(path.join(options.tmpDir ?? os.tmpdir(), "skelaug-node-"));
  const inPath = path.join(scratch, "batch.pkd");
  const outPath = path.join(scratch, "augmented.pkd");
  try {
    fs.writeFileSync(inPath, encodePacked(records));
    runCli(
      [
        "augment",
        "--corpus", inPath,
        "--priors", handle.path,
        "--out", outPath,
        "--m-aug", String(mAug),
        "--seed", String(seed),
        "--format", "packed",
      ],
      options.cli ?? DEFAULT_CLI,
    );
    const out = decodePacked(fs.readFileSync(outPath));

    const selected: { index: number; frames: Float32Array }[] = [];
    for (const rec of out) {
      if (!rec.id.endsWith("#aug")) continue;
      const index = Number(rec.id.slice(0, -4));
      if (!Number.isInteger(index) || index < 0 || index >= records.length) {
        throw new Error(`skelaug: CLI returned unexpected record id "${rec.id}"`);
      }
      selected.push({ index, frames: rec.frames });
    }
    selected.sort((a, b) => a.index - b.index);

    const augmented = new Float32Array(selected.length * stride);
    selected.forEach((s, i) => augmented.set(s.frames, i * stride));
    return {
      augmented,
      selectedIndices: selected.map((s) => s.index),
      batchSize: records.length,
    };
  } finally {
    fs.rmSync(scratch, { recursive: true, force: true });
  }
}
