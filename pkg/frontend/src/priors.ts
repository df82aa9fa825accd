/**
 * In-process loading and validation of prior-set JSON files.
 *
 * A handle keeps the validated poses/transforms in typed arrays plus the
 * original file path, which the augmentation path hands to the CLI. Handles
 * are immutable and safe to share across concurrent calls.
 */

import fs from "node:fs";

export interface AugmentConfig {
  T: number;
  J: number;
  alpha: number;
  lambda_T: number;
  n_bkg: number;
  n_tr: number;
  m_aug: number;
  r_lo: number;
  r_hi: number;
  resize_mode: string;
  seed: number;
  windows: [number, number][];
}

export interface PriorHandle {
  readonly path: string;
  readonly config: AugmentConfig;
  /** nPoses * J * 3 row-major boundary pose coordinates. */
  readonly poses: Float32Array;
  /** One length-T frame-index vector per linear transform. */
  readonly transforms: Int32Array[];
  readonly nPoses: number;
  readonly nTransforms: number;
}

const SUPPORTED_VERSION = 1;

function fail(msg: string): never {
  throw new Error(`skelaug: ${msg}`);
}

function requireNumber(obj: Record<string, unknown>, key: string): number {
  const v = obj[key];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    fail(`config field "${key}" is missing or not a finite number`);
  }
  return v;
}

export function validatePriorsDocument(doc: unknown, path = "<memory>"): PriorHandle {
  if (typeof doc !== "object" || doc === null) fail(`${path}: priors document is not an object`);
  const d = doc as Record<string, unknown>;
  for (const key of ["version", "config", "poses", "transforms"]) {
    if (!(key in d)) fail(`${path}: priors document is missing "${key}"`);
  }
  if (d.version !== SUPPORTED_VERSION) {
    fail(`${path}: unsupported priors version ${JSON.stringify(d.version)}`);
  }

  const rawCfg = d.config as Record<string, unknown>;
  const config: AugmentConfig = {
    T: requireNumber(rawCfg, "T"),
    J: requireNumber(rawCfg, "J"),
    alpha: requireNumber(rawCfg, "alpha"),
    lambda_T: requireNumber(rawCfg, "lambda_T"),
    n_bkg: requireNumber(rawCfg, "n_bkg"),
    n_tr: requireNumber(rawCfg, "n_tr"),
    m_aug: requireNumber(rawCfg, "m_aug"),
    r_lo: requireNumber(rawCfg, "r_lo"),
    r_hi: requireNumber(rawCfg, "r_hi"),
    resize_mode: String(rawCfg.resize_mode ?? "linear"),
    seed: requireNumber(rawCfg, "seed"),
    windows: (rawCfg.windows as [number, number][]) ?? [],
  };
  const { T, J } = config;

  const rawPoses = d.poses;
  if (!Array.isArray(rawPoses) || rawPoses.length === 0) {
    fail(`${path}: priors need at least one boundary pose`);
  }
  const poses = new Float32Array(rawPoses.length * J * 3);
  rawPoses.forEach((pose, p) => {
    if (!Array.isArray(pose) || pose.length !== J) {
      fail(`${path}: pose ${p} does not have J=${J} joints`);
    }
    pose.forEach((joint: unknown, j: number) => {
      if (!Array.isArray(joint) || joint.length !== 3) {
        fail(`${path}: pose ${p} joint ${j} is not an [x, y, z] triple`);
      }
      for (let c = 0; c < 3; c++) {
        const v = joint[c];
        if (typeof v !== "number" || !Number.isFinite(v)) {
          fail(`${path}: pose ${p} joint ${j} has a non-finite coordinate`);
        }
        poses[(p * J + j) * 3 + c] = v;
      }
    });
  });

  const rawTransforms = d.transforms;
  if (!Array.isArray(rawTransforms) || rawTransforms.length === 0) {
    fail(`${path}: priors need at least one transform`);
  }
  const transforms = rawTransforms.map((indices, t) => {
    if (!Array.isArray(indices) || indices.length !== T) {
      fail(`${path}: transform ${t} does not have length T=${T}`);
    }
    const out = new Int32Array(T);
    indices.forEach((v: unknown, i: number) => {
      if (typeof v !== "number" || !Number.isInteger(v) || v < 0 || v >= T) {
        fail(`${path}: transform ${t} index ${i} is outside [0, ${T})`);
      }
      out[i] = v;
    });
    return out;
  });

  return {
    path,
    config,
    poses,
    transforms,
    nPoses: rawPoses.length,
    nTransforms: transforms.length,
  };
}

export function loadPriors(path: string): PriorHandle {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf-8");
  } catch (err) {
    fail(`cannot read priors file ${path}: ${(err as Error).message}`);
  }
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    fail(`${path}: malformed priors JSON (${(err as Error).message})`);
  }
  return validatePriorsDocument(doc, path);
}
