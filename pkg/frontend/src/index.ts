export { augment, batchToRecords, runCli } from "./augment.js";
export type { AugmentOptions, AugmentResult } from "./augment.js";
export { decodePacked, encodePacked, PACKED_MAGIC } from "./packed.js";
export type { PackedRecord } from "./packed.js";
export { loadPriors, validatePriorsDocument } from "./priors.js";
export type { AugmentConfig, PriorHandle } from "./priors.js";
