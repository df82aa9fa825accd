/**
 * Reader/writer for the packed corpus interchange format.
 *
 * Layout (little-endian): magic "SKL1", u32 record count, then per record a
 * u32 id length + UTF-8 id, i32 label (-1 = none), u32 T, u32 J, followed by
 * T*J*3 IEEE-754 32-bit floats. Round trips are bit-exact.
 */

import os from "node:os";

export const PACKED_MAGIC = "SKL1";

export interface PackedRecord {
  id: string;
  label: number | null;
  T: number;
  J: number;
  /** Row-major T*J*3 joint coordinates. */
  frames: Float32Array;
}

const LITTLE_ENDIAN_HOST = os.endianness() === "LE";

function swap32InPlace(buf: Buffer): Buffer {
  for (let i = 0; i < buf.length; i += 4) {
    const a = buf[i];
    const b = buf[i + 1];
    buf[i] = buf[i + 3];
    buf[i + 1] = buf[i + 2];
    buf[i + 2] = b;
    buf[i + 3] = a;
  }
  return buf;
}

export function encodePacked(records: PackedRecord[]): Buffer {
  const chunks: Buffer[] = [];
  const head = Buffer.alloc(8);
  head.write(PACKED_MAGIC, 0, "ascii");
  head.writeUInt32LE(records.length, 4);
  chunks.push(head);
  for (const rec of records) {
    const expected = rec.T * rec.J * 3;
    if (rec.frames.length !== expected) {
      throw new Error(
        `skelaug: record ${rec.id} has ${rec.frames.length} floats, expected ${expected}`,
      );
    }
    const id = Buffer.from(rec.id, "utf-8");
    const header = Buffer.alloc(4 + id.length + 12);
    header.writeUInt32LE(id.length, 0);
    id.copy(header, 4);
    header.writeInt32LE(rec.label === null ? -1 : rec.label, 4 + id.length);
    header.writeUInt32LE(rec.T, 8 + id.length);
    header.writeUInt32LE(rec.J, 12 + id.length);
    chunks.push(header);
    const raw = Buffer.from(rec.frames.buffer, rec.frames.byteOffset, rec.frames.byteLength);
    chunks.push(LITTLE_ENDIAN_HOST ? raw : swap32InPlace(Buffer.from(raw)));
  }
  return Buffer.concat(chunks);
}

export function decodePacked(buf: Buffer): PackedRecord[] {
  if (buf.length < 8 || buf.toString("ascii", 0, 4) !== PACKED_MAGIC) {
    throw new Error(`skelaug: bad packed magic, expected "${PACKED_MAGIC}"`);
  }
  const count = buf.readUInt32LE(4);
  let off = 8;
  const take = (n: number): number => {
    if (off + n > buf.length) {
      throw new Error(`skelaug: short packed read at offset ${off} (wanted ${n} bytes)`);
    }
    const at = off;
    off += n;
    return at;
  };
  const records: PackedRecord[] = [];
  for (let r = 0; r < count; r++) {
    const idLen = buf.readUInt32LE(take(4));
    const id = buf.toString("utf-8", take(idLen), off);
    const label = buf.readInt32LE(take(4));
    const T = buf.readUInt32LE(take(4));
    const J = buf.readUInt32LE(take(4));
    const nBytes = T * J * 3 * 4;
    const at = take(nBytes);
    let raw: Buffer = Buffer.from(buf.subarray(at, at + nBytes));
    if (!LITTLE_ENDIAN_HOST) raw = swap32InPlace(raw);
    const frames = new Float32Array(raw.buffer, raw.byteOffset, T * J * 3);
    records.push({ id, label: label === -1 ? null : label, T, J, frames });
  }
  return records;
}
