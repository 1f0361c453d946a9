/**
 * The `.tldr` embedding file format, byte-compatible with the Python
 * toolkit that consumes these files.
 *
 * Little-endian layout: magic "TLDR" | version u16 = 1 | reserved u16 |
 * n u32 | k u32 | language (u16 length + UTF-8) | model tag (u16 length
 * + UTF-8) | n document IDs (u16 length + UTF-8 each) | n*k float32
 * row-major values.
 */

import { promises as fs } from "node:fs";

const MAGIC = "TLDR";
const VERSION = 1;

export class FormatError extends Error {}
export class BadMagicError extends FormatError {}
export class UnsupportedVersionError extends FormatError {}
export class TruncatedPayloadError extends FormatError {}
export class DuplicateIdError extends FormatError {}

export interface EmbeddingFile {
  language: string;
  modelTag: string;
  docIds: string[];
  /** Row-major n*k payload. */
  values: Float32Array;
  dim: number;
}

function packString(s: string): Buffer {
  const raw = Buffer.from(s, "utf-8");
  if (raw.length > 0xffff) {
    throw new RangeError(`string too long to encode (${raw.length} bytes)`);
  }
  const out = Buffer.alloc(2 + raw.length);
  out.writeUInt16LE(raw.length, 0);
  raw.copy(out, 2);
  return out;
}

export function encodeEmbeddings(file: EmbeddingFile): Buffer {
  const n = file.docIds.length;
  const k = file.dim;
  if (file.values.length !== n * k) {
    throw new RangeError(`${file.values.length} values for ${n}x${k} matrix`);
  }
  if (new Set(file.docIds).size !== n) {
    throw new DuplicateIdError("doc ids contain duplicates");
  }
  for (const v of file.values) {
    if (!Number.isFinite(v)) throw new RangeError("values contain NaN or Inf");
  }
  const head = Buffer.alloc(4 + 2 + 2 + 4 + 4);
  head.write(MAGIC, 0, "ascii");
  head.writeUInt16LE(VERSION, 4);
  head.writeUInt16LE(0, 6);
  head.writeUInt32LE(n, 8);
  head.writeUInt32LE(k, 12);
  const parts = [
    head,
    packString(file.language),
    packString(file.modelTag),
    ...file.docIds.map(packString),
  ];
  const payload = Buffer.alloc(n * k * 4);
  for (let i = 0; i < file.values.length; i++) {
    payload.writeFloatLE(file.values[i], i * 4);
  }
  parts.push(payload);
  return Buffer.concat(parts);
}

class Reader {
  pos = 0;
  constructor(private data: Buffer, private label: string) {}

  take(n: number, what: string): Buffer {
    if (this.pos + n > this.data.length) {
      throw new TruncatedPayloadError(
        `${this.label}: truncated while reading ${what} at offset ${this.pos}`,
      );
    }
    const chunk = this.data.subarray(this.pos, this.pos + n);
    this.pos += n;
    return chunk;
  }

  u16(what: string): number {
    return this.take(2, what).readUInt16LE(0);
  }

  u32(what: string): number {
    return this.take(4, what).readUInt32LE(0);
  }

  string(what: string): string {
    const n = this.u16(`${what} length`);
    return this.take(n, what).toString("utf-8");
  }

  expectEnd(): void {
    if (this.pos !== this.data.length) {
      throw new FormatError(
        `${this.label}: ${this.data.length - this.pos} trailing bytes after payload`,
      );
    }
  }
}

export function decodeEmbeddings(data: Buffer, label = "<buffer>"): EmbeddingFile {
  const r = new Reader(data, label);
  const magic = r.take(4, "magic").toString("ascii");
  if (magic !== MAGIC) {
    throw new BadMagicError(`${label}: bad magic ${JSON.stringify(magic)}`);
  }
  const version = r.u16("version");
  if (version !== VERSION) {
    throw new UnsupportedVersionError(`${label}: unsupported version ${version}`);
  }
  r.u16("reserved");
  const n = r.u32("row count");
  const k = r.u32("column count");
  const language = r.string("language tag");
  const modelTag = r.string("model tag");
  const docIds: string[] = [];
  for (let i = 0; i < n; i++) docIds.push(r.string(`doc id ${i}`));
  if (new Set(docIds).size !== n) {
    throw new DuplicateIdError(`${label}: duplicate document IDs`);
  }
  const payload = r.take(n * k * 4, "float32 payload");
  r.expectEnd();
  const values = new Float32Array(n * k);
  for (let i = 0; i < values.length; i++) {
    values[i] = payload.readFloatLE(i * 4);
  }
  return { language, modelTag, docIds, values, dim: k };
}

export async function writeEmbeddings(file: EmbeddingFile, path: string): Promise<void> {
  await fs.writeFile(path, encodeEmbeddings(file));
}

export async function readEmbeddings(path: string): Promise<EmbeddingFile> {
  return decodeEmbeddings(await fs.readFile(path), path);
}
