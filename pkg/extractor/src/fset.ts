/**
 * FSET v1 writer: the interchange format the classification engine reads.
 *
 * Layout (little-endian): magic "FSET", u32 version=1, u32 n_vectors,
 * u32 dim, u32 n_classes; class table of (u16 UTF-8 byte length + bytes);
 * n_vectors u16 labels; n_vectors x dim float32, row-major.
 */

import { writeFileSync } from 'node:fs';

import { DataError } from './errors.js';

export function encodeFset(
  vectors: Float32Array[],
  labels: number[],
  classNames: string[],
): Buffer {
  if (vectors.length === 0) {
    throw new DataError('cannot encode an empty feature set');
  }
  if (vectors.length !== labels.length) {
    throw new DataError(`${vectors.length} vectors but ${labels.length} labels`);
  }
  const dim = vectors[0].length;
  if (dim === 0 || vectors.some((v) => v.length !== dim)) {
    throw new DataError('all feature vectors must share one dimension >= 1');
  }
  if (classNames.length === 0 || classNames.length > 0xffff + 1) {
    throw new DataError(`invalid class count ${classNames.length}`);
  }
  for (const label of labels) {
    if (!Number.isInteger(label) || label < 0 || label >= classNames.length) {
      throw new DataError(`label ${label} out of range [0, ${classNames.length})`);
    }
  }
  for (const vector of vectors) {
    for (const value of vector) {
      if (!Number.isFinite(value)) {
        throw new DataError('feature vectors must be finite');
      }
    }
  }

  const nameBytes = classNames.map((name) => Buffer.from(name, 'utf-8'));
  const tableSize = nameBytes.reduce((sum, b) => sum + 2 + b.length, 0);
  const total = 20 + tableSize + 2 * labels.length + 4 * vectors.length * dim;
  const out = Buffer.alloc(total);

  out.write('FSET', 0, 'ascii');
  out.writeUInt32LE(1, 4);
  out.writeUInt32LE(vectors.length, 8);
  out.writeUInt32LE(dim, 12);
  out.writeUInt32LE(classNames.length, 16);
  let offset = 20;
  for (const raw of nameBytes) {
    out.writeUInt16LE(raw.length, offset);
    raw.copy(out, offset + 2);
    offset += 2 + raw.length;
  }
  for (const label of labels) {
    out.writeUInt16LE(label, offset);
    offset += 2;
  }
  for (const vector of vectors) {
    for (const value of vector) {
      out.writeFloatLE(value, offset);
      offset += 4;
    }
  }
  return out;
}

export function writeFset(
  path: string,
  vectors: Float32Array[],
  labels: number[],
  classNames: string[],
): number {
  const encoded = encodeFset(vectors, labels, classNames);
  writeFileSync(path, encoded);
  return encoded.length;
}
