/**
 * Image decoding and preprocessing.
 *
 * Every input image becomes a 64x64 24-bit RGB array (8 bits per channel),
 * the fixed input shape of the feature extractors; any network-specific
 * value scaling happens later, at inference/training time. Grayscale
 * sources are replicated across the three channels. Supported containers:
 * PNG, JPEG, and binary PPM/PGM.
 */

import { readFileSync } from 'node:fs';

import * as tf from '@tensorflow/tfjs';
import jpeg from 'jpeg-js';
import { PNG } from 'pngjs';

import { ImageError } from './errors.js';
import { INPUT_SIZE } from './architectures.js';

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB triplets, 8 bits per channel. */
  data: Uint8Array;
}

function fromRgba(width: number, height: number, rgba: Uint8Array): RgbImage {
  const data = new Uint8Array(width * height * 3);
  for (let i = 0, j = 0; i < rgba.length; i += 4, j += 3) {
    data[j] = rgba[i];
    data[j + 1] = rgba[i + 1];
    data[j + 2] = rgba[i + 2];
  }
  return { width, height, data };
}

function decodePnm(buffer: Buffer, path: string): RgbImage {
  // binary PPM (P6) / PGM (P5): magic, whitespace-separated dims and
  // maxval, then raw samples
  const header: number[] = [];
  let offset = 2;
  while (header.length < 3 && offset < buffer.length) {
    while (offset < buffer.length && /\s/.test(String.fromCharCode(buffer[offset]))) offset++;
    if (buffer[offset] === 0x23) {
      while (offset < buffer.length && buffer[offset] !== 0x0a) offset++;
      continue;
    }
    let token = '';
    while (offset < buffer.length && !/\s/.test(String.fromCharCode(buffer[offset]))) {
      token += String.fromCharCode(buffer[offset]);
      offset++;
    }
    header.push(Number(token));
  }
  offset++; // single whitespace after maxval
  const [width, height, maxval] = header;
  if (!width || !height || !maxval || maxval > 255) {
    throw new ImageError('invalid PNM header', path);
  }
  const gray = buffer[1] === 0x35; // P5
  const samples = width * height * (gray ? 1 : 3);
  if (buffer.length - offset < samples) {
    throw new ImageError('truncated PNM payload', path);
  }
  const data = new Uint8Array(width * height * 3);
  for (let p = 0; p < width * height; p++) {
    if (gray) {
      const v = buffer[offset + p];
      data[3 * p] = data[3 * p + 1] = data[3 * p + 2] = v;
    } else {
      data[3 * p] = buffer[offset + 3 * p];
      data[3 * p + 1] = buffer[offset + 3 * p + 1];
      data[3 * p + 2] = buffer[offset + 3 * p + 2];
    }
  }
  return { width, height, data };
}

export function decodeImage(path: string): RgbImage {
  let buffer: Buffer;
  try {
    buffer = readFileSync(path);
  } catch (err) {
    throw new ImageError(`cannot read file (${(err as Error).message})`, path);
  }
  try {
    if (buffer.length >= 8 && buffer[0] === 0x89 && buffer[1] === 0x50) {
      const png = PNG.sync.read(buffer);
      return fromRgba(png.width, png.height, new Uint8Array(png.data));
    }
    if (buffer.length >= 2 && buffer[0] === 0xff && buffer[1] === 0xd8) {
      const decoded = jpeg.decode(buffer, { useTArray: true, formatAsRGBA: true });
      return fromRgba(decoded.width, decoded.height, decoded.data);
    }
    if (buffer.length >= 2 && buffer[0] === 0x50 && (buffer[1] === 0x35 || buffer[1] === 0x36)) {
      return decodePnm(buffer, path);
    }
  } catch (err) {
    if (err instanceof ImageError) throw err;
    throw new ImageError(`undecodable image (${(err as Error).message})`, path);
  }
  throw new ImageError('unrecognized image container', path);
}

/**
 * Decode and resize to the extractor input shape.
 *
 * Returns 64*64*3 bytes, row-major RGB. Bilinear resampling; an image that
 * is already 64x64 passes through unchanged.
 */
export function preprocessImage(path: string): Uint8Array {
  const image = decodeImage(path);
  if (image.width === INPUT_SIZE && image.height === INPUT_SIZE) {
    return image.data;
  }
  return tf.tidy(() => {
    const source = tf.tensor3d(image.data, [image.height, image.width, 3], 'float32');
    const resized = tf.image.resizeBilinear(source, [INPUT_SIZE, INPUT_SIZE]);
    const clipped = resized.round().clipByValue(0, 255);
    return new Uint8Array(clipped.dataSync());
  });
}

/** Stack preprocessed images into a float batch scaled to [0, 1]. */
export function toInputBatch(images: Uint8Array[]): tf.Tensor4D {
  const batch = new Float32Array(images.length * INPUT_SIZE * INPUT_SIZE * 3);
  images.forEach((image, index) => {
    const base = index * INPUT_SIZE * INPUT_SIZE * 3;
    for (let i = 0; i < image.length; i++) {
      batch[base + i] = image[i] / 255.0;
    }
  });
  return tf.tensor4d(batch, [images.length, INPUT_SIZE, INPUT_SIZE, 3]);
}
