/**
 * Feature extraction: push preprocessed images through a headless backbone
 * and export the raw pooled activations as an FSET file.
 *
 * No normalization is applied here on purpose: the classification engine
 * owns the min-max + PCA pipeline, and exporting raw activations keeps a
 * single source of truth for it.
 */

import * as tf from '@tensorflow/tfjs';

import {
  ArchitectureId,
  buildFeatureExtractor,
  expectedDim,
  headlessFrom,
} from './architectures.js';
import { ConfigError } from './errors.js';
import { toInputBatch } from './images.js';
import { loadModel } from './model_io.js';
import { writeFset } from './fset.js';

export interface ExtractOptions {
  /** Checkpoint directory from fine-tuning; omitted = fresh random weights. */
  checkpoint?: string;
  batchSize?: number;
}

export async function extractorFor(
  arch: ArchitectureId,
  checkpoint?: string,
): Promise<tf.LayersModel> {
  if (!checkpoint) {
    return buildFeatureExtractor(arch);
  }
  const classifier = await loadModel(checkpoint);
  return headlessFrom(classifier);
}

/** Feature matrix for a batch of preprocessed 64x64 RGB images. */
export async function extractFeatures(
  arch: ArchitectureId,
  images: Uint8Array[],
  options: ExtractOptions = {},
): Promise<Float32Array[]> {
  const model = await extractorFor(arch, options.checkpoint);
  const dim = expectedDim(arch);
  const modelDim = model.outputs[0].shape[1];
  if (modelDim !== dim) {
    throw new ConfigError(
      `architecture ${arch} must emit ${dim}-dim features, checkpoint emits ${modelDim}`,
    );
  }
  const batchSize = options.batchSize ?? 32;
  const rows: Float32Array[] = [];
  for (let start = 0; start < images.length; start += batchSize) {
    const slice = images.slice(start, start + batchSize);
    const values = tf.tidy(() => {
      const xs = toInputBatch(slice);
      const feats = model.predict(xs) as tf.Tensor2D;
      return feats.dataSync() as Float32Array;
    });
    for (let i = 0; i < slice.length; i++) {
      rows.push(values.slice(i * dim, (i + 1) * dim));
    }
    await tf.nextFrame();
  }
  return rows;
}

/** Extract and write straight to an FSET file; returns the byte count. */
export async function extractToFset(
  arch: ArchitectureId,
  images: Uint8Array[],
  labels: number[],
  classNames: string[],
  outputPath: string,
  options: ExtractOptions = {},
): Promise<number> {
  const rows = await extractFeatures(arch, images, options);
  return writeFset(outputPath, rows, labels, classNames);
}
