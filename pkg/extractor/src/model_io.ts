/**
 * Checkpoint persistence for plain-node tfjs (no native file:// handler):
 * a checkpoint directory holds model.json (topology + weight specs) and
 * weights.bin (concatenated float payload).
 */

import { mkdirSync, readFileSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { ConfigError } from './errors.js';

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const { weightData, ...meta } = artifacts;
      writeFileSync(join(dir, 'model.json'), JSON.stringify(meta));
      const payload = weightData as ArrayBuffer;
      writeFileSync(join(dir, 'weights.bin'), Buffer.from(payload));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON',
        },
      };
    }),
  );
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  let meta: tf.io.ModelArtifacts;
  let weights: Buffer;
  try {
    meta = JSON.parse(readFileSync(join(dir, 'model.json'), 'utf-8'));
    weights = readFileSync(join(dir, 'weights.bin'));
  } catch (err) {
    throw new ConfigError(`cannot read checkpoint at ${dir}: ${(err as Error).message}`);
  }
  const weightData = new ArrayBuffer(weights.byteLength);
  new Uint8Array(weightData).set(weights);
  const artifacts: tf.io.ModelArtifacts = { ...meta, weightData };
  return tf.loadLayersModel(tf.io.fromMemory(artifacts));
}
