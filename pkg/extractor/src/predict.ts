/**
 * FC-layer baseline: the fine-tuned network's own softmax head as a
 * classifier, the comparison point for the engine's k-NN route.
 */

import * as tf from '@tensorflow/tfjs';

import { ConfigError } from './errors.js';
import { toInputBatch } from './images.js';
import { loadModel } from './model_io.js';

export interface FcPrediction {
  probabilities: number[];
  predicted: number;
}

export async function fcBaselinePredict(
  checkpointDir: string,
  images: Uint8Array[],
  batchSize = 32,
): Promise<FcPrediction[]> {
  const model = await loadModel(checkpointDir);
  const head = model.layers[model.layers.length - 1];
  if (!head.name.startsWith('fc_head')) {
    throw new ConfigError(
      `checkpoint at ${checkpointDir} has no classification head (last layer: ${head.name})`,
    );
  }
  const numClasses = model.outputs[0].shape[1] as number;
  const out: FcPrediction[] = [];
  for (let start = 0; start < images.length; start += batchSize) {
    const slice = images.slice(start, start + batchSize);
    const values = tf.tidy(() => {
      const probs = model.predict(toInputBatch(slice)) as tf.Tensor2D;
      return probs.dataSync() as Float32Array;
    });
    for (let i = 0; i < slice.length; i++) {
      const probabilities = Array.from(values.slice(i * numClasses, (i + 1) * numClasses));
      let predicted = 0;
      for (let c = 1; c < numClasses; c++) {
        if (probabilities[c] > probabilities[predicted]) predicted = c;
      }
      out.push({ probabilities, predicted });
    }
    await tf.nextFrame();
  }
  return out;
}

export function predictionsToCsv(
  predictions: FcPrediction[],
  paths: string[],
  classNames: string[],
): string {
  const header = ['path', ...classNames.map((n) => `p_${n}`), 'predicted'];
  const lines = [header.join(',')];
  predictions.forEach((prediction, i) => {
    lines.push(
      [
        paths[i],
        ...prediction.probabilities.map((p) => String(p)),
        classNames[prediction.predicted],
      ].join(','),
    );
  });
  return lines.join('\n') + '\n';
}
