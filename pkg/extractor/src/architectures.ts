/**
 * Backbone builders for the six supported architectures.
 *
 * Each builder produces a headless network ending in global average
 * pooling, so the feature dimension is the final channel count of the
 * topology and is fixed by construction:
 *
 *   resnet50 / resnet101 / resnet152 -> 2048
 *   densenet121 -> 1024, densenet169 -> 1664, densenet201 -> 1920
 *
 * ImageNet-pretrained weights are not bundled; pass a checkpoint to the
 * callers in extract.ts/training.ts to start from anything other than the
 * default random initialization.
 */

import * as tf from '@tensorflow/tfjs';

import { ConfigError } from './errors.js';
import { buildDenseNet } from './densenet.js';
import { buildResNet } from './resnet.js';

export const ARCHITECTURES = [
  'resnet50',
  'resnet101',
  'resnet152',
  'densenet121',
  'densenet169',
  'densenet201',
] as const;

export type ArchitectureId = (typeof ARCHITECTURES)[number];

/** Feature dimension produced by each backbone's pooled output. */
export const FEATURE_DIMS: Record<ArchitectureId, number> = {
  resnet50: 2048,
  resnet101: 2048,
  resnet152: 2048,
  densenet121: 1024,
  densenet169: 1664,
  densenet201: 1920,
};

export const INPUT_SIZE = 64;

export function parseArchitecture(name: string): ArchitectureId {
  const key = name.trim().toLowerCase() as ArchitectureId;
  if (!ARCHITECTURES.includes(key)) {
    throw new ConfigError(
      `unknown architecture '${name}'; expected one of: ${ARCHITECTURES.join(', ')}`,
    );
  }
  return key;
}

/** Headless backbone: image batch in, pooled feature vectors out. */
export function buildFeatureExtractor(arch: ArchitectureId): tf.LayersModel {
  switch (arch) {
    case 'resnet50':
      return buildResNet([3, 4, 6, 3], INPUT_SIZE);
    case 'resnet101':
      return buildResNet([3, 4, 23, 3], INPUT_SIZE);
    case 'resnet152':
      return buildResNet([3, 8, 36, 3], INPUT_SIZE);
    case 'densenet121':
      return buildDenseNet([6, 12, 24, 16], INPUT_SIZE);
    case 'densenet169':
      return buildDenseNet([6, 12, 32, 32], INPUT_SIZE);
    case 'densenet201':
      return buildDenseNet([6, 12, 48, 32], INPUT_SIZE);
  }
}

/** Backbone plus a fresh softmax classification head (seedable init). */
export function buildClassifier(
  arch: ArchitectureId,
  numClasses: number,
  fcSeed?: number,
): tf.LayersModel {
  const backbone = buildFeatureExtractor(arch);
  const logits = tf.layers
    .dense({
      units: numClasses,
      activation: 'softmax',
      name: 'fc_head',
      kernelInitializer: tf.initializers.glorotUniform({ seed: fcSeed }),
    })
    .apply(backbone.outputs[0]) as tf.SymbolicTensor;
  return tf.model({ inputs: backbone.inputs, outputs: logits, name: `${arch}_classifier` });
}

/**
 * Strip the classification head off a fine-tuned classifier, exposing the
 * pooled features again.
 */
export function headlessFrom(classifier: tf.LayersModel): tf.LayersModel {
  const pool = classifier.layers
    .slice()
    .reverse()
    .find((layer) => layer.name.startsWith('global_pool'));
  if (!pool) {
    throw new ConfigError('checkpoint has no global_pool layer to extract features from');
  }
  return tf.model({
    inputs: classifier.inputs,
    outputs: pool.output as tf.SymbolicTensor,
  });
}

export function expectedDim(arch: ArchitectureId): number {
  return FEATURE_DIMS[arch];
}
