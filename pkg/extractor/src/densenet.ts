/**
 * DenseNet topology: 7x7/2 stem with 64 channels, dense blocks of
 * BN-ReLU-1x1 / BN-ReLU-3x3 layers at growth rate 32, 0.5-compression
 * transitions, final BN-ReLU and global average pooling. Block layouts
 * [6,12,24,16], [6,12,32,32] and [6,12,48,32] give DenseNet-121/169/201
 * with pooled feature widths 1024, 1664 and 1920.
 */

import * as tf from '@tensorflow/tfjs';

const GROWTH_RATE = 32;

function bnReluConv(
  x: tf.SymbolicTensor,
  filters: number,
  kernel: number,
  name: string,
): tf.SymbolicTensor {
  let out = tf.layers.batchNormalization({ epsilon: 1.001e-5, name: `${name}_bn` })
    .apply(x) as tf.SymbolicTensor;
  out = tf.layers.activation({ activation: 'relu', name: `${name}_relu` })
    .apply(out) as tf.SymbolicTensor;
  return tf.layers
    .conv2d({
      filters,
      kernelSize: kernel,
      strides: 1,
      padding: 'same',
      useBias: false,
      name: `${name}_conv`,
    })
    .apply(out) as tf.SymbolicTensor;
}

function denseLayer(x: tf.SymbolicTensor, name: string): tf.SymbolicTensor {
  let out = bnReluConv(x, 4 * GROWTH_RATE, 1, `${name}_squeeze`);
  out = bnReluConv(out, GROWTH_RATE, 3, `${name}_grow`);
  return tf.layers.concatenate({ name: `${name}_cat` }).apply([x, out]) as tf.SymbolicTensor;
}

function transition(x: tf.SymbolicTensor, name: string): tf.SymbolicTensor {
  const channels = x.shape[x.shape.length - 1] as number;
  let out = bnReluConv(x, Math.floor(channels / 2), 1, name);
  return tf.layers
    .averagePooling2d({ poolSize: 2, strides: 2, name: `${name}_pool` })
    .apply(out) as tf.SymbolicTensor;
}

export function buildDenseNet(blockLayers: number[], inputSize: number): tf.LayersModel {
  const input = tf.input({ shape: [inputSize, inputSize, 3], name: 'image' });
  let x = tf.layers
    .conv2d({
      filters: 64,
      kernelSize: 7,
      strides: 2,
      padding: 'same',
      useBias: false,
      name: 'stem_conv',
    })
    .apply(input) as tf.SymbolicTensor;
  x = tf.layers.batchNormalization({ epsilon: 1.001e-5, name: 'stem_bn' })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.activation({ activation: 'relu', name: 'stem_relu' })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers
    .maxPooling2d({ poolSize: 3, strides: 2, padding: 'same', name: 'stem_pool' })
    .apply(x) as tf.SymbolicTensor;

  blockLayers.forEach((layers, block) => {
    for (let i = 0; i < layers; i++) {
      x = denseLayer(x, `b${block + 1}l${i + 1}`);
    }
    if (block < blockLayers.length - 1) {
      x = transition(x, `t${block + 1}`);
    }
  });

  x = tf.layers.batchNormalization({ epsilon: 1.001e-5, name: 'head_bn' })
    .apply(x) as tf.SymbolicTensor;
  x = tf.layers.activation({ activation: 'relu', name: 'head_relu' })
    .apply(x) as tf.SymbolicTensor;
  const pooled = tf.layers
    .globalAveragePooling2d({ name: 'global_pool' })
    .apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: pooled, name: 'densenet' });
}
