/**
 * Bottleneck ResNet (v1) topology: 7x7/2 stem, 3x3/2 max pool, four stages
 * of bottleneck blocks, global average pooling. Stage depths [3,4,6,3],
 * [3,4,23,3] and [3,8,36,3] give ResNet-50/101/152; all end at 2048
 * channels.
 */

import * as tf from '@tensorflow/tfjs';

function convBn(
  x: tf.SymbolicTensor,
  filters: number,
  kernel: number,
  stride: number,
  name: string,
  relu = true,
): tf.SymbolicTensor {
  let out = tf.layers
    .conv2d({
      filters,
      kernelSize: kernel,
      strides: stride,
      padding: 'same',
      useBias: false,
      name: `${name}_conv`,
    })
    .apply(x) as tf.SymbolicTensor;
  out = tf.layers.batchNormalization({ epsilon: 1.001e-5, name: `${name}_bn` })
    .apply(out) as tf.SymbolicTensor;
  if (relu) {
    out = tf.layers.activation({ activation: 'relu', name: `${name}_relu` })
      .apply(out) as tf.SymbolicTensor;
  }
  return out;
}

function bottleneckBlock(
  x: tf.SymbolicTensor,
  filters: number,
  stride: number,
  name: string,
): tf.SymbolicTensor {
  const expanded = filters * 4;
  const inChannels = x.shape[x.shape.length - 1] as number;

  let shortcut = x;
  if (stride !== 1 || inChannels !== expanded) {
    shortcut = convBn(x, expanded, 1, stride, `${name}_proj`, false);
  }

  let out = convBn(x, filters, 1, stride, `${name}_a`);
  out = convBn(out, filters, 3, 1, `${name}_b`);
  out = convBn(out, expanded, 1, 1, `${name}_c`, false);
  out = tf.layers.add({ name: `${name}_add` }).apply([shortcut, out]) as tf.SymbolicTensor;
  return tf.layers.activation({ activation: 'relu', name: `${name}_out` })
    .apply(out) as tf.SymbolicTensor;
}

export function buildResNet(stageDepths: number[], inputSize: number): tf.LayersModel {
  const input = tf.input({ shape: [inputSize, inputSize, 3], name: 'image' });
  let x = convBn(input, 64, 7, 2, 'stem');
  x = tf.layers
    .maxPooling2d({ poolSize: 3, strides: 2, padding: 'same', name: 'stem_pool' })
    .apply(x) as tf.SymbolicTensor;

  const stageFilters = [64, 128, 256, 512];
  stageDepths.forEach((depth, stage) => {
    for (let block = 0; block < depth; block++) {
      const stride = stage > 0 && block === 0 ? 2 : 1;
      x = bottleneckBlock(x, stageFilters[stage], stride, `s${stage + 1}b${block + 1}`);
    }
  });

  const pooled = tf.layers
    .globalAveragePooling2d({ name: 'global_pool' })
    .apply(x) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: pooled, name: 'resnet' });
}
