/**
 * Fine-tuning: a fresh softmax head on a backbone, stochastic gradient
 * descent with cross-entropy loss, and a validation-plateau learning-rate
 * schedule. Produces a checkpoint directory, a per-epoch learning-curve
 * CSV, and a run manifest recording the seeds that make the run what it
 * was.
 */

import { writeFileSync } from 'node:fs';
import { join } from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { ArchitectureId, buildClassifier } from './architectures.js';
import { DataError } from './errors.js';
import { toInputBatch } from './images.js';
import { saveModel } from './model_io.js';

export interface FineTuneConfig {
  batchSize: number;
  epochs: number;
  initialLr: number;
  lrFactor: number;
  lrPatience: number;
  /** Fraction of each class held out for the plateau signal. */
  validationFraction: number;
  shuffleSeed: number;
  fcSeed: number;
  /** The task is six-way by default; set to lift the class-count check. */
  allowAnyClassCount: boolean;
}

export const DEFAULT_FINE_TUNE: FineTuneConfig = {
  batchSize: 8,
  epochs: 50,
  initialLr: 0.01,
  lrFactor: 0.2,
  lrPatience: 3,
  validationFraction: 0.1,
  shuffleSeed: 1,
  fcSeed: 1,
  allowAnyClassCount: false,
};

export interface EpochRow {
  epoch: number;
  loss: number;
  accuracy: number;
  valLoss: number;
  valAccuracy: number;
  learningRate: number;
}

/**
 * Validation-plateau schedule: when the monitored loss fails to improve on
 * its best value for `patience` consecutive epochs, the rate is multiplied
 * by `factor` and the stagnation count restarts. Two plateau events at the
 * defaults take 0.01 to 0.01 * 0.2^2 = 0.0004.
 */
export class PlateauSchedule {
  private best = Number.POSITIVE_INFINITY;
  private stagnant = 0;
  constructor(
    private rate: number,
    private readonly factor: number,
    private readonly patience: number,
  ) {}

  get learningRate(): number {
    return this.rate;
  }

  /** Feed one epoch's monitored loss; returns the rate for the next epoch. */
  observe(loss: number): number {
    if (loss < this.best) {
      this.best = loss;
      this.stagnant = 0;
    } else {
      this.stagnant += 1;
      if (this.stagnant >= this.patience) {
        this.rate *= this.factor;
        this.stagnant = 0;
      }
    }
    return this.rate;
  }
}

/** Deterministic shuffle (mulberry32 + Fisher-Yates) for batch order. */
export function shuffledIndices(count: number, seed: number): number[] {
  let state = seed >>> 0;
  const next = () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const indices = Array.from({ length: count }, (_, i) => i);
  for (let i = count - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [indices[i], indices[j]] = [indices[j], indices[i]];
  }
  return indices;
}

/** Class-stratified holdout: about `fraction` of each class, at least one
 * per class when the class has two or more members. */
export function stratifiedHoldout(
  labels: number[],
  numClasses: number,
  fraction: number,
  seed: number,
): { trainIdx: number[]; valIdx: number[] } {
  const perClass: number[][] = Array.from({ length: numClasses }, () => []);
  labels.forEach((label, i) => perClass[label].push(i));
  const trainIdx: number[] = [];
  const valIdx: number[] = [];
  perClass.forEach((members, c) => {
    const order = shuffledIndices(members.length, seed + c).map((i) => members[i]);
    const take = members.length >= 2 ? Math.max(1, Math.floor(fraction * members.length)) : 0;
    valIdx.push(...order.slice(0, take));
    trainIdx.push(...order.slice(take));
  });
  trainIdx.sort((a, b) => a - b);
  valIdx.sort((a, b) => a - b);
  return { trainIdx, valIdx };
}

function crossEntropy(labels: tf.Tensor2D, probs: tf.Tensor2D): tf.Scalar {
  return tf.tidy(() => {
    const clipped = probs.clipByValue(1e-7, 1 - 1e-7);
    return labels.mul(clipped.log()).sum(1).neg().mean() as tf.Scalar;
  });
}

function evaluateSplit(
  model: tf.LayersModel,
  xs: tf.Tensor4D,
  ys: tf.Tensor2D,
): { loss: number; accuracy: number } {
  return tf.tidy(() => {
    const probs = model.predict(xs) as tf.Tensor2D;
    const loss = crossEntropy(ys, probs).dataSync()[0];
    const hits = probs.argMax(1).equal(ys.argMax(1)).sum().dataSync()[0];
    return { loss, accuracy: hits / xs.shape[0] };
  });
}

export interface TrainResult {
  model: tf.LayersModel;
  curve: EpochRow[];
}

/** SGD + cross-entropy training loop with the plateau schedule. */
export async function trainClassifier(
  model: tf.LayersModel,
  images: Uint8Array[],
  labels: number[],
  numClasses: number,
  config: FineTuneConfig,
): Promise<TrainResult> {
  const { trainIdx, valIdx } = stratifiedHoldout(
    labels,
    numClasses,
    config.validationFraction,
    config.shuffleSeed,
  );
  if (trainIdx.length === 0) {
    throw new DataError('no training samples left after the validation holdout');
  }

  const gather = (idx: number[]) => {
    const xs = toInputBatch(idx.map((i) => images[i]));
    const ys = tf.oneHot(
      tf.tensor1d(idx.map((i) => labels[i]), 'int32'),
      numClasses,
    ).toFloat() as tf.Tensor2D;
    return { xs, ys };
  };
  const train = gather(trainIdx);
  const val = valIdx.length > 0 ? gather(valIdx) : train;

  const schedule = new PlateauSchedule(config.initialLr, config.lrFactor, config.lrPatience);
  const curve: EpochRow[] = [];

  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    const learningRate = schedule.learningRate;
    const optimizer = tf.train.sgd(learningRate);
    const order = shuffledIndices(trainIdx.length, config.shuffleSeed + epoch);
    for (let start = 0; start < order.length; start += config.batchSize) {
      const slice = order.slice(start, start + config.batchSize);
      const batch = tf.tidy(() => {
        const sel = tf.tensor1d(slice, 'int32');
        return {
          xs: train.xs.gather(sel) as tf.Tensor4D,
          ys: train.ys.gather(sel) as tf.Tensor2D,
        };
      });
      optimizer.minimize(
        () => crossEntropy(batch.ys, model.apply(batch.xs, { training: true }) as tf.Tensor2D),
        false,
      );
      batch.xs.dispose();
      batch.ys.dispose();
      await tf.nextFrame();
    }
    optimizer.dispose();

    const trainStats = evaluateSplit(model, train.xs, train.ys);
    const valStats = valIdx.length > 0 ? evaluateSplit(model, val.xs, val.ys) : trainStats;
    curve.push({
      epoch,
      loss: trainStats.loss,
      accuracy: trainStats.accuracy,
      valLoss: valStats.loss,
      valAccuracy: valStats.accuracy,
      learningRate,
    });
    schedule.observe(valStats.loss);
  }

  train.xs.dispose();
  train.ys.dispose();
  if (valIdx.length > 0) {
    val.xs.dispose();
    val.ys.dispose();
  }
  return { model, curve };
}

export function curveToCsv(curve: EpochRow[]): string {
  const lines = ['epoch,loss,accuracy,val_loss,val_accuracy,learning_rate'];
  for (const row of curve) {
    lines.push(
      `${row.epoch},${row.loss},${row.accuracy},${row.valLoss},${row.valAccuracy},${row.learningRate}`,
    );
  }
  return lines.join('\n') + '\n';
}

export interface FineTuneResult {
  checkpointDir: string;
  curvePath: string;
  manifestPath: string;
  curve: EpochRow[];
}

/**
 * Fine-tune a backbone for the labeled image set and persist everything:
 * checkpoint, learning-curve CSV (one row per epoch), run manifest with
 * the seeds and schedule parameters.
 */
export async function fineTune(
  arch: ArchitectureId,
  images: Uint8Array[],
  labels: number[],
  classNames: string[],
  outputDir: string,
  config: Partial<FineTuneConfig> = {},
): Promise<FineTuneResult> {
  const cfg: FineTuneConfig = { ...DEFAULT_FINE_TUNE, ...config };
  if (images.length !== labels.length) {
    throw new DataError(`${images.length} images but ${labels.length} labels`);
  }
  if (classNames.length !== 6 && !cfg.allowAnyClassCount) {
    throw new DataError(
      `expected 6 classes, got ${classNames.length} (set allowAnyClassCount to override)`,
    );
  }

  const model = buildClassifier(arch, classNames.length, cfg.fcSeed);
  const { curve } = await trainClassifier(model, images, labels, classNames.length, cfg);

  await saveModel(model, outputDir);
  const curvePath = join(outputDir, 'learning_curve.csv');
  writeFileSync(curvePath, curveToCsv(curve));
  const manifestPath = join(outputDir, 'run_manifest.json');
  writeFileSync(
    manifestPath,
    JSON.stringify(
      {
        architecture: arch,
        class_names: classNames,
        n_images: images.length,
        batch_size: cfg.batchSize,
        epochs: cfg.epochs,
        initial_lr: cfg.initialLr,
        lr_factor: cfg.lrFactor,
        lr_patience: cfg.lrPatience,
        validation_fraction: cfg.validationFraction,
        shuffle_seed: cfg.shuffleSeed,
        fc_seed: cfg.fcSeed,
      },
      null,
      2,
    ),
  );
  return { checkpointDir: outputDir, curvePath, manifestPath, curve };
}
