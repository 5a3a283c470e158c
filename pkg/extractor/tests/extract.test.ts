/** Feature extraction through a real backbone (wasm inference). */

import { execFileSync } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { beforeAll, describe, expect, test } from 'vitest';

import { initBackend } from '../src/backend.js';
import { FEATURE_DIMS, INPUT_SIZE, buildClassifier } from '../src/architectures.js';
import { ConfigError } from '../src/errors.js';
import { extractFeatures, extractToFset } from '../src/extract.js';
import { saveModel } from '../src/model_io.js';

let dir: string;

function gradientImage(offset: number): Uint8Array {
  const img = new Uint8Array(INPUT_SIZE * INPUT_SIZE * 3);
  for (let i = 0; i < img.length; i++) {
    img[i] = (i + offset) % 256;
  }
  return img;
}

beforeAll(async () => {
  await initBackend();
  dir = mkdtempSync(join(tmpdir(), 'extractor-extract-'));
});

describe('extractFeatures', () => {
  test('densenet121 yields finite 1024-dim rows', async () => {
    const rows = await extractFeatures('densenet121', [gradientImage(0), gradientImage(64)]);
    expect(rows.length).toBe(2);
    for (const row of rows) {
      expect(row.length).toBe(FEATURE_DIMS.densenet121);
      expect(Array.from(row).every(Number.isFinite)).toBe(true);
    }
  }, 240_000);

  test('the same image maps to the same features', async () => {
    const image = gradientImage(17);
    const rows = await extractFeatures('densenet121', [image, image]);
    let worst = 0;
    for (let i = 0; i < rows[0].length; i++) {
      worst = Math.max(worst, Math.abs(rows[0][i] - rows[1][i]));
    }
    expect(worst).toBeLessThanOrEqual(1e-5);
  }, 240_000);

  test('checkpoint with the wrong feature width is rejected', async () => {
    const ckpt = join(dir, 'densenet-ckpt');
    const classifier = buildClassifier('densenet121', 6, 5);
    await saveModel(classifier, ckpt);
    classifier.dispose();
    await expect(
      extractFeatures('resnet50', [gradientImage(0)], { checkpoint: ckpt }),
    ).rejects.toThrow(ConfigError);
  }, 240_000);
});

describe('extractToFset', () => {
  test('exported file carries the right header and passes engine validation', async () => {
    const output = join(dir, 'features.fset');
    const bytes = await extractToFset(
      'densenet121',
      [gradientImage(0), gradientImage(32), gradientImage(64)],
      [0, 1, 0],
      ['liver', 'kidney'],
      output,
    );
    const raw = readFileSync(output);
    expect(raw.length).toBe(bytes);
    expect(raw.subarray(0, 4).toString('ascii')).toBe('FSET');
    expect(raw.readUInt32LE(8)).toBe(3);
    expect(raw.readUInt32LE(12)).toBe(FEATURE_DIMS.densenet121);

    const summary = execFileSync('featknn', ['inspect', output], { encoding: 'utf-8' });
    expect(summary).toContain('3 vectors');
    expect(summary).toContain(`dim ${FEATURE_DIMS.densenet121}`);
    expect(summary).toContain('liver, kidney');
  }, 240_000);
});
