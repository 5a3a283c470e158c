/**
 * Extractor command line.
 *
 *   extract   --arch densenet121 --images DIR|--manifest CSV --output out.fset
 *             [--checkpoint DIR]
 *   finetune  --arch densenet121 --images DIR|--manifest CSV --output DIR
 *             [--epochs N] [--batch-size N] [--lr X] [--any-class-count]
 *   predict-fc --checkpoint DIR --images DIR|--manifest CSV --output out.csv
 *
 * Image inputs: a directory with one subfolder per class, or a path,label
 * manifest CSV.
 */

import { writeFileSync } from 'node:fs';

import { initBackend } from './backend.js';
import { parseArchitecture } from './architectures.js';
import { LabeledImages, loadImageDirectory, loadManifest } from './dataset.js';
import { extractToFset } from './extract.js';
import { preprocessImage } from './images.js';
import { fcBaselinePredict, predictionsToCsv } from './predict.js';
import { DEFAULT_FINE_TUNE, fineTune } from './training.js';

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    if (!argv[i].startsWith('--')) {
      throw new Error(`unexpected argument: ${argv[i]}`);
    }
    const key = argv[i].slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith('--')) {
      flags.set(key, argv[i + 1]);
      i++;
    } else {
      flags.set(key, 'true');
    }
  }
  return flags;
}

function required(flags: Map<string, string>, key: string): string {
  const value = flags.get(key);
  if (!value) {
    throw new Error(`missing required flag --${key}`);
  }
  return value;
}

function loadInputs(flags: Map<string, string>): LabeledImages {
  if (flags.has('manifest')) {
    return loadManifest(required(flags, 'manifest'));
  }
  return loadImageDirectory(required(flags, 'images'));
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  if (!command || command === '--help') {
    console.error('usage: cli.js <extract|finetune|predict-fc> [flags]');
    return command ? 0 : 2;
  }
  const flags = parseFlags(rest);
  const backend = await initBackend(flags.get('backend'));
  console.error(`backend: ${backend}`);

  if (command === 'extract') {
    const arch = parseArchitecture(required(flags, 'arch'));
    const inputs = loadInputs(flags);
    console.error(`preprocessing ${inputs.paths.length} images`);
    const images = inputs.paths.map(preprocessImage);
    const bytes = await extractToFset(
      arch,
      images,
      inputs.labels,
      inputs.classNames,
      required(flags, 'output'),
      { checkpoint: flags.get('checkpoint') },
    );
    console.error(`wrote ${bytes} bytes to ${flags.get('output')}`);
    return 0;
  }

  if (command === 'finetune') {
    const arch = parseArchitecture(required(flags, 'arch'));
    const inputs = loadInputs(flags);
    console.error(`preprocessing ${inputs.paths.length} images`);
    const images = inputs.paths.map(preprocessImage);
    const result = await fineTune(
      arch,
      images,
      inputs.labels,
      inputs.classNames,
      required(flags, 'output'),
      {
        epochs: flags.has('epochs') ? Number(flags.get('epochs')) : DEFAULT_FINE_TUNE.epochs,
        batchSize: flags.has('batch-size')
          ? Number(flags.get('batch-size'))
          : DEFAULT_FINE_TUNE.batchSize,
        initialLr: flags.has('lr') ? Number(flags.get('lr')) : DEFAULT_FINE_TUNE.initialLr,
        allowAnyClassCount: flags.get('any-class-count') === 'true',
      },
    );
    const last = result.curve[result.curve.length - 1];
    console.error(
      `done: ${result.curve.length} epochs, final loss ${last.loss.toFixed(4)}, ` +
        `checkpoint at ${result.checkpointDir}`,
    );
    return 0;
  }

  if (command === 'predict-fc') {
    const inputs = loadInputs(flags);
    const images = inputs.paths.map(preprocessImage);
    const predictions = await fcBaselinePredict(required(flags, 'checkpoint'), images);
    const csv = predictionsToCsv(predictions, inputs.paths, inputs.classNames);
    const output = flags.get('output');
    if (output) {
      writeFileSync(output, csv);
      console.error(`wrote ${predictions.length} predictions to ${output}`);
    } else {
      process.stdout.write(csv);
    }
    return 0;
  }

  console.error(`unknown command: ${command}`);
  return 2;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`error: ${err.message}`);
    process.exit(1);
  },
);
