/**
 * Labeled image collections from a per-class directory tree or a CSV
 * manifest of `path,label` rows.
 */

import { readFileSync, readdirSync, statSync } from 'node:fs';
import { join, dirname, resolve, extname } from 'node:path';

import { DataError } from './errors.js';

export interface LabeledImages {
  paths: string[];
  labels: number[];
  classNames: string[];
}

const IMAGE_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg', '.ppm', '.pgm']);

/**
 * One subdirectory per class; class order is the sorted subdirectory name
 * order, image order is sorted within each class. Deterministic for a
 * given tree.
 */
export function loadImageDirectory(root: string): LabeledImages {
  const classNames = readdirSync(root)
    .filter((entry) => statSync(join(root, entry)).isDirectory())
    .sort();
  if (classNames.length === 0) {
    throw new DataError(`no class subdirectories under ${root}`);
  }
  const paths: string[] = [];
  const labels: number[] = [];
  classNames.forEach((name, classIndex) => {
    const files = readdirSync(join(root, name))
      .filter((f) => IMAGE_EXTENSIONS.has(extname(f).toLowerCase()))
      .sort();
    for (const file of files) {
      paths.push(join(root, name, file));
      labels.push(classIndex);
    }
  });
  if (paths.length === 0) {
    throw new DataError(`no images found under ${root}`);
  }
  return { paths, labels, classNames };
}

/** CSV manifest `path,label`, classes ordered by first appearance. */
export function loadManifest(manifestPath: string): LabeledImages {
  const text = readFileSync(manifestPath, 'utf-8');
  const lines = text.split('\n').map((l) => l.trim()).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new DataError(`empty manifest ${manifestPath}`);
  }
  let start = 0;
  if (lines[0].toLowerCase().replace(/\s/g, '') === 'path,label') {
    start = 1;
  }
  const base = dirname(resolve(manifestPath));
  const paths: string[] = [];
  const labels: number[] = [];
  const classNames: string[] = [];
  const classIndex = new Map<string, number>();
  for (let i = start; i < lines.length; i++) {
    const comma = lines[i].lastIndexOf(',');
    if (comma <= 0) {
      throw new DataError(`manifest line ${i + 1} is not 'path,label': ${lines[i]}`);
    }
    const path = lines[i].slice(0, comma).trim();
    const label = lines[i].slice(comma + 1).trim();
    if (!label) {
      throw new DataError(`manifest line ${i + 1} has an empty label`);
    }
    if (!classIndex.has(label)) {
      classIndex.set(label, classNames.length);
      classNames.push(label);
    }
    paths.push(resolve(base, path));
    labels.push(classIndex.get(label)!);
  }
  if (paths.length === 0) {
    throw new DataError(`no rows in manifest ${manifestPath}`);
  }
  return { paths, labels, classNames };
}
