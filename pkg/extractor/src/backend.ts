/** Backend selection: wasm when available (much faster in plain node), cpu fallback. */

import { createRequire } from 'node:module';
import { dirname, join } from 'node:path';

import * as tf from '@tensorflow/tfjs';
import { setWasmPaths } from '@tensorflow/tfjs-backend-wasm';

let initialized: Promise<string> | null = null;

export function initBackend(prefer?: string): Promise<string> {
  if (!initialized) {
    initialized = (async () => {
      const target = prefer ?? process.env.EXTRACTOR_BACKEND ?? 'wasm';
      if (target === 'wasm') {
        try {
          const require = createRequire(import.meta.url);
          const entry = require.resolve('@tensorflow/tfjs-backend-wasm');
          setWasmPaths(join(dirname(entry), '/'));
          if (await tf.setBackend('wasm')) {
            await tf.ready();
            return tf.getBackend();
          }
        } catch {
          // fall through to cpu
        }
      }
      await tf.setBackend(target === 'wasm' ? 'cpu' : target);
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return initialized;
}
