import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    testTimeout: 180_000,
    hookTimeout: 60_000,
    // tfjs keeps global backend state; keep each file in its own process
    pool: 'forks',
  },
});
