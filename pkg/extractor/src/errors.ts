/** Error types shared across the extractor. */

export class ImageError extends Error {
  constructor(message: string, public readonly path: string) {
    super(`${message}: ${path}`);
    this.name = 'ImageError';
  }
}

export class ConfigError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ConfigError';
  }
}

export class DataError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'DataError';
  }
}
