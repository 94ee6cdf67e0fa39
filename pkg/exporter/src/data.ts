/**
 * Deterministic image batches for feature extraction.
 *
 * Each class gets a fixed random template drawn from the template seed;
 * samples mix their class template with per-sample noise drawn from the
 * noise seed. Splits that share a template seed share class identities,
 * so train/test splits differ only in their noise stream, and a corrupted
 * split with the same noise seed as the test split is the test images
 * with a corruption applied on top.
 */

import * as tf from '@tensorflow/tfjs';

export const CORRUPTION_TAGS = ['gaussian_noise', 'defocus_blur', 'brightness'] as const;
export type CorruptionTag = (typeof CORRUPTION_TAGS)[number];

export interface Corruption {
  readonly tag: CorruptionTag;
  readonly severity: number; // 1 (mild) .. 5 (severe)
}

export interface ImageBatchOptions {
  readonly numClasses: number;
  readonly count: number;
  readonly imageSize?: number;
  readonly channels?: number;
  /** Seeds the per-class templates; share it across related splits. */
  readonly templateSeed: number;
  /** Seeds the per-sample noise; vary it between splits. */
  readonly noiseSeed: number;
  readonly corruption?: Corruption;
}

export interface ImageBatch {
  /** count x size x size x channels, values in [0, 1]. */
  readonly images: tf.Tensor4D;
  /** count class indices, round-robin so every class is populated. */
  readonly labels: Uint16Array;
}

function applyCorruption(images: tf.Tensor4D, corruption: Corruption, seed: number): tf.Tensor4D {
  const { tag, severity } = corruption;
  if (!Number.isInteger(severity) || severity < 1 || severity > 5) {
    throw new Error(`corruption severity must be an integer in 1..5, got ${severity}`);
  }
  switch (tag) {
    case 'gaussian_noise': {
      const sigma = 0.05 * severity;
      const noise = tf.randomNormal(images.shape, 0, sigma, 'float32', seed);
      return images.add(noise);
    }
    case 'defocus_blur': {
      const kernel = 2 * severity + 1;
      return tf.avgPool(images, kernel, 1, 'same');
    }
    case 'brightness': {
      return images.add(0.09 * severity);
    }
  }
}

export function makeImageBatch(opts: ImageBatchOptions): ImageBatch {
  const size = opts.imageSize ?? 32;
  const channels = opts.channels ?? 3;
  if (opts.count < 1) {
    throw new Error('image batch needs at least one sample');
  }
  if (opts.numClasses < 1) {
    throw new Error('image batch needs at least one class');
  }
  const labels = new Uint16Array(opts.count);
  for (let i = 0; i < opts.count; i++) {
    labels[i] = i % opts.numClasses;
  }
  const images = tf.tidy(() => {
    // Low-frequency templates (coarse grid, upsampled): class identity must
    // live in regional intensity structure, which survives average pooling,
    // not in per-pixel noise, which does not.
    const coarse = Math.max(2, Math.floor(size / 8));
    const templates = tf.image.resizeBilinear(
      tf.randomUniform(
        [opts.numClasses, coarse, coarse, channels], 0, 1, 'float32', opts.templateSeed,
      ) as tf.Tensor4D,
      [size, size],
    );
    const picked = tf.gather(templates, tf.tensor1d(Array.from(labels), 'int32'));
    const noise = tf.randomUniform(
      [opts.count, size, size, channels], 0, 1, 'float32', opts.noiseSeed,
    );
    let x = picked.mul(0.75).add(noise.mul(0.25)) as tf.Tensor4D;
    if (opts.corruption !== undefined) {
      x = applyCorruption(x, opts.corruption, opts.noiseSeed + 104729);
    }
    return tf.clipByValue(x, 0, 1) as tf.Tensor4D;
  });
  return { images, labels };
}
