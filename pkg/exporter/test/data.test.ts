import { describe, expect, it } from 'vitest';
import * as tf from '@tensorflow/tfjs';

import { makeImageBatch } from '../src/data';

const BASE = { numClasses: 4, count: 12, imageSize: 16, channels: 3 };

describe('makeImageBatch', () => {
  it('produces the requested shape with round-robin labels', () => {
    const batch = makeImageBatch({ ...BASE, templateSeed: 1, noiseSeed: 2 });
    expect(batch.images.shape).toEqual([12, 16, 16, 3]);
    expect(Array.from(batch.labels)).toEqual([0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3]);
    batch.images.dispose();
  });

  it('keeps pixel values inside [0, 1]', () => {
    const batch = makeImageBatch({
      ...BASE, templateSeed: 1, noiseSeed: 2,
      corruption: { tag: 'brightness', severity: 5 },
    });
    const values = batch.images.dataSync();
    let lo = Number.POSITIVE_INFINITY;
    let hi = Number.NEGATIVE_INFINITY;
    for (const v of values) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
    expect(lo).toBeGreaterThanOrEqual(0);
    expect(hi).toBeLessThanOrEqual(1);
    batch.images.dispose();
  });

  it('is deterministic for fixed seeds', () => {
    const a = makeImageBatch({ ...BASE, templateSeed: 5, noiseSeed: 9 });
    const b = makeImageBatch({ ...BASE, templateSeed: 5, noiseSeed: 9 });
    expect(Array.from(a.images.dataSync())).toEqual(Array.from(b.images.dataSync()));
    a.images.dispose();
    b.images.dispose();
  });

  it('changes samples when the noise seed changes', () => {
    const a = makeImageBatch({ ...BASE, templateSeed: 5, noiseSeed: 9 });
    const b = makeImageBatch({ ...BASE, templateSeed: 5, noiseSeed: 10 });
    expect(Array.from(a.images.dataSync())).not.toEqual(Array.from(b.images.dataSync()));
    a.images.dispose();
    b.images.dispose();
  });

  it('applies corruptions on top of the matching clean batch', () => {
    const clean = makeImageBatch({ ...BASE, templateSeed: 5, noiseSeed: 9 });
    const noisy = makeImageBatch({
      ...BASE, templateSeed: 5, noiseSeed: 9,
      corruption: { tag: 'gaussian_noise', severity: 1 },
    });
    const cleanValues = clean.images.dataSync();
    const noisyValues = noisy.images.dataSync();
    expect(Array.from(noisyValues)).not.toEqual(Array.from(cleanValues));
    // Mild noise perturbs pixels without moving them far.
    let maxDelta = 0;
    for (let i = 0; i < cleanValues.length; i++) {
      maxDelta = Math.max(maxDelta, Math.abs(noisyValues[i] - cleanValues[i]));
    }
    expect(maxDelta).toBeLessThan(0.5);
    clean.images.dispose();
    noisy.images.dispose();
  });

  it('brightens monotonically with severity', () => {
    const mean = (severity: number) => {
      const batch = makeImageBatch({
        ...BASE, templateSeed: 5, noiseSeed: 9,
        corruption: { tag: 'brightness', severity },
      });
      const value = tf.tidy(() => batch.images.mean().dataSync()[0]);
      batch.images.dispose();
      return value;
    };
    expect(mean(5)).toBeGreaterThan(mean(1));
  });

  it('blurs away high-frequency detail under defocus', () => {
    const spatialVariance = (corruption?: { tag: 'defocus_blur'; severity: number }) => {
      const batch = makeImageBatch({ ...BASE, templateSeed: 5, noiseSeed: 9, corruption });
      const value = tf.tidy(() => {
        const perImageMean = batch.images.mean([1, 2, 3], true);
        return batch.images.sub(perImageMean).square().mean().dataSync()[0];
      });
      batch.images.dispose();
      return value;
    };
    expect(spatialVariance({ tag: 'defocus_blur', severity: 5 })).toBeLessThan(spatialVariance());
  });

  it('rejects severities outside 1..5', () => {
    expect(() => makeImageBatch({
      ...BASE, templateSeed: 1, noiseSeed: 2,
      corruption: { tag: 'gaussian_noise', severity: 6 },
    })).toThrow(/severity/);
    expect(() => makeImageBatch({
      ...BASE, templateSeed: 1, noiseSeed: 2,
      corruption: { tag: 'gaussian_noise', severity: 0 },
    })).toThrow(/severity/);
  });

  it('rejects empty batches', () => {
    expect(() => makeImageBatch({ ...BASE, count: 0, templateSeed: 1, noiseSeed: 2 }))
      .toThrow(/at least one sample/);
  });
});
