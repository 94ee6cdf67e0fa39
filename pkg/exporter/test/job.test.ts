import { describe, expect, it } from 'vitest';
import { ZodError } from 'zod';

import { parseJob } from '../src/job';

const MINIMAL = { trainSize: 10, testSize: 5, outDir: '/tmp/out' };

describe('parseJob', () => {
  it('fills in the training recipe defaults', () => {
    const job = parseJob(MINIMAL);
    expect(job.epochs).toBe(10);
    expect(job.optimizer).toBe('adam');
    expect(job.learningRate).toBe(0.01);
    expect(job.loss).toBe('binaryCrossentropy');
    expect(job.dropout1).toBe(0.2);
    expect(job.dropout2).toBe(0.4);
    expect(job.backbone).toBe('tiny-conv');
    expect(job.corruptions).toEqual([]);
  });

  it('requires split sizes of at least one', () => {
    expect(() => parseJob({ ...MINIMAL, trainSize: 0 })).toThrow(ZodError);
    expect(() => parseJob({ ...MINIMAL, testSize: 0 })).toThrow(ZodError);
    expect(() => parseJob({ ...MINIMAL, trainSize: -3 })).toThrow(ZodError);
  });

  it('accepts severities 1 and 5 only', () => {
    const withSeverity = (severity: number) => ({
      ...MINIMAL,
      corruptions: [{ tag: 'gaussian_noise', severity, size: 20 }],
    });
    expect(parseJob(withSeverity(1)).corruptions[0].severity).toBe(1);
    expect(parseJob(withSeverity(5)).corruptions[0].severity).toBe(5);
    for (const severity of [0, 2, 3, 4, 6]) {
      expect(() => parseJob(withSeverity(severity))).toThrow(ZodError);
    }
  });

  it('rejects empty corruption selections', () => {
    expect(() => parseJob({
      ...MINIMAL,
      corruptions: [{ tag: 'defocus_blur', severity: 5, size: 0 }],
    })).toThrow(ZodError);
  });

  it('rejects unknown corruption tags', () => {
    expect(() => parseJob({
      ...MINIMAL,
      corruptions: [{ tag: 'pixelate', severity: 5, size: 20 }],
    })).toThrow(ZodError);
  });

  it('rejects non-positive learning rates and epochs', () => {
    expect(() => parseJob({ ...MINIMAL, learningRate: 0 })).toThrow(ZodError);
    expect(() => parseJob({ ...MINIMAL, epochs: 0 })).toThrow(ZodError);
  });

  it('rejects training recipes it cannot honour', () => {
    expect(() => parseJob({ ...MINIMAL, optimizer: 'sgd' })).toThrow(ZodError);
    expect(() => parseJob({ ...MINIMAL, loss: 'meanSquaredError' })).toThrow(ZodError);
  });
});
