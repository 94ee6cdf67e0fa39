import { describe, expect, it } from 'vitest';

import { decodeHead, encodeHead } from '../src/format';
import { HeadConfig, buildHead, headToFile } from '../src/head';
import { TrainingDivergedError, evaluateMicroF1, trainHead } from '../src/train';

const CFG: HeadConfig = {
  featureDim: 8,
  hiddenDim: 6,
  numClasses: 3,
  dropout1: 0.2,
  dropout2: 0.4,
  seed: 77,
};

/**
 * Separable toy features: class k concentrates mass on coordinates
 * 2k and 2k+1, plus a deterministic low-amplitude wobble.
 */
function toyFeatures(count: number): { features: Float32Array; labels: Uint16Array } {
  const features = new Float32Array(count * CFG.featureDim);
  const labels = new Uint16Array(count);
  for (let i = 0; i < count; i++) {
    const k = i % CFG.numClasses;
    labels[i] = k;
    for (let j = 0; j < CFG.featureDim; j++) {
      const wobble = 0.05 * Math.sin(1.7 * i + 0.9 * j);
      features[i * CFG.featureDim + j] = (j === 2 * k || j === 2 * k + 1 ? 2.0 : 0.2) + wobble;
    }
  }
  return { features, labels };
}

describe('buildHead', () => {
  it('stacks norm, two dropouts, a hidden relu layer, and a sigmoid output', () => {
    const model = buildHead(CFG);
    expect(model.layers.length).toBe(5);
    expect(model.layers[0].getClassName()).toBe('BatchNormalization');
    expect(model.layers[1].getClassName()).toBe('Dropout');
    expect(model.layers[2].getClassName()).toBe('Dense');
    expect(model.layers[3].getClassName()).toBe('Dropout');
    expect(model.layers[4].getClassName()).toBe('Dense');
    expect(model.outputShape).toEqual([null, CFG.numClasses]);
  });
});

describe('trainHead', () => {
  it('drives the loss down on separable features', async () => {
    const { features, labels } = toyFeatures(90);
    const model = buildHead(CFG);
    const { lossHistory } = await trainHead(model, features, labels, CFG.featureDim, CFG.numClasses, {
      epochs: 10,
      learningRate: 0.01,
      batchSize: 16,
    });
    expect(lossHistory.length).toBe(10);
    expect(lossHistory[lossHistory.length - 1]).toBeLessThan(lossHistory[0]);
    expect(evaluateMicroF1(model, features, labels, CFG.featureDim)).toBeGreaterThanOrEqual(0.9);
  });

  it('aborts with diagnostics when the loss diverges', async () => {
    const { features, labels } = toyFeatures(30);
    features[5] = Number.NaN;
    const model = buildHead(CFG);
    const run = trainHead(model, features, labels, CFG.featureDim, CFG.numClasses, {
      epochs: 10,
      learningRate: 0.01,
      batchSize: 16,
    });
    await expect(run).rejects.toThrow(TrainingDivergedError);
    await expect(run).rejects.toThrow(/diverged.*epoch 1/s);
  });
});

describe('headToFile', () => {
  it('exports trained weights that survive the byte round trip', async () => {
    const { features, labels } = toyFeatures(60);
    const model = buildHead(CFG);
    await trainHead(model, features, labels, CFG.featureDim, CFG.numClasses, {
      epochs: 3,
      learningRate: 0.01,
      batchSize: 16,
    });
    const head = await headToFile(model, CFG);
    expect(head.gamma.length).toBe(CFG.featureDim);
    expect(head.w1.length).toBe(CFG.featureDim * CFG.hiddenDim);
    expect(head.w2.length).toBe(CFG.hiddenDim * CFG.numClasses);
    expect(head.bnEpsilon).toBeGreaterThan(0);
    // Batch-norm moving statistics must reflect the training data, not the
    // all-zero / all-one initialization.
    const meanShift = head.mean.reduce((acc, v) => acc + Math.abs(v), 0) / head.mean.length;
    expect(meanShift).toBeGreaterThan(0.05);
    const back = decodeHead(encodeHead(head));
    expect(Array.from(back.w1)).toEqual(Array.from(head.w1));
    expect(Array.from(back.mean)).toEqual(Array.from(head.mean));
    expect(back.dropout1).toBe(0.2);
    expect(back.dropout2).toBe(0.4);
  });
});
