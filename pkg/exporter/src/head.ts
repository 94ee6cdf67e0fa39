/**
 * The classification head that gets fine-tuned on extracted features:
 * batch norm over the feature vector, dropout 0.2, a ReLU hidden layer,
 * dropout 0.4, and a per-class sigmoid output layer. Weight extraction
 * keeps the batch-norm moving statistics so inference-time behaviour
 * survives the export.
 */

import * as tf from '@tensorflow/tfjs';

import { HeadFile } from './format';

export interface HeadConfig {
  readonly featureDim: number;
  readonly hiddenDim: number;
  readonly numClasses: number;
  readonly dropout1: number;
  readonly dropout2: number;
  readonly seed: number;
}

export function buildHead(cfg: HeadConfig): tf.Sequential {
  const model = tf.sequential();
  // Momentum well below the 0.99 default: over a short fine-tuning run the
  // moving statistics must actually reach the feature distribution, or the
  // exported inference-time normalization is stale.
  model.add(tf.layers.batchNormalization({ inputShape: [cfg.featureDim], momentum: 0.9 }));
  model.add(tf.layers.dropout({ rate: cfg.dropout1, seed: cfg.seed }));
  model.add(tf.layers.dense({
    units: cfg.hiddenDim,
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 1 }),
  }));
  model.add(tf.layers.dropout({ rate: cfg.dropout2, seed: cfg.seed + 2 }));
  model.add(tf.layers.dense({
    units: cfg.numClasses,
    activation: 'sigmoid',
    kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 3 }),
  }));
  return model;
}

/** Pull trained weights (incl. batch-norm statistics) into an exportable head. */
export async function headToFile(model: tf.Sequential, cfg: HeadConfig): Promise<HeadFile> {
  const bn = model.layers[0];
  const dense1 = model.layers[2];
  const dense2 = model.layers[4];
  const [gamma, beta, mean, variance] = bn.getWeights();
  const [w1, b1] = dense1.getWeights();
  const [w2, b2] = dense2.getWeights();
  const epsilon = bn.getConfig().epsilon as number;
  return {
    featureDim: cfg.featureDim,
    hiddenDim: cfg.hiddenDim,
    numClasses: cfg.numClasses,
    dropout1: cfg.dropout1,
    dropout2: cfg.dropout2,
    bnEpsilon: epsilon,
    gamma: new Float32Array(await gamma.data()),
    beta: new Float32Array(await beta.data()),
    mean: new Float32Array(await mean.data()),
    variance: new Float32Array(await variance.data()),
    w1: new Float32Array(await w1.data()),
    b1: new Float32Array(await b1.data()),
    w2: new Float32Array(await w2.data()),
    b2: new Float32Array(await b2.data()),
  };
}
