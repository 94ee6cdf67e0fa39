/**
 * Head fine-tuning: Adam on per-class binary cross-entropy, matching the
 * training recipe the exported weights are expected to come from. Divergent
 * runs (NaN loss) abort immediately with the loss trace for diagnosis.
 */

import * as tf from '@tensorflow/tfjs';

export interface TrainOptions {
  readonly epochs: number;
  readonly learningRate: number;
  readonly batchSize: number;
}

export interface TrainResult {
  /** Mean training loss per epoch, in order. */
  readonly lossHistory: number[];
}

export class TrainingDivergedError extends Error {
  constructor(readonly epoch: number, readonly lossHistory: number[]) {
    super(
      `training diverged: loss became non-finite at epoch ${epoch + 1} ` +
      `(loss trace: [${lossHistory.map((l) => l.toPrecision(4)).join(', ')}]); ` +
      'lower the learning rate or check the features for bad values',
    );
    this.name = 'TrainingDivergedError';
  }
}

export async function trainHead(
  model: tf.Sequential,
  features: Float32Array,
  labels: Uint16Array,
  featureDim: number,
  numClasses: number,
  opts: TrainOptions,
): Promise<TrainResult> {
  const numSamples = labels.length;
  model.compile({
    optimizer: tf.train.adam(opts.learningRate),
    loss: 'binaryCrossentropy',
  });
  const x = tf.tensor2d(features, [numSamples, featureDim]);
  const y = tf.tidy(() =>
    tf.oneHot(tf.tensor1d(Array.from(labels), 'int32'), numClasses).toFloat(),
  );
  const lossHistory: number[] = [];
  let divergedAt = -1;
  try {
    await model.fit(x, y, {
      epochs: opts.epochs,
      batchSize: opts.batchSize,
      shuffle: true,
      verbose: 0,
      callbacks: {
        onEpochEnd: async (epoch, logs) => {
          const loss = logs?.loss ?? Number.NaN;
          lossHistory.push(loss);
          if (!Number.isFinite(loss)) {
            divergedAt = epoch;
            model.stopTraining = true;
          }
        },
      },
    });
  } finally {
    x.dispose();
    y.dispose();
  }
  if (divergedAt >= 0) {
    throw new TrainingDivergedError(divergedAt, lossHistory);
  }
  return { lossHistory };
}

/**
 * Micro-F1 of argmax predictions against true classes. With one final
 * prediction per sample this reduces to plain accuracy.
 */
export function evaluateMicroF1(
  model: tf.Sequential,
  features: Float32Array,
  labels: Uint16Array,
  featureDim: number,
): number {
  const numSamples = labels.length;
  const predictions = tf.tidy(() => {
    const x = tf.tensor2d(features, [numSamples, featureDim]);
    const scores = model.predict(x) as tf.Tensor2D;
    return scores.argMax(1).dataSync();
  });
  let correct = 0;
  for (let i = 0; i < numSamples; i++) {
    if (predictions[i] === labels[i]) {
      correct += 1;
    }
  }
  return correct / numSamples;
}
