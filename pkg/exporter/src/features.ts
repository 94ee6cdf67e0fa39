/**
 * Backbone resolution and pooled feature extraction.
 *
 * Feature maps are reduced with a global average pool over the spatial axes
 * before export, so downstream consumers only ever see flat vectors.
 *
 * Two backbone sources:
 *   - "tiny-conv": a small seeded convolutional stack built in-process. No
 *     download needed, deterministic for a fixed seed.
 *   - "local:<dir>": a pretrained tf.js model (layers or graph artifacts)
 *     read from disk, for runs where real weights are available.
 */

import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';
import * as path from 'path';

export interface Backbone {
  readonly name: string;
  /** Raw backbone output: 2-D embeddings or a 4-D feature map. */
  apply(images: tf.Tensor4D): tf.Tensor;
}

export interface BackboneOptions {
  readonly imageSize: number;
  readonly channels: number;
  readonly seed: number;
}

function tinyConvBackbone(opts: BackboneOptions): Backbone {
  const model = tf.sequential();
  model.add(tf.layers.conv2d({
    inputShape: [opts.imageSize, opts.imageSize, opts.channels],
    filters: 16,
    kernelSize: 3,
    padding: 'same',
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed: opts.seed }),
  }));
  model.add(tf.layers.maxPooling2d({ poolSize: 2, strides: 2 }));
  model.add(tf.layers.conv2d({
    filters: 32,
    kernelSize: 3,
    padding: 'same',
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed: opts.seed + 1 }),
  }));
  model.add(tf.layers.maxPooling2d({ poolSize: 2, strides: 2 }));
  model.add(tf.layers.conv2d({
    filters: 64,
    kernelSize: 3,
    padding: 'same',
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed: opts.seed + 2 }),
  }));
  return {
    name: 'tiny-conv',
    apply: (images) => model.predict(images) as tf.Tensor,
  };
}

interface WeightsManifestGroup {
  readonly paths: string[];
  readonly weights: tf.io.WeightsManifestEntry[];
}

function readModelArtifacts(dir: string): tf.io.ModelArtifacts {
  const jsonPath = path.join(dir, 'model.json');
  let raw: string;
  try {
    raw = fs.readFileSync(jsonPath, 'utf-8');
  } catch (e) {
    throw new Error(
      `cannot read backbone model at ${jsonPath} (expected tf.js model.json + weight shards): ${e}`,
    );
  }
  const modelJson = JSON.parse(raw);
  const groups: WeightsManifestGroup[] = modelJson.weightsManifest ?? [];
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const shards: Buffer[] = [];
  for (const group of groups) {
    weightSpecs.push(...group.weights);
    for (const shard of group.paths) {
      const shardPath = path.join(dir, shard);
      try {
        shards.push(fs.readFileSync(shardPath));
      } catch (e) {
        throw new Error(`cannot read backbone weight shard ${shardPath}: ${e}`);
      }
    }
  }
  const weightData = Buffer.concat(shards);
  return {
    modelTopology: modelJson.modelTopology,
    format: modelJson.format,
    weightSpecs,
    weightData: weightData.buffer.slice(
      weightData.byteOffset, weightData.byteOffset + weightData.byteLength,
    ),
  };
}

async function localBackbone(dir: string): Promise<Backbone> {
  const artifacts = readModelArtifacts(dir);
  const handler = tf.io.fromMemory(artifacts);
  const model = artifacts.format === 'graph-model'
    ? await tf.loadGraphModel(handler)
    : await tf.loadLayersModel(handler);
  return {
    name: `local:${dir}`,
    apply: (images) => model.predict(images) as tf.Tensor,
  };
}

export async function resolveBackbone(name: string, opts: BackboneOptions): Promise<Backbone> {
  if (name === 'tiny-conv') {
    return tinyConvBackbone(opts);
  }
  if (name.startsWith('local:')) {
    return localBackbone(name.slice('local:'.length));
  }
  throw new Error(`unknown backbone ${JSON.stringify(name)}; use "tiny-conv" or "local:<dir>"`);
}

export interface PooledFeatures {
  /** count x featureDim, row-major. */
  readonly features: Float32Array;
  readonly featureDim: number;
}

/** Global-average-pool 4-D feature maps down to flat per-image vectors. */
export async function extractPooledFeatures(
  backbone: Backbone,
  images: tf.Tensor4D,
  batchSize = 128,
): Promise<PooledFeatures> {
  const count = images.shape[0];
  const chunks: Float32Array[] = [];
  let featureDim = -1;
  for (let start = 0; start < count; start += batchSize) {
    const size = Math.min(batchSize, count - start);
    const pooled = tf.tidy(() => {
      const batch = tf.slice(images, [start, 0, 0, 0], [size, -1, -1, -1]) as tf.Tensor4D;
      const out = backbone.apply(batch);
      if (out.rank === 4) {
        return tf.mean(out, [1, 2]) as tf.Tensor2D;
      }
      if (out.rank === 2) {
        return out as tf.Tensor2D;
      }
      throw new Error(`backbone output must be rank 2 or 4, got rank ${out.rank}`);
    });
    if (featureDim < 0) {
      featureDim = pooled.shape[1];
    }
    chunks.push(new Float32Array(await pooled.data()));
    pooled.dispose();
  }
  const features = new Float32Array(count * featureDim);
  let offset = 0;
  for (const chunk of chunks) {
    features.set(chunk, offset);
    offset += chunk.length;
  }
  return { features, featureDim };
}
