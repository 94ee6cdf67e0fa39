/**
 * Export jobs: a validated config describing which backbone to use, how
 * many samples to extract per split, which corruptions to apply, and how
 * to train the head — plus the two operations that consume it.
 *
 * extractFeatures writes one UQDS file per selected split; the corrupted
 * splits reuse the clean test split's noise stream, so they are the test
 * images under the named corruption. trainAndExportHead fits the head on
 * the clean train split and writes the weights as a UQHM file.
 */

import * as fs from 'fs/promises';
import * as path from 'path';
import { z } from 'zod';

import { CORRUPTION_TAGS, makeImageBatch, Corruption } from './data';
import { DatasetFile, encodeDataset, encodeHead } from './format';
import { Backbone, extractPooledFeatures, resolveBackbone } from './features';
import { buildHead, headToFile } from './head';
import { evaluateMicroF1, trainHead } from './train';

const corruptionSelectionSchema = z.object({
  tag: z.enum(CORRUPTION_TAGS),
  severity: z.union([z.literal(1), z.literal(5)]),
  size: z.number().int().min(1),
});

export type CorruptionSelection = z.infer<typeof corruptionSelectionSchema>;

export const exportJobSchema = z.object({
  backbone: z.string().min(1).default('tiny-conv'),
  numClasses: z.number().int().min(2).default(10),
  trainSize: z.number().int().min(1),
  testSize: z.number().int().min(1),
  corruptions: z.array(corruptionSelectionSchema).default([]),
  imageSize: z.number().int().min(8).default(32),
  channels: z.number().int().min(1).max(4).default(3),
  hiddenDim: z.number().int().min(1).default(300),
  dropout1: z.number().min(0).max(0.999).default(0.2),
  dropout2: z.number().min(0).max(0.999).default(0.4),
  epochs: z.number().int().min(1).default(10),
  optimizer: z.literal('adam').default('adam'),
  learningRate: z.number().positive().default(0.01),
  loss: z.literal('binaryCrossentropy').default('binaryCrossentropy'),
  batchSize: z.number().int().min(1).default(32),
  seed: z.number().int().min(0).default(1234),
  outDir: z.string().min(1),
});

export type ExportJob = z.infer<typeof exportJobSchema>;

export function parseJob(raw: unknown): ExportJob {
  return exportJobSchema.parse(raw);
}

export interface ExtractedSplit {
  readonly file: string;
  readonly dataset: DatasetFile;
}

export interface ExtractionResult {
  readonly train: ExtractedSplit;
  readonly test: ExtractedSplit;
  readonly corrupted: ExtractedSplit[];
}

async function writeBytes(file: string, bytes: Buffer): Promise<void> {
  try {
    await fs.writeFile(file, bytes);
  } catch (e) {
    throw new Error(`failed to write ${file}: ${e}`);
  }
}

async function extractSplit(
  backbone: Backbone,
  job: ExportJob,
  count: number,
  noiseSeed: number,
  fileName: string,
  corruption?: Corruption,
): Promise<ExtractedSplit> {
  const batch = makeImageBatch({
    numClasses: job.numClasses,
    count,
    imageSize: job.imageSize,
    channels: job.channels,
    templateSeed: job.seed,
    noiseSeed,
    corruption,
  });
  try {
    const { features, featureDim } = await extractPooledFeatures(backbone, batch.images);
    const dataset: DatasetFile = {
      features,
      labels: batch.labels,
      featureDim,
      numClasses: job.numClasses,
      corruptionTag: corruption?.tag,
      severity: corruption?.severity,
    };
    const file = path.join(job.outDir, fileName);
    await writeBytes(file, encodeDataset(dataset));
    return { file, dataset };
  } finally {
    batch.images.dispose();
  }
}

export async function extractFeatures(job: ExportJob): Promise<ExtractionResult> {
  const backbone = await resolveBackbone(job.backbone, {
    imageSize: job.imageSize,
    channels: job.channels,
    seed: job.seed,
  });
  await fs.mkdir(job.outDir, { recursive: true });
  const trainNoiseSeed = job.seed + 1;
  const testNoiseSeed = job.seed + 2;
  const train = await extractSplit(backbone, job, job.trainSize, trainNoiseSeed, 'train.uqds');
  const test = await extractSplit(backbone, job, job.testSize, testNoiseSeed, 'test.uqds');
  const corrupted: ExtractedSplit[] = [];
  for (const selection of job.corruptions) {
    const corruption: Corruption = { tag: selection.tag, severity: selection.severity };
    corrupted.push(await extractSplit(
      backbone,
      job,
      selection.size,
      testNoiseSeed,
      `test_${selection.tag}_s${selection.severity}.uqds`,
      corruption,
    ));
  }
  return { train, test, corrupted };
}

export interface TrainExportResult {
  readonly file: string;
  readonly lossHistory: number[];
  /** Argmax micro-F1 of the float head on the clean test split. */
  readonly floatMicroF1: number;
}

export async function trainAndExportHead(
  job: ExportJob,
  extraction: ExtractionResult,
): Promise<TrainExportResult> {
  const featureDim = extraction.train.dataset.featureDim;
  const cfg = {
    featureDim,
    hiddenDim: job.hiddenDim,
    numClasses: job.numClasses,
    dropout1: job.dropout1,
    dropout2: job.dropout2,
    seed: job.seed,
  };
  const model = buildHead(cfg);
  const { lossHistory } = await trainHead(
    model,
    extraction.train.dataset.features,
    extraction.train.dataset.labels,
    featureDim,
    job.numClasses,
    { epochs: job.epochs, learningRate: job.learningRate, batchSize: job.batchSize },
  );
  const floatMicroF1 = evaluateMicroF1(
    model,
    extraction.test.dataset.features,
    extraction.test.dataset.labels,
    featureDim,
  );
  const file = path.join(job.outDir, 'head.uqhm');
  await writeBytes(file, encodeHead(await headToFile(model, cfg)));
  return { file, lossHistory, floatMicroF1 };
}

export interface ExportRunResult {
  readonly extraction: ExtractionResult;
  readonly trained: TrainExportResult;
  readonly manifestFile: string;
}

export async function runExportJob(job: ExportJob): Promise<ExportRunResult> {
  const extraction = await extractFeatures(job);
  const trained = await trainAndExportHead(job, extraction);
  const manifest = {
    kind: 'export_manifest',
    backbone: job.backbone,
    feature_dim: extraction.train.dataset.featureDim,
    num_classes: job.numClasses,
    float_micro_f1: trained.floatMicroF1,
    loss_history: trained.lossHistory,
    files: {
      head: path.basename(trained.file),
      train: path.basename(extraction.train.file),
      test: path.basename(extraction.test.file),
      corrupted: extraction.corrupted.map((split) => path.basename(split.file)),
    },
  };
  const manifestFile = path.join(job.outDir, 'manifest.json');
  await writeBytes(manifestFile, Buffer.from(JSON.stringify(manifest, null, 2) + '\n', 'utf-8'));
  return { extraction, trained, manifestFile };
}
