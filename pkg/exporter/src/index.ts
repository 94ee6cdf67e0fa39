export {
  FORMAT_VERSION,
  MAGIC_DATASET,
  MAGIC_HEAD,
  FormatError,
  ValidationError,
  DatasetFile,
  HeadFile,
  canonicalJson,
  encodeDataset,
  decodeDataset,
  encodeHead,
  decodeHead,
} from './format';
export { CORRUPTION_TAGS, CorruptionTag, Corruption, ImageBatchOptions, ImageBatch, makeImageBatch } from './data';
export { Backbone, BackboneOptions, PooledFeatures, resolveBackbone, extractPooledFeatures } from './features';
export { HeadConfig, buildHead, headToFile } from './head';
export { TrainOptions, TrainResult, TrainingDivergedError, trainHead, evaluateMicroF1 } from './train';
export {
  CorruptionSelection,
  ExportJob,
  ExtractedSplit,
  ExtractionResult,
  TrainExportResult,
  ExportRunResult,
  exportJobSchema,
  parseJob,
  extractFeatures,
  trainAndExportHead,
  runExportJob,
} from './job';
