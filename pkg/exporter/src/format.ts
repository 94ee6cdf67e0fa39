/**
 * Binary writers and readers for the UQDS (dataset) and UQHM (float head)
 * file formats consumed by the uqfilter toolchain.
 *
 * Container layout, shared by both formats:
 *
 *     magic        4 bytes ASCII ("UQDS" / "UQHM")
 *     version      u16 little-endian (currently 1)
 *     header_len   u32 little-endian
 *     header       UTF-8 JSON, canonical (sorted keys, no whitespace)
 *     payload      raw little-endian arrays, order fixed per format
 *
 * UQDS payload: num_samples x feature_dim float32 feature rows, then
 * num_samples u16 class indices.
 *
 * UQHM payload: bn gamma/beta/mean/var (feature_dim float32 each), then
 * w1 (feature_dim x hidden_dim), b1, w2 (hidden_dim x num_classes), b2,
 * all float32 row-major.
 */

export const FORMAT_VERSION = 1;
export const MAGIC_DATASET = 'UQDS';
export const MAGIC_HEAD = 'UQHM';

const PREFIX_SIZE = 10; // 4-byte magic + u16 version + u32 header_len

export class FormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'FormatError';
  }
}

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ValidationError';
  }
}

export interface DatasetFile {
  /** num_samples x feature_dim, row-major. */
  readonly features: Float32Array;
  /** num_samples class indices. */
  readonly labels: Uint16Array;
  readonly featureDim: number;
  readonly numClasses: number;
  readonly corruptionTag?: string;
  readonly severity?: number;
}

export interface HeadFile {
  readonly featureDim: number;
  readonly hiddenDim: number;
  readonly numClasses: number;
  readonly dropout1: number;
  readonly dropout2: number;
  readonly bnEpsilon: number;
  readonly gamma: Float32Array;
  readonly beta: Float32Array;
  readonly mean: Float32Array;
  readonly variance: Float32Array;
  /** feature_dim x hidden_dim, row-major. */
  readonly w1: Float32Array;
  readonly b1: Float32Array;
  /** hidden_dim x num_classes, row-major. */
  readonly w2: Float32Array;
  readonly b2: Float32Array;
}

// Recursively sort object keys so JSON.stringify emits the same canonical
// header bytes as the reference implementation (sorted keys, no whitespace).
function sortKeysDeep(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeysDeep);
  }
  if (value !== null && typeof value === 'object') {
    const source = value as Record<string, unknown>;
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(source).sort()) {
      out[key] = sortKeysDeep(source[key]);
    }
    return out;
  }
  return value;
}

export function canonicalJson(header: Record<string, unknown>): string {
  return JSON.stringify(sortKeysDeep(header));
}

function encodeContainer(magic: string, header: Record<string, unknown>, payload: Buffer): Buffer {
  const headerBuf = Buffer.from(canonicalJson(header), 'utf-8');
  const prefix = Buffer.allocUnsafe(PREFIX_SIZE);
  prefix.write(magic, 0, 4, 'ascii');
  prefix.writeUInt16LE(FORMAT_VERSION, 4);
  prefix.writeUInt32LE(headerBuf.length, 6);
  return Buffer.concat([prefix, headerBuf, payload]);
}

function decodeContainer(data: Buffer, magic: string): { header: Record<string, unknown>; payload: Buffer } {
  if (data.length < PREFIX_SIZE) {
    throw new FormatError(`file shorter than the ${PREFIX_SIZE}-byte prefix`);
  }
  const found = data.toString('ascii', 0, 4);
  if (found !== magic) {
    throw new FormatError(`expected magic ${magic}, found ${JSON.stringify(found)}`);
  }
  const version = data.readUInt16LE(4);
  if (version !== FORMAT_VERSION) {
    throw new FormatError(`unsupported format version ${version}`);
  }
  const headerLen = data.readUInt32LE(6);
  const headerEnd = PREFIX_SIZE + headerLen;
  if (data.length < headerEnd) {
    throw new FormatError('header extends past end of file');
  }
  let header: Record<string, unknown>;
  try {
    header = JSON.parse(data.toString('utf-8', PREFIX_SIZE, headerEnd));
  } catch (e) {
    throw new FormatError(`header is not valid JSON: ${e}`);
  }
  return { header, payload: data.subarray(headerEnd) };
}

function requireInt(header: Record<string, unknown>, key: string): number {
  const value = header[key];
  if (typeof value !== 'number' || !Number.isInteger(value)) {
    throw new FormatError(`header field ${key} must be an integer`);
  }
  return value;
}

function requireNumber(header: Record<string, unknown>, key: string): number {
  const value = header[key];
  if (typeof value !== 'number') {
    throw new FormatError(`header field ${key} must be a number`);
  }
  return value;
}

function f32ToLE(values: Float32Array): Buffer {
  const buf = Buffer.allocUnsafe(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], i * 4);
  }
  return buf;
}

function u16ToLE(values: Uint16Array): Buffer {
  const buf = Buffer.allocUnsafe(values.length * 2);
  for (let i = 0; i < values.length; i++) {
    buf.writeUInt16LE(values[i], i * 2);
  }
  return buf;
}

class PayloadReader {
  private offset = 0;

  constructor(private readonly payload: Buffer) {}

  takeF32(count: number): Float32Array {
    const end = this.offset + count * 4;
    if (end > this.payload.length) {
      throw new FormatError(`payload needs ${end} bytes, only ${this.payload.length} present`);
    }
    const out = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      out[i] = this.payload.readFloatLE(this.offset + i * 4);
    }
    this.offset = end;
    return out;
  }

  takeU16(count: number): Uint16Array {
    const end = this.offset + count * 2;
    if (end > this.payload.length) {
      throw new FormatError(`payload needs ${end} bytes, only ${this.payload.length} present`);
    }
    const out = new Uint16Array(count);
    for (let i = 0; i < count; i++) {
      out[i] = this.payload.readUInt16LE(this.offset + i * 2);
    }
    this.offset = end;
    return out;
  }

  finish(): void {
    if (this.offset !== this.payload.length) {
      throw new FormatError(`payload has ${this.payload.length - this.offset} trailing bytes`);
    }
  }
}

function validateDataset(ds: DatasetFile): void {
  if (ds.featureDim < 1 || !Number.isInteger(ds.featureDim)) {
    throw new ValidationError('feature_dim must be a positive integer');
  }
  if (ds.numClasses < 1 || !Number.isInteger(ds.numClasses)) {
    throw new ValidationError('num_classes must be a positive integer');
  }
  if (ds.labels.length < 1) {
    throw new ValidationError('dataset must contain at least one sample');
  }
  if (ds.features.length !== ds.labels.length * ds.featureDim) {
    throw new ValidationError(
      `features length ${ds.features.length} != num_samples ${ds.labels.length} x feature_dim ${ds.featureDim}`,
    );
  }
  for (let i = 0; i < ds.features.length; i++) {
    if (!Number.isFinite(ds.features[i])) {
      throw new ValidationError('features contain non-finite values');
    }
  }
  for (let i = 0; i < ds.labels.length; i++) {
    if (ds.labels[i] >= ds.numClasses) {
      throw new ValidationError(`label ${ds.labels[i]} out of range for ${ds.numClasses} classes`);
    }
  }
  if (ds.severity !== undefined && !Number.isInteger(ds.severity)) {
    throw new ValidationError('severity must be an integer');
  }
}

export function encodeDataset(ds: DatasetFile): Buffer {
  validateDataset(ds);
  const header: Record<string, unknown> = {
    feature_dim: ds.featureDim,
    num_classes: ds.numClasses,
    num_samples: ds.labels.length,
  };
  if (ds.corruptionTag !== undefined) {
    header.corruption_tag = ds.corruptionTag;
  }
  if (ds.severity !== undefined) {
    header.severity = ds.severity;
  }
  return encodeContainer(MAGIC_DATASET, header, Buffer.concat([f32ToLE(ds.features), u16ToLE(ds.labels)]));
}

export function decodeDataset(data: Buffer): DatasetFile {
  const { header, payload } = decodeContainer(data, MAGIC_DATASET);
  const numSamples = requireInt(header, 'num_samples');
  const featureDim = requireInt(header, 'feature_dim');
  const numClasses = requireInt(header, 'num_classes');
  const reader = new PayloadReader(payload);
  const features = reader.takeF32(numSamples * featureDim);
  const labels = reader.takeU16(numSamples);
  reader.finish();
  return {
    features,
    labels,
    featureDim,
    numClasses,
    corruptionTag: typeof header.corruption_tag === 'string' ? header.corruption_tag : undefined,
    severity: typeof header.severity === 'number' ? header.severity : undefined,
  };
}

function validateHead(head: HeadFile): void {
  const { featureDim: d, hiddenDim: h, numClasses: c } = head;
  if (d < 1 || h < 1 || c < 1) {
    throw new ValidationError('head dimensions must be positive');
  }
  const lengths: Array<[string, number, number]> = [
    ['gamma', head.gamma.length, d],
    ['beta', head.beta.length, d],
    ['mean', head.mean.length, d],
    ['variance', head.variance.length, d],
    ['w1', head.w1.length, d * h],
    ['b1', head.b1.length, h],
    ['w2', head.w2.length, h * c],
    ['b2', head.b2.length, c],
  ];
  for (const [name, got, want] of lengths) {
    if (got !== want) {
      throw new ValidationError(`${name} has ${got} values, expected ${want}`);
    }
  }
  for (const [name, arr] of Object.entries({
    gamma: head.gamma, beta: head.beta, mean: head.mean, variance: head.variance,
    w1: head.w1, b1: head.b1, w2: head.w2, b2: head.b2,
  })) {
    for (let i = 0; i < arr.length; i++) {
      if (!Number.isFinite(arr[i])) {
        throw new ValidationError(`${name} contains non-finite values`);
      }
    }
  }
  if (!(head.dropout1 >= 0 && head.dropout1 < 1) || !(head.dropout2 >= 0 && head.dropout2 < 1)) {
    throw new ValidationError('dropout ratios must lie in [0, 1)');
  }
  if (!(head.bnEpsilon > 0)) {
    throw new ValidationError('bn epsilon must be positive');
  }
}

export function encodeHead(head: HeadFile): Buffer {
  validateHead(head);
  const header = {
    bn_epsilon: head.bnEpsilon,
    dropout1: head.dropout1,
    dropout2: head.dropout2,
    feature_dim: head.featureDim,
    hidden_dim: head.hiddenDim,
    num_classes: head.numClasses,
  };
  const payload = Buffer.concat([
    f32ToLE(head.gamma), f32ToLE(head.beta), f32ToLE(head.mean), f32ToLE(head.variance),
    f32ToLE(head.w1), f32ToLE(head.b1), f32ToLE(head.w2), f32ToLE(head.b2),
  ]);
  return encodeContainer(MAGIC_HEAD, header, payload);
}

export function decodeHead(data: Buffer): HeadFile {
  const { header, payload } = decodeContainer(data, MAGIC_HEAD);
  const d = requireInt(header, 'feature_dim');
  const h = requireInt(header, 'hidden_dim');
  const c = requireInt(header, 'num_classes');
  const reader = new PayloadReader(payload);
  const head: HeadFile = {
    featureDim: d,
    hiddenDim: h,
    numClasses: c,
    bnEpsilon: requireNumber(header, 'bn_epsilon'),
    dropout1: requireNumber(header, 'dropout1'),
    dropout2: requireNumber(header, 'dropout2'),
    gamma: reader.takeF32(d),
    beta: reader.takeF32(d),
    mean: reader.takeF32(d),
    variance: reader.takeF32(d),
    w1: reader.takeF32(d * h),
    b1: reader.takeF32(h),
    w2: reader.takeF32(h * c),
    b2: reader.takeF32(c),
  };
  reader.finish();
  return head;
}
