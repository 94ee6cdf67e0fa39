import { describe, expect, it } from 'vitest';

import {
  DatasetFile,
  FormatError,
  HeadFile,
  ValidationError,
  canonicalJson,
  decodeDataset,
  decodeHead,
  encodeDataset,
  encodeHead,
} from '../src/format';

function sampleDataset(overrides: Partial<DatasetFile> = {}): DatasetFile {
  return {
    features: new Float32Array([0.5, -1.25, 3.0, 0.0, 2.5, -0.75]),
    labels: new Uint16Array([0, 2]),
    featureDim: 3,
    numClasses: 4,
    ...overrides,
  };
}

function sampleHead(): HeadFile {
  const d = 3;
  const h = 2;
  const c = 2;
  return {
    featureDim: d,
    hiddenDim: h,
    numClasses: c,
    dropout1: 0.2,
    dropout2: 0.4,
    bnEpsilon: 0.001,
    gamma: new Float32Array([1, 1.5, 0.5]),
    beta: new Float32Array([0, -0.25, 0.25]),
    mean: new Float32Array([0.1, 0.2, 0.3]),
    variance: new Float32Array([1, 2, 0.5]),
    w1: new Float32Array([0.1, -0.2, 0.3, 0.4, -0.5, 0.6]),
    b1: new Float32Array([0.05, -0.05]),
    w2: new Float32Array([1, -1, 0.5, -0.5]),
    b2: new Float32Array([0.25, -0.25]),
  };
}

describe('canonicalJson', () => {
  it('sorts keys recursively and emits no whitespace', () => {
    const text = canonicalJson({ b: 1, a: { d: 2, c: [3, { f: 4, e: 5 }] } });
    expect(text).toBe('{"a":{"c":[3,{"e":5,"f":4}],"d":2},"b":1}');
  });
});

describe('UQDS encoding', () => {
  it('round trips through encode and decode', () => {
    const ds = sampleDataset({ corruptionTag: 'gaussian_noise', severity: 5 });
    const back = decodeDataset(encodeDataset(ds));
    expect(Array.from(back.features)).toEqual(Array.from(ds.features));
    expect(Array.from(back.labels)).toEqual(Array.from(ds.labels));
    expect(back.featureDim).toBe(3);
    expect(back.numClasses).toBe(4);
    expect(back.corruptionTag).toBe('gaussian_noise');
    expect(back.severity).toBe(5);
  });

  it('is byte-identical across repeated encodes', () => {
    const ds = sampleDataset();
    expect(encodeDataset(ds).equals(encodeDataset(ds))).toBe(true);
  });

  it('lays out the container prefix and canonical header', () => {
    const bytes = encodeDataset(sampleDataset({ corruptionTag: 'brightness', severity: 1 }));
    expect(bytes.toString('ascii', 0, 4)).toBe('UQDS');
    expect(bytes.readUInt16LE(4)).toBe(1);
    const headerLen = bytes.readUInt32LE(6);
    const header = bytes.toString('utf-8', 10, 10 + headerLen);
    expect(header).toBe(
      '{"corruption_tag":"brightness","feature_dim":3,"num_classes":4,"num_samples":2,"severity":1}',
    );
  });

  it('writes features as little-endian float32 then labels as u16', () => {
    const ds = sampleDataset();
    const bytes = encodeDataset(ds);
    const payloadStart = 10 + bytes.readUInt32LE(6);
    expect(bytes.length - payloadStart).toBe(6 * 4 + 2 * 2);
    expect(bytes.readFloatLE(payloadStart)).toBeCloseTo(0.5, 7);
    expect(bytes.readFloatLE(payloadStart + 4)).toBeCloseTo(-1.25, 7);
    expect(bytes.readUInt16LE(payloadStart + 24)).toBe(0);
    expect(bytes.readUInt16LE(payloadStart + 26)).toBe(2);
  });

  it('omits corruption fields from the header when absent', () => {
    const bytes = encodeDataset(sampleDataset());
    const header = bytes.toString('utf-8', 10, 10 + bytes.readUInt32LE(6));
    expect(header).toBe('{"feature_dim":3,"num_classes":4,"num_samples":2}');
  });

  it('rejects labels outside the class range', () => {
    expect(() => encodeDataset(sampleDataset({ labels: new Uint16Array([0, 4]) })))
      .toThrow(ValidationError);
  });

  it('rejects non-finite features', () => {
    const features = new Float32Array([0, 1, Number.NaN, 3, 4, 5]);
    expect(() => encodeDataset(sampleDataset({ features }))).toThrow(/non-finite/);
  });

  it('rejects misaligned feature and label lengths', () => {
    expect(() => encodeDataset(sampleDataset({ labels: new Uint16Array([0, 1, 2]) })))
      .toThrow(ValidationError);
  });

  it('rejects empty datasets', () => {
    expect(() => encodeDataset(sampleDataset({
      features: new Float32Array(0),
      labels: new Uint16Array(0),
    }))).toThrow(/at least one sample/);
  });
});

describe('UQDS decoding errors', () => {
  it('rejects a wrong magic', () => {
    const bytes = encodeDataset(sampleDataset());
    bytes.write('XXXX', 0, 4, 'ascii');
    expect(() => decodeDataset(bytes)).toThrow(/expected magic/);
  });

  it('rejects an unsupported version', () => {
    const bytes = encodeDataset(sampleDataset());
    bytes.writeUInt16LE(2, 4);
    expect(() => decodeDataset(bytes)).toThrow(/version 2/);
  });

  it('rejects truncation at every region', () => {
    const bytes = encodeDataset(sampleDataset());
    expect(() => decodeDataset(bytes.subarray(0, 6))).toThrow(FormatError);
    expect(() => decodeDataset(bytes.subarray(0, 12))).toThrow(/header extends/);
    expect(() => decodeDataset(bytes.subarray(0, bytes.length - 3))).toThrow(/payload needs/);
  });

  it('rejects trailing bytes', () => {
    const bytes = Buffer.concat([encodeDataset(sampleDataset()), Buffer.from([0])]);
    expect(() => decodeDataset(bytes)).toThrow(/trailing/);
  });
});

describe('UQHM encoding', () => {
  it('round trips every weight array exactly', () => {
    const head = sampleHead();
    const back = decodeHead(encodeHead(head));
    expect(back.featureDim).toBe(head.featureDim);
    expect(back.hiddenDim).toBe(head.hiddenDim);
    expect(back.numClasses).toBe(head.numClasses);
    expect(back.dropout1).toBe(head.dropout1);
    expect(back.dropout2).toBe(head.dropout2);
    expect(back.bnEpsilon).toBe(head.bnEpsilon);
    for (const key of ['gamma', 'beta', 'mean', 'variance', 'w1', 'b1', 'w2', 'b2'] as const) {
      expect(Array.from(back[key])).toEqual(Array.from(head[key]));
    }
  });

  it('writes a canonical header with the expected fields', () => {
    const bytes = encodeHead(sampleHead());
    expect(bytes.toString('ascii', 0, 4)).toBe('UQHM');
    const header = bytes.toString('utf-8', 10, 10 + bytes.readUInt32LE(6));
    expect(header).toBe(
      '{"bn_epsilon":0.001,"dropout1":0.2,"dropout2":0.4,"feature_dim":3,"hidden_dim":2,"num_classes":2}',
    );
  });

  it('rejects weight arrays with the wrong length', () => {
    const head = { ...sampleHead(), b1: new Float32Array([1, 2, 3]) };
    expect(() => encodeHead(head)).toThrow(/b1 has 3 values, expected 2/);
  });

  it('rejects non-finite weights', () => {
    const head = { ...sampleHead(), w2: new Float32Array([1, Number.POSITIVE_INFINITY, 0, 0]) };
    expect(() => encodeHead(head)).toThrow(/non-finite/);
  });

  it('rejects out-of-range dropout ratios', () => {
    expect(() => encodeHead({ ...sampleHead(), dropout1: 1.0 })).toThrow(/dropout/);
  });
});
