"""Bit-exact binary file formats for datasets and models.

All three formats share one container layout:

    magic        4 bytes ASCII ("UQDS" / "UQHM" / "UQQM")
    version      u16 little-endian (currently 1)
    header_len   u32 little-endian
    header       UTF-8 JSON, canonical (sorted keys, no whitespace)
    payload      raw little-endian arrays, order fixed per format

UQDS payload: num_samples x feature_dim float32 feature rows, then
num_samples u16 class indices.

UQHM payload: bn gamma/beta/mean/var (feature_dim float32 each), then
w1 (feature_dim x hidden_dim), b1, w2 (hidden_dim x num_classes), b2,
all float32 row-major. Dims, dropout ratios, and bn epsilon live in the
header.

UQQM payload: w1 uint8, b1 int32, w2 uint8, b2 int32, then the 256-entry
relu and sigmoid LUTs. All quantization params live in the header.

Canonical JSON plus fixed payload order makes save/load a byte-identical
round trip in both directions.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DimensionMismatchError,
    FormatError,
    TruncatedPayloadError,
    ValidationError,
    VersionMismatchError,
)
from .evaluate import LabeledSample
from .nets import BatchNorm, HeadModel, ftensor
from .quantize import QuantizedHead, QuantParams

FORMAT_VERSION = 1
MAGIC_DATASET = b"UQDS"
MAGIC_HEAD = b"UQHM"
MAGIC_QUANT = b"UQQM"

_PREFIX = struct.Struct("<4sHI")


def _encode_container(magic: bytes, header: dict, payload: bytes) -> bytes:
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _PREFIX.pack(magic, FORMAT_VERSION, len(blob)) + blob + payload


def _decode_container(data: bytes, magic: bytes) -> tuple[dict, bytes]:
    if len(data) < _PREFIX.size:
        raise TruncatedPayloadError(f"file shorter than the {_PREFIX.size}-byte prefix")
    found, version, header_len = _PREFIX.unpack_from(data)
    if found != magic:
        raise BadMagicError(f"expected magic {magic!r}, found {found!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported format version {version}")
    header_end = _PREFIX.size + header_len
    if len(data) < header_end:
        raise TruncatedPayloadError("header extends past end of file")
    try:
        header = json.loads(data[_PREFIX.size:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"header is not valid JSON: {e}") from e
    return header, data[header_end:]


class _PayloadReader:
    def __init__(self, payload: bytes):
        self._payload = payload
        self._offset = 0

    def take(self, dtype: str, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        nbytes = count * np.dtype(dtype).itemsize
        end = self._offset + nbytes
        if end > len(self._payload):
            raise TruncatedPayloadError(
                f"payload needs {end} bytes, only {len(self._payload)} present"
            )
        arr = np.frombuffer(self._payload, dtype=dtype, count=count, offset=self._offset)
        self._offset = end
        return arr.reshape(shape).copy()

    def finish(self):
        if self._offset != len(self._payload):
            raise DimensionMismatchError(
                f"payload has {len(self._payload) - self._offset} trailing bytes"
            )


def _require(header: dict, key: str, kind) -> object:
    if key not in header:
        raise FormatError(f"header is missing required field {key!r}")
    value = header[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise FormatError(f"header field {key!r} has wrong type {type(value).__name__}")
    return value


# --------------------------------------------------------------------------
# UQDS: datasets


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # num_samples x feature_dim float32
    labels: np.ndarray  # num_samples uint16
    num_classes: int
    corruption_tag: str | None = None
    severity: int | None = None

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise ValidationError("dataset needs 2-D features and 1-D labels")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValidationError("feature rows and labels must align")
        if not np.all(np.isfinite(self.features)):
            raise ValidationError("features contain non-finite values")
        if not np.issubdtype(self.labels.dtype, np.integer) or np.any(self.labels < 0):
            raise ValidationError("labels must be non-negative integers")
        if self.num_classes < 1 or np.any(self.labels >= self.num_classes):
            raise ValidationError("class indices must be < num_classes")

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def samples(self) -> list[LabeledSample]:
        return [
            LabeledSample(
                id=i,
                features=self.features[i],
                true_class=int(self.labels[i]),
                corruption_tag=self.corruption_tag,
                severity=self.severity,
            )
            for i in range(self.num_samples)
        ]


def dataset_to_bytes(ds: Dataset) -> bytes:
    header = {
        "feature_dim": ds.feature_dim,
        "num_classes": ds.num_classes,
        "num_samples": ds.num_samples,
    }
    if ds.corruption_tag is not None:
        header["corruption_tag"] = ds.corruption_tag
    if ds.severity is not None:
        header["severity"] = ds.severity
    payload = ds.features.astype("<f4").tobytes() + ds.labels.astype("<u2").tobytes()
    return _encode_container(MAGIC_DATASET, header, payload)


def dataset_from_bytes(data: bytes) -> Dataset:
    header, payload = _decode_container(data, MAGIC_DATASET)
    n = _require(header, "num_samples", int)
    d = _require(header, "feature_dim", int)
    c = _require(header, "num_classes", int)
    reader = _PayloadReader(payload)
    features = reader.take("<f4", (n, d))
    labels = reader.take("<u2", (n,))
    reader.finish()
    return Dataset(
        features=features,
        labels=labels,
        num_classes=c,
        corruption_tag=header.get("corruption_tag"),
        severity=header.get("severity"),
    )


# --------------------------------------------------------------------------
# UQHM: float head models


def head_to_bytes(model: HeadModel) -> bytes:
    header = {
        "bn_epsilon": float(model.bn.epsilon),
        "dropout1": float(model.dropout1),
        "dropout2": float(model.dropout2),
        "feature_dim": int(model.feature_dim),
        "hidden_dim": int(model.hidden_dim),
        "num_classes": int(model.num_classes),
    }
    parts = [
        model.bn.gamma, model.bn.beta, model.bn.mean, model.bn.var,
        model.w1, model.b1, model.w2, model.b2,
    ]
    payload = b"".join(np.ascontiguousarray(p).astype("<f4").tobytes() for p in parts)
    return _encode_container(MAGIC_HEAD, header, payload)


def head_from_bytes(data: bytes) -> HeadModel:
    header, payload = _decode_container(data, MAGIC_HEAD)
    d = _require(header, "feature_dim", int)
    h = _require(header, "hidden_dim", int)
    c = _require(header, "num_classes", int)
    reader = _PayloadReader(payload)
    bn = BatchNorm(
        gamma=reader.take("<f4", (d,)),
        beta=reader.take("<f4", (d,)),
        mean=reader.take("<f4", (d,)),
        var=reader.take("<f4", (d,)),
        epsilon=float(_require(header, "bn_epsilon", (int, float))),
    )
    model = HeadModel(
        bn=bn,
        dropout1=float(_require(header, "dropout1", (int, float))),
        w1=reader.take("<f4", (d, h)),
        b1=reader.take("<f4", (h,)),
        dropout2=float(_require(header, "dropout2", (int, float))),
        w2=reader.take("<f4", (h, c)),
        b2=reader.take("<f4", (c,)),
    )
    reader.finish()
    return model


# --------------------------------------------------------------------------
# UQQM: quantized head models

_QP_KEYS = ("input", "w1", "hidden", "w2", "logit", "output")


def _qp_to_json(qp: QuantParams) -> dict:
    return {"scale": float(qp.scale), "zero_point": int(qp.zero_point)}


def _qp_from_json(header: dict, name: str) -> QuantParams:
    entry = _require(_require(header, "qparams", dict), name, dict)
    return QuantParams(
        scale=float(_require(entry, "scale", (int, float))),
        zero_point=_require(entry, "zero_point", int),
    )


def quantized_to_bytes(model: QuantizedHead) -> bytes:
    qps = (model.input_qp, model.w1_qp, model.hidden_qp, model.w2_qp,
           model.logit_qp, model.output_qp)
    header = {
        "dropout1": float(model.dropout1),
        "dropout2": float(model.dropout2),
        "feature_dim": int(model.feature_dim),
        "hidden_dim": int(model.hidden_dim),
        "num_classes": int(model.num_classes),
        "qparams": {k: _qp_to_json(qp) for k, qp in zip(_QP_KEYS, qps)},
    }
    payload = (
        model.w1.astype("u1").tobytes()
        + model.b1.astype("<i4").tobytes()
        + model.w2.astype("u1").tobytes()
        + model.b2.astype("<i4").tobytes()
        + model.relu_lut.astype("u1").tobytes()
        + model.sigmoid_lut.astype("u1").tobytes()
    )
    return _encode_container(MAGIC_QUANT, header, payload)


def quantized_from_bytes(data: bytes) -> QuantizedHead:
    header, payload = _decode_container(data, MAGIC_QUANT)
    d = _require(header, "feature_dim", int)
    h = _require(header, "hidden_dim", int)
    c = _require(header, "num_classes", int)
    reader = _PayloadReader(payload)
    model = QuantizedHead(
        dropout1=float(_require(header, "dropout1", (int, float))),
        dropout2=float(_require(header, "dropout2", (int, float))),
        input_qp=_qp_from_json(header, "input"),
        w1_qp=_qp_from_json(header, "w1"),
        hidden_qp=_qp_from_json(header, "hidden"),
        w2_qp=_qp_from_json(header, "w2"),
        logit_qp=_qp_from_json(header, "logit"),
        output_qp=_qp_from_json(header, "output"),
        w1=reader.take("u1", (d, h)),
        b1=reader.take("<i4", (h,)),
        w2=reader.take("u1", (h, c)),
        b2=reader.take("<i4", (c,)),
        relu_lut=reader.take("u1", (256,)),
        sigmoid_lut=reader.take("u1", (256,)),
    )
    reader.finish()
    return model


# --------------------------------------------------------------------------
# File wrappers

_CODECS = {
    MAGIC_DATASET: (dataset_to_bytes, dataset_from_bytes),
    MAGIC_HEAD: (head_to_bytes, head_from_bytes),
    MAGIC_QUANT: (quantized_to_bytes, quantized_from_bytes),
}


def save_dataset(ds: Dataset, path: str | Path) -> None:
    Path(path).write_bytes(dataset_to_bytes(ds))


def load_dataset(path: str | Path) -> Dataset:
    return dataset_from_bytes(Path(path).read_bytes())


def save_head(model: HeadModel, path: str | Path) -> None:
    Path(path).write_bytes(head_to_bytes(model))


def load_head(path: str | Path) -> HeadModel:
    return head_from_bytes(Path(path).read_bytes())


def save_quantized(model: QuantizedHead, path: str | Path) -> None:
    Path(path).write_bytes(quantized_to_bytes(model))


def load_quantized(path: str | Path) -> QuantizedHead:
    return quantized_from_bytes(Path(path).read_bytes())
