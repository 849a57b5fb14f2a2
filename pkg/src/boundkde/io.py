"""CSV samples, CSV tables and the JSON model file."""

import csv
from dataclasses import dataclass, field
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .boundary_kernels import ProductKernelSpec, SampleSet
from .errors import ModelFormatError, OutOfDomain, ParseError
from .legendre_kernels import make_w
from .selection import SelectionTrace

__all__ = [
    "SCHEMA_VERSION",
    "ModelFile",
    "read_csv",
    "format_float",
    "write_table",
    "dump_model",
    "load_model",
]

SCHEMA_VERSION = 1


def format_float(x):
    """Shortest string that round-trips to the same double."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    return repr(x)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_csv(path):
    """Read an ``n x d`` sample; a non-numeric first row is taken as a header.

    Raises
    ------
    FileNotFoundError, ParseError, OutOfDomain
    """
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            if lineno == 1 and not all(_is_number(c) for c in cells):
                width = len(cells)
                continue
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise ParseError(lineno, f"expected {width} columns, found {len(cells)}")
            values = []
            for col, text in enumerate(cells, start=1):
                try:
                    v = float(text)
                except ValueError:
                    raise ParseError(lineno, f"column {col}: {text!r} is not a number") from None
                if not 0.0 <= v <= 1.0:
                    raise OutOfDomain(lineno, col, v)
                values.append(v)
            rows.append(values)
    if not rows:
        raise ParseError(1, "no data rows")
    return SampleSet(rows)


def write_table(header, rows, out=None):
    """Write a CSV table; floats use :func:`format_float`. Returns the text."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


@dataclass
class ModelFile:
    config: dict
    chosen: tuple
    kernel_orders: tuple
    kernel_coeffs: tuple
    bandwidth: tuple
    trace: SelectionTrace
    points: tuple
    d: int
    schema_version: int = field(default=SCHEMA_VERSION)

    @classmethod
    def from_fit(cls, config, trace, spec, sample):
        return cls(
            config=dict(config),
            chosen=tuple(trace.chosen),
            kernel_orders=spec.orders,
            kernel_coeffs=tuple(tuple(k.coeffs) for k in spec.kernels),
            bandwidth=tuple(spec.bandwidth),
            trace=trace,
            points=tuple(float(v) for v in sample.points.ravel()),
            d=sample.d,
        )

    @property
    def n(self):
        return len(self.points) // self.d

    def spec(self):
        kernels = tuple(make_w(m) for m in self.kernel_orders)
        for k, coeffs in zip(kernels, self.kernel_coeffs):
            if tuple(k.coeffs) != tuple(coeffs):
                raise ModelFormatError(f"stored coefficients disagree with w_{k.order}")
        return ProductKernelSpec(kernels=kernels, bandwidth=self.bandwidth)

    def sample(self):
        return SampleSet(np.array(self.points).reshape(self.n, self.d))

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "chosen": list(self.chosen),
            "kernels": [
                {"order": m, "coeffs": list(c)} for m, c in zip(self.kernel_orders, self.kernel_coeffs)
            ],
            "bandwidth": list(self.bandwidth),
            "trace": self.trace.to_dict(),
            "sample": {"n": self.n, "d": self.d, "points": list(self.points)},
        }

    @classmethod
    def from_dict(cls, data):
        try:
            version = int(data["schema_version"])
            if version != SCHEMA_VERSION:
                raise ModelFormatError(f"unsupported schema_version {version}")
            sample = data["sample"]
            points = tuple(float(v) for v in sample["points"])
            if len(points) != int(sample["n"]) * int(sample["d"]):
                raise ModelFormatError("sample size does not match n * d")
            return cls(
                config=dict(data["config"]),
                chosen=tuple(int(v) for v in data["chosen"]),
                kernel_orders=tuple(int(k["order"]) for k in data["kernels"]),
                kernel_coeffs=tuple(tuple(float(v) for v in k["coeffs"]) for k in data["kernels"]),
                bandwidth=tuple(float(v) for v in data["bandwidth"]),
                trace=SelectionTrace.from_dict(data["trace"]),
                points=points,
                d=int(sample["d"]),
                schema_version=version,
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelFormatError):
                raise
            raise ModelFormatError(f"malformed model file: {exc!r}") from None


def dump_model(model, path=None):
    text = json.dumps(model.to_dict(), indent=1, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_model(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from None
    return ModelFile.from_dict(data)
