"""Problem data: sampled nodes/values, CSV ingestion, builtin instances."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadSize, DuplicateNode, ParseError, UnknownProblem

CSV_FIELDS = ("x_re", "x_im", "f_re", "f_im")

# Near-coincident nodes are kept (they are legitimate hard instances) but
# flagged, since the method assumes distinct nodes.
NEAR_DUPLICATE_RTOL = 1e-12

# Pairwise distance scan is quadratic; skip the warning for very large m.
_PAIRWISE_SCAN_LIMIT = 4096

BUILTIN_NAMES = ("example1", "abs_on_grid", "exp_unit_circle", "runge_grid")


@dataclass(frozen=True)
class SampleSet:
    """Sampled data (x_j, f_j), j = 1..m, with pairwise distinct nodes."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=np.complex128))
        values = np.atleast_1d(np.asarray(self.values, dtype=np.complex128))
        if nodes.ndim != 1 or values.ndim != 1:
            raise ValueError("nodes and values must be one-dimensional")
        if nodes.size != values.size:
            raise ValueError("nodes and values must have equal length")
        if nodes.size < 1:
            raise BadSize("at least one sample is required")
        if not np.all(np.isfinite(nodes.view(np.float64))):
            raise ParseError("non-finite node")
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ParseError("non-finite value")
        _check_distinct(nodes)
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.nodes.size

    def __len__(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class DegreePair:
    """Degree bounds (n1, n2) for the numerator and denominator spaces."""

    n1: int
    n2: int

    def __post_init__(self):
        if int(self.n1) != self.n1 or int(self.n2) != self.n2:
            raise ValueError("degrees must be integers")
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("degrees must be nonnegative")

    @property
    def dim(self) -> int:
        """Total coefficient count n1 + n2 + 2."""
        return self.n1 + self.n2 + 2

    def check_sample_count(self, m: int) -> None:
        """Solving requires m >= n1 + n2 + 2."""
        if m < self.dim:
            raise BadSize(
                f"need at least n1+n2+2 = {self.dim} samples, got {m}"
            )


def _check_distinct(nodes: np.ndarray) -> None:
    seen: dict[complex, int] = {}
    for j, x in enumerate(nodes):
        key = complex(x)
        if key in seen:
            raise DuplicateNode(
                f"nodes {seen[key]} and {j} are identical ({key})",
                indices=(seen[key], j),
            )
        seen[key] = j
    if 2 <= nodes.size <= _PAIRWISE_SCAN_LIMIT:
        dist = np.abs(nodes[:, None] - nodes[None, :])
        dist[np.diag_indices_from(dist)] = np.inf
        dmin = dist.min()
        dmax = dist[np.isfinite(dist)].max()
        if dmax > 0 and dmin < NEAR_DUPLICATE_RTOL * dmax:
            warnings.warn(
                f"nearly coincident nodes: min pairwise distance {dmin:.3e} "
                f"< {NEAR_DUPLICATE_RTOL:g} * max distance {dmax:.3e}",
                stacklevel=3,
            )


def load_samples(path, format: str = "csv") -> SampleSet:
    """Read samples from a CSV file with columns x_re, x_im, f_re, f_im.

    An optional header row naming those columns is detected and skipped.
    Raises ParseError for malformed rows and DuplicateNode for repeated
    nodes; row order is preserved.
    """
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    nodes: list[complex] = []
    values: list[complex] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            cells = [c.strip() for c in row]
            if lineno == 1 and tuple(c.lower() for c in cells) == CSV_FIELDS:
                continue
            if len(cells) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 columns, got {len(cells)}")
            try:
                xr, xi, fr, fi = (float(c) for c in cells)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if not all(np.isfinite(v) for v in (xr, xi, fr, fi)):
                raise ParseError(f"{path}:{lineno}: non-finite value")
            nodes.append(complex(xr, xi))
            values.append(complex(fr, fi))
    if not nodes:
        raise ParseError(f"{path}: no samples")
    return SampleSet(np.array(nodes), np.array(values))


def builtin_problem(name: str, m: int) -> SampleSet:
    """Deterministic builtin instances.

    example1        nodes 1..4, values [0, 1, 1, 1] (m must be 4)
    abs_on_grid     x equispaced on [-1, 1], f = |x|
    exp_unit_circle x_j = exp(2*pi*i*(j-1)/m), f = exp(x)
    runge_grid      x equispaced on [-1, 1], f = 1/(1 + 25 x^2)
    """
    if name not in BUILTIN_NAMES:
        raise UnknownProblem(f"unknown builtin problem {name!r}")
    if m < 1:
        raise BadSize("m must be positive")
    if name == "example1":
        if m != 4:
            raise BadSize("example1 is defined for m = 4 only")
        return SampleSet(np.array([1.0, 2.0, 3.0, 4.0], dtype=complex),
                         np.array([0.0, 1.0, 1.0, 1.0], dtype=complex))
    if name == "exp_unit_circle":
        x = np.exp(2j * np.pi * np.arange(m) / m)
        return SampleSet(x, np.exp(x))
    x = np.linspace(-1.0, 1.0, m).astype(complex)
    if name == "abs_on_grid":
        return SampleSet(x, np.abs(x).astype(complex))
    return SampleSet(x, 1.0 / (1.0 + 25.0 * x**2))
