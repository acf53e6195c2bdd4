"""Sparse ReLU feed-forward networks: representation, evaluation, serialization.

A network is an ordered list of affine layers (W, b).  Evaluation applies
x -> max(W x + b, 0) after every layer except the last, which stays affine.
Weight matrices are kept in canonical CSR form without explicit zeros, so the
weight count of a layer is exactly the number of stored entries plus the
number of nonzero bias components.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "EvaluationFault",
    "Layer",
    "NetworkFormatError",
    "NetworkStats",
    "ReluNetwork",
    "evaluate",
    "load_network",
    "make_layer",
    "network_from_dict",
    "network_to_dict",
    "save_network",
    "stats",
    "validate",
]


class NetworkFormatError(ValueError):
    """A serialized network could not be decoded."""


class EvaluationFault(RuntimeError):
    """A non-finite value appeared while evaluating a network."""

    def __init__(self, layer_index: int, message: str):
        super().__init__(f"layer {layer_index}: {message}")
        self.layer_index = layer_index


class Layer:
    """One affine layer W x + b with sparse W and dense b.

    The constructor is permissive (wrong shapes and non-finite entries are
    representable) so that validate() has something to report; builders go
    through make_layer which is strict.
    """

    __slots__ = ("weight", "bias")

    def __init__(self, weight, bias=None):
        w = sp.csr_matrix(weight, dtype=np.float64)
        w.sort_indices()
        self.weight = w
        if bias is None:
            b = np.zeros(w.shape[0])
        else:
            b = np.array(bias, dtype=np.float64).reshape(-1)
        self.bias = b
        # freeze the buffers; networks are immutable after construction
        for arr in (w.data, w.indices, w.indptr, b):
            arr.flags.writeable = False

    @property
    def rows(self) -> int:
        return self.weight.shape[0]

    @property
    def cols(self) -> int:
        return self.weight.shape[1]


def make_layer(shape, rows, cols, vals, bias=None) -> Layer:
    """Build a layer from triplets, dropping zeros and rejecting duplicates."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (len(rows) == len(cols) == len(vals)):
        raise ValueError("triplet arrays must have equal length")
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    if len(rows):
        if rows.min() < 0 or rows.max() >= shape[0] or cols.min() < 0 or cols.max() >= shape[1]:
            raise ValueError("triplet index out of range")
        flat = rows * shape[1] + cols
        if len(np.unique(flat)) != len(flat):
            raise ValueError("duplicate triplet positions")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite weight value")
    w = sp.csr_matrix((vals, (rows, cols)), shape=shape)
    if bias is not None:
        bias = np.asarray(bias, dtype=np.float64)
        if not np.all(np.isfinite(bias)):
            raise ValueError("non-finite bias value")
    return Layer(w, bias)


class ReluNetwork:
    """Immutable list of layers, with optional metadata carried to disk."""

    __slots__ = ("layers", "metadata", "load_defects")

    def __init__(self, layers, metadata=None, load_defects=()):
        layers = tuple(layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        self.layers = layers
        self.metadata = dict(metadata) if metadata is not None else None
        self.load_defects = tuple(load_defects)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].cols

    @property
    def output_dim(self) -> int:
        return self.layers[-1].rows

    @property
    def widths(self) -> tuple:
        return (self.layers[0].cols,) + tuple(layer.rows for layer in self.layers)

    def __repr__(self):
        return f"ReluNetwork(depth={self.depth}, widths={self.input_dim}->{self.output_dim})"


def evaluate(net: ReluNetwork, x) -> np.ndarray:
    """Run the network on a vector, or on a (N0 x batch) matrix of columns."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise ValueError("input must be a vector or a matrix of column samples")
    if x.shape[0] != net.input_dim:
        raise ValueError(f"input has {x.shape[0]} entries, network expects {net.input_dim}")
    last = net.depth - 1
    for idx, layer in enumerate(net.layers):
        z = layer.weight @ x
        if x.ndim == 1:
            z = z + layer.bias
        else:
            z = z + layer.bias[:, None]
        if not np.all(np.isfinite(z)):
            raise EvaluationFault(idx + 1, "non-finite value in layer output")
        if idx < last:
            np.maximum(z, 0.0, out=z)
        x = z
    return x


@dataclass(frozen=True)
class NetworkStats:
    depth: int
    weights: int
    per_layer: tuple
    max_width: int
    input_dim: int
    output_dim: int


def stats(net: ReluNetwork) -> NetworkStats:
    """Exact depth and stored-weight counts; zeros are never stored."""
    per_layer = tuple(
        int(layer.weight.nnz) + int(np.count_nonzero(layer.bias)) for layer in net.layers
    )
    return NetworkStats(
        depth=net.depth,
        weights=sum(per_layer),
        per_layer=per_layer,
        max_width=max(net.widths),
        input_dim=net.input_dim,
        output_dim=net.output_dim,
    )


def validate(net: ReluNetwork) -> list:
    """Return a list of structural defects (empty means well-formed)."""
    defects = list(net.load_defects)
    prev_rows = net.layers[0].cols
    for idx, layer in enumerate(net.layers, start=1):
        if layer.cols != prev_rows:
            defects.append(
                f"layer {idx}: weight expects {layer.cols} inputs but receives {prev_rows}"
            )
        prev_rows = layer.rows
        if layer.bias.shape[0] != layer.rows:
            defects.append(
                f"layer {idx}: bias length {layer.bias.shape[0]} does not match {layer.rows} rows"
            )
        if layer.weight.nnz and not np.all(np.isfinite(layer.weight.data)):
            defects.append(f"layer {idx}: non-finite weight entry")
        if not np.all(np.isfinite(layer.bias)):
            defects.append(f"layer {idx}: non-finite bias entry")
    return defects


def network_to_dict(net: ReluNetwork) -> dict:
    layers = []
    for layer in net.layers:
        coo = layer.weight.tocoo()
        order = np.lexsort((coo.col, coo.row))
        triplets = [
            [int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order
        ]
        bias = [[int(i), float(v)] for i, v in enumerate(layer.bias) if v != 0.0]
        layers.append(
            {"rows": layer.rows, "cols": layer.cols, "triplets": triplets, "bias": bias}
        )
    out = {"widths": list(net.widths), "layers": layers}
    if net.metadata is not None:
        out["metadata"] = net.metadata
    return out


def network_from_dict(data: dict) -> ReluNetwork:
    try:
        widths = list(data["widths"])
        raw_layers = data["layers"]
    except (KeyError, TypeError) as exc:
        raise NetworkFormatError(f"missing network field: {exc}") from exc
    if not raw_layers:
        raise NetworkFormatError("network has no layers")
    defects = []
    layers = []
    for idx, entry in enumerate(raw_layers, start=1):
        try:
            shape = (int(entry["rows"]), int(entry["cols"]))
            triplets = entry["triplets"]
            bias_pairs = entry["bias"]
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkFormatError(f"layer {idx}: malformed entry ({exc})") from exc
        seen = set()
        rows, cols, vals = [], [], []
        for trip in triplets:
            try:
                i, j, v = int(trip[0]), int(trip[1]), float(trip[2])
            except (TypeError, ValueError, IndexError) as exc:
                raise NetworkFormatError(f"layer {idx}: malformed triplet {trip!r}") from exc
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise NetworkFormatError(f"layer {idx}: triplet ({i}, {j}) out of range")
            if (i, j) in seen:
                defects.append(f"layer {idx}: duplicate triplet ({i}, {j})")
                continue
            seen.add((i, j))
            if v == 0.0:
                defects.append(f"layer {idx}: explicit zero stored at ({i}, {j})")
                continue
            rows.append(i)
            cols.append(j)
            vals.append(v)
        bias = np.zeros(shape[0])
        for pair in bias_pairs:
            try:
                i, v = int(pair[0]), float(pair[1])
            except (TypeError, ValueError, IndexError) as exc:
                raise NetworkFormatError(f"layer {idx}: malformed bias pair {pair!r}") from exc
            if not 0 <= i < shape[0]:
                raise NetworkFormatError(f"layer {idx}: bias index {i} out of range")
            bias[i] = v
        w = sp.csr_matrix((vals, (rows, cols)), shape=shape)
        layers.append(Layer(w, bias))
    net = ReluNetwork(layers, metadata=data.get("metadata"), load_defects=defects)
    if list(net.widths) != widths:
        raise NetworkFormatError(
            f"widths field {widths} disagrees with layer shapes {list(net.widths)}"
        )
    return net


def save_network(net: ReluNetwork, path) -> None:
    """Serialize to JSON, written atomically (temp file + rename)."""
    payload = json.dumps(network_to_dict(net), separators=(",", ":"))
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_network(path) -> ReluNetwork:
    with open(path, "r") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"not valid JSON: {exc}") from exc
    return network_from_dict(data)
