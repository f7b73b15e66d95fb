"""Upper-triangular sparse storage for symmetric graphs and indicators.

`SparseSymMatrix` is the single carrier for kernels, adjacency projections,
and exported graph layers. Entries live strictly in the upper triangle
(row <= col), sorted lexicographically, with positive weights and no
duplicates; symmetry is implied rather than stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class SparseSymMatrix:
    dim: int
    row: np.ndarray  # int64, row[i] <= col[i]
    col: np.ndarray
    weight: np.ndarray  # float64, strictly positive

    @classmethod
    def from_entries(
        cls,
        dim: int,
        row: np.ndarray,
        col: np.ndarray,
        weight: np.ndarray,
        *,
        sum_duplicates: bool = False,
    ) -> "SparseSymMatrix":
        """Canonicalize raw COO triples into a valid matrix.

        Entries are mirrored into the upper triangle, sorted, and checked.
        Zero weights are dropped; negative weights are an error. Duplicate
        coordinates are an error unless `sum_duplicates` is set.
        """
        row = np.asarray(row, dtype=np.int64)
        col = np.asarray(col, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        if not (len(row) == len(col) == len(weight)):
            raise ValueError("COO arrays must have equal length")
        if len(row) and (row.min() < 0 or col.min() < 0 or max(row.max(), col.max()) >= dim):
            raise ValueError("COO index out of bounds")
        if np.any(weight < 0.0):
            raise ValueError("negative weight in symmetric matrix")

        lo = np.minimum(row, col)
        hi = np.maximum(row, col)
        keep = weight != 0.0
        lo, hi, weight = lo[keep], hi[keep], weight[keep]
        order = np.lexsort((hi, lo))
        lo, hi, weight = lo[order], hi[order], weight[order]
        if len(lo) > 1:
            same = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if np.any(same):
                if not sum_duplicates:
                    raise ValueError("duplicate coordinate in symmetric matrix")
                # segment-sum runs of equal coordinates
                starts = np.flatnonzero(np.concatenate(([True], ~same)))
                weight = np.add.reduceat(weight, starts)
                lo, hi = lo[starts], hi[starts]
                keep = weight != 0.0
                lo, hi, weight = lo[keep], hi[keep], weight[keep]
        return cls(dim=dim, row=lo, col=hi, weight=weight)

    @classmethod
    def empty(cls, dim: int) -> "SparseSymMatrix":
        z = np.zeros(0, dtype=np.int64)
        return cls(dim, z, z.copy(), np.zeros(0, dtype=np.float64))

    @property
    def nnz(self) -> int:
        return len(self.weight)

    def off_diagonal(self) -> "SparseSymMatrix":
        keep = self.row != self.col
        return SparseSymMatrix(self.dim, self.row[keep], self.col[keep], self.weight[keep])

    def diagonal_vector(self) -> np.ndarray:
        d = np.zeros(self.dim, dtype=np.float64)
        on = self.row == self.col
        d[self.row[on]] = self.weight[on]
        return d

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=np.float64)
        m[self.row, self.col] = self.weight
        m[self.col, self.row] = self.weight
        return m

    def to_csr(self, *, include_diagonal: bool = True) -> sp.csr_matrix:
        """Symmetric expansion to a scipy CSR matrix."""
        src = self if include_diagonal else self.off_diagonal()
        off = src.row != src.col
        rows = np.concatenate([src.row, src.col[off]])
        cols = np.concatenate([src.col, src.row[off]])
        vals = np.concatenate([src.weight, src.weight[off]])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def degrees(self) -> np.ndarray:
        """Unweighted degree per node, self-loops excluded."""
        off = self.off_diagonal()
        deg = np.zeros(self.dim, dtype=np.int64)
        np.add.at(deg, off.row, 1)
        np.add.at(deg, off.col, 1)
        return deg

    def equals(self, other: "SparseSymMatrix") -> bool:
        return (
            self.dim == other.dim
            and len(self.weight) == len(other.weight)
            and bool(np.all(self.row == other.row))
            and bool(np.all(self.col == other.col))
            and bool(np.all(self.weight == other.weight))
        )

    def check(self) -> None:
        """Assert the storage invariants hold."""
        assert np.all(self.row <= self.col), "entry below diagonal"
        assert np.all(self.weight > 0.0), "non-positive weight"
        if self.nnz > 1:
            key = self.row.astype(np.int64) * self.dim + self.col
            assert np.all(np.diff(key) > 0), "entries unsorted or duplicated"


@dataclass(frozen=True)
class IndicatorMatrix:
    """One-hot membership of K posts in `rows` kernel nodes.

    Stored as the assignment vector: column k is one-hot at row
    `assignment[k]`.
    """

    rows: int
    assignment: np.ndarray  # int64, length K

    @property
    def cols(self) -> int:
        return len(self.assignment)

    def check(self) -> None:
        if len(self.assignment) and (
            self.assignment.min() < 0 or self.assignment.max() >= self.rows
        ):
            raise ValueError("indicator assignment out of range")

    def groups(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Group post indices by assigned row.

        Returns (rows_present, starts, order): posts order[starts[i]:starts[i+1]]
        share row rows_present[i]; order is ascending within each group.
        """
        order = np.argsort(self.assignment, kind="stable").astype(np.int64)
        sorted_rows = self.assignment[order]
        present, starts = np.unique(sorted_rows, return_index=True)
        return present, np.concatenate([starts, [len(order)]]), order


@dataclass(frozen=True)
class MultiGraph:
    """The three post-graph layers plus their simple composition."""

    node_count: int
    layers: dict[str, SparseSymMatrix]  # keys: tem, soc, spa
    composed: SparseSymMatrix

    def check(self) -> None:
        for name, layer in self.layers.items():
            assert layer.dim == self.node_count, f"layer {name} dim mismatch"
            layer.check()
        assert self.composed.dim == self.node_count
        self.composed.check()
        assert np.all(self.composed.row != self.composed.col), "composed has self-loops"
        assert np.all(self.composed.weight == 1.0), "composed weights must be 1"
