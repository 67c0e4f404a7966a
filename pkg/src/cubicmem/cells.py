"""Finite cell complexes: periodic hypercubic lattices and branched simplicial tori.

Cells are addressed by (degree, dense index).  A hypercubic k-cell is a pair
(base vertex, sorted direction k-subset).  A simplicial k-cell is stored as its
vertex keys in branching order (global vertex order); on the torus the same
vertex set can support several distinct simplices when L is small, so cell
identity uses canonical lifted coordinates, not the reduced vertex set.
Complexes are immutable after construction.
"""

from __future__ import annotations

import itertools
import json
from typing import NamedTuple

import numpy as np


class CellRef(NamedTuple):
    degree: int
    index: int


class CellComplex:
    """A finite cell complex with boundary/coboundary incidence tables.

    Attributes:
        kind: "hypercubic-torus" or "simplicial".
        dim: spatial dimension d.
        counts: counts[k] = number of k-cells.
        boundary: per degree an int array (counts[k], f) of facet indices;
            f = 2k for hypercubic cells, k+1 for simplices (column j drops
            vertex position j).
        cofaces: per degree a (ptr, idx) CSR pair for the coboundary.
    """

    kind: str
    dim: int

    # -- incidence queries ---------------------------------------------------

    def cells_of_dim(self, k):
        if not 0 <= k <= self.dim:
            raise IndexError(f"degree {k} out of range for dim {self.dim}")
        return [CellRef(k, i) for i in range(self.counts[k])]

    def n_cells(self, k):
        if k < 0 or k > self.dim:
            return 0
        return self.counts[k]

    def boundary_of(self, cell: CellRef):
        k, i = cell
        self._check(cell)
        if k == 0:
            return []
        return [CellRef(k - 1, int(j)) for j in self.boundary[k][i]]

    def cofaces_of(self, cell: CellRef):
        k, i = cell
        self._check(cell)
        ptr, idx = self.cofaces[k]
        return [CellRef(k + 1, int(j)) for j in idx[ptr[i]:ptr[i + 1]]]

    def _check(self, cell: CellRef):
        k, i = cell
        if not 0 <= k <= self.dim:
            raise IndexError(f"degree {k} out of range")
        if not 0 <= i < self.counts[k]:
            raise IndexError(f"cell index {i} out of range for degree {k}")

    def euler_characteristic(self):
        return sum((-1) ** k * self.counts[k] for k in range(self.dim + 1))

    # -- shared internals ----------------------------------------------------

    def _finalize(self):
        self.cofaces = self._transpose_incidence()
        self._cup_cache = {}
        self._validate()

    def _transpose_incidence(self):
        out = []
        for k in range(self.dim + 1):
            if k == self.dim:
                out.append((np.zeros(self.counts[k] + 1, dtype=np.int64),
                            np.zeros(0, dtype=np.int64)))
                continue
            bnd = self.boundary[k + 1]
            n_low = self.counts[k]
            deg = np.zeros(n_low, dtype=np.int64)
            np.add.at(deg, bnd.ravel(), 1)
            ptr = np.zeros(n_low + 1, dtype=np.int64)
            np.cumsum(deg, out=ptr[1:])
            idx = np.empty(ptr[-1], dtype=np.int64)
            cursor = ptr[:-1].copy()
            flat = bnd.ravel()
            order = np.repeat(np.arange(bnd.shape[0]), bnd.shape[1])
            for lo, hi in zip(flat, order):
                idx[cursor[lo]] = hi
                cursor[lo] += 1
            out.append((ptr, idx))
        return out

    def _validate(self):
        # del o del = 0 mod 2, exhaustively per complex.
        for k in range(2, self.dim + 1):
            faces = self.boundary[k]
            sub = self.boundary[k - 1][faces]  # (n, f, f')
            n_low = self.counts[k - 2]
            for cell in range(sub.shape[0]):
                counts = np.bincount(sub[cell].ravel(), minlength=n_low)
                if np.any(counts % 2):
                    raise AssertionError("boundary of boundary is nonzero")

    def describe(self):
        raise NotImplementedError

    def to_json(self):
        return json.dumps(self.describe(), sort_keys=True)

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class HypercubicTorus(CellComplex):
    kind = "hypercubic-torus"

    def __init__(self, d, lengths):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        lengths = list(lengths)
        if len(lengths) != d:
            raise ValueError("need one axis length per dimension")
        if any(L < 2 for L in lengths):
            raise ValueError(
                "axis lengths < 2 are rejected: self-identified cells make "
                "corner bookkeeping ambiguous")
        self.dim = d
        self.lengths = lengths
        self.n_vertices = int(np.prod(lengths))
        self._dir_sets = [list(itertools.combinations(range(d), k))
                          for k in range(d + 1)]
        self._dir_set_index = [{ds: i for i, ds in enumerate(table)}
                               for table in self._dir_sets]
        self.counts = [len(self._dir_sets[k]) * self.n_vertices
                       for k in range(d + 1)]

        boundary = [np.zeros((self.counts[0], 0), dtype=np.int64)]
        for k in range(1, d + 1):
            bnd = np.empty((self.counts[k], 2 * k), dtype=np.int64)
            for ds_i, dirs in enumerate(self._dir_sets[k]):
                subs = [self._dir_set_index[k - 1][tuple(x for x in dirs if x != u)]
                        for u in dirs]
                for v in range(self.n_vertices):
                    coords = self.vertex_coords(v)
                    cell = ds_i * self.n_vertices + v
                    for col, (u, sub) in enumerate(zip(dirs, subs)):
                        shifted = list(coords)
                        shifted[u] = (shifted[u] + 1) % lengths[u]
                        bnd[cell, 2 * col] = sub * self.n_vertices + v
                        bnd[cell, 2 * col + 1] = (
                            sub * self.n_vertices + self.vertex_index(shifted))
            boundary.append(bnd)
        self.boundary = boundary
        self._finalize()

    def vertex_index(self, coords):
        idx = 0
        for c, L in zip(coords, self.lengths):
            idx = idx * L + (c % L)
        return idx

    def vertex_coords(self, idx):
        coords = []
        for L in reversed(self.lengths):
            coords.append(idx % L)
            idx //= L
        return tuple(reversed(coords))

    def dir_sets(self, k):
        return self._dir_sets[k]

    def cube_index(self, k, coords, dirs):
        """Dense index of the k-cell with given base coords and direction set."""
        ds = self._dir_set_index[k][tuple(dirs)]
        return ds * self.n_vertices + self.vertex_index(coords)

    def cube_info(self, k, index):
        """(base coords, direction tuple) of a hypercubic k-cell."""
        ds, v = divmod(index, self.n_vertices)
        return self.vertex_coords(v), self._dir_sets[k][ds]

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "lengths": self.lengths}


class SimplicialComplex(CellComplex):
    """Branched simplicial complex, possibly a Delta-complex.

    vkeys[k][i] is the tuple of per-vertex keys of cell i in branching order
    (sorted by global vertex id).  On the torus a key is a lifted coordinate
    tuple; on abstract complexes it is the vertex id itself.
    """

    kind = "simplicial"

    def __init__(self, d, tops, canon, vertex_id, description):
        self.dim = d
        self._canon = canon
        self._vertex_id = vertex_id
        self._description = description

        def order_cell(keys):
            keys = canon(keys)
            return tuple(sorted(keys, key=lambda key: (vertex_id(key), key)))

        cells = [None] * (d + 1)
        index = [None] * (d + 1)
        cells[d] = sorted({order_cell(t) for t in tops})
        index[d] = {c: i for i, c in enumerate(cells[d])}
        boundary = [None] * (d + 1)
        for k in range(d, 0, -1):
            faces = {}
            bnd = np.empty((len(cells[k]), k + 1), dtype=np.int64)
            for i, cell in enumerate(cells[k]):
                for drop in range(k + 1):
                    face = order_cell(cell[:drop] + cell[drop + 1:])
                    if face not in faces:
                        faces[face] = len(faces)
                    bnd[i, drop] = faces[face]
            cells[k - 1] = [None] * len(faces)
            for face, j in faces.items():
                cells[k - 1][j] = face
            index[k - 1] = faces
            boundary[k] = bnd
        boundary[0] = np.zeros((len(cells[0]), 0), dtype=np.int64)
        self.vkeys = cells
        self._index = index
        self.counts = [len(cells[k]) for k in range(d + 1)]
        self.boundary = boundary
        self._finalize()

    def simplex_vertices(self, k, index):
        """Vertex keys of a k-simplex, in branching order."""
        return self.vkeys[k][index]

    def simplex_vertex_ids(self, k, index):
        return tuple(self._vertex_id(key) for key in self.vkeys[k][index])

    def subsimplex(self, k, index, positions):
        """Index of the face spanned by the given vertex positions (sorted)."""
        cell = self.vkeys[k][index]
        face = tuple(cell[p] for p in positions)
        face = self._canon(face)
        face = tuple(sorted(face, key=lambda key: (self._vertex_id(key), key)))
        return self._index[len(face) - 1][face]

    def describe(self):
        return dict(self._description)


def build_hypercubic_torus(d, lengths):
    """Periodic hypercubic complex; k-cell count is C(d,k)*prod(L_i)."""
    if isinstance(lengths, int):
        lengths = [lengths] * d
    return HypercubicTorus(d, lengths)


def build_freudenthal_torus(d, L):
    """Branched simplicial torus (Kuhn subdivision) with d!*L^d top simplices."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if L < 2:
        raise ValueError("L < 2 is rejected: vertex identifications would "
                         "collapse simplices")

    def canon(keys):
        arr = [list(key) for key in keys]
        for axis in range(d):
            m = min(row[axis] for row in arr)
            shift = (m // L) * L
            if shift:
                for row in arr:
                    row[axis] -= shift
        return tuple(tuple(row) for row in arr)

    def vertex_id(key):
        idx = 0
        for c in key:
            idx = idx * L + (c % L)
        return idx

    tops = []
    for base in itertools.product(range(L), repeat=d):
        for perm in itertools.permutations(range(d)):
            coords = list(base)
            verts = [tuple(coords)]
            for u in perm:
                coords[u] += 1
                verts.append(tuple(coords))
            tops.append(tuple(verts))

    cx = SimplicialComplex(d, tops, canon, vertex_id,
                           {"kind": "simplicial", "dim": d, "L": L})
    cx.lengths = [L] * d
    n_top = _factorial(d) * L ** d
    if cx.counts[d] != n_top:
        raise AssertionError("top simplex count mismatch")
    return cx


def build_simplex_sphere(d):
    """Boundary of a (d+1)-simplex: a sphere-like d-dimensional complex."""
    verts = range(d + 2)
    tops = list(itertools.combinations(verts, d + 1))
    return SimplicialComplex(
        d, tops, canon=lambda keys: tuple(keys), vertex_id=lambda key: key,
        description={"kind": "simplicial", "dim": d, "sphere": True})


def complex_from_description(desc):
    if desc["kind"] == "hypercubic-torus":
        return build_hypercubic_torus(desc["dim"], desc["lengths"])
    if desc["kind"] == "simplicial":
        if desc.get("sphere"):
            return build_simplex_sphere(desc["dim"])
        return build_freudenthal_torus(desc["dim"], desc["L"])
    raise ValueError(f"unknown complex kind {desc['kind']!r}")


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def dual_map(cx: CellComplex, cell: CellRef) -> CellRef:
    """Bijection k-cell <-> (d-k)-cell of the half-shifted dual lattice.

    Uses the reflected identification (x, D) -> (-x mod L, complement(D)):
    an involution that preserves incidence with degrees swapped.
    """
    if cx.kind != "hypercubic-torus":
        raise ValueError("dual_map is defined for hypercubic tori only")
    k, i = cell
    cx._check(cell)
    coords, dirs = cx.cube_info(k, i)
    co_dirs = tuple(u for u in range(cx.dim) if u not in dirs)
    refl = tuple((-c) % L for c, L in zip(coords, cx.lengths))
    return CellRef(cx.dim - k, cx.cube_index(cx.dim - k, refl, co_dirs))
