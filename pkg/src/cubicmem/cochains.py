"""Mod-2 (and mod-4) cochain algebra on cell complexes.

Coboundary, cup product on both lattice kinds, the higher cup product, chain
integration, and the Pontryagin square.  Cochains are dense 0/1 vectors over
the k-cells of a fixed complex; every product is computed cell-locally from
precomputed index tables cached on the complex.
"""

from __future__ import annotations

import itertools

import numpy as np

from cubicmem.cells import CellComplex, CellRef


class Cochain:
    """A degree-k bit vector over the k-cells, optionally species-tagged."""

    __slots__ = ("cx", "degree", "bits", "species")

    def __init__(self, cx: CellComplex, degree: int, bits=None, species=None):
        if degree < 0 or degree > cx.dim + 1:
            raise ValueError(f"degree {degree} out of range")
        n = cx.n_cells(degree) if degree <= cx.dim else 0
        if bits is None:
            bits = np.zeros(n, dtype=np.uint8)
        else:
            bits = np.asarray(bits, dtype=np.uint8) % 2
            if bits.shape != (n,):
                raise ValueError("bit vector length does not match cell count")
        self.cx = cx
        self.degree = degree
        self.bits = bits
        self.species = species

    @classmethod
    def zero(cls, cx, degree, species=None):
        return cls(cx, degree, species=species)

    @classmethod
    def indicator(cls, cx, cell: CellRef, species=None):
        cx._check(cell)
        out = cls(cx, cell.degree, species=species)
        out.bits[cell.index] = 1
        return out

    @classmethod
    def from_indices(cls, cx, degree, indices, species=None):
        out = cls(cx, degree, species=species)
        out.bits[np.asarray(list(indices), dtype=np.int64)] = 1
        return out

    @classmethod
    def random(cls, cx, degree, rng, species=None):
        bits = rng.integers(0, 2, size=cx.n_cells(degree), dtype=np.uint8)
        return cls(cx, degree, bits, species=species)

    def copy(self):
        return Cochain(self.cx, self.degree, self.bits.copy(), self.species)

    def support(self):
        return np.flatnonzero(self.bits)

    def is_zero(self):
        return not self.bits.any()

    def __add__(self, other):
        self._compat(other)
        species = self.species if self.species == other.species else None
        return Cochain(self.cx, self.degree, self.bits ^ other.bits, species)

    __xor__ = __add__

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.cx is other.cx and self.degree == other.degree
                and np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((id(self.cx), self.degree, self.bits.tobytes()))

    def _compat(self, other):
        if self.cx is not other.cx:
            raise ValueError("cochains live on different complexes")
        if self.degree != other.degree:
            raise ValueError("cochain degrees differ")

    def to_dict(self):
        return {"degree": self.degree, "species": self.species,
                "cells": [int(i) for i in self.support()]}

    @classmethod
    def from_dict(cls, cx, data):
        return cls.from_indices(cx, data["degree"], data["cells"],
                                species=data.get("species"))

    def __repr__(self):
        tag = f", species={self.species!r}" if self.species else ""
        return (f"Cochain(degree={self.degree}, weight="
                f"{int(self.bits.sum())}{tag})")


# -- coboundary --------------------------------------------------------------

def d(alpha: Cochain) -> Cochain:
    """Mod-2 coboundary: (d a)(c) = sum of a over the boundary facets of c."""
    cx, k = alpha.cx, alpha.degree
    if k >= cx.dim:
        # top degree: the (k+1)-cochain lives on an empty cell set
        return Cochain(cx, k + 1, species=alpha.species)
    out = alpha.bits[cx.boundary[k + 1]].sum(axis=1) % 2
    return Cochain(cx, k + 1, out.astype(np.uint8), species=alpha.species)


def d_signed(cx, degree, values):
    """Integer coboundary with alternating signs (for integral lifts)."""
    values = np.asarray(values, dtype=np.int64)
    k = degree
    if k >= cx.dim:
        return np.zeros(0, dtype=np.int64)
    bnd = cx.boundary[k + 1]
    if cx.kind == "simplicial":
        signs = np.array([(-1) ** j for j in range(bnd.shape[1])],
                         dtype=np.int64)
        return (values[bnd] * signs).sum(axis=1)
    # hypercubic: facet columns (2j, 2j+1) are the (base, shifted) pair in the
    # j-th direction of the cell
    out = np.zeros(bnd.shape[0], dtype=np.int64)
    for j in range(bnd.shape[1] // 2):
        out += (-1) ** j * (values[bnd[:, 2 * j + 1]] - values[bnd[:, 2 * j]])
    return out


# -- cup product tables ------------------------------------------------------

def _cup_table(cx, i, j):
    key = ("cup", i, j)
    if key in cx._cup_cache:
        return cx._cup_cache[key]
    n = i + j
    if n > cx.dim:
        tab = (np.zeros(0, np.int64),) * 3 + (np.zeros(0, np.int64),)
        cx._cup_cache[key] = tab
        return tab
    outs, in1, in2, signs = [], [], [], []
    if cx.kind == "simplicial":
        for c in range(cx.n_cells(n)):
            outs.append(c)
            in1.append(cx.subsimplex(n, c, range(i + 1)))
            in2.append(cx.subsimplex(n, c, range(i, n + 1)))
            signs.append(1)
    else:
        n_vert = cx.n_vertices
        for ds_i, dirs in enumerate(cx.dir_sets(n)):
            for front in itertools.combinations(dirs, i):
                back = tuple(u for u in dirs if u not in front)
                sign = (-1) ** sum(1 for a in front for b in back if a > b)
                for v in range(n_vert):
                    coords = cx.vertex_coords(v)
                    shifted = list(coords)
                    for u in front:
                        shifted[u] = (shifted[u] + 1) % cx.lengths[u]
                    outs.append(ds_i * n_vert + v)
                    in1.append(cx.cube_index(i, coords, front))
                    in2.append(cx.cube_index(j, shifted, back))
                    signs.append(sign)
    tab = (np.asarray(outs, np.int64), np.asarray(in1, np.int64),
           np.asarray(in2, np.int64), np.asarray(signs, np.int64))
    cx._cup_cache[key] = tab
    return tab


def cup(alpha: Cochain, beta: Cochain) -> Cochain:
    """Mod-2 cup product (degree i+j): front-face/back-face corner formula."""
    if alpha.cx is not beta.cx:
        raise ValueError("cup product needs cochains on the same complex")
    cx = alpha.cx
    i, j = alpha.degree, beta.degree
    out = Cochain(cx, min(i + j, cx.dim + 1))
    if i + j > cx.dim:
        return out
    outs, in1, in2, _ = _cup_table(cx, i, j)
    np.bitwise_xor.at(out.bits, outs, alpha.bits[in1] & beta.bits[in2])
    return out


def cup_int(cx, i, j, a_vals, b_vals, signed=True):
    """Integer cup product of integer-valued cochains (same index tables)."""
    if i + j > cx.dim:
        return np.zeros(0, dtype=np.int64)
    outs, in1, in2, signs = _cup_table(cx, i, j)
    out = np.zeros(cx.n_cells(i + j), dtype=np.int64)
    term = np.asarray(a_vals, np.int64)[in1] * np.asarray(b_vals, np.int64)[in2]
    if signed:
        term = term * signs
    np.add.at(out, outs, term)
    return out


# -- higher cup product ------------------------------------------------------

def _cup1_table(cx, p, q):
    key = ("cup1", p, q)
    if key in cx._cup_cache:
        return cx._cup_cache[key]
    n = p + q - 1
    outs, in1, in2 = [], [], []
    if cx.kind == "simplicial":
        for c in range(cx.n_cells(n)):
            for i in range(p):
                jj = i + q
                outs.append(c)
                in1.append(cx.subsimplex(
                    n, c, list(range(i + 1)) + list(range(jj, n + 1))))
                in2.append(cx.subsimplex(n, c, range(i, jj + 1)))
    else:
        # cube formula for (2,2) only: six face-pair terms per 3-cell
        n_vert = cx.n_vertices
        for ds_i, dirs in enumerate(cx.dir_sets(3)):
            ux, uy, uz = dirs
            for v in range(n_vert):
                coords = cx.vertex_coords(v)

                def face(shift_dir, span):
                    cc = list(coords)
                    if shift_dir is not None:
                        cc[shift_dir] = (cc[shift_dir] + 1) % cx.lengths[shift_dir]
                    return cx.cube_index(2, cc, span)

                f_l = face(None, (uy, uz))
                f_r = face(ux, (uy, uz))
                f_f = face(None, (ux, uz))
                f_b = face(uy, (ux, uz))
                f_d = face(None, (ux, uy))
                f_u = face(uz, (ux, uy))
                cell = ds_i * n_vert + v
                for a_f, b_f in ((f_l, f_b), (f_l, f_d), (f_b, f_d),
                                 (f_u, f_f), (f_u, f_r), (f_f, f_r)):
                    outs.append(cell)
                    in1.append(a_f)
                    in2.append(b_f)
    tab = (np.asarray(outs, np.int64), np.asarray(in1, np.int64),
           np.asarray(in2, np.int64))
    cx._cup_cache[key] = tab
    return tab


def cup1(alpha: Cochain, beta: Cochain) -> Cochain:
    """Mod-2 higher cup product, degree i+j-1.

    Simplicial complexes support all degree pairs with i, j >= 1 via the
    pinched-interval formula; hypercubic complexes support (2, 2) only (the
    six labeled face pairs of a 3-cell).
    """
    if alpha.cx is not beta.cx:
        raise ValueError("higher cup product needs cochains on one complex")
    cx = alpha.cx
    p, q = alpha.degree, beta.degree
    if p < 1 or q < 1:
        raise ValueError(f"unsupported degree pair ({p}, {q}) for cup1")
    if cx.kind != "simplicial" and (p, q) != (2, 2):
        raise ValueError(
            f"hypercubic cup1 is defined for degrees (2, 2) only, got ({p}, {q})")
    n = p + q - 1
    out = Cochain(cx, min(n, cx.dim + 1))
    if n > cx.dim:
        return out
    outs, in1, in2 = _cup1_table(cx, p, q)
    np.bitwise_xor.at(out.bits, outs, alpha.bits[in1] & beta.bits[in2])
    return out


def cup1_int_mod2(cx, p, q, a_vals, b_vals):
    """Parity-valued higher cup of integer cochains reduced mod 2."""
    a2 = (np.asarray(a_vals, np.int64) % 2).astype(np.uint8)
    b2 = (np.asarray(b_vals, np.int64) % 2).astype(np.uint8)
    return cup1(Cochain(cx, p, a2), Cochain(cx, q, b2))


# -- integration -------------------------------------------------------------

def integrate(alpha: Cochain, region="fundamental") -> int:
    """Mod-2 integral: parity of alpha over a chain of k-cells."""
    if region == "fundamental":
        return int(alpha.bits.sum() % 2)
    total = 0
    for cell in region:
        if isinstance(cell, CellRef):
            if cell.degree != alpha.degree:
                raise ValueError("region degree does not match cochain degree")
            cell = cell.index
        total ^= int(alpha.bits[cell])
    return total


def orientation_signs(cx):
    """Per-top-cell signs of the fundamental class (cached on the complex).

    Hypercubic cells are uniformly oriented.  For a branched simplicial torus
    the vertex branching order need not match the geometric orientation, so
    each top simplex carries the sign of the determinant of its lifted edge
    vectors.
    """
    cached = cx._cup_cache.get("orientation")
    if cached is not None:
        return cached
    n_top = cx.n_cells(cx.dim)
    if cx.kind != "simplicial":
        signs = np.ones(n_top, dtype=np.int64)
    else:
        signs = np.empty(n_top, dtype=np.int64)
        for i in range(n_top):
            keys = [np.asarray(k, dtype=float)
                    for k in cx.simplex_vertices(cx.dim, i)]
            mat = np.stack([k - keys[0] for k in keys[1:]])
            signs[i] = 1 if np.linalg.det(mat) > 0 else -1
    cx._cup_cache["orientation"] = signs
    return signs


# -- Pontryagin square -------------------------------------------------------

def pontryagin_integral(b: Cochain) -> int:
    """Integral of the Pontryagin square of a closed degree-2 cochain, mod 4.

    Uses the canonical 0/1 integer lift.  On a simplicial 4-complex the
    correction term with the coboundary of the lift is even, so its sign
    conventions drop out mod 4 and the mod-2 higher cup suffices.  On a
    hypercubic 4-complex the lift must be integrally closed (holds for sums
    of perpendicular-cut cocycles); otherwise a simplicial complex is needed.
    """
    cx = b.cx
    if b.degree != 2:
        raise ValueError("the Pontryagin square needs a degree-2 cochain")
    if cx.dim != 4:
        raise ValueError("integration of the square needs a 4-complex")
    if not d(b).is_zero():
        raise ValueError("cochain is not closed")
    lift = b.bits.astype(np.int64)
    square = int((orientation_signs(cx)
                  * cup_int(cx, 2, 2, lift, lift, signed=True)).sum())
    du = d_signed(cx, 2, lift)
    if cx.kind == "simplicial":
        u = du // 2  # even entries: b is closed mod 2
        corr = int(cup1_int_mod2(cx, 2, 3, lift, u).bits.sum() % 2)
        return (square + 2 * corr) % 4
    if np.any(du):
        raise ValueError(
            "hypercubic lift is not integrally closed; evaluate on a "
            "simplicial complex instead")
    return square % 4


# -- torus cocycle representatives -------------------------------------------

def wrap_cocycle(cx, direction) -> Cochain:
    """Degree-1 cocycle counting crossings of the cut x_i = L_i - 1/2 + 1/2."""
    if not hasattr(cx, "lengths"):
        raise ValueError("wrap cocycles need a torus complex")
    L = cx.lengths[direction]
    out = Cochain(cx, 1)
    if cx.kind == "hypercubic-torus":
        for v in range(cx.n_vertices):
            coords = cx.vertex_coords(v)
            if coords[direction] == L - 1:
                out.bits[cx.cube_index(1, coords, (direction,))] = 1
        return out
    for e in range(cx.n_cells(1)):
        k1, k2 = cx.simplex_vertices(1, e)
        lo, hi = sorted((k1[direction], k2[direction]))
        if (lo, hi) == (L - 1, L):
            out.bits[e] = 1
    return out


def cut_cocycle(cx, dirs) -> Cochain:
    """Degree-k representative: cup product of wrap cocycles, one per direction."""
    dirs = sorted(dirs)
    out = wrap_cocycle(cx, dirs[0])
    for u in dirs[1:]:
        out = cup(out, wrap_cocycle(cx, u))
    return out


def torus_class_basis(cx, k):
    """The C(d, k) cut-cocycle representatives of the degree-k classes."""
    return [cut_cocycle(cx, dirs)
            for dirs in itertools.combinations(range(cx.dim), k)]


def random_closed(cx, k, rng, species=None) -> Cochain:
    """Random closed k-cochain: a coboundary plus random class representatives."""
    out = d(Cochain.random(cx, k - 1, rng)) if k >= 1 else Cochain(cx, 0)
    if k == 0:
        out.bits[:] = rng.integers(0, 2)  # locally constant on a torus
    if hasattr(cx, "lengths"):
        for rep in torus_class_basis(cx, k):
            if rng.integers(0, 2):
                out = out + rep
    out.species = species
    return out


# -- identity suite ----------------------------------------------------------

def identity_suite(cx, trials=1000, rng=None):
    """Randomized cochain-identity checks; returns a per-identity report."""
    if rng is None:
        rng = np.random.default_rng(0)
    report = {}

    def run(name, fn, n=trials):
        failures = 0
        for _ in range(n):
            if not fn():
                failures += 1
        report[name] = {"trials": n, "failures": failures}

    def d_squared():
        k = int(rng.integers(0, cx.dim))
        return d(d(Cochain.random(cx, k, rng))).is_zero()

    def leibniz():
        i = int(rng.integers(0, cx.dim - 1))
        j = int(rng.integers(0, cx.dim - 1 - i))
        a = Cochain.random(cx, i, rng)
        b = Cochain.random(cx, j, rng)
        return d(cup(a, b)) == cup(d(a), b) + cup(a, d(b))

    run("d_squared", d_squared)
    run("leibniz", leibniz)

    if cx.kind == "simplicial":
        pairs = [(p, q) for p in range(1, cx.dim) for q in range(1, cx.dim)
                 if p + q <= cx.dim]

        def cup1_coboundary():
            p, q = pairs[int(rng.integers(0, len(pairs)))]
            a = Cochain.random(cx, p, rng)
            b = Cochain.random(cx, q, rng)
            lhs = cup(a, b) + cup(b, a)
            rhs = d(cup1(a, b)) + cup1(d(a), b) + cup1(a, d(b))
            return lhs == rhs

        run("cup1_coboundary", cup1_coboundary)

        if cx.dim >= 3 and hasattr(cx, "lengths"):
            def triple_exchange():
                a = random_closed(cx, 1, rng)
                b = random_closed(cx, 1, rng)
                c = random_closed(cx, 1, rng)
                lhs = cup(cup(b, a), c) + cup(cup(a, b), c)
                return lhs == d(cup(cup1(a, b), c))

            run("triple_exchange", triple_exchange, max(1, trials // 4))
    else:
        if cx.dim >= 3:
            def cup1_closed_comm():
                a = random_closed(cx, 2, rng)
                b = random_closed(cx, 2, rng)
                return cup(a, b) + cup(b, a) == d(cup1(a, b))

            run("cup1_closed_comm", cup1_closed_comm)

    report["passed"] = all(v["failures"] == 0 for v in report.values()
                           if isinstance(v, dict))
    return report
