"""Mod-2 homology, flat-sector enumeration, ground-space counting, systoles.

Flat sectors are triples of cohomology classes whose pairwise cup products
vanish in cohomology; the same enumeration runs against a lattice complex or
an abstract manifold model.  Ground-space dimension of a commuting monomial
Hamiltonian is counted as the number of flip-group orbits of flux-free
configurations carrying a consistent phase assignment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from cubicmem import gf2
from cubicmem.cells import CellComplex
from cubicmem.cochains import Cochain, cup, d, integrate, torus_class_basis
from cubicmem.stabilizers import Hamiltonian


def coboundary_matrix(cx, k):
    """The map C^k -> C^{k+1} as a dense 0/1 matrix (rows = (k+1)-cells)."""
    if k >= cx.dim:
        return np.zeros((0, cx.n_cells(k)), dtype=np.uint8)
    out = np.zeros((cx.n_cells(k + 1), cx.n_cells(k)), dtype=np.uint8)
    bnd = cx.boundary[k + 1]
    rows = np.repeat(np.arange(bnd.shape[0]), bnd.shape[1])
    np.add.at(out, (rows, bnd.ravel()), 1)
    return out % 2


def boundary_matrix(cx, k):
    """The map C_k -> C_{k-1} (rows = (k-1)-cells)."""
    if k <= 0:
        return np.zeros((0, cx.n_cells(k)), dtype=np.uint8)
    return coboundary_matrix(cx, k - 1).T


@dataclass
class HomologyBasis:
    degree: int
    rank: int
    cocycles: list  # Cochain representatives of H^k
    cycles: list    # uint8 chain representatives of H_k


def _independent_mod(space_rows, candidates):
    """Greedy subset of candidate rows independent modulo the row space."""
    acc = [r.copy() for r in space_rows]
    base_rank = gf2.rank(np.asarray(acc).reshape(len(acc), -1)) if acc else 0
    picked = []
    for cand in candidates:
        trial = acc + [cand]
        if gf2.rank(np.asarray(trial)) > base_rank + len(picked):
            acc.append(cand)
            picked.append(cand)
    return picked


def homology_basis(cx: CellComplex, k: int) -> HomologyBasis:
    """Representatives and rank of H^k and H_k with mod-2 coefficients."""
    dk = coboundary_matrix(cx, k)
    closed = gf2.kernel_basis(dk)
    if k > 0:
        exact_gens = coboundary_matrix(cx, k - 1).T  # columns as rows
        exact = [row for row in exact_gens if row.any()]
    else:
        exact = []
    reps = _independent_mod(exact, list(closed))
    bk = boundary_matrix(cx, k)
    cyc_closed = gf2.kernel_basis(bk)
    if k < cx.dim:
        bdry_gens = boundary_matrix(cx, k + 1).T
        bdry = [row for row in bdry_gens if row.any()]
    else:
        bdry = []
    cyc_reps = _independent_mod(bdry, list(cyc_closed))
    assert len(reps) == len(cyc_reps)
    return HomologyBasis(
        degree=k, rank=len(reps),
        cocycles=[Cochain(cx, k, r) for r in reps],
        cycles=list(cyc_reps))


class _ClassSolver:
    """Express closed k-cochains in H^k coordinates modulo coboundaries."""

    def __init__(self, cx, k, basis=None):
        self.cx = cx
        self.k = k
        self.basis = basis if basis is not None else homology_basis(cx, k)
        exact = coboundary_matrix(cx, k - 1) if k > 0 else np.zeros(
            (cx.n_cells(k), 0), np.uint8).T
        cols = [exact.T] if k > 0 else []
        for rep in self.basis.cocycles:
            cols.append(rep.bits.reshape(1, -1))
        self._mat = np.vstack(cols).T if cols else np.zeros(
            (cx.n_cells(k), 0), np.uint8)
        self._n_exact = exact.shape[0] if k > 0 else 0

    def coordinates(self, alpha: Cochain):
        sol = gf2.solve(self._mat, alpha.bits)
        if sol is None:
            raise ValueError("cochain is not closed on this complex")
        return tuple(int(v) for v in sol[self._n_exact:])


# -- flat sectors ------------------------------------------------------------

@dataclass
class FlatSectors:
    count: int
    sectors: list | None  # list of (a_coords, b_coords, c_coords), or None
    betti: tuple


class _LatticeRing:
    """Cup-structure coefficients computed on a cell complex."""

    def __init__(self, cx, degrees):
        self.cx = cx
        self._basis = {}
        self._solver = {}
        for k in sorted(set(degrees) | {degrees[0] + degrees[1],
                                        degrees[0] + degrees[2],
                                        degrees[1] + degrees[2]}):
            if k <= cx.dim:
                if hasattr(cx, "lengths"):
                    reps = torus_class_basis(cx, k)
                    basis = HomologyBasis(k, len(reps), reps, [])
                else:
                    basis = homology_basis(cx, k)
                self._basis[k] = basis

    def betti(self, k):
        if k > self.cx.dim:
            return 0
        return self._basis[k].rank

    def cup_coords(self, k1, k2, i, j):
        """Coordinates of [basis_i(k1) cup basis_j(k2)] in H^{k1+k2}."""
        if k1 + k2 > self.cx.dim:
            return ()
        key = (k1 + k2)
        if key not in self._solver:
            self._solver[key] = _ClassSolver(self.cx, key, self._basis[key])
        prod = cup(self._basis[k1].cocycles[i], self._basis[k2].cocycles[j])
        return self._solver[key].coordinates(prod)


def _flat_count(ring, l, m, n, max_list=4096):
    bl, bm, bn = ring.betti(l), ring.betti(m), ring.betti(n)
    tensors = {}
    for key, (k1, k2, b1, b2) in {
            "ab": (l, m, bl, bm), "ac": (l, n, bl, bn),
            "bc": (m, n, bm, bn)}.items():
        tensors[key] = [[_pack(ring.cup_coords(k1, k2, i, j))
                         for j in range(b2)] for i in range(b1)]
    count = 0
    sectors = []

    def constraint_rows(tensor, x_bits, ncols):
        """Rows (one per product-class component) of the map y -> coords."""
        comp_rows = {}
        for i in range(len(tensor)):
            if not (x_bits >> i) & 1:
                continue
            for j in range(ncols):
                packed = tensor[i][j]
                comp = 0
                while packed:
                    low = packed & -packed
                    c = low.bit_length() - 1
                    comp_rows.setdefault(c, 0)
                    comp_rows[c] ^= 1 << j
                    packed ^= low
        return [r for r in comp_rows.values() if r]

    for x in range(1 << bl):
        rows_ab = constraint_rows(tensors["ab"], x, bm)
        rows_ac = constraint_rows(tensors["ac"], x, bn)
        kern_y = gf2.int_kernel(rows_ab, bm) if rows_ab else [
            1 << i for i in range(bm)]
        for combo in range(1 << len(kern_y)):
            y = 0
            for t in range(len(kern_y)):
                if (combo >> t) & 1:
                    y ^= kern_y[t]
            rows_bc = constraint_rows(tensors["bc"], y, bn)
            stack = rows_ac + rows_bc
            r = gf2.int_rank(stack) if stack else 0
            n_z = 1 << (bn - r)
            count += n_z
            if sectors is not None and count <= max_list:
                kern_z = (gf2.int_kernel(stack, bn) if stack
                          else [1 << i for i in range(bn)])
                for cz in range(n_z):
                    z = 0
                    for t in range(len(kern_z)):
                        if (cz >> t) & 1:
                            z ^= kern_z[t]
                    sectors.append((_unpack(x, bl), _unpack(y, bm),
                                    _unpack(z, bn)))
            elif count > max_list:
                sectors = None
    return FlatSectors(count=count, sectors=sectors, betti=(bl, bm, bn))


def _pack(coords):
    out = 0
    for i, v in enumerate(coords):
        if v:
            out |= 1 << i
    return out


def _unpack(bits, width):
    return tuple((bits >> i) & 1 for i in range(width))


def enumerate_flat_sectors(source, l=None, m=None, n=None, max_list=4096):
    """Count (and list, when small) the holonomy-flat class triples."""
    from cubicmem.manifolds import ManifoldModel
    if isinstance(source, ManifoldModel):
        if l is None:
            l, m, n = source.default_degrees
        return _flat_count(source, l, m, n, max_list)
    if not isinstance(source, CellComplex):
        raise TypeError("source must be a CellComplex or ManifoldModel")
    if l is None:
        raise ValueError("lattice enumeration needs degrees l, m, n")
    ring = _LatticeRing(source, (l, m, n))
    return _flat_count(ring, l, m, n, max_list)


# -- ground-space dimension --------------------------------------------------

def gsd_monomial(ham: Hamiltonian) -> int:
    """Ground-space dimension by consistent-phase orbit counting."""
    if ham.params.get("stage") != "gauge":
        raise ValueError("ground-space counting expects a gauged Hamiltonian")
    if not ham.is_commuting():
        raise ValueError("Hamiltonian terms do not all commute")
    cx = ham.system.cx
    degrees = ham.system.degrees
    offsets = []
    total = 0
    for k in degrees:
        offsets.append(total)
        total += cx.n_cells(k)

    # flux-free configurations: independent closed configs per species
    species_kernels = []
    for i, k in enumerate(degrees):
        kern = gf2.kernel_basis(coboundary_matrix(cx, k))
        species_kernels.append([
            int(sum(1 << (offsets[i] + c) for c in np.flatnonzero(v)))
            for v in kern])
    gens_all = [g for ks in species_kernels for g in ks]

    # flip generators with phase data
    flip_terms = []
    for label, op in ham.terms:
        if op.is_diagonal():
            continue
        fmask = 0
        for sp, c in op.flips:
            fmask |= 1 << (offsets[sp] + c)
        mons = []
        for mon in op.phase.monomials:
            mm = 0
            for sp, c in mon:
                mm |= 1 << (offsets[sp] + c)
            mons.append(mm)
        checks = []
        for chk in op.checks:
            cm = 0
            for sp, c in chk.form:
                cm |= 1 << (offsets[sp] + c)
            checks.append((cm, chk.const))
        flip_terms.append((fmask, mons, checks, -op.sign))

    def phase_of(term, z):
        fmask, mons, checks, sign = term
        for cm, const in checks:
            if (z & cm).bit_count() % 2 != const:
                return None  # projector kills this configuration
        par = sum(1 for mm in mons if (z & mm) == mm) % 2
        return sign * (-1) ** par

    visited = set()
    gsd = 0
    for combo in itertools.product((0, 1), repeat=len(gens_all)):
        z0 = 0
        for bit, g in zip(combo, gens_all):
            if bit:
                z0 ^= g
        if z0 in visited:
            continue
        psi = {z0: 1}
        stack = [z0]
        consistent = True
        while stack:
            z = stack.pop()
            visited.add(z)
            for term in flip_terms:
                coeff = phase_of(term, z)
                if coeff is None:
                    consistent = False
                    continue
                nz = z ^ term[0]
                val = coeff * psi[z]
                if nz in psi:
                    if psi[nz] != val:
                        consistent = False
                else:
                    psi[nz] = val
                    stack.append(nz)
        if consistent:
            gsd += 1
    return gsd


# -- systoles and code parameters --------------------------------------------

@dataclass
class SystoleResult:
    value: int
    certified: bool
    method: str
    witness: list = field(default_factory=list)


def _torus_systole(cx, k):
    best = None
    for dirs in itertools.combinations(range(cx.dim), k):
        size = 1
        for u in dirs:
            size *= cx.lengths[u]
        if best is None or size < best[0]:
            best = (size, dirs)
    size, dirs = best
    # witness: the coordinate sub-torus spanned by `dirs` through the origin
    witness = []
    spans = [range(cx.lengths[u]) if u in dirs else (0,) for u in
             range(cx.dim)]
    for coords in itertools.product(*spans):
        witness.append(cx.cube_index(k, coords, dirs))
    return SystoleResult(value=size, certified=True,
                         method="cut-pairing certificate", witness=witness)


def _search_systole(cx, k, upper, reps_masks, budget):
    """Branch-and-bound over connected cell subsets; exact when completed."""
    n = cx.n_cells(k)
    facets_per_cell = cx.boundary[k].shape[1] if k > 0 else 0
    facet_masks = []
    for c in range(n):
        msk = 0
        for f in cx.boundary[k][c]:
            msk ^= 1 << int(f)
        facet_masks.append(msk)
    ptr_idx = cx.cofaces[k - 1] if k > 0 else None
    neighbors = []
    for c in range(n):
        ns = set()
        for f in cx.boundary[k][c]:
            ptr, idx = ptr_idx
            ns |= {int(x) for x in idx[ptr[f]:ptr[f + 1]]}
        ns.discard(c)
        neighbors.append(sorted(ns))

    best = upper
    witness = []
    nodes = 0
    exhausted = False

    def nontrivial(mask):
        return any((mask & rep).bit_count() % 2 for rep in reps_masks)

    def extend(mask, bmask, size, ext, start):
        nonlocal best, witness, nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if bmask == 0 and size > 0 and nontrivial(mask):
            if size < best:
                best = size
                witness = [c for c in range(n) if (mask >> c) & 1]
            return
        if size + max(1, -(-bmask.bit_count() // facets_per_cell)) >= best:
            return
        for pos in range(len(ext)):
            c = ext[pos]
            nmask = mask | (1 << c)
            nbnd = bmask ^ facet_masks[c]
            nxt = ext[pos + 1:] + [x for x in neighbors[c]
                                   if x > start and not (nmask >> x) & 1
                                   and x not in ext[pos + 1:]]
            extend(nmask, nbnd, size + 1, nxt, start)
            if exhausted:
                return

    for s in range(n):
        extend(1 << s, facet_masks[s], 1, [x for x in neighbors[s] if x > s],
               s)
        if exhausted:
            break
    return SystoleResult(value=best, certified=not exhausted,
                         method="connected-subset search", witness=witness)


def min_weight_logical(cx, k, budget=2_000_000, method="auto"):
    """Minimal cell count of a homologically nontrivial k-cycle."""
    if not 1 <= k <= cx.dim:
        raise ValueError("degree out of range")
    if method == "auto":
        method = ("certificate" if cx.kind == "hypercubic-torus" else "search")
    if method == "certificate":
        if cx.kind != "hypercubic-torus":
            raise ValueError("the translate certificate needs a hypercubic "
                             "torus")
        return _torus_systole(cx, k)
    if cx.kind == "hypercubic-torus":
        upper_res = _torus_systole(cx, k)
        upper = upper_res.value + 1
        reps = torus_class_basis(cx, k)
        reps_masks = [int(sum(1 << int(c) for c in r.support())) for r in reps]
    else:
        basis = homology_basis(cx, k)
        if basis.rank == 0:
            raise ValueError("no nontrivial classes in this degree")
        reps_masks = [int(sum(1 << int(c) for c in np.flatnonzero(r.bits)))
                      for r in basis.cocycles]
        upper = min(int(r.sum()) for r in basis.cycles) + 1
    res = _search_systole(cx, k, upper, reps_masks, budget)
    if res.value >= upper and res.certified:
        # search confirmed nothing below the known representative weight
        res = SystoleResult(value=upper - 1, certified=True,
                            method="search + representative", witness=[])
    return res


@dataclass
class CodeParameters:
    n_phys: int
    gsd: int
    log2_gsd: float
    distance: int
    systoles: dict


def code_parameters(cx, l, m, n, twist=True, compute_gsd=True,
                    budget=2_000_000):
    """Physical qubit count, ground-space dimension, and code distance."""
    degrees = (l, m, n)
    n_phys = sum(cx.n_cells(k) for k in degrees)
    systoles = {}
    for k in sorted({q for deg in degrees for q in (deg, cx.dim - deg)}):
        systoles[k] = min_weight_logical(cx, k, budget=budget)
    distance = min(min(systoles[deg].value, systoles[cx.dim - deg].value)
                   for deg in degrees)
    if compute_gsd:
        if twist:
            gsd = enumerate_flat_sectors(cx, l, m, n, max_list=0).count
        else:
            ring = _LatticeRing(cx, degrees)
            gsd = 1
            for deg in degrees:
                gsd *= 2 ** ring.betti(deg)
    else:
        gsd = 0
    return CodeParameters(n_phys=n_phys, gsd=gsd,
                          log2_gsd=float(np.log2(gsd)) if gsd else float("nan"),
                          distance=distance, systoles=systoles)
