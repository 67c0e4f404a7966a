"""Finite-temperature bath dynamics, local decoding, and memory experiments.

Loop-sector (Z-error) dynamics use the exact syndrome energy: 2 per violated
edge term.  Membrane-sector (X-error) dynamics use the additive per-cube cost
6 (2 for the violated flux term plus 4 units of projector cost), which is the
local functional whose transition ratios form the documented rate table; the
exact syndrome energy of overlapping membrane configurations is smaller
because adjacent violated cubes share zeroed projector terms, and it remains
available through LatticeState.energy for bookkeeping.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from cubicmem.cochains import torus_class_basis
from cubicmem.stabilizers import Hamiltonian, syndrome

LOOP_EDGE_COST = 2
MEMBRANE_CUBE_COST = 6  # 2 (flux) + 4 (projector units), dilute accounting


# -- noise model and update rule ----------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Bath parameters: inverse temperature and per-sector enables."""

    beta: float
    epsilon0: float = 1.0
    z_species: tuple = (0,)
    x_species: tuple = ()
    attempt_rate: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("inverse temperature must be non-negative")
        if not 0.0 <= self.attempt_rate <= 1.0:
            raise ValueError("attempt rate must lie in [0, 1]")


class UpdateRule:
    """Acceptance probability as a function of the energy change.

    beta=None is the zero-temperature limit: strict descent with the 1/2
    tie rule.  The metropolis kind satisfies detailed balance with the
    explicit 1/2 at zero energy change.
    """

    def __init__(self, beta=None, kind="metropolis"):
        if kind not in ("metropolis", "heat-bath"):
            raise ValueError(f"unknown update rule {kind!r}")
        self.beta = beta
        self.kind = kind

    def acceptance(self, de):
        if self.beta is None:
            if de < 0:
                return 1.0
            return 0.5 if de == 0 else 0.0
        if self.kind == "heat-bath":
            return 1.0 / (1.0 + math.exp(self.beta * de))
        if de > 0:
            return math.exp(-self.beta * de)
        return 1.0 if de < 0 else 0.5


def transition_rate_table(beta):
    """The labeled acceptance ratios of the bath rule.

    Loop moves cost 2 per toggled edge term; membrane moves cost 6 per
    toggled flux cube in the additive accounting.
    """
    rule = UpdateRule(beta)
    return {
        "loop_create_0_to_4": rule.acceptance(4 * LOOP_EDGE_COST),
        "loop_deform_1_to_3": rule.acceptance(2 * LOOP_EDGE_COST),
        "membrane_create_0_to_6": rule.acceptance(6 * MEMBRANE_CUBE_COST),
        "membrane_deform_1_to_5": rule.acceptance(4 * MEMBRANE_CUBE_COST),
        "membrane_deform_2_to_4": rule.acceptance(2 * MEMBRANE_CUBE_COST),
        "tie": rule.acceptance(0),
    }


# -- lattice state ------------------------------------------------------------

class LatticeState:
    """Error masks per species over the gauge-field cells, plus energy."""

    def __init__(self, ham: Hamiltonian):
        self.ham = ham
        cx = ham.system.cx
        self.z_err = {}
        self.x_err = {}
        for sp, k in enumerate(ham.system.degrees):
            self.z_err[sp] = np.zeros(cx.n_cells(k), dtype=np.uint8)
            self.x_err[sp] = np.zeros(cx.n_cells(k), dtype=np.uint8)

    def syndrome(self):
        return syndrome(self.ham, x_errors=self.x_err, z_errors=self.z_err)

    def energy(self):
        """Exact syndrome energy: 1 per zeroed term, 2 per flipped term."""
        return float(sum(1 - v for v in self.syndrome().values()))

    def copy(self):
        out = LatticeState(self.ham)
        for sp in self.z_err:
            out.z_err[sp] = self.z_err[sp].copy()
            out.x_err[sp] = self.x_err[sp].copy()
        return out


# -- compiled loop sector -----------------------------------------------------

@dataclass
class LoopSectorModel:
    """Incidence data for one species' Z-error (loop excitation) dynamics."""

    ham: Hamiltonian
    species: int
    face_edges: np.ndarray  # (n_faces, edges per face)
    n_edges: int
    reps: np.ndarray        # (n_classes, n_faces) readout pairing masks


def compile_loop_sector(ham: Hamiltonian, species=0) -> LoopSectorModel:
    cx = ham.system.cx
    k = ham.system.degrees[species]
    n = cx.n_cells(k)
    face_edges = np.array(
        [[int(e) for e in cx.boundary[k][f]] for f in range(n)],
        dtype=np.int64)
    reps = np.array([rep.bits for rep in torus_class_basis(cx, k)],
                    dtype=np.uint8)
    return LoopSectorModel(ham, species, face_edges, cx.n_cells(k - 1), reps)


def logical_class(model: LoopSectorModel, mask):
    """Pairing of the error chain with the cohomology basis, as a tuple."""
    return tuple(int(x) for x in (model.reps @ mask) % 2)


@njit(cache=True)
def _seed_stream(seed):
    np.random.seed(seed)


@njit(cache=True)
def _loop_bath(mask, viol, face_edges, beta, sweeps, rate):
    n, m = face_edges.shape
    for _ in range(sweeps):
        for f in range(n):
            if rate < 1.0 and np.random.random() >= rate:
                continue
            de = 0
            for j in range(m):
                de += 2 - 4 * viol[face_edges[f, j]]
            if de > 0:
                if np.random.random() >= np.exp(-beta * de):
                    continue
            elif de == 0:
                if np.random.random() >= 0.5:
                    continue
            mask[f] ^= 1
            for j in range(m):
                viol[face_edges[f, j]] ^= 1


@njit(cache=True)
def _loop_decode(mask, viol, face_edges, passes):
    # zero-temperature rule, restricted to faces touching a violated term
    # so an empty syndrome is a strict no-op
    n, m = face_edges.shape
    for _ in range(passes):
        total = 0
        for e in range(viol.shape[0]):
            total += viol[e]
        if total == 0:
            break
        for f in range(n):
            touched = False
            de = 0
            for j in range(m):
                v = viol[face_edges[f, j]]
                if v:
                    touched = True
                de += 2 - 4 * v
            if not touched or de > 0:
                continue
            if de == 0 and np.random.random() >= 0.5:
                continue
            mask[f] ^= 1
            for j in range(m):
                viol[face_edges[f, j]] ^= 1


def _violations(model, mask):
    viol = np.zeros(model.n_edges, dtype=np.uint8)
    for f in np.flatnonzero(mask):
        for e in model.face_edges[f]:
            viol[e] ^= 1
    return viol


# -- generic reference sweeps -------------------------------------------------

def bath_sweep(state: LatticeState, noise: NoiseModel, rule: UpdateRule,
               rng) -> LatticeState:
    """One attempt per enabled qubit: reference (uncompiled) implementation."""
    cx = state.ham.system.cx
    for sp in noise.z_species:
        model = compile_loop_sector(state.ham, sp)
        mask = state.z_err[sp]
        viol = _violations(model, mask)
        for f in range(mask.shape[0]):
            if noise.attempt_rate < 1.0 and rng.random() >= noise.attempt_rate:
                continue
            de = int(np.sum(2 - 4 * viol[model.face_edges[f]].astype(np.int64)))
            if rng.random() < rule.acceptance(de):
                mask[f] ^= 1
                for e in model.face_edges[f]:
                    viol[e] ^= 1
    for sp in noise.x_species:
        k = state.ham.system.degrees[sp]
        ptr, idx = cx.cofaces[k]
        mask = state.x_err[sp]
        cube_viol = np.zeros(cx.n_cells(k + 1), dtype=np.uint8)
        for f in np.flatnonzero(mask):
            for c in idx[ptr[f]:ptr[f + 1]]:
                cube_viol[c] ^= 1
        for f in range(mask.shape[0]):
            if noise.attempt_rate < 1.0 and rng.random() >= noise.attempt_rate:
                continue
            cells = idx[ptr[f]:ptr[f + 1]]
            de = MEMBRANE_CUBE_COST * int(
                np.sum(1 - 2 * cube_viol[cells].astype(np.int64)))
            if rng.random() < rule.acceptance(de):
                mask[f] ^= 1
                for c in cells:
                    cube_viol[c] ^= 1
    return state


def ca_decoder_sweep(state: LatticeState, rng, passes=1, z_species=(0,),
                     x_species=()) -> LatticeState:
    """Local zero-temperature decoding passes over the requested sectors."""
    rule = UpdateRule(None)
    cx = state.ham.system.cx
    for sp in x_species:
        k = state.ham.system.degrees[sp]
        ptr, idx = cx.cofaces[k]
        mask = state.x_err[sp]
        cube_viol = np.zeros(cx.n_cells(k + 1), dtype=np.uint8)
        for f in np.flatnonzero(mask):
            for c in idx[ptr[f]:ptr[f + 1]]:
                cube_viol[c] ^= 1
        for _ in range(passes):
            if not cube_viol.any():
                break
            for f in range(mask.shape[0]):
                cells = idx[ptr[f]:ptr[f + 1]]
                if not cube_viol[cells].any():
                    continue
                de = MEMBRANE_CUBE_COST * int(
                    np.sum(1 - 2 * cube_viol[cells].astype(np.int64)))
                if de > 0 or rng.random() >= rule.acceptance(de):
                    continue
                mask[f] ^= 1
                for c in cells:
                    cube_viol[c] ^= 1
    for sp in z_species:
        model = compile_loop_sector(state.ham, sp)
        mask = state.z_err[sp]
        viol = _violations(model, mask)
        seed = int(rng.integers(1, 2 ** 31))
        _seed_stream(seed)
        _loop_decode(mask, viol, model.face_edges, passes)
    return state


def correction_maps(ham: Hamiltonian, state: LatticeState, rng, passes=32,
                    z_species=(0,), x_species=()):
    """Recovery masks produced by local decoding, X-sector first."""
    work = state.copy()
    ca_decoder_sweep(work, rng, passes=passes, z_species=(),
                     x_species=x_species)
    ca_decoder_sweep(work, rng, passes=passes, z_species=z_species,
                     x_species=())
    return {"z": {sp: state.z_err[sp] ^ work.z_err[sp] for sp in state.z_err},
            "x": {sp: state.x_err[sp] ^ work.x_err[sp] for sp in state.x_err}}


# -- experiments --------------------------------------------------------------

@dataclass
class ExperimentResult:
    seed: int
    trials: int
    sweeps: int
    outcomes: list          # per trial: 0 ok, 1 logical failure, 2 ambiguous
    p_fail: float
    ci_lo: float
    ci_hi: float
    wall_time: float
    meta: dict = field(default_factory=dict)

    @property
    def failures(self):
        return sum(1 for o in self.outcomes if o != 0)


def _wilson_interval(k, n, z=1.96):
    if n == 0:
        return 0.0, 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return p, min(p, max(0.0, center - half)), max(p, min(1.0, center + half))


def _trial_seeds(seed, count):
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return [int(s) for s in gen.integers(1, 2 ** 31, size=count)]


def memory_experiment(ham: Hamiltonian, noise: NoiseModel, sweeps, trials,
                      species=0, seed=0, decoder_passes=None,
                      initial_sector=None) -> ExperimentResult:
    """Prepare, hold against the bath, decode, read out; report failures."""
    t0 = time.perf_counter()
    model = compile_loop_sector(ham, species)
    cx = ham.system.cx
    if decoder_passes is None:
        decoder_passes = 4 * max(cx.lengths)
    base = np.zeros(model.face_edges.shape[0], dtype=np.uint8)
    if initial_sector is not None:
        base = np.asarray(initial_sector, dtype=np.uint8).copy()
    target = logical_class(model, base)
    outcomes = []
    for trial_seed in _trial_seeds(seed, trials):
        mask = base.copy()
        viol = _violations(model, mask)
        _seed_stream(trial_seed)
        _loop_bath(mask, viol, model.face_edges, float(noise.beta),
                   int(sweeps), float(noise.attempt_rate))
        _loop_decode(mask, viol, model.face_edges, int(decoder_passes))
        if viol.any():
            outcomes.append(2)
        elif logical_class(model, mask) != target:
            outcomes.append(1)
        else:
            outcomes.append(0)
    k = sum(1 for o in outcomes if o != 0)
    p, lo, hi = _wilson_interval(k, trials)
    return ExperimentResult(
        seed=seed, trials=trials, sweeps=sweeps, outcomes=outcomes,
        p_fail=p, ci_lo=lo, ci_hi=hi, wall_time=time.perf_counter() - t0,
        meta={"beta": noise.beta, "species": species,
              "decoder_passes": decoder_passes,
              "lengths": tuple(int(x) for x in cx.lengths)})


def readout(ham: Hamiltonian, mask, species=0, seed=0, passes=None):
    """Decode a measured Z-basis error chain and return its logical sector.

    Returns (sector tuple, ambiguous flag); the flag is set when syndrome
    remains after the decoding budget.
    """
    model = compile_loop_sector(ham, species)
    if passes is None:
        passes = 4 * max(ham.system.cx.lengths)
    work = np.asarray(mask, dtype=np.uint8).copy()
    viol = _violations(model, work)
    _seed_stream(int(seed) % (2 ** 31 - 1) + 1)
    _loop_decode(work, viol, model.face_edges, int(passes))
    return logical_class(model, work), bool(viol.any())


def estimate_p_crit(ham: Hamiltonian, noise: NoiseModel, samples, species=0,
                    seed=0, burn_sweeps=50, gap_sweeps=5,
                    decoder_passes=None) -> ExperimentResult:
    """Gibbs-sample error chains; test single-flip dressed-logical fragility.

    A sample counts as critical when some single-cell flip changes the
    decoded logical class (or makes decoding ambiguous).
    """
    t0 = time.perf_counter()
    model = compile_loop_sector(ham, species)
    cx = ham.system.cx
    if decoder_passes is None:
        decoder_passes = 4 * max(cx.lengths)

    def decoded_class(mask, stream_seed):
        work = mask.copy()
        viol = _violations(model, work)
        _seed_stream(stream_seed)
        _loop_decode(work, viol, model.face_edges, int(decoder_passes))
        if viol.any():
            return None
        return logical_class(model, work)

    mask = np.zeros(model.face_edges.shape[0], dtype=np.uint8)
    viol = _violations(model, mask)
    seeds = _trial_seeds(seed, samples + 1)
    _seed_stream(seeds[-1])
    _loop_bath(mask, viol, model.face_edges, float(noise.beta),
               int(burn_sweeps), float(noise.attempt_rate))
    outcomes = []
    for i in range(samples):
        _seed_stream(seeds[i])
        _loop_bath(mask, viol, model.face_edges, float(noise.beta),
                   int(gap_sweeps), float(noise.attempt_rate))
        base = decoded_class(mask, seeds[i])
        critical = base is None
        if not critical:
            for f in range(mask.shape[0]):
                mask[f] ^= 1
                cls = decoded_class(mask, seeds[i])
                mask[f] ^= 1
                if cls != base:
                    critical = True
                    break
        outcomes.append(1 if critical else 0)
    k = sum(outcomes)
    p, lo, hi = _wilson_interval(k, samples)
    return ExperimentResult(
        seed=seed, trials=samples, sweeps=burn_sweeps, outcomes=outcomes,
        p_fail=p, ci_lo=lo, ci_hi=hi, wall_time=time.perf_counter() - t0,
        meta={"beta": noise.beta, "kind": "p_crit", "gap_sweeps": gap_sweeps,
              "lengths": tuple(int(x) for x in cx.lengths)})


# -- self-avoiding walks and surfaces -----------------------------------------

@dataclass
class SurfaceEntropyFit:
    mu: float               # connective constant estimate
    mu_err: float
    counts: list            # exact walk counts by length
    nodes: int              # enumeration work performed
    pivot_mu: float | None = None
    pivot_err: float | None = None
    tau0: float | None = None

    def __post_init__(self):
        if self.mu <= 1:
            raise ValueError("connective constant estimate must exceed 1")


@njit(cache=True)
def _saw_enumerate(dim, max_len, budget):
    side = 2 * max_len + 1
    strides = np.empty(dim, dtype=np.int64)
    strides[0] = 1
    for i in range(1, dim):
        strides[i] = strides[i - 1] * side
    size = strides[dim - 1] * side
    visited = np.zeros(size, dtype=np.uint8)
    moves = np.empty(2 * dim, dtype=np.int64)
    for i in range(dim):
        moves[2 * i] = strides[i]
        moves[2 * i + 1] = -strides[i]
    center = 0
    for i in range(dim):
        center += max_len * strides[i]
    counts = np.zeros(max_len + 1, dtype=np.int64)
    pos = np.empty(max_len + 1, dtype=np.int64)
    nxt = np.zeros(max_len + 1, dtype=np.int64)
    depth = 0
    pos[0] = center
    visited[center] = 1
    counts[0] = 1
    nodes = 0
    while depth >= 0:
        if depth < max_len and nxt[depth] < 2 * dim:
            mv = nxt[depth]
            nxt[depth] += 1
            p = pos[depth] + moves[mv]
            if visited[p]:
                continue
            nodes += 1
            if nodes > budget:
                return counts, -1
            depth += 1
            pos[depth] = p
            nxt[depth] = 0
            visited[p] = 1
            counts[depth] += 1
        else:
            visited[pos[depth]] = 0
            depth -= 1
    return counts, nodes


def _pivot_atmosphere(dim, length, samples, rng, burn=200, gap=5):
    """Endpoint-extension statistics of pivot-sampled walks."""
    walk = [tuple(i if j == 0 else 0 for j in range(dim))
            for i in range(length + 1)]
    occupied = set(walk)
    unit = [tuple((1 if j == i else 0) for j in range(dim)) for i in range(dim)]
    unit += [tuple(-u for u in v) for v in unit]
    values = []
    steps = burn + samples * gap
    done = 0
    while done < steps:
        done += 1
        pivot = int(rng.integers(1, length))
        perm = rng.permutation(dim)
        signs = rng.integers(0, 2, size=dim) * 2 - 1
        anchor = walk[pivot]
        head = walk[:pivot + 1]
        head_set = set(head)
        new_tail = []
        ok = True
        for p in walk[pivot + 1:]:
            q = tuple(anchor[i] + signs[i] * (p[perm[i]] - anchor[perm[i]])
                      for i in range(dim))
            if q in head_set:
                ok = False
                break
            new_tail.append(q)
        if ok and len(set(new_tail)) == len(new_tail):
            walk = head + new_tail
            occupied = set(walk)
        if done > burn and (done - burn) % gap == 0:
            end = walk[-1]
            free = sum(1 for v in unit
                       if tuple(end[i] + v[i] for i in range(dim))
                       not in occupied)
            values.append(free)
    mean = float(np.mean(values))
    err = float(np.std(values) / math.sqrt(len(values)))
    return mean, err


def _cell_faces(cell):
    pos, dirs = cell
    out = []
    for i, u in enumerate(dirs):
        rest = dirs[:i] + dirs[i + 1:]
        out.append((pos, rest))
        shifted = tuple(p + (1 if j == u else 0) for j, p in enumerate(pos))
        out.append((shifted, rest))
    return out


def _cell_neighbors(cell, dim):
    pos, dirs = cell
    out = set()
    for face_pos, face_dirs in _cell_faces(cell):
        for e in range(dim):
            if e in face_dirs:
                continue
            new_dirs = tuple(sorted(face_dirs + (e,)))
            back = tuple(p - (1 if j == e else 0)
                         for j, p in enumerate(face_pos))
            for cand in ((face_pos, new_dirs), (back, new_dirs)):
                if cand != cell:
                    out.add(cand)
    return out


def _surface_tau0(dim, max_cells):
    """Fit the area-growth constant of small closed boundary surfaces.

    Enumerates connected clusters of 3-cells rooted at the origin and bins
    them by boundary area; the fitted slope of log-count against area gives
    the growth rate e^{A/tau0}.
    """
    root = ((0,) * dim, (0, 1, 2))
    by_area = {}

    def record(cluster):
        face_count = {}
        for cell in cluster:
            for fc in _cell_faces(cell):
                face_count[fc] = face_count.get(fc, 0) + 1
        area = sum(1 for v in face_count.values() if v % 2)
        by_area[area] = by_area.get(area, 0) + 1

    def rec(cluster, candidates, banned):
        # each cluster is produced once: picking candidates[i] bans all
        # earlier candidates from the remainder of that subtree
        for i, cand in enumerate(candidates):
            grown = cluster | {cand}
            record(grown)
            if len(grown) < max_cells:
                new_banned = banned | set(candidates[:i + 1])
                tail = candidates[i + 1:]
                fresh = [c for c in sorted(_cell_neighbors(cand, dim))
                         if c not in grown and c not in new_banned
                         and c not in tail]
                rec(grown, tail + fresh, new_banned)

    record(frozenset([root]))
    rec(frozenset([root]), sorted(_cell_neighbors(root, dim)), set())
    areas = sorted(a for a in by_area if by_area[a] > 0)
    if len(areas) < 2:
        return None
    xs = np.array(areas, dtype=float)
    ys = np.log(np.array([by_area[a] for a in areas], dtype=float))
    slope = np.polyfit(xs, ys, 1)[0]
    if slope <= 0:
        return None
    return float(1.0 / slope)


def saw_entropy(dim, max_len=None, budget=40_000_000, pivot_length=40,
                pivot_samples=300, seed=0, surfaces=False,
                max_surface_cells=4) -> SurfaceEntropyFit:
    """Connective-constant estimate: exact counts plus pivot extrapolation."""
    if max_len is None:
        max_len = {2: 16, 3: 10, 4: 8}.get(dim, 7)
    counts, nodes = _saw_enumerate(dim, max_len, budget)
    if nodes < 0:
        raise ValueError("enumeration budget exceeded")
    ratios = [(n, counts[n] / counts[n - 1])
              for n in range(3, max_len + 1)]
    xs = np.array([1.0 / n for n, _ in ratios])
    ys = np.array([r for _, r in ratios])
    slope, intercept = np.polyfit(xs, ys, 1)
    mu = float(intercept)
    mu_err = float(abs(slope) / max_len)
    pivot_mu = pivot_err = None
    if pivot_samples > 0:
        rng = np.random.default_rng(seed)
        pivot_mu, pivot_err = _pivot_atmosphere(dim, pivot_length,
                                                pivot_samples, rng)
    tau0 = _surface_tau0(dim, max_surface_cells) if surfaces else None
    return SurfaceEntropyFit(mu=mu, mu_err=mu_err,
                             counts=[int(c) for c in counts], nodes=int(nodes),
                             pivot_mu=pivot_mu, pivot_err=pivot_err,
                             tau0=tau0)


# -- critical temperature formulas --------------------------------------------

@dataclass(frozen=True)
class CriticalEstimate:
    value: float
    stable: bool


def critical_temperature(k, big_d=None, eps0=1.0, mu=None) -> CriticalEstimate:
    """Peierls estimate 2*eps0/log(growth) for k-dimensional excitations.

    With mu given, uses the measured connective constant; otherwise the
    counting bound growth 2k(2D - k).  k=0 excitations are thermally
    unstable and return zero.
    """
    if k == 0:
        return CriticalEstimate(0.0, False)
    if mu is None:
        if big_d is None or 2 * big_d <= k:
            raise ValueError("need spatial dimension with 2D > k")
        mu = 2 * k * (2 * big_d - k)
    if mu <= 1:
        raise ValueError("growth constant must exceed 1")
    return CriticalEstimate(2.0 * eps0 / math.log(mu), True)


def model_critical_temperature(l, m, n, big_d, eps0=1.0) -> CriticalEstimate:
    """Minimum over the excitation dimensions of the (l, m, n) model."""
    ks = {l - 1, m - 1, n - 1, big_d - l - 2, big_d - m - 2, big_d - n - 2}
    estimates = [critical_temperature(k, big_d, eps0) for k in sorted(ks)]
    if any(not e.stable for e in estimates):
        return CriticalEstimate(0.0, False)
    return min(estimates, key=lambda e: e.value)
