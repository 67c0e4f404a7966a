"""Monomial operator algebra with phase polynomials and parity projectors.

Operators act on computational-basis configurations of qubits indexed by
(species, cell).  A term is: overall sign, a diagonal phase polynomial of
degree at most three, a multiset of parity projectors, and an X-flip set;
phases and projectors evaluate on the PRE-flip configuration.  Composition
stays in this normal form or collapses to the zero operator, which makes
exact commutation checks symbolic.

The builders produce the decoupled-paramagnet Hamiltonian, the triple-product
entangler, its conjugated cluster-phase Hamiltonian, the gauged model, and
the projector-dressed commuting gauge model with flux terms.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from cubicmem.cells import CellComplex
from cubicmem.cochains import _cup_table

MAX_PHASE_DEGREE = 3

_MARKER = 9  # temporary species index used to sweep projector anchor cells


class System:
    """Qubit layout: one register of cells per species at fixed degrees."""

    __slots__ = ("cx", "degrees", "stage")

    def __init__(self, cx: CellComplex, degrees, stage):
        self.cx = cx
        self.degrees = tuple(int(k) for k in degrees)
        self.stage = stage

    def n_qubits(self):
        return sum(self.cx.n_cells(k) for k in self.degrees)

    def variables(self):
        for i, k in enumerate(self.degrees):
            for c in range(self.cx.n_cells(k)):
                yield (i, c)

    def __eq__(self, other):
        return (isinstance(other, System) and self.cx is other.cx
                and self.degrees == other.degrees
                and self.stage == other.stage)

    def __repr__(self):
        return f"System(stage={self.stage!r}, degrees={self.degrees})"


# -- phase polynomials -------------------------------------------------------

class PhasePoly:
    """Mod-2 polynomial over qubit variables, stored as a monomial set."""

    __slots__ = ("monomials",)

    def __init__(self, monomials=()):
        acc = set()
        for m in monomials:
            m = frozenset(m)
            if len(m) > MAX_PHASE_DEGREE:
                raise ValueError(
                    f"phase monomial degree {len(m)} exceeds the cap "
                    f"{MAX_PHASE_DEGREE}")
            acc ^= {m}
        self.monomials = frozenset(acc)

    def __add__(self, other):
        out = PhasePoly.__new__(PhasePoly)
        out.monomials = self.monomials ^ other.monomials
        return out

    def __eq__(self, other):
        return isinstance(other, PhasePoly) and self.monomials == other.monomials

    def __hash__(self):
        return hash(self.monomials)

    def is_zero(self):
        return not self.monomials

    def variables(self):
        out = set()
        for m in self.monomials:
            out |= m
        return out

    def evaluate(self, ones) -> int:
        """Parity of the polynomial at the 0/1 point with support `ones`."""
        return sum(1 for m in self.monomials if m <= ones) % 2

    def shifted(self, flips):
        """The polynomial after the substitution v -> v xor 1 for v in flips."""
        acc = set()
        for m in self.monomials:
            hit = m & flips
            rest = m - hit
            # product over hit of (x xor 1) expands to all sub-monomials
            subs = [rest]
            for v in hit:
                subs = [s | {v} for s in subs] + subs
            for s in subs:
                acc ^= {frozenset(s)}
        out = PhasePoly.__new__(PhasePoly)
        out.monomials = frozenset(acc)
        return out

    def __repr__(self):
        return f"PhasePoly({len(self.monomials)} monomials)"


@dataclass(frozen=True)
class ParityCheck:
    """Projector onto configurations with sum(form) = const (mod 2)."""

    form: frozenset
    const: int

    def evaluate(self, ones) -> bool:
        return len(self.form & ones) % 2 == self.const


class _Zero:
    """The zero operator (annihilated by inconsistent projectors)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Zero"


ZERO = _Zero()


# -- normal form -------------------------------------------------------------

def _rref(checks):
    """Reduced row echelon form of the affine check system.

    Returns None when inconsistent, else a pivot -> (tail, const) map where
    tail contains no pivot variables.
    """
    pivots = {}
    for chk in checks:
        row, const = set(chk.form), chk.const
        while row:
            p = min(row)
            if p not in pivots:
                break
            tail, c = pivots[p]
            row ^= tail | {p}
            const ^= c
        if not row:
            if const:
                return None
            continue
        pivots[p] = (frozenset(row - {p}), const)
    # back-substitute so no tail mentions a pivot
    changed = True
    while changed:
        changed = False
        for p, (tail, c) in list(pivots.items()):
            hit = tail & pivots.keys()
            if not hit:
                continue
            row, const = set(tail), c
            for q in hit:
                t2, c2 = pivots[q]
                row ^= t2 | {q}
                const ^= c2
            pivots[p] = (frozenset(row), const)
            changed = True
    return pivots


def _reduce_phase(phase: PhasePoly, pivots):
    """Substitute each pivot variable by its tail expression, mod 2."""
    if not pivots:
        return phase
    mons = set(phase.monomials)
    while True:
        todo = [m for m in mons if m & pivots.keys()]
        if not todo:
            break
        for m in todo:
            if m not in mons:
                continue
            mons ^= {m}
            p = min(m & pivots.keys())
            tail, c = pivots[p]
            rest = m - {p}
            for t in tail:
                mons ^= {rest | {t}}
            if c:
                mons ^= {rest}
    out = PhasePoly.__new__(PhasePoly)
    out.monomials = frozenset(mons)
    return out


class MagicOperator:
    """A monomial operator in canonical form; build via `make`."""

    __slots__ = ("system", "flips", "phase", "checks", "sign")

    def __init__(self, system, flips, phase, checks, sign):
        self.system = system
        self.flips = flips
        self.phase = phase
        self.checks = checks
        self.sign = sign

    @classmethod
    def make(cls, system, flips=(), phase=(), checks=(), sign=1):
        """Canonicalize; returns ZERO when the projectors are inconsistent."""
        flips = frozenset(flips)
        if isinstance(phase, PhasePoly):
            poly = phase
        else:
            poly = PhasePoly(phase)
        pivots = _rref(checks)
        if pivots is None:
            return ZERO
        poly = _reduce_phase(poly, pivots)
        if frozenset() in poly.monomials:
            sign = -sign
            mons = poly.monomials - {frozenset()}
            poly = PhasePoly.__new__(PhasePoly)
            poly.monomials = frozenset(mons)
        canon = sorted((tuple(sorted(tail | {p})), const)
                       for p, (tail, const) in pivots.items())
        checks = tuple(ParityCheck(frozenset(form), const)
                       for form, const in canon)
        return cls(system, flips, poly, checks, int(sign))

    @classmethod
    def identity(cls, system):
        return cls.make(system)

    def variables(self):
        out = set(self.flips) | self.phase.variables()
        for chk in self.checks:
            out |= chk.form
        return out

    def is_diagonal(self):
        return not self.flips

    def __eq__(self, other):
        if not isinstance(other, MagicOperator):
            return NotImplemented
        return (self.system == other.system and self.flips == other.flips
                and self.phase == other.phase and self.checks == other.checks
                and self.sign == other.sign)

    def __hash__(self):
        return hash((self.flips, self.phase, self.checks, self.sign))

    def apply(self, ones):
        """Action on a basis configuration: (coefficient, new support set)."""
        for chk in self.checks:
            if not chk.evaluate(ones):
                return 0, ones
        coeff = self.sign * (-1) ** self.phase.evaluate(ones)
        return coeff, frozenset(ones) ^ self.flips

    def to_dict(self):
        return {
            "sign": self.sign,
            "flips": sorted(map(list, self.flips)),
            "phase": sorted(sorted(map(list, m)) for m in self.phase.monomials),
            "checks": [{"form": sorted(map(list, c.form)), "const": c.const}
                       for c in self.checks],
        }

    def __repr__(self):
        return (f"MagicOperator(sign={self.sign:+d}, |flips|={len(self.flips)},"
                f" |phase|={len(self.phase.monomials)},"
                f" |checks|={len(self.checks)})")


def compose(a, b):
    """The operator a∘b (apply b first); ZERO absorbs."""
    if a is ZERO or b is ZERO:
        return ZERO
    if a.system != b.system:
        raise ValueError("operators act on different systems")
    phase = b.phase + a.phase.shifted(b.flips)
    checks = list(b.checks)
    for chk in a.checks:
        checks.append(ParityCheck(chk.form,
                                  chk.const ^ (len(chk.form & b.flips) % 2)))
    return MagicOperator.make(a.system, a.flips ^ b.flips, phase, checks,
                              a.sign * b.sign)


def commutes(a, b) -> bool:
    """Exact commutation via normal-form comparison of both compositions."""
    if a is ZERO or b is ZERO:
        return True
    # disjoint-variable fast path: diagonal data always commutes, so only a
    # flip hitting the other term's variables can obstruct
    if not (a.flips & b.variables()) and not (b.flips & a.variables()):
        return True
    ab, ba = compose(a, b), compose(b, a)
    if ab is ZERO or ba is ZERO:
        return ab is ba
    return ab == ba


def is_hermitian(op) -> bool:
    """Self-adjointness: phase and checks invariant under the flip."""
    if op is ZERO:
        return True
    conj = MagicOperator.make(
        op.system, op.flips, op.phase.shifted(op.flips),
        [ParityCheck(c.form, c.const ^ (len(c.form & op.flips) % 2))
         for c in op.checks],
        op.sign)
    return conj == op


# -- Hamiltonians ------------------------------------------------------------

@dataclass
class Hamiltonian:
    """Labelled sum of monomial terms with model parameters."""

    system: System
    terms: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, label, op):
        if op is not ZERO:
            self.terms.append((label, op))

    def operators(self):
        return [op for _, op in self.terms]

    def noncommuting_pairs(self, limit=None):
        """All term pairs that fail to commute (exhaustive; var-bucketed)."""
        by_var = defaultdict(set)
        for idx, (_, op) in enumerate(self.terms):
            for v in op.variables():
                by_var[v].add(idx)
        candidates = set()
        for bucket in by_var.values():
            bucket = sorted(bucket)
            for i, x in enumerate(bucket):
                for y in bucket[i + 1:]:
                    candidates.add((x, y))
        bad = []
        for x, y in sorted(candidates):
            if not commutes(self.terms[x][1], self.terms[y][1]):
                bad.append((self.terms[x][0], self.terms[y][0]))
                if limit and len(bad) >= limit:
                    return bad
        return bad

    def is_commuting(self):
        return not self.noncommuting_pairs(limit=1)

    def to_dict(self):
        return {"params": self.params,
                "terms": [{"label": list(map(str, label)),
                           "op": op.to_dict()} for label, op in self.terms]}


def _check_degrees(cx, l, m, n, twist):
    for k in (l, m, n):
        if not 1 <= k <= cx.dim:
            raise ValueError(f"field degree {k} out of range for dim {cx.dim}")
    if twist and l + m + n != cx.dim + 1:
        raise ValueError(
            f"cubic coupling needs degrees summing to dim+1 = {cx.dim + 1}, "
            f"got {l}+{m}+{n}")


# -- symbolic triple cup -----------------------------------------------------

def _sym_triple_cup(cx, degs, fns):
    """XOR-accumulated monomials of the integral of a triple cup product.

    Each slot function maps a cell of the slot degree to a list of monomials
    (its symbolic value there); an indicator yields the empty monomial.
    """
    d1, d2, d3 = degs
    if d1 + d2 + d3 != cx.dim:
        raise ValueError("slot degrees must sum to the complex dimension")
    key = ("tripleidx", d1, d2, d3)
    if key not in cx._cup_cache:
        _, in1_a, in2_a, _ = _cup_table(cx, d1 + d2, d3)
        _, in1_b, in2_b, _ = _cup_table(cx, d1, d2)
        pairs = defaultdict(list)       # p -> [(c1, c2)]
        by_c1 = defaultdict(list)       # c1 -> [(p, c2)]
        by_c2 = defaultdict(list)       # c2 -> [(p, c1)]
        for p, c1, c2 in zip(_cup_table(cx, d1, d2)[0], in1_b, in2_b):
            p, c1, c2 = int(p), int(c1), int(c2)
            pairs[p].append((c1, c2))
            by_c1[c1].append((p, c2))
            by_c2[c2].append((p, c1))
        a_by_p = defaultdict(list)      # p -> [q]
        a_by_q = defaultdict(list)      # q -> [p]
        for p, q in zip(in1_a, in2_a):
            a_by_p[int(p)].append(int(q))
            a_by_q[int(q)].append(int(p))
        cx._cup_cache[key] = (pairs, by_c1, by_c2, a_by_p, a_by_q)
    pairs, by_c1, by_c2, a_by_p, a_by_q = cx._cup_cache[key]
    f1, f2, f3 = fns
    acc = set()

    def combine(c1, c2, q):
        nonlocal acc
        v1 = f1(c1)
        if not v1:
            return
        v2 = f2(c2)
        if not v2:
            return
        v3 = f3(q)
        if not v3:
            return
        for m1 in v1:
            for m2 in v2:
                for m3 in v3:
                    acc ^= {m1 | m2 | m3}

    ind1 = getattr(f1, "indicator_cell", None)
    ind2 = getattr(f2, "indicator_cell", None)
    ind3 = getattr(f3, "indicator_cell", None)
    if ind1 is not None:
        for p, c2 in by_c1[ind1]:
            for q in a_by_p[p]:
                combine(ind1, c2, q)
    elif ind2 is not None:
        for p, c1 in by_c2[ind2]:
            for q in a_by_p[p]:
                combine(c1, ind2, q)
    elif ind3 is not None:
        for p in a_by_q[ind3]:
            for c1, c2 in pairs[p]:
                combine(c1, c2, ind3)
    else:
        for p, qs in a_by_p.items():
            for c1, c2 in pairs[p]:
                for q in qs:
                    combine(c1, c2, q)
    return frozenset(acc)


def _slot_indicator(cell0):
    empty = [frozenset()]

    def fn(cell):
        return empty if cell == cell0 else []

    fn.indicator_cell = cell0
    return fn


def _slot_var(species):
    return lambda cell: [frozenset({(species, cell)})]


def _slot_dvar(cx, species, degree):
    """Symbolic coboundary of the species field, evaluated on (degree+1)-cells."""
    bnd = cx.boundary[degree + 1]

    def fn(cell):
        return [frozenset({(species, int(f))}) for f in bnd[cell]]

    return fn


def _coface_set(cx, k, cell):
    ptr, idx = cx.cofaces[k]
    return {int(f) for f in idx[ptr[cell]:ptr[cell + 1]]}


# -- builders ----------------------------------------------------------------

def matter_system(cx, l, m, n):
    return System(cx, (l - 1, m - 1, n - 1), "matter")


def gauge_system(cx, l, m, n):
    return System(cx, (l, m, n), "gauge")


def build_trivial(cx, l, m, n) -> Hamiltonian:
    """Decoupled paramagnet: one -X term per matter qubit."""
    _check_degrees(cx, l, m, n, twist=False)
    sys_ = matter_system(cx, l, m, n)
    ham = Hamiltonian(sys_, params={"l": l, "m": m, "n": n, "twist": False,
                                    "stage": "matter"})
    for i in range(3):
        for c in range(cx.n_cells(sys_.degrees[i])):
            ham.add(("x", i, c),
                    MagicOperator.make(sys_, flips={(i, c)}, sign=-1))
    return ham


def build_entangler(cx, l, m, n):
    """Diagonal unitary with the cubic triple-product phase; squares to one."""
    _check_degrees(cx, l, m, n, twist=True)
    sys_ = matter_system(cx, l, m, n)
    mons = _sym_triple_cup(
        cx, (l - 1, m, n),
        (_slot_var(0), _slot_dvar(cx, 1, m - 1), _slot_dvar(cx, 2, n - 1)))
    return MagicOperator.make(sys_, phase=mons)


def _matter_decoration(cx, l, m, n, species, cell):
    """Phase picked up by the species' X term under entangler conjugation."""
    slots = {
        0: ((l - 1, m, n), (_slot_indicator(cell), _slot_dvar(cx, 1, m - 1),
                            _slot_dvar(cx, 2, n - 1))),
        1: ((l - 1, m, n), (_slot_var(0), None, _slot_dvar(cx, 2, n - 1))),
        2: ((l - 1, m, n), (_slot_var(0), _slot_dvar(cx, 1, m - 1), None)),
    }
    if species == 0:
        degs, fns = slots[0]
        return _sym_triple_cup(cx, degs, fns)
    # flipping one matter qubit of species 1 or 2 shifts the corresponding
    # coboundary slot by the indicator of the qubit's cofaces
    degs, fns = slots[species]
    k = (m if species == 1 else n) - 1
    cof = _coface_set(cx, k, cell)
    empty = [frozenset()]
    ind = lambda c: empty if c in cof else []
    fns = tuple(ind if f is None else f for f in fns)
    return _sym_triple_cup(cx, degs, fns)


def build_spt(cx, l, m, n, twist=True) -> Hamiltonian:
    """Cluster-phase Hamiltonian: the paramagnet conjugated by the entangler."""
    _check_degrees(cx, l, m, n, twist)
    sys_ = matter_system(cx, l, m, n)
    ham = Hamiltonian(sys_, params={"l": l, "m": m, "n": n, "twist": twist,
                                    "stage": "matter"})
    for i in range(3):
        for c in range(cx.n_cells(sys_.degrees[i])):
            phase = (_matter_decoration(cx, l, m, n, i, c) if twist
                     else frozenset())
            ham.add(("x", i, c),
                    MagicOperator.make(sys_, flips={(i, c)}, phase=phase,
                                       sign=-1))
    return ham


def _gauge_decoration(cx, l, m, n, species, cell):
    """CZ decoration of a gauged flip term: quadratic in the other species."""
    if species == 0:
        return _sym_triple_cup(cx, (l - 1, m, n),
                               (_slot_indicator(cell), _slot_var(1),
                                _slot_var(2)))
    if species == 1:
        return _sym_triple_cup(cx, (l, m - 1, n),
                               (_slot_var(0), _slot_indicator(cell),
                                _slot_var(2)))
    return _sym_triple_cup(cx, (l, m, n - 1),
                           (_slot_var(0), _slot_var(1),
                            _slot_indicator(cell)))


def gauge(ham: Hamiltonian) -> Hamiltonian:
    """Map matter terms to flip-of-cofaces terms and append flux terms."""
    if ham.params.get("stage") != "matter":
        raise ValueError("gauge map expects a matter-stage Hamiltonian")
    cx = ham.system.cx
    l, m, n = ham.params["l"], ham.params["m"], ham.params["n"]
    twist = ham.params["twist"]
    sys_ = gauge_system(cx, l, m, n)
    out = Hamiltonian(sys_, params={"l": l, "m": m, "n": n, "twist": twist,
                                    "stage": "gauge"})
    degrees = (l, m, n)
    for i in range(3):
        k = degrees[i] - 1
        for c in range(cx.n_cells(k)):
            flips = {(i, f) for f in _coface_set(cx, k, c)}
            phase = (_gauge_decoration(cx, l, m, n, i, c) if twist
                     else frozenset())
            out.add(("gauss", i, c),
                    MagicOperator.make(sys_, flips=flips, phase=phase,
                                       sign=-1))
    for i in range(3):
        k = degrees[i]
        if k + 1 > cx.dim:
            continue
        for f in range(cx.n_cells(k + 1)):
            phase = [frozenset({(i, int(e))}) for e in cx.boundary[k + 1][f]]
            out.add(("flux", i, f),
                    MagicOperator.make(sys_, phase=phase, sign=-1))
    return out


def _projector_forms(cx, l, m, n, species, cell):
    """Linear forms whose zero-flux projectors dress a flip term."""
    marker = _slot_var(_MARKER)
    recipes = {
        0: [((l - 1, m - 1, n + 1),
             (_slot_indicator(cell), marker, _slot_dvar(cx, 2, n)), 2),
            ((l - 1, m + 1, n - 1),
             (_slot_indicator(cell), _slot_dvar(cx, 1, m), marker), 1)],
        1: [((l - 1, m - 1, n + 1),
             (marker, _slot_indicator(cell), _slot_dvar(cx, 2, n)), 2),
            ((l + 1, m - 1, n - 1),
             (_slot_dvar(cx, 0, l), _slot_indicator(cell), marker), 0)],
        2: [((l - 1, m + 1, n - 1),
             (marker, _slot_dvar(cx, 1, m), _slot_indicator(cell)), 1),
            ((l + 1, m - 1, n - 1),
             (_slot_dvar(cx, 0, l), marker, _slot_indicator(cell)), 0)],
    }
    checks = []
    for degs, fns, flux_species in recipes[species]:
        grouped = defaultdict(set)
        for mon in _sym_triple_cup(cx, degs, fns):
            anchor = next(v for v in mon if v[0] == _MARKER)
            var = next(v for v in mon if v[0] != _MARKER)
            grouped[anchor[1]] ^= {var}
        for form in grouped.values():
            if form:
                checks.append(ParityCheck(frozenset(form), 0))
    return checks


def build_cubic(cx, l, m, n, twist=True) -> Hamiltonian:
    """The commuting gauge model: projector-dressed flip terms plus flux."""
    _check_degrees(cx, l, m, n, twist)
    base = gauge(build_spt(cx, l, m, n, twist=twist))
    if not twist:
        return base
    out = Hamiltonian(base.system, params=dict(base.params))
    for label, op in base.terms:
        if label[0] != "gauss":
            out.add(label, op)
            continue
        _, i, c = label
        checks = list(op.checks) + _projector_forms(cx, l, m, n, i, c)
        out.add(label, MagicOperator.make(op.system, flips=op.flips,
                                          phase=op.phase, checks=checks,
                                          sign=op.sign))
    return out


# -- syndromes ---------------------------------------------------------------

def syndrome(ham: Hamiltonian, x_errors=None, z_errors=None):
    """Eigenvalue labels of every term on an error-applied ground state.

    x_errors / z_errors map species index -> bit vector over that species'
    cells.  Flip-of-cofaces terms report 0 when one of their projectors is
    violated by the X error, else the sign picked up from the Z error; flux
    terms report the parity of the X error around their boundary.
    """
    x_ones = set()
    for i, bits in (x_errors or {}).items():
        x_ones |= {(i, int(c)) for c in np.flatnonzero(np.asarray(bits))}
    z_ones = set()
    for i, bits in (z_errors or {}).items():
        z_ones |= {(i, int(c)) for c in np.flatnonzero(np.asarray(bits))}
    labels = {}
    for label, op in ham.terms:
        if op.is_diagonal():
            labels[label] = (-1) ** op.phase.evaluate(x_ones)
        else:
            if any(len(chk.form & x_ones) % 2 != 0 for chk in op.checks):
                labels[label] = 0
            else:
                labels[label] = (-1) ** (len(op.flips & z_ones) % 2)
    return labels
