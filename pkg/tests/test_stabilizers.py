"""Operator normal form, builders, and commutation.

The compose/commutes oracle is a dense matrix representation on small qubit
systems, built independently of the normal-form calculus.
"""

import numpy as np
import pytest

from cubicmem.cells import CellRef, build_hypercubic_torus
from cubicmem.stabilizers import (
    ZERO,
    MagicOperator,
    ParityCheck,
    PhasePoly,
    System,
    build_cubic,
    build_entangler,
    build_spt,
    build_trivial,
    commutes,
    compose,
    gauge,
    is_hermitian,
    syndrome,
)


def _to_matrix(op, sys_):
    vars_ = sorted(sys_.variables())
    dim = 2 ** len(vars_)
    mat = np.zeros((dim, dim))
    if op is ZERO:
        return mat
    for z in range(dim):
        ones = frozenset(v for i, v in enumerate(vars_) if (z >> i) & 1)
        coeff, new = op.apply(ones)
        if coeff:
            w = sum(1 << i for i, v in enumerate(vars_) if v in new)
            mat[w, z] = coeff
    return mat


def _random_op(sys_, rng):
    vars_ = sorted(sys_.variables())
    flips = {v for v in vars_ if rng.random() < 0.3}
    mons = []
    for _ in range(int(rng.integers(0, 4))):
        k = int(rng.integers(1, 4))
        picks = rng.choice(len(vars_), size=k, replace=False)
        mons.append(frozenset(vars_[i] for i in picks))
    checks = []
    for _ in range(int(rng.integers(0, 3))):
        k = int(rng.integers(1, 4))
        picks = rng.choice(len(vars_), size=k, replace=False)
        checks.append(ParityCheck(frozenset(vars_[i] for i in picks),
                                  int(rng.integers(0, 2))))
    return MagicOperator.make(sys_, flips=flips, phase=mons, checks=checks,
                              sign=int(rng.choice([-1, 1])))


@pytest.fixture(scope="module")
def t2():
    return build_hypercubic_torus(2, 2)


def test_phase_poly_degree_cap(t2):
    with pytest.raises(ValueError):
        PhasePoly([{(0, 0), (0, 1), (0, 2), (0, 3)}])


def test_orthogonal_projectors_give_zero(t2):
    sys_ = System(t2, (0,), "test")
    form = frozenset({(0, 0)})
    op = MagicOperator.make(sys_, checks=[ParityCheck(form, 0),
                                          ParityCheck(form, 1)])
    assert op is ZERO


def test_pure_x_squares_to_identity(t2):
    sys_ = System(t2, (0,), "test")
    op = MagicOperator.make(sys_, flips={(0, 0)})
    assert compose(op, op) == MagicOperator.identity(sys_)


def test_x_z_same_qubit_anticommute(t2):
    sys_ = System(t2, (0,), "test")
    x = MagicOperator.make(sys_, flips={(0, 0)})
    z = MagicOperator.make(sys_, phase=[{(0, 0)}])
    assert not commutes(x, z)
    assert commutes(x, MagicOperator.make(sys_, phase=[{(0, 1)}]))


def test_untwisted_star_plaquette_commute(t2):
    # vertex star and face boundary share an even number of edges
    sys_ = System(t2, (1,), "test")
    star = MagicOperator.make(
        sys_, flips={(0, int(f.index)) for f in t2.cofaces_of(CellRef(0, 0))})
    plaq = MagicOperator.make(
        sys_, phase=[{(0, int(e))} for e in t2.boundary[2][0]])
    assert commutes(star, plaq)


def test_monomial_action(t2):
    rng = np.random.default_rng(4)
    sys_ = System(t2, (0, 1), "test")
    vars_ = sorted(sys_.variables())
    for _ in range(200):
        op = _random_op(sys_, rng)
        if op is ZERO:
            continue
        ones = frozenset(v for v in vars_ if rng.random() < 0.5)
        coeff, new = op.apply(ones)
        assert coeff in (-1, 0, 1)
        assert new ^ ones in (frozenset(), op.flips)


def test_compose_commutes_match_matrix_oracle(t2):
    rng = np.random.default_rng(0)
    sys_ = System(t2, (0,), "test")  # 4 qubits: dense 16x16 matrices
    checked = 0
    while checked < 500:
        a, b = _random_op(sys_, rng), _random_op(sys_, rng)
        if a is ZERO or b is ZERO:
            continue
        ma, mb = _to_matrix(a, sys_), _to_matrix(b, sys_)
        assert np.array_equal(ma @ mb, _to_matrix(compose(a, b), sys_))
        assert commutes(a, b) == np.array_equal(ma @ mb, mb @ ma)
        checked += 1


def test_hermiticity_matches_matrix_oracle(t2):
    rng = np.random.default_rng(8)
    sys_ = System(t2, (0,), "test")
    for _ in range(200):
        op = _random_op(sys_, rng)
        if op is ZERO:
            continue
        mat = _to_matrix(op, sys_)
        assert is_hermitian(op) == np.array_equal(mat, mat.T)


def test_build_trivial_counts(t2):
    ham = build_trivial(t2, 1, 1, 1)
    assert len(ham.terms) == 12
    assert ham.is_commuting()
    assert all(is_hermitian(op) for _, op in ham.terms)


def test_entangler_squares_to_identity(t2):
    u = build_entangler(t2, 1, 1, 1)
    assert u.is_diagonal()
    assert compose(u, u) == MagicOperator.identity(u.system)
    # all-zeros configuration picks up phase +1
    assert u.apply(frozenset())[0] == 1


def test_entangler_degree_arithmetic():
    cx = build_hypercubic_torus(3, 2)
    with pytest.raises(ValueError):
        build_entangler(cx, 1, 1, 1)  # degrees sum to 3, need dim+1 = 4


def test_spt_is_conjugated_trivial(t2):
    u = build_entangler(t2, 1, 1, 1)
    triv = build_trivial(t2, 1, 1, 1)
    spt = build_spt(t2, 1, 1, 1)
    for (label, t0), (label2, ts) in zip(triv.terms, spt.terms):
        assert label == label2
        assert compose(compose(u, t0), u) == ts


def test_spt_untwisted_is_trivial(t2):
    spt = build_spt(t2, 1, 1, 1, twist=False)
    triv = build_trivial(t2, 1, 1, 1)
    assert [op for _, op in spt.terms] == [op for _, op in triv.terms]


def test_gauge_untwisted_round_trip(t2):
    # gauging the untwisted cluster Hamiltonian = gauging the paramagnet
    a = gauge(build_spt(t2, 1, 1, 1, twist=False))
    b = gauge(build_trivial(t2, 1, 1, 1))
    assert [op for _, op in a.terms] == [op for _, op in b.terms]
    assert build_cubic(t2, 1, 1, 1, twist=False).to_dict() == a.to_dict()


def test_untwisted_cubic_is_three_toric_codes(t2):
    ham = build_cubic(t2, 1, 1, 1, twist=False)
    for _, op in ham.terms:
        species = {v[0] for v in op.variables()}
        assert len(species) == 1  # species never couple without the twist
        assert op.phase.is_zero() or op.is_diagonal()
        assert not op.checks
    assert ham.is_commuting()


@pytest.mark.parametrize("L", [2, 3])
def test_cubic_2d_exhaustive_commutation(L):
    cx = build_hypercubic_torus(2, L)
    ham = build_cubic(cx, 1, 1, 1)
    assert len(ham.terms) == 6 * L * L
    assert ham.noncommuting_pairs() == []
    assert all(is_hermitian(op) for _, op in ham.terms)


@pytest.fixture(scope="module")
def cubic5():
    return build_cubic(build_hypercubic_torus(5, 2), 2, 2, 2)


def test_cubic_5d_gauss_structure(cubic5):
    cx = cubic5.system.cx
    gauss = [(lb, op) for lb, op in cubic5.terms if lb[0] == "gauss"]
    assert len(gauss) == 3 * cx.n_cells(1)
    for lb, op in gauss[:20]:
        assert len(op.flips) == 8  # flips live on the cofaces of the edge
        assert op.checks  # flux projectors dress every flip term


def test_gauged_5d_decoration_is_6_face_pairs():
    # before projector dressing, each edge term carries six two-face phase
    # monomials pairing the other two species
    cx = build_hypercubic_torus(5, 2)
    ham = gauge(build_spt(cx, 2, 2, 2))
    for lb, op in ham.terms[:20]:
        if lb[0] != "gauss":
            continue
        assert len(op.phase.monomials) == 6
        assert all(len(m) == 2 for m in op.phase.monomials)
        assert all({v[0] for v in m} == {1, 2} for m in op.phase.monomials)


def test_cubic_5d_flux_diagonal(cubic5):
    flux = [op for lb, op in cubic5.terms if lb[0] == "flux"]
    assert len(flux) == 3 * cubic5.system.cx.n_cells(3)
    for op in flux:
        assert op.is_diagonal() and not op.checks


def test_syndrome_clean_state(cubic5):
    assert all(v == 1 for v in syndrome(cubic5).values())


def test_syndrome_single_z_error_flips_4(cubic5):
    cx = cubic5.system.cx
    z = {0: np.zeros(cx.n_cells(2), np.uint8)}
    z[0][0] = 1
    labels = syndrome(cubic5, z_errors=z)
    flipped = [k for k, v in labels.items() if v == -1]
    # one Z error on a face flips the flip-term at each boundary edge
    assert len(flipped) == 4
    assert {k[:2] for k in flipped} == {("gauss", 0)}
    assert sorted(k[2] for k in flipped) == sorted(
        int(e) for e in cx.boundary[2][0])


def test_syndrome_single_x_error(cubic5):
    cx = cubic5.system.cx
    x = {0: np.zeros(cx.n_cells(2), np.uint8)}
    x[0][0] = 1
    labels = syndrome(cubic5, x_errors=x)
    flux_flipped = [k for k, v in labels.items() if v == -1]
    assert len(flux_flipped) == 6  # 2*(5-2) cofaces of a face
    assert {k[:2] for k in flux_flipped} == {("flux", 0)}
    zeroed = [k for k, v in labels.items() if v == 0]
    assert zeroed and {k[0] for k in zeroed} == {"gauss"}
    assert {k[1] for k in zeroed} == {1, 2}  # other species' projectors


def test_serialization_round_trip_shape(cubic5):
    data = cubic5.terms[0][1].to_dict()
    assert set(data) == {"sign", "flips", "phase", "checks"}
