"""Bath dynamics, decoding, experiments, walk entropy, temperature formulas.

Frozen oracle values: the 2d self-avoiding walk counts up to length 10 were
taken from independent hand enumeration at small lengths (4, 12, 36, 100)
extended by the recursion itself; the exact lattice energy ledger (8 for a
lone loop error, 30 = 6*2 + 18*1 for a lone membrane error) was measured
from full syndrome evaluation before the sweep kernels were written.
"""

import itertools
import math

import numpy as np
import pytest

from cubicmem.cells import build_hypercubic_torus
from cubicmem.logical import loop_toric_4d
from cubicmem.stabilizers import build_cubic
from cubicmem.thermal import (
    LOOP_EDGE_COST,
    MEMBRANE_CUBE_COST,
    LatticeState,
    NoiseModel,
    SurfaceEntropyFit,
    UpdateRule,
    _violations,
    bath_sweep,
    ca_decoder_sweep,
    compile_loop_sector,
    correction_maps,
    critical_temperature,
    estimate_p_crit,
    logical_class,
    memory_experiment,
    model_critical_temperature,
    readout,
    saw_entropy,
    transition_rate_table,
)


@pytest.fixture(scope="module")
def cubic5():
    return build_cubic(build_hypercubic_torus(5, 2), 2, 2, 2)


@pytest.fixture(scope="module")
def toric4():
    return loop_toric_4d(build_hypercubic_torus(4, 2))


# -- rule table ---------------------------------------------------------------

def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(beta=-1.0)
    with pytest.raises(ValueError):
        NoiseModel(beta=1.0, attempt_rate=1.5)


def test_rate_table_exact_values():
    beta = 0.7
    table = transition_rate_table(beta)
    assert table["loop_create_0_to_4"] == math.exp(-8 * beta)
    assert table["loop_deform_1_to_3"] == math.exp(-4 * beta)
    assert table["membrane_create_0_to_6"] == math.exp(-36 * beta)
    assert table["membrane_deform_1_to_5"] == math.exp(-24 * beta)
    assert table["membrane_deform_2_to_4"] == math.exp(-12 * beta)
    assert table["tie"] == 0.5


def test_detailed_balance():
    for kind in ("metropolis", "heat-bath"):
        rule = UpdateRule(1.3, kind=kind)
        for de in range(-10, 11):
            fwd, bwd = rule.acceptance(de), rule.acceptance(-de)
            assert math.isclose(fwd / bwd, math.exp(-1.3 * de),
                                rel_tol=1e-12)


def test_zero_temperature_rule():
    rule = UpdateRule(None)
    assert rule.acceptance(-4) == 1.0
    assert rule.acceptance(0) == 0.5
    assert rule.acceptance(2) == 0.0
    with pytest.raises(ValueError):
        UpdateRule(1.0, kind="glauber-ish")


# -- exact lattice energies ---------------------------------------------------

def test_loop_error_energy_ledger(cubic5):
    cx = cubic5.system.cx
    state = LatticeState(cubic5)
    assert state.energy() == 0
    state.z_err[0][0] = 1
    assert state.energy() == 4 * LOOP_EDGE_COST  # four violated edge terms
    # a neighboring face sharing one edge: 1 -> 3 violated edges, cost 4
    edges0 = set(int(e) for e in cx.boundary[2][0])
    g = next(f for f in range(1, cx.n_cells(2))
             if len(edges0 & set(int(e) for e in cx.boundary[2][f])) == 1)
    state.z_err[0][g] = 1
    assert state.energy() == 4 * LOOP_EDGE_COST + 4


def test_membrane_error_energy_ledger(cubic5):
    # exact syndrome accounting: 6 flux terms flipped (cost 2 each) and 18
    # projector-zeroed complementary Gauss terms (cost 1 each); the additive
    # per-cube table in transition_rate_table counts 4 projector units per
    # cube without sharing, giving the 6-per-cube dilute figure
    state = LatticeState(cubic5)
    state.x_err[0][0] = 1
    labels = state.syndrome()
    flipped = [k for k, v in labels.items() if v == -1]
    zeroed = [k for k, v in labels.items() if v == 0]
    assert len(flipped) == 6 and all(k[0] == "flux" for k in flipped)
    assert len(zeroed) == 18 and all(k[0] == "gauss" for k in zeroed)
    assert {k[1] for k in zeroed} == {1, 2}
    assert state.energy() == 2 * 6 + 1 * 18
    assert MEMBRANE_CUBE_COST == 2 + 4


def test_incremental_matches_full_energy(toric4):
    model = compile_loop_sector(toric4)
    state = LatticeState(toric4)
    mask = state.z_err[0]
    viol = np.zeros(model.n_edges, dtype=np.uint8)
    rng = np.random.default_rng(12)
    energy = state.energy()
    for _ in range(10_000):
        f = int(rng.integers(0, mask.shape[0]))
        de = int(np.sum(2 - 4 * viol[model.face_edges[f]].astype(np.int64)))
        mask[f] ^= 1
        for e in model.face_edges[f]:
            viol[e] ^= 1
        new_energy = state.energy()
        assert new_energy - energy == de
        energy = new_energy


# -- sweeps and decoding ------------------------------------------------------

def test_css_decoupling(cubic5):
    state = LatticeState(cubic5)
    noise = NoiseModel(beta=0.3, z_species=(0, 1, 2), x_species=())
    rng = np.random.default_rng(5)
    for _ in range(3):
        bath_sweep(state, noise, UpdateRule(noise.beta), rng)
    assert any(state.z_err[sp].any() for sp in range(3))
    labels = state.syndrome()
    assert all(v == 1 for k, v in labels.items() if k[0] == "flux")
    assert all(not state.x_err[sp].any() for sp in range(3))


def test_decoder_cleans_single_errors(cubic5):
    state = LatticeState(cubic5)
    state.z_err[1][5] = 1
    state.x_err[2][7] = 1
    ca_decoder_sweep(state, np.random.default_rng(1), passes=16,
                     z_species=(1,), x_species=(2,))
    assert state.energy() == 0
    assert not state.z_err[1].any() and not state.x_err[2].any()


def test_decoder_empty_syndrome_is_noop(toric4):
    cx = toric4.system.cx
    state = LatticeState(toric4)
    torus = [cx.cube_index(2, coords, (0, 1)) for coords in
             itertools.product(range(2), range(2), (0,), (0,))]
    state.z_err[0][torus] = 1
    before = state.z_err[0].copy()
    ca_decoder_sweep(state, np.random.default_rng(3), passes=8)
    assert np.array_equal(state.z_err[0], before)


def test_correction_locality_and_factorization():
    ham = loop_toric_4d(build_hypercubic_torus(4, 4))
    cx = ham.system.cx
    passes = 4
    spots = [cx.cube_index(2, (0, 0, 0, 0), (0, 1)),
             cx.cube_index(2, (2, 2, 2, 2), (2, 3))]
    state = LatticeState(ham)
    for f in spots:
        state.z_err[0][f] = 1
    rec = correction_maps(ham, state, np.random.default_rng(6),
                          passes=passes)["z"][0]
    # residual error plus recovery must be syndrome-free and trivial
    residual = state.z_err[0] ^ rec
    model = compile_loop_sector(ham)
    assert not _violations(model, residual).any()
    assert logical_class(model, residual) == (0,) * model.reps.shape[0]

    def torus_dist(a, b):
        ca, _ = cx.cube_info(2, int(a))
        cb, _ = cx.cube_info(2, int(b))
        return max(min(abs(x - y), 4 - abs(x - y)) for x, y in zip(ca, cb))

    # every recovery face stays within a passes-radius ball of one error
    for f in np.flatnonzero(rec):
        assert min(torus_dist(f, s) for s in spots) <= passes + 1


# -- experiments --------------------------------------------------------------

def test_memory_experiment_reproducible(toric4):
    noise = NoiseModel(beta=1.0)
    a = memory_experiment(toric4, noise, sweeps=50, trials=40, seed=11)
    b = memory_experiment(toric4, noise, sweeps=50, trials=40, seed=11)
    assert a.outcomes == b.outcomes
    assert (a.p_fail, a.ci_lo, a.ci_hi) == (b.p_fail, b.ci_lo, b.ci_hi)


def test_memory_experiment_interval_consistent(toric4):
    res = memory_experiment(toric4, NoiseModel(beta=0.5), sweeps=30,
                            trials=60, seed=2)
    k = sum(1 for o in res.outcomes if o != 0)
    assert res.failures == k
    assert res.p_fail == pytest.approx(k / 60)
    assert 0.0 <= res.ci_lo <= res.p_fail <= res.ci_hi <= 1.0


def test_memory_hot_bath_scrambles(toric4):
    res = memory_experiment(toric4, NoiseModel(beta=0.0), sweeps=50,
                            trials=50, seed=3)
    assert res.p_fail >= 0.9  # six logical bits depolarize almost surely


def test_memory_encoded_sector_preserved_when_cold():
    ham = loop_toric_4d(build_hypercubic_torus(4, 3))
    cx = ham.system.cx
    model = compile_loop_sector(ham)
    base = np.zeros(cx.n_cells(2), dtype=np.uint8)
    torus = [cx.cube_index(2, coords, (0, 1)) for coords in
             itertools.product(range(3), range(3), (0,), (0,))]
    base[torus] = 1
    res = memory_experiment(ham, NoiseModel(beta=3.0), sweeps=30, trials=30,
                            seed=8, initial_sector=base)
    assert res.p_fail == 0.0


def test_readout_sector_roundtrip():
    ham = loop_toric_4d(build_hypercubic_torus(4, 3))
    cx = ham.system.cx
    model = compile_loop_sector(ham)
    mask = np.zeros(cx.n_cells(2), dtype=np.uint8)
    torus = [cx.cube_index(2, coords, (0, 1)) for coords in
             itertools.product(range(3), range(3), (0,), (0,))]
    mask[torus] = 1
    target = logical_class(model, mask)
    assert target != (0,) * model.reps.shape[0]
    sector, ambiguous = readout(ham, mask)
    assert sector == target and not ambiguous
    # one correctable error on top: same sector
    mask2 = mask.copy()
    mask2[0] ^= 1
    sector2, ambiguous2 = readout(ham, mask2)
    assert sector2 == target and not ambiguous2
    # a second noncontractible sheet moves the sector
    other = [cx.cube_index(2, coords, (2, 3)) for coords in
             itertools.product((0,), (0,), range(3), range(3))]
    mask3 = mask.copy()
    mask3[other] ^= 1
    sector3, _ = readout(ham, mask3)
    assert sector3 != target


def test_pcrit_limits_and_monotonicity():
    ham2 = loop_toric_4d(build_hypercubic_torus(4, 2))
    ham3 = loop_toric_4d(build_hypercubic_torus(4, 3))
    hot = estimate_p_crit(ham2, NoiseModel(beta=0.0), samples=40, seed=5)
    assert hot.p_fail >= 0.9
    cold3 = estimate_p_crit(ham3, NoiseModel(beta=6.0), samples=40, seed=5)
    assert cold3.p_fail == 0.0
    p2 = estimate_p_crit(ham2, NoiseModel(beta=2.0), samples=60, seed=5)
    p3 = estimate_p_crit(ham3, NoiseModel(beta=2.0), samples=60, seed=5)
    assert p3.p_fail <= p2.p_fail


# -- walk entropy and critical temperature ------------------------------------

def test_saw_counts_2d_oracle():
    fit = saw_entropy(2, max_len=10, pivot_samples=0)
    assert fit.counts == [1, 4, 12, 36, 100, 284, 780, 2172, 5916, 16268,
                          44100]


def test_saw_mu_2d_near_known_value():
    fit = saw_entropy(2, max_len=16, pivot_samples=0)
    assert abs(fit.mu - 2.64) < 0.1


def test_saw_mu_brackets_4d_5d():
    fit4 = saw_entropy(4, seed=1)
    assert 6.0 <= fit4.mu <= 7.5
    assert 6.0 <= fit4.pivot_mu <= 7.5
    fit5 = saw_entropy(5, seed=1)
    assert 8.0 <= fit5.mu <= 9.5
    assert 8.0 <= fit5.pivot_mu <= 9.5


def test_saw_budget_guard():
    with pytest.raises(ValueError):
        saw_entropy(4, max_len=10, budget=1000, pivot_samples=0)


def test_saw_fit_rejects_degenerate_mu():
    with pytest.raises(ValueError):
        SurfaceEntropyFit(mu=0.9, mu_err=0.0, counts=[1], nodes=1)


def test_surface_growth_constant_positive():
    fit = saw_entropy(4, max_len=6, pivot_samples=0, surfaces=True)
    assert fit.tau0 is not None and fit.tau0 > 0


def test_critical_temperature_formulas():
    est = critical_temperature(1, mu=8.84)
    assert est.stable
    assert abs(est.value - 2.0 / math.log(8.84)) < 1e-12
    assert abs(est.value - 0.918) < 0.01
    direct = critical_temperature(1, 5)
    assert abs(direct.value - 2.0 / math.log(18)) < 1e-12
    unstable = critical_temperature(0)
    assert unstable.value == 0.0 and not unstable.stable
    with pytest.raises(ValueError):
        critical_temperature(1, mu=0.5)
    with pytest.raises(ValueError):
        critical_temperature(3, 1)


def test_model_critical_temperature_minimum():
    est = model_critical_temperature(2, 2, 2, 5)
    assert est.stable
    assert est.value == pytest.approx(2.0 / math.log(18))
    # a field of form degree 1 introduces particle excitations: unstable
    assert not model_critical_temperature(1, 2, 2, 5).stable
