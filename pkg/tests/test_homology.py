"""Homology ranks, flat sectors, ground-space counting, systoles.

Frozen oracle values: the 22 flat sectors on the 2-torus were brute-forced
over (Z2^2)^3 with the symmetric pairing before implementation, and the
twisted ground-space dimension 22 was cross-checked against the projector
trace formula restricted to flux-free configurations.
"""

import itertools

import numpy as np
import pytest

from cubicmem.cells import (
    build_freudenthal_torus,
    build_hypercubic_torus,
    build_simplex_sphere,
)
from cubicmem.homology import (
    code_parameters,
    enumerate_flat_sectors,
    gsd_monomial,
    homology_basis,
    min_weight_logical,
)
from cubicmem.manifolds import get_model, manifold_library
from cubicmem.stabilizers import build_cubic
from cubicmem import gf2


def test_gf2_rank_kernel_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.integers(0, 2, size=(8, 12), dtype=np.uint8)
        kern = gf2.kernel_basis(a)
        assert len(kern) == 12 - gf2.rank(a)
        for v in kern:
            assert not np.any((a @ v) % 2)


def test_homology_ranks():
    assert homology_basis(build_hypercubic_torus(2, 2), 1).rank == 2
    assert homology_basis(build_hypercubic_torus(5, 2), 2).rank == 10
    assert homology_basis(build_simplex_sphere(2), 1).rank == 0
    assert homology_basis(build_freudenthal_torus(3, 2), 1).rank == 3


def test_homology_representatives_closed():
    cx = build_hypercubic_torus(3, 2)
    from cubicmem.cochains import d
    basis = homology_basis(cx, 1)
    for rep in basis.cocycles:
        assert d(rep).is_zero()


def _brute_force_t2_flat_count():
    # independent oracle: symmetric pairing <a,b> = a1 b2 + a2 b1 on Z2^2
    def pair(u, v):
        return (u[0] * v[1] + u[1] * v[0]) % 2

    count = 0
    cls = list(itertools.product((0, 1), repeat=2))
    for a in cls:
        for b in cls:
            for c in cls:
                if pair(a, b) == pair(a, c) == pair(b, c) == 0:
                    count += 1
    return count


def test_flat_sectors_t2_is_22():
    oracle = _brute_force_t2_flat_count()
    assert oracle == 22
    lattice = enumerate_flat_sectors(build_hypercubic_torus(2, 2), 1, 1, 1)
    assert lattice.count == 22
    assert len(lattice.sectors) == 22
    model = enumerate_flat_sectors(get_model("T2"))
    assert model.count == 22


def test_flat_sectors_sphere_products():
    assert enumerate_flat_sectors(get_model("S2xS2xS1")).count == 22
    assert enumerate_flat_sectors(get_model("Wu")).count == 8


def test_flat_sectors_trivial_cohomology():
    sph = build_simplex_sphere(2)
    assert enumerate_flat_sectors(sph, 1, 1, 1).count == 1


def test_flat_sectors_lattice_matches_model_t4():
    lattice = enumerate_flat_sectors(build_hypercubic_torus(4, 2), 2, 2, 2,
                                     max_list=0)
    model = enumerate_flat_sectors(get_model("T4"), max_list=0)
    assert lattice.count == model.count == 36352


def test_flat_sectors_lattice_matches_model_t5():
    lattice = enumerate_flat_sectors(build_hypercubic_torus(5, 2), 2, 2, 2,
                                     max_list=0)
    model = enumerate_flat_sectors(get_model("T5"), max_list=0)
    assert lattice.count == model.count == 977152


def test_gsd_twisted_t2_is_22():
    ham = build_cubic(build_hypercubic_torus(2, 2), 1, 1, 1)
    assert gsd_monomial(ham) == 22


def test_gsd_untwisted_t2_is_64():
    ham = build_cubic(build_hypercubic_torus(2, 2), 1, 1, 1, twist=False)
    assert gsd_monomial(ham) == 64


def test_gsd_sphere_is_1():
    ham = build_cubic(build_simplex_sphere(2), 1, 1, 1)
    assert gsd_monomial(ham) == 1


def test_gsd_matches_flat_count_on_t2():
    ham = build_cubic(build_hypercubic_torus(2, 2), 1, 1, 1)
    flat = enumerate_flat_sectors(build_hypercubic_torus(2, 2), 1, 1, 1)
    assert gsd_monomial(ham) == flat.count


def test_systole_certificates():
    t5 = build_hypercubic_torus(5, 2)
    assert min_weight_logical(t5, 2).value == 4
    assert min_weight_logical(t5, 3).value == 8
    assert min_weight_logical(build_hypercubic_torus(2, 3), 1).value == 3


def test_systole_search_agrees_with_certificate():
    t5 = build_hypercubic_torus(5, 2)
    res = min_weight_logical(t5, 2, method="search")
    assert res.value == 4 and res.certified
    t4 = build_hypercubic_torus(4, 2)
    res3 = min_weight_logical(t4, 3, method="search", budget=5_000_000)
    assert res3.value == 8 and res3.certified


def test_systole_search_simplicial():
    cx = build_freudenthal_torus(2, 2)
    res = min_weight_logical(cx, 1, method="search")
    assert res.value == 2 and res.certified


def test_systole_budget_flag():
    t4 = build_hypercubic_torus(4, 2)
    res = min_weight_logical(t4, 3, method="search", budget=100)
    assert not res.certified
    assert res.value >= 1


def test_systole_scaling_two_sizes():
    for k in (1, 2):
        v2 = min_weight_logical(build_hypercubic_torus(3, 2), k).value
        v3 = min_weight_logical(build_hypercubic_torus(3, 3), k).value
        assert v2 == 2 ** k and v3 == 3 ** k


def test_code_parameters_t5():
    t5 = build_hypercubic_torus(5, 2)
    params = code_parameters(t5, 2, 2, 2, compute_gsd=False)
    assert params.n_phys == 960
    assert params.distance == 4
    assert params.systoles[2].value == 4
    assert params.systoles[3].value == 8


def test_code_parameters_untwisted_t2():
    t2 = build_hypercubic_torus(2, 2)
    params = code_parameters(t2, 1, 1, 1, twist=False)
    assert params.n_phys == 24
    assert params.gsd == 64
    assert params.distance == 2


def test_distance_exponent_exactly_2_5():
    p2 = code_parameters(build_hypercubic_torus(5, 2), 2, 2, 2,
                         compute_gsd=False)
    p3 = code_parameters(build_hypercubic_torus(5, 3), 2, 2, 2,
                         compute_gsd=False)
    n2, n3 = 3 * 320, 3 * build_hypercubic_torus(5, 3).n_cells(2)
    expo = np.log(p3.distance / p2.distance) / np.log(n3 / n2)
    assert abs(expo - 0.4) < 1e-12


def test_manifold_library_contents():
    lib = manifold_library()
    assert {"Wu", "T4", "T5", "CP2", "CP2xS1", "S2xS2xS1"} <= set(lib)
    wu = lib["Wu"]
    assert wu.betti(2) == wu.betti(3) == 1
    assert wu.cup_coords(2, 3, 0, 0) == (1,)  # w2 cup w3 integrates to 1
    assert wu.cup_coords(2, 2, 0, 0) == ()    # degree-4 cohomology vanishes
    assert wu.sq1 == {"w2": "w3"}
    with pytest.raises(KeyError):
        get_model("nonexistent")


def test_manifold_cup_graded_commutative():
    for model in manifold_library().values():
        for (k1, k2), mat in model._cup.items():
            if (k2, k1) not in model._cup:
                continue
            rev = model._cup[(k2, k1)]
            for i in range(model.betti(k1)):
                for j in range(model.betti(k2)):
                    assert tuple(mat[i][j]) == tuple(rev[j][i])


def test_t4_intersection_form():
    model = get_model("T4")
    labels = model.labels[2]
    form = model.intersection_form
    pairs = {("xy", "zw"), ("xz", "yw"), ("yz", "xw")}
    for i, a in enumerate(labels):
        assert form[i][i] == 0
        for j, b in enumerate(labels):
            expected = 1 if (a, b) in pairs or (b, a) in pairs else 0
            assert form[i][j] == expected


def test_t4_intersection_form_matches_lattice_cup():
    # the stored form equals the cup pairing of cut classes on hypercubic T4
    from cubicmem.cochains import cut_cocycle, cup, integrate
    cx = build_hypercubic_torus(4, 2)
    dirsets = list(itertools.combinations(range(4), 2))
    model = get_model("T4")
    for i, d1 in enumerate(dirsets):
        for j, d2 in enumerate(dirsets):
            val = integrate(cup(cut_cocycle(cx, d1), cut_cocycle(cx, d2)))
            assert val == model.intersection_form[i][j]


def test_cp2_pontryagin_generator():
    assert get_model("CP2").pontryagin_value((1,)) == 1
    assert get_model("S2xS2").pontryagin_value((1, 1)) == 2
