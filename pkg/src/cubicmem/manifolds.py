"""Abstract manifold models: mod-2 ring data loaded from a bundled catalog.

Each model records Betti numbers, labeled basis classes, cup structure
constants, and (for 4-manifolds) the diagonal mod-4 squares plus the mod-2
intersection form that together determine quadratic phase gates.  Data for
manifolds with no lattice realization here (projective planes, sphere
products, the five-dimensional homogeneous space with nonzero second and
third characteristic classes) is stored, not derived.
"""

from __future__ import annotations

import json
from importlib import resources


class ManifoldModel:
    """Ring data of one closed manifold; plugs into flat-sector enumeration."""

    def __init__(self, name, data):
        self.name = name
        self.dim = data["dim"]
        self._betti = list(data["betti"])
        self.labels = {int(k): list(v) for k, v in data["labels"].items()}
        self._cup = {}
        for key, mat in data["cup"].items():
            k1, k2 = (int(x) for x in key.split(","))
            if k1 + k2 <= self.dim:
                self._cup[(k1, k2)] = mat
        self.default_degrees = tuple(data["default_degrees"])
        self.pontryagin_diag = data.get("pontryagin_diag")
        self.intersection_form = data.get("intersection_form")
        self.four_factor = data.get("four_factor")
        self.distinguished = {k: tuple(v)
                              for k, v in data.get("distinguished", {}).items()}
        self.sq1 = dict(data.get("sq1", {}))
        self.logical_labels = data.get("logical_labels")

    def betti(self, k):
        if not 0 <= k <= self.dim:
            return 0
        return self._betti[k]

    def cup_coords(self, k1, k2, i, j):
        """Coordinates of basis_i(k1) cup basis_j(k2) in degree k1+k2."""
        if k1 + k2 > self.dim:
            return ()
        mat = self._cup.get((k1, k2))
        if mat is None:
            raise KeyError(
                f"{self.name}: no cup data for degrees ({k1}, {k2})")
        return tuple(mat[i][j])

    def pontryagin_value(self, coords):
        """Mod-4 square of a degree-2 class on a 4-manifold model.

        Computed from the stored diagonal values and intersection form:
        sum of n_i^2 * P(e_i) plus twice the off-diagonal pairings.
        """
        if self.pontryagin_diag is None:
            raise ValueError(f"{self.name}: no degree-2 square data")
        n = [int(v) % 2 for v in coords]
        total = sum(self.pontryagin_diag[i] * n[i] for i in range(len(n)))
        for i in range(len(n)):
            for j in range(i + 1, len(n)):
                total += 2 * self.intersection_form[i][j] * n[i] * n[j]
        return total % 4

    def w_classes(self):
        """The distinguished (w2, w3) coordinate pair, if stored."""
        return (self.distinguished.get("w2"), self.distinguished.get("w3"))

    def __repr__(self):
        return f"ManifoldModel({self.name!r}, dim={self.dim})"


_CATALOG = None


def manifold_library():
    """All bundled models, keyed by name."""
    global _CATALOG
    if _CATALOG is None:
        raw = json.loads(
            resources.files("cubicmem").joinpath("data/manifolds.json")
            .read_text())
        _CATALOG = {name: ManifoldModel(name, data)
                    for name, data in raw.items()}
    return dict(_CATALOG)


def get_model(name) -> ManifoldModel:
    lib = manifold_library()
    if name not in lib:
        raise KeyError(f"unknown manifold model {name!r}; "
                       f"available: {sorted(lib)}")
    return lib[name]
