import numpy as np
import pytest

from scatterlab.clusters import ClusterId
from scatterlab.errors import PotentialError
from scatterlab.lattice import make_grid
from scatterlab.model import default_model, free_model


def test_full_hamiltonian_structure():
    h = default_model().full()
    kinds = sorted(t.kind for t in h.symbol.terms)
    assert kinds == ["absolute", "quadratic"]
    tags = [tag for _, tag in h.potentials]
    assert tags == ["x", "y", "x-y"]


def test_truncated_drops_intercluster():
    model = default_model()
    h = model.truncated(ClusterId.PHOTON_FREE)
    assert [tag for _, tag in h.potentials] == ["x"]
    inter = model.intercluster(ClusterId.PHOTON_FREE)
    assert sorted(tag for _, tag in inter) == ["x-y", "y"]
    assert model.truncated(ClusterId.ALL_FREE).potentials == ()
    assert len(model.truncated(ClusterId.TOGETHER).potentials) == 3


def test_subsystem_symbols():
    model = default_model()
    h = model.subsystem(ClusterId.PAIR_FREE)
    coeffs = {t.kind: t.coefficient for t in h.symbol.terms}
    assert coeffs == {"quadratic": 0.25, "absolute": 0.5}
    h = model.subsystem(ClusterId.PHOTON_FREE)
    assert [t.kind for t in h.symbol.terms] == ["quadratic"]
    h = model.subsystem(ClusterId.ELECTRON_FREE)
    assert [t.kind for t in h.symbol.terms] == ["absolute"]


def test_reduced_pair_shifts():
    model = default_model()
    s = 0.37
    h = model.reduced(ClusterId.PAIR_FREE, s)
    quad = [t for t in h.symbol.terms if t.kind == "quadratic"][0]
    absl = [t for t in h.symbol.terms if t.kind == "absolute"][0]
    assert quad.shift == pytest.approx(s)       # (1/4)(q + s)^2
    assert absl.shift == pytest.approx(-s)      # (1/2)|q - s|
    # at s = 0 the fiber reduces to the subsystem Hamiltonian
    h0 = model.reduced(ClusterId.PAIR_FREE, 0.0)
    grid = make_grid(1, 64, 8.0)
    assert np.allclose(h0.symbol.on_grid(grid),
                       model.subsystem(ClusterId.PAIR_FREE).symbol.on_grid(grid))


def test_reduced_photon_free_constant_is_abs_s():
    model = default_model()
    for s in (0.5, -0.5):
        h = model.reduced(ClusterId.PHOTON_FREE, s)
        consts = [t.coefficient for t in h.symbol.terms if t.kind == "constant"]
        assert consts == [pytest.approx(0.5)]


def test_model_boundary_validation():
    model = default_model()
    model.validate_for(make_grid(1, 128, 16.0))
    with pytest.raises(PotentialError):
        model.validate_for(make_grid(1, 32, 4.0))


def test_free_model_is_zero():
    m = free_model()
    grid = make_grid(1, 64, 8.0)
    x = grid.positions()
    for pot in (m.v12, m.v13, m.v23):
        assert np.all(pot.value(x) == 0.0)
