import numpy as np
import pytest

from scatterlab.clusters import ClusterId
from scatterlab.errors import BoundaryBreachError, GridError, HypothesisError
from scatterlab.lattice import gaussian_packet, make_grid
from scatterlab.model import default_model, free_model
from scatterlab.operators import (
    HamiltonianSpec,
    absolute_symbol,
    free_symbol,
    poschl_teller,
    quadratic_symbol,
)
from scatterlab.propagation import (
    CutoffSpec,
    PropagatorSpec,
    TraceSeries,
    channel_cutoff,
    completeness_defect,
    evolve,
    local_decay_trace,
    minimal_velocity_trace,
    shrinking_region_field,
    wave_operator_approx,
)


def test_norm_conservation():
    grid = make_grid(1, 256, 32.0)
    h = HamiltonianSpec(quadratic_symbol(1.0), ((poschl_teller(2.0, 1.0), "internal"),))
    psi = gaussian_packet(grid, 0.0, 0.5, 2.0)
    final, traces = evolve(psi, PropagatorSpec(h, dt=0.02), T=2.0)
    drift = np.abs(traces["norm"].values - 1.0)
    assert np.max(drift) <= 1e-10 * traces["norm"].times.size


def test_energy_drift_scales_quadratically():
    grid = make_grid(1, 256, 32.0)
    h = HamiltonianSpec(quadratic_symbol(1.0), ((poschl_teller(2.0, 1.0), "internal"),))

    def drift(dt):
        _, tr = evolve(gaussian_packet(grid, 0.0, 1.2, 2.5),
                       PropagatorSpec(h, dt=dt, steps_per_sample=int(0.2 / dt)), T=2.0)
        e = tr["energy"].values
        return np.max(np.abs(e - e[0]))

    ratio = drift(0.08) / drift(0.04)
    assert 3.2 <= ratio <= 4.8


def test_group_velocities():
    grid = make_grid(1, 512, 64.0)
    electron = HamiltonianSpec(quadratic_symbol(1.0), ())
    psi = gaussian_packet(grid, -25.0, 1.0, 8.0)
    _, tr = evolve(psi, PropagatorSpec(electron, dt=0.05, steps_per_sample=20), T=10.0,
                   observables=("center0",))
    t, c = tr["center0"].times, tr["center0"].values
    speed = np.polyfit(t, c, 1)[0]
    assert speed == pytest.approx(2.0, rel=0.02)

    photon = HamiltonianSpec(absolute_symbol(1.0), ())
    for k0 in (1.5, 3.0):
        psi = gaussian_packet(grid, -20.0, k0, 8.0)
        _, tr = evolve(psi, PropagatorSpec(photon, dt=0.05, steps_per_sample=20), T=10.0,
                       observables=("center0",))
        speed = np.polyfit(tr["center0"].times, tr["center0"].values, 1)[0]
        assert speed == pytest.approx(1.0, rel=0.02)


def test_boundary_breach_carries_partial_trace():
    grid = make_grid(1, 128, 8.0)
    h = HamiltonianSpec(quadratic_symbol(1.0), ())
    psi = gaussian_packet(grid, 0.0, 2.0, 1.0)
    with pytest.raises(BoundaryBreachError) as err:
        evolve(psi, PropagatorSpec(h, dt=0.05), T=10.0)
    assert err.value.time is not None
    assert "norm" in err.value.partial_traces
    assert err.value.partial_traces["norm"].times[-1] <= 10.0


def test_trace_series_validation():
    with pytest.raises(GridError):
        TraceSeries(np.array([0.0, 0.0]), np.array([1.0, 2.0]), "bad")
    with pytest.raises(GridError):
        TraceSeries(np.array([0.0, 1.0]), np.array([np.nan, 2.0]), "bad")


def test_shrinking_region_field_shape():
    grid = make_grid(2, 64, 16.0)
    f = shrinking_region_field(grid, t=1.0, delta=0.2, eps=0.1)
    X, Y = grid.position_mesh()
    inside = np.sqrt(X ** 2 + Y ** 2) < 0.2
    assert np.all(f[inside] > 0.9)
    outside = np.sqrt(X ** 2 + Y ** 2) > 2.0
    assert np.all(f[outside] < 0.05)
    with pytest.raises(HypothesisError):
        shrinking_region_field(grid, t=0.5, delta=0.2, eps=0.1)


def test_channel_cutoff_basic():
    grid = make_grid(2, 64, 16.0)
    cut = CutoffSpec(delta=0.3, eps=0.1)
    f = channel_cutoff(ClusterId.PHOTON_FREE, 1.0, cut, grid)
    X, Y = grid.position_mesh()
    assert np.all(f[np.abs(X) < 0.2] > 0.9)
    assert np.all(f[np.abs(X) > 2.0] < 0.05)
    with pytest.raises(HypothesisError):
        channel_cutoff(ClusterId.PHOTON_FREE, 0.2, cut, grid)


def test_channel_cutoffs_cover_single_channel_configuration():
    grid = make_grid(2, 128, 16.0)
    cut = CutoffSpec(delta=0.3, eps=0.1)
    t = 4.0
    fields = {a: channel_cutoff(a, t, cut, grid) for a in
              (ClusterId.PHOTON_FREE, ClusterId.ELECTRON_FREE, ClusterId.PAIR_FREE)}
    # deep in the photon-free channel: x small, y and x-y large
    i = np.argmin(np.abs(grid.positions() - 0.5))
    j = np.argmin(np.abs(grid.positions() - 12.0))
    assert fields[ClusterId.PHOTON_FREE][i, j] > 0.95
    assert fields[ClusterId.ELECTRON_FREE][i, j] < 0.05
    assert fields[ClusterId.PAIR_FREE][i, j] < 0.05


def test_channel_cutoff_overlap_shrinks():
    grid = make_grid(2, 128, 16.0)
    cut = CutoffSpec(delta=0.11, eps=0.01)
    t = 4.0
    fa = channel_cutoff(ClusterId.PHOTON_FREE, t, cut, grid)
    fb = channel_cutoff(ClusterId.ELECTRON_FREE, t, cut, grid)
    # both cuts keep coordinates below sqrt(0.1 * t^1.99) ~ 1.6; their product
    # is only appreciable near the origin corner
    overlap = np.max(fa * fb)
    assert overlap <= 1.0
    X, Y = grid.position_mesh()
    far = (np.abs(X) > 4) | (np.abs(Y) > 4)
    assert np.max((fa * fb)[far]) < 1e-3


def test_channel_cutoff_conventions_differ():
    grid = make_grid(2, 64, 16.0)
    cut = CutoffSpec(delta=0.3, eps=0.1)
    internal = channel_cutoff(ClusterId.PHOTON_FREE, 2.0, cut, grid, "internal")
    external = channel_cutoff(ClusterId.PHOTON_FREE, 2.0, cut, grid, "external")
    assert not np.allclose(internal, external)
    # internal cuts on x, external on y: transposed geometry
    assert np.allclose(internal, external.T)


def test_minimal_velocity_requires_hypothesis():
    grid = make_grid(2, 64, 16.0)
    psi = gaussian_packet(grid, 0.0, (0.5, 0.5), 2.0)
    cut = CutoffSpec(delta=0.6, eps=0.1)
    with pytest.raises(HypothesisError):
        minimal_velocity_trace(psi, HamiltonianSpec(free_symbol(), ()), (0.5, 1.5),
                               cut, T=4.0, dt=0.05, theta=0.5)


def test_wave_operator_empty_window_free_case():
    grid = make_grid(2, 128, 32.0)
    psi = gaussian_packet(grid, 0.0, (0.5, 0.5), 3.0)
    cut = CutoffSpec(delta=0.2, eps=0.05)
    phi = wave_operator_approx(ClusterId.PHOTON_FREE, psi, free_model(), (-0.8, -0.4),
                               cut, t=2.0, dt=0.05, filter_ripple=1e-9)
    assert phi.norm() <= 1e-7


def test_completeness_defect_norm_bound():
    # triangle sanity: defect never exceeds ||psi|| (1 + number of channels);
    # the box must hold the filter kernel (extent ~ 1/transition width)
    grid = make_grid(2, 256, 64.0)
    model = default_model()
    psi = gaussian_packet(grid, 0.0, (0.4, 0.4), 3.0)
    cut = CutoffSpec(delta=0.12, eps=0.02)
    series = completeness_defect(psi, model, (-0.8, -0.6), cut, (2.0, 4.0), dt=0.05,
                                 filter_transition=0.25, boundary_limit=1e-3)
    assert np.all(series.values <= 4.0 * max(series.metadata["filtered_norm"], 1e-30))


def test_wave_operator_requires_negative_window():
    grid = make_grid(2, 64, 16.0)
    psi = gaussian_packet(grid, 0.0, (0.5, 0.5), 2.0)
    cut = CutoffSpec(delta=0.2, eps=0.05)
    from scatterlab.errors import SpectralWindowError
    with pytest.raises(SpectralWindowError):
        wave_operator_approx(ClusterId.PHOTON_FREE, psi, free_model(), (0.5, 1.5),
                             cut, t=2.0, dt=0.05)


def test_local_decay_window_preconditions():
    from scatterlab.errors import SpectralWindowError
    from scatterlab.spectral import ThresholdTable
    from scatterlab.clusters import TWO_CLUSTERS
    import numpy as np

    grid = make_grid(1, 128, 16.0)
    h = HamiltonianSpec(quadratic_symbol(1.0), ((poschl_teller(2.0, 1.0), "internal"),))
    psi = gaussian_packet(grid, 0.0, 0.8, 2.0)
    table = ThresholdTable({a: np.array([-1.0]) for a in TWO_CLUSTERS})
    with pytest.raises(SpectralWindowError):
        local_decay_trace(psi, h, (-1.2, -0.8), mu=0.6, T=1.0, dt=0.05, table=table)
    with pytest.raises(SpectralWindowError):
        local_decay_trace(psi, h, (0.4, 0.8), mu=0.6, T=1.0, dt=0.05,
                          known_eigenvalues=(0.5,))


def test_wave_operator_stabilization_trace():
    # the photon-escape approximants settle down along a dyadic schedule
    from scatterlab.propagation import wave_operator_cauchy
    from scatterlab.experiments import dynamics_model, bound_ground_1d, product_state
    from scatterlab.spectral import threshold_table

    model = dynamics_model()
    table = threshold_table(model, make_grid(1, 256, 32.0))
    grid = make_grid(2, 256, 64.0)
    _, _, xg = bound_ground_1d(model, ClusterId.PHOTON_FREE, 256, 64.0)
    yp = gaussian_packet(make_grid(1, 256, 64.0), 4.0, 0.5, 5.0)
    psi0 = product_state(grid, xg.values, yp.values)
    series = wave_operator_cauchy(ClusterId.PHOTON_FREE, psi0, model, (-0.7, -0.4),
                                  CutoffSpec(delta=0.12, eps=0.02), (2.0, 4.0, 8.0, 16.0),
                                  dt=0.05, table=table, filter_transition=0.25,
                                  boundary_limit=1e-3)
    assert np.all(np.diff(series.values) < 0)
