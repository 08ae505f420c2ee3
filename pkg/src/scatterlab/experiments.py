"""Verification experiments and the acceptance checks built on them.

Every check is a self-contained numerical experiment with pinned scales and
tolerances, deterministic under its seed, returning a :class:`CheckResult`
and optionally writing its data rows as CSV.  The CLI drives the same
functions, so command-line runs and the test suite exercise one code path.
"""

from __future__ import annotations

import os
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import io as sio
from .clusters import ClusterId, TWO_CLUSTERS
from .commutators import (
    ConjugateSpec,
    FULL_A,
    analytic_commutator_apply,
    apply_dilation,
    commutator_form,
    continuum_edge,
    mourre_report,
    sqrt_lemma_eval,
)
from .errors import ScatterError
from .lattice import GridSpec, WaveFunction, gaussian_packet, make_grid
from .model import ThreeBodyModel, default_model, free_model
from .operators import (
    HamiltonianSpec,
    absolute_symbol,
    apply_hamiltonian,
    free_symbol,
    poschl_teller,
    quadratic_symbol,
)
from .partition import build_partition, verify_partition
from .propagation import (
    CutoffSpec,
    PropagatorSpec,
    completeness_defect,
    evolve,
    local_decay_trace,
    minimal_velocity_trace,
)
from .spectral import (
    ThresholdTable,
    dense_spectrum,
    dispersion_scan,
    ground_state_imag_time,
    iterative_lowest,
    localized_eigenvectors,
    spectral_filter,
    threshold_table,
)

DEFAULT_SEED = 7

def dynamics_model() -> ThreeBodyModel:
    """The model the dynamical experiments run.

    A deep well binds the massive particle to the center; the massless
    particle's wells are weak, so in the negative window only the
    photon-escape channel is open and the thresholds stay clear of it.
    """
    return ThreeBodyModel(
        v12=poschl_teller(2.0, 1.0),
        v13=poschl_teller(0.4, 1.0),
        v23=poschl_teller(0.4, 1.0),
    )


@dataclass
class CheckResult:
    name: str
    passed: bool
    runtime: float
    values: dict = field(default_factory=dict)
    message: str = ""
    skipped: bool = False

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        extras = " ".join(f"{k}={sio.fmt(v)}" for k, v in self.values.items())
        msg = f" ({self.message})" if self.message else ""
        return f"{status:5s} {self.name:24s} [{self.runtime:7.2f}s] {extras}{msg}"


def _seed_for(seed: int, name: str) -> int:
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode())]).generate_state(1)[0])


def _maybe_csv(out_dir, name, header, rows):
    if out_dir is None:
        return None
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}.csv")
    sio.write_csv(path, header, rows)
    return path


def admissible_random_state(grid: GridSpec, rng: np.random.Generator,
                            momentum_centers, mask_sigma: float = 0.2,
                            envelope_sigma: float | None = None) -> WaveFunction:
    """Random state that the lattice represents faithfully.

    Noise is shaped in momentum space by Gaussian masks centered away from
    the symbol kinks (|k| = 0) and from the Nyquist fold, then enveloped in
    position away from the box edge.  Both lattice seams then carry
    exponentially small mass, which the commutator identities require.
    """
    if envelope_sigma is None:
        envelope_sigma = grid.half_extent / 8.0
    centers = np.atleast_1d(np.asarray(momentum_centers, dtype=float))
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    kmesh = grid.momentum_mesh()
    mask = np.ones(grid.shape)
    for kc, K in zip(centers, kmesh):
        mask = mask * np.exp(-((K - kc) ** 2) / (2.0 * mask_sigma ** 2))
    shaped = np.fft.ifftn(mask * np.fft.fftn(noise))
    r2 = np.zeros(grid.shape)
    for X in grid.position_mesh():
        r2 = r2 + X ** 2
    shaped = shaped * np.exp(-r2 / (2.0 * envelope_sigma ** 2))
    return WaveFunction(grid, shaped).normalized()


def product_state(grid2: GridSpec, xvals: np.ndarray, yvals: np.ndarray) -> WaveFunction:
    """Two-particle product state from one-axis amplitude vectors."""
    return WaveFunction(grid2, np.outer(xvals, yvals)).normalized()


def bound_ground_1d(model: ThreeBodyModel, cluster: ClusterId, n: int, L: float):
    grid1 = make_grid(1, n, L)
    res = dense_spectrum(model.subsystem(cluster), grid1, 1)
    return grid1, res.eigenvalues[0], res.eigenvectors[0]


# ---------------------------------------------------------------------------
# check 1: closed-form fibered continuum edge vs brute-force minimization
# ---------------------------------------------------------------------------

def brute_force_edge(s: float, coarse: int = 400_000, fine: int = 400_000) -> float:
    """Two-stage grid minimization of (1/4)(q+s)^2 + (1/2)|q-s|.

    The minimum sits at a kink for |s| <= 1/2, so a single pass cannot reach
    1e-6; the second pass zooms into the coarse argmin.
    """
    lo, hi = -abs(s) - 1.5, abs(s) + 1.5

    def symbol(q):
        return 0.25 * (q + s) ** 2 + 0.5 * np.abs(q - s)

    q = np.linspace(lo, hi, coarse)
    i = int(np.argmin(symbol(q)))
    step = q[1] - q[0]
    q2 = np.linspace(q[i] - 2 * step, q[i] + 2 * step, fine)
    return float(np.min(symbol(q2)))


def check_continuum_edge(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(_seed_for(seed, "continuum-edge"))
    svals = rng.uniform(-3.0, 3.0, size=100)
    rows = []
    worst = 0.0
    for s in svals:
        closed = continuum_edge(s)
        brute = brute_force_edge(s)
        diff = abs(closed - brute)
        worst = max(worst, diff)
        rows.append((s, closed, brute, diff))
    _maybe_csv(out_dir, "continuum-edge", ("s", "closed_form", "brute_force", "abs_diff"), rows)
    return CheckResult(
        name="continuum-edge",
        passed=worst <= 1e-6,
        runtime=time.perf_counter() - t0,
        values={"max_abs_diff": worst},
    )


# ---------------------------------------------------------------------------
# check 2: quadrature identity for the singular dispersion
# ---------------------------------------------------------------------------

def check_sqrt_identity(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    rows = []
    worst = 0.0
    for k in (0.01, 0.1, 1.0, 2.0, 10.0):
        val = sqrt_lemma_eval(k, tol=1e-8)
        rel = abs(val - k) / k
        worst = max(worst, rel)
        rows.append((k, val, rel))
    _maybe_csv(out_dir, "sqrt-identity", ("k", "quadrature", "rel_error"), rows)
    return CheckResult(
        name="sqrt-identity",
        passed=worst <= 1e-6,
        runtime=time.perf_counter() - t0,
        values={"max_rel_error": worst},
    )


# ---------------------------------------------------------------------------
# check 3: pair-cluster eigenvalue dispersion lambda(s) = lambda0 + s^2
# ---------------------------------------------------------------------------

def check_pair_dispersion(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    model = default_model()
    grid = make_grid(1, 512, 32.0)
    svals = (0.0, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2)
    curve = dispersion_scan(model, grid, svals, tol=1e-8)
    rows = [
        (s, lam, lam - s * s, r, bool(f))
        for s, lam, r, f in zip(curve.s_values, curve.lambdas, curve.residuals, curve.flagged)
    ]
    _maybe_csv(out_dir, "pair-dispersion",
               ("s", "lambda", "lambda_minus_s2", "residual", "flagged"), rows)
    dev_tol = 5e-3 * (1.0 + abs(curve.lambda0))
    dev_ok = curve.max_deviation <= dev_tol
    coef_ok = abs(curve.quad_coefficient - 1.0) <= 2e-2
    message = ""
    if not (dev_ok and coef_ok):
        message = (
            f"measured quadratic transport coefficient {curve.quad_coefficient:.4f}; "
            "the pair bound state moves with a renormalized effective mass, so "
            "lambda(s) sits strictly below lambda0 + s^2 (variational bound)"
        )
    return CheckResult(
        name="pair-dispersion",
        passed=dev_ok and coef_ok,
        runtime=time.perf_counter() - t0,
        values={
            "lambda0": curve.lambda0,
            "max_deviation": curve.max_deviation,
            "deviation_tol": dev_tol,
            "quad_coefficient": curve.quad_coefficient,
            "linear_coefficient": curve.linear_coefficient,
        },
        message=message,
    )


# ---------------------------------------------------------------------------
# check 4: fiber shift law for the photon-escape cluster
# ---------------------------------------------------------------------------

def check_fiber_shift(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    model = default_model()
    grid = make_grid(1, 256, 16.0)
    count = 6
    base = dense_spectrum(model.subsystem(ClusterId.PHOTON_FREE), grid, count)
    rows = []
    worst = 0.0
    for s in (0.0, 0.5, 1.0):
        shifted = dense_spectrum(model.reduced(ClusterId.PHOTON_FREE, s), grid, count)
        diff = np.max(np.abs(shifted.eigenvalues - (base.eigenvalues + abs(s))))
        worst = max(worst, float(diff))
        for j in range(count):
            rows.append((s, j, shifted.eigenvalues[j], base.eigenvalues[j] + abs(s)))
    _maybe_csv(out_dir, "fiber-shift", ("s", "index", "fiber_eigenvalue", "base_plus_s"), rows)
    return CheckResult(
        name="fiber-shift",
        passed=worst <= 1e-9,
        runtime=time.perf_counter() - t0,
        values={"max_abs_diff": worst},
    )


# ---------------------------------------------------------------------------
# check 5: virial identity on every converged subsystem eigenpair
# ---------------------------------------------------------------------------

def check_virial(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    model = default_model()
    grid = make_grid(1, 512, 32.0)
    rows = []
    worst = 0.0
    passed = True
    for a in TWO_CLUSTERS:
        h = model.subsystem(a)
        res = dense_spectrum(h, grid, 8)
        pairs = [(lam, vec, "dense") for lam, vec in zip(res.eigenvalues, res.eigenvectors)
                 if lam < -1e-6]
        ground = ground_state_imag_time(h, grid, tol=1e-9)
        pairs.append((ground.eigenvalues[0], ground.eigenvectors[0], "imaginary-time"))
        for lam, vec, method in pairs:
            # the |k|-kinetic bound states have power-law tails, so the strict
            # boundary-concentration default is relaxed; the lattice virial
            # identity is an algebraic one and holds regardless
            conj = ConjugateSpec("internal", a)
            form = commutator_form(vec, h, conj, boundary_tol=1e-3)
            hnorm = apply_hamiltonian(vec, h).norm()
            anorm = apply_dilation(vec, conj, boundary_tol=1e-3).norm()
            bound = 1e-6 * hnorm * anorm
            ok = abs(form) <= bound
            passed = passed and ok
            worst = max(worst, abs(form) / max(bound, 1e-300))
            rows.append((str(a), method, lam, form, bound, ok))
    _maybe_csv(out_dir, "virial",
               ("cluster", "method", "eigenvalue", "form_value", "bound", "ok"), rows)
    return CheckResult(
        name="virial",
        passed=passed,
        runtime=time.perf_counter() - t0,
        values={"worst_ratio": worst, "pairs": len(rows)},
    )


# ---------------------------------------------------------------------------
# check 6: commutator path independence (form vs closed-form application)
# ---------------------------------------------------------------------------

def _fibered_external_constant(a: ClusterId, s: float) -> float:
    if a is ClusterId.PHOTON_FREE:
        return abs(s)
    if a is ClusterId.ELECTRON_FREE:
        return 2.0 * s * s
    return 0.0


def check_commutator_paths(seed: int = DEFAULT_SEED, out_dir=None,
                           states_per_formula: int = 100) -> CheckResult:
    t0 = time.perf_counter()
    model = default_model()
    grid1 = make_grid(1, 256, 32.0)
    grid2 = make_grid(2, 128, 24.0)
    rng = np.random.default_rng(_seed_for(seed, "commutator-paths"))
    rows = []
    worst = 0.0
    passed = True

    def compare(which, psi, partner, s=None):
        nonlocal worst, passed
        applied = analytic_commutator_apply(psi, which, model, s=s)
        val = psi.inner(applied)
        # reality of the form: the closed-form operator is Hermitian
        if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
            passed = False
        scale = max(1.0, abs(partner))
        diff = abs(val.real - partner)
        worst = max(worst, diff / scale)
        ok = diff <= 1e-7 * scale
        passed = passed and ok
        rows.append((which, "" if s is None else s, val.real, partner, diff, ok))

    h_free = HamiltonianSpec(free_symbol(), ())
    h_full = model.full()
    for i in range(states_per_formula):
        kc_p = rng.uniform(1.0, 2.0) * rng.choice((-1.0, 1.0))
        kc_k = rng.uniform(2.0, 2.5) * rng.choice((-1.0, 1.0))
        psi2 = admissible_random_state(grid2, rng, (kc_p, kc_k))
        compare("free", psi2, commutator_form(psi2, h_free, FULL_A))
        compare("full", psi2, commutator_form(psi2, h_full, FULL_A))

        kc = rng.uniform(2.0, 2.5) * rng.choice((-1.0, 1.0))
        psi1 = admissible_random_state(grid1, rng, (kc,))
        s = rng.uniform(0.3, 0.5) * rng.choice((-1.0, 1.0))
        for a in TWO_CLUSTERS:
            conj = ConjugateSpec("internal", a)
            compare(f"subsystem:{a.value}", psi1,
                    commutator_form(psi1, model.subsystem(a), conj))
            fib = commutator_form(psi1, model.reduced(a, s), conj)
            compare(f"fibered:{a.value}", psi1,
                    fib + _fibered_external_constant(a, s), s=s)
    _maybe_csv(out_dir, "commutator-paths",
               ("formula", "s", "analytic_form", "two_inner_products", "abs_diff", "ok"),
               rows)
    return CheckResult(
        name="commutator-paths",
        passed=passed,
        runtime=time.perf_counter() - t0,
        values={"worst_rel_diff": worst, "comparisons": len(rows)},
    )


# ---------------------------------------------------------------------------
# check 7: free-case commutator positivity on a filtered window
# ---------------------------------------------------------------------------

def free_threshold_table() -> ThresholdTable:
    return ThresholdTable({a: np.array([]) for a in TWO_CLUSTERS})


def check_free_positivity(seed: int = DEFAULT_SEED, out_dir=None,
                          samples: int = 50) -> CheckResult:
    # the window is 0.2 wide, so filtered states carry spatial coherence of
    # order 1/0.1 = 10s of length units; the box must dominate that scale or
    # the lattice virial identity (exact box eigenvectors have vanishing
    # form) eats the positivity
    t0 = time.perf_counter()
    grid = make_grid(2, 128, 64.0)
    report = mourre_report(
        E=1.0, window=(0.9, 1.1), model=free_model(), grid=grid,
        table=free_threshold_table(), samples=samples,
        seed=_seed_for(seed, "free-positivity"), deflation_count=0,
        boundary_tol=5e-2,
    )
    rows = [(i, f, report.bound, f - report.bound, report.deflated_count)
            for i, f in enumerate(report.form_values)]
    _maybe_csv(out_dir, "free-positivity",
               ("sample", "form_value", "bound", "margin", "eigen_deflated_count"), rows)
    allowance = 0.02
    min_form = report.min_form
    return CheckResult(
        name="free-positivity",
        passed=min_form >= 0.9 - allowance,
        runtime=time.perf_counter() - t0,
        values={"min_form": min_form, "bound": report.bound,
                "violations": report.violations, "samples": len(report.form_values)},
    )


# ---------------------------------------------------------------------------
# check 8: interacting positivity report at negative nonthreshold energy
# ---------------------------------------------------------------------------

def check_interacting_positivity(seed: int = DEFAULT_SEED, out_dir=None,
                                 samples: int = 24) -> CheckResult:
    t0 = time.perf_counter()
    model = default_model()
    table = threshold_table(model, make_grid(1, 512, 32.0))
    # box large against the window's spatial coherence, as in the free check
    grid = make_grid(2, 128, 48.0)
    report = mourre_report(
        E=-0.4, window=(-0.55, -0.25), model=model, grid=grid, table=table,
        samples=samples, seed=_seed_for(seed, "interacting-positivity"),
        deflation_count=40, boundary_tol=5e-2,
    )
    rows = [(i, f, report.bound, f - report.bound, report.deflated_count)
            for i, f in enumerate(report.form_values)]
    _maybe_csv(out_dir, "interacting-positivity",
               ("sample", "form_value", "bound", "margin", "eigen_deflated_count"), rows)
    return CheckResult(
        name="interacting-positivity",
        passed=bool(np.all(report.form_values >= 0.0)),
        runtime=time.perf_counter() - t0,
        values={"min_form": report.min_form, "bound": report.bound,
                "worst_margin": report.worst_margin,
                "deflated": report.deflated_count, "gap": report.gap},
    )


# ---------------------------------------------------------------------------
# check 9: partition of unity identities on the grid
# ---------------------------------------------------------------------------

def check_partition(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    pset = build_partition()
    grid = make_grid(2, 256, 8.0)
    report = verify_partition(pset, grid, model=default_model())
    rows = [("sum_sq_max_dev", report.sum_sq_max_dev),
            ("range_violations", report.range_violations),
            ("support_violations", report.support_violations),
            ("homogeneity_max_dev", report.homogeneity_max_dev)]
    rows += [(f"gradient_C[{k}]", v) for k, v in report.gradient_constants.items()]
    rows += [(f"ray_decay_at_R16[{k}]", v) for k, v in report.ray_decay.items()]
    _maybe_csv(out_dir, "partition", ("metric", "value"), rows)
    return CheckResult(
        name="partition",
        passed=report.ok and report.sum_sq_max_dev <= 1e-12,
        runtime=time.perf_counter() - t0,
        values={"sum_sq_max_dev": report.sum_sq_max_dev,
                "violations": len(report.violations)},
        message="; ".join(report.violations),
    )


# ---------------------------------------------------------------------------
# check 10: propagator integrity (unitarity, dt^2 scaling, group velocity)
# ---------------------------------------------------------------------------

def _linear_speed(trace) -> float:
    t, x = trace.times, trace.values
    A = np.vstack([np.ones_like(t), t]).T
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    return float(coef[1])


def check_propagator(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    values: dict = {}
    ok = True
    rows = []

    # unitarity per step in a potential well
    grid = make_grid(1, 256, 32.0)
    ham = HamiltonianSpec(quadratic_symbol(1.0), ((poschl_teller(2.0, 1.0), "internal"),))
    psi = gaussian_packet(grid, 0.0, 1.0, 2.0)
    _, traces = evolve(psi, PropagatorSpec(ham, dt=0.01), T=2.0)
    norms = traces["norm"].values
    step_drift = float(np.max(np.abs(np.diff(norms))))
    values["norm_step_drift"] = step_drift
    ok &= step_drift <= 1e-10
    rows.append(("norm_step_drift", step_drift))

    # dt^2 scaling of the energy drift; short horizon keeps the scattered
    # packet well inside the box
    def drift(dt):
        _, tr = evolve(gaussian_packet(grid, 0.0, 1.2, 2.5),
                       PropagatorSpec(ham, dt=dt, steps_per_sample=max(1, int(0.2 / dt))),
                       T=2.0)
        e = tr["energy"].values
        return float(np.max(np.abs(e - e[0])))

    d1, d2 = drift(0.08), drift(0.04)
    ratio = d1 / d2
    values["energy_drift_ratio"] = ratio
    ok &= 3.2 <= ratio <= 4.8
    rows.append(("energy_drift_ratio", ratio))

    # group velocities: quadratic particle moves at 2 p0, massless at sign(k0)
    grid_v = make_grid(1, 512, 64.0)
    h_free_p = HamiltonianSpec(quadratic_symbol(1.0), ())
    psi = gaussian_packet(grid_v, -25.0, 1.0, 8.0)
    _, tr = evolve(psi, PropagatorSpec(h_free_p, dt=0.05, steps_per_sample=20),
                   T=12.0, observables=("norm", "center0"))
    v_e = _linear_speed(tr["center0"])
    values["electron_speed"] = v_e
    ok &= abs(v_e - 2.0) <= 0.04
    rows.append(("electron_speed", v_e))

    h_free_k = HamiltonianSpec(absolute_symbol(1.0), ())
    for k0 in (1.5, 3.0):
        psi = gaussian_packet(grid_v, -20.0, k0, 8.0)
        _, tr = evolve(psi, PropagatorSpec(h_free_k, dt=0.05, steps_per_sample=20),
                       T=12.0, observables=("norm", "center0"))
        v_p = _linear_speed(tr["center0"])
        values[f"photon_speed_k{k0}"] = v_p
        ok &= abs(v_p - 1.0) <= 0.02
        rows.append((f"photon_speed_k{k0}", v_p))

    _maybe_csv(out_dir, "propagator", ("metric", "value"), rows)
    return CheckResult(
        name="propagator",
        passed=bool(ok),
        runtime=time.perf_counter() - t0,
        values=values,
    )


# ---------------------------------------------------------------------------
# check 11: local decay (weighted-evolution integrability)
# ---------------------------------------------------------------------------

def check_local_decay(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    values: dict = {}
    ok = True
    rows = []

    # free continuum packet crosses the weight region once
    grid = make_grid(2, 512, 128.0)
    h0 = HamiltonianSpec(free_symbol(), ())
    psi0 = gaussian_packet(grid, 0.0, (0.7, 0.8), 6.0)
    series = local_decay_trace(psi0, h0, (0.5, 1.5), mu=0.6, T=28.0, dt=0.05,
                               table=free_threshold_table())
    free_ratio = series.metadata["saturation_ratio"]
    values["free_ratio"] = free_ratio
    ok &= free_ratio <= 1.3
    rows += [("free", t, v) for t, v in zip(series.times, series.values)]

    # interacting: bound massive particle, escaping massless particle; the
    # filter kernel spreads like 1/(transition width), so the box is large
    model = dynamics_model()
    table = threshold_table(model, make_grid(1, 512, 32.0))
    grid_i = make_grid(2, 512, 128.0)
    g1, lam0, xground = bound_ground_1d(model, ClusterId.PHOTON_FREE, 512, 128.0)
    # the packet starts slightly off the center and escapes at unit speed; the
    # trailing filter coherence clears the weight region well before T/2
    ypacket = gaussian_packet(make_grid(1, 512, 128.0), 4.0, 0.5, 5.0)
    psi0 = product_state(grid_i, xground.values, ypacket.values)
    known = [lam for lam, _ in localized_eigenvectors(model.full(), grid_i, 6)]
    series = local_decay_trace(psi0, model.full(), (-0.7, -0.4), mu=0.6, T=40.0,
                               dt=0.05, table=table, known_eigenvalues=known,
                               filter_transition=0.25)
    inter_ratio = series.metadata["saturation_ratio"]
    values["interacting_ratio"] = inter_ratio
    ok &= inter_ratio <= 1.3
    rows += [("interacting", t, v) for t, v in zip(series.times, series.values)]

    # negative control: an eigenstate in the window grows linearly
    grid_c = make_grid(1, 128, 32.0)
    h_c = HamiltonianSpec(quadratic_symbol(1.0), ((poschl_teller(2.0, 1.0), "internal"),))
    ground = dense_spectrum(h_c, grid_c, 1)
    series = local_decay_trace(ground.eigenvectors[0], h_c,
                               (ground.eigenvalues[0] - 0.1, ground.eigenvalues[0] + 0.1),
                               mu=0.6, T=16.0, dt=0.05, allow_eigenvalues=True)
    control_ratio = series.metadata["saturation_ratio"]
    values["eigenstate_ratio"] = control_ratio
    ok &= control_ratio >= 1.8
    rows += [("eigenstate", t, v) for t, v in zip(series.times, series.values)]

    _maybe_csv(out_dir, "local-decay", ("case", "t", "integral"), rows)
    return CheckResult(
        name="local-decay",
        passed=bool(ok),
        runtime=time.perf_counter() - t0,
        values=values,
    )


# ---------------------------------------------------------------------------
# check 12: minimal velocity (escape from the shrinking region)
# ---------------------------------------------------------------------------

def check_minimal_velocity(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    values: dict = {}
    ok = True
    rows = []

    cutoffs = CutoffSpec(delta=0.2, eps=0.1)
    grid = make_grid(2, 512, 128.0)
    h0 = HamiltonianSpec(free_symbol(), ())
    # slow enough that the fast spectral tail stays inside the box to T = 40
    psi0 = gaussian_packet(grid, 0.0, (0.5, 0.8), 6.0)
    # on (0.5, 1.5) the free commutator bound is the window bottom
    series = minimal_velocity_trace(psi0, h0, (0.5, 1.5), cutoffs, T=40.0, dt=0.05,
                                    theta=0.5, sample_interval=2.0)
    values["free_final"] = series.final()
    ok &= series.final() <= 0.05
    rows += [("free", t, v) for t, v in zip(series.times, series.values)]

    # negative control: the window holds a bound state, which never escapes;
    # deep wells keep the state compact, and the power-law tails of the
    # massless-particle kinetics still wrap a little, so the breach guard is
    # relaxed (the observable lives near the origin and does not care)
    model = default_model()
    grid_c = make_grid(2, 128, 16.0)
    res = iterative_lowest(model.full(), grid_c, 1, tol=1e-8)
    e0 = res.eigenvalues[0]
    series = minimal_velocity_trace(res.eigenvectors[0], model.full(),
                                    (e0 - 0.1, e0 + 0.1), cutoffs, T=40.0, dt=0.05,
                                    theta=0.5, sample_interval=2.0, skip_filter=True,
                                    boundary_limit=1e-2)
    values["eigenstate_final"] = series.final()
    ok &= series.final() >= 0.9
    rows += [("eigenstate", t, v) for t, v in zip(series.times, series.values)]

    _maybe_csv(out_dir, "min-velocity", ("case", "t", "cutoff_norm"), rows)
    return CheckResult(
        name="minimal-velocity",
        passed=bool(ok),
        runtime=time.perf_counter() - t0,
        values=values,
    )


# ---------------------------------------------------------------------------
# check 13: channel decomposition defect at negative energies
# ---------------------------------------------------------------------------

def check_channels(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    t0 = time.perf_counter()
    values: dict = {}
    ok = True
    rows = []

    model = dynamics_model()
    table = threshold_table(model, make_grid(1, 512, 32.0))
    grid = make_grid(2, 512, 128.0)
    cutoffs = CutoffSpec(delta=0.12, eps=0.02)
    window = (-0.65, -0.45)
    schedule = (4.0, 8.0, 16.0, 32.0)

    g1, lam0, xground = bound_ground_1d(model, ClusterId.PHOTON_FREE, 512, 128.0)
    # launching the packet slightly outside the wells keeps the amplitude
    # trapped near the center small, which is what the overlap of the three
    # channel cutoffs (they are not a partition of unity) is sensitive to
    ypacket = gaussian_packet(make_grid(1, 512, 128.0), 6.0, 0.5, 6.0)
    psi0 = product_state(grid, xground.values, ypacket.values)
    deflate = [vec for lam, vec in
               localized_eigenvectors(model.full(), grid, 6, window=window)]
    # off-channel slivers dispersing under their own free dynamics wrap a
    # little; a 1e-4 guard bounds that junk at 1% amplitude, far below the
    # 0.1 defect tolerance
    series = completeness_defect(psi0, model, window, cutoffs, schedule, dt=0.025,
                                 table=table, deflate_eigenvectors=deflate,
                                 filter_transition=0.25, boundary_limit=1e-4)
    rows += [("interacting", t, v) for t, v in zip(series.times, series.values)]
    decreasing = bool(np.all(np.diff(series.values) <= 1e-12))
    final = series.final()
    fnorm = series.metadata["filtered_norm"]
    values["final_defect"] = final
    values["decreasing"] = decreasing
    values["filtered_norm"] = fnorm
    ok &= decreasing and final <= 0.1
    # channel consistency: the matching channel captures the state, the
    # non-matching approximants stay small
    main_norm = series.metadata["channel_norm_(y)(x0)"]
    off_norms = [series.metadata["channel_norm_(x)(y0)"],
                 series.metadata["channel_norm_(xy)(0)"]]
    values["main_channel_fraction"] = main_norm / fnorm
    values["max_off_channel_norm"] = max(off_norms)
    ok &= main_norm >= 0.9 * fnorm
    ok &= max(off_norms) <= 0.1

    # empty-window sanity: at negative energies the free model filters to zero
    grid_f = make_grid(2, 128, 32.0)
    psi_f = gaussian_packet(grid_f, 0.0, (0.5, 0.5), 4.0)
    h_free = HamiltonianSpec(free_symbol(), ())
    filtered = spectral_filter(psi_f, h_free, window, target_ripple=1e-10)
    free_series = completeness_defect(psi_f, free_model(), window, cutoffs,
                                      schedule=(4.0, 8.0), dt=0.05,
                                      filter_ripple=1e-10)
    free_final = float(np.max(free_series.values)) if free_series.values.size else 0.0
    values["free_filtered_norm"] = filtered.norm()
    values["free_max_defect"] = free_final
    ok &= free_final <= 1e-8
    rows += [("free", t, v) for t, v in zip(free_series.times, free_series.values)]

    _maybe_csv(out_dir, "channels", ("case", "t", "defect"), rows)
    return CheckResult(
        name="channels",
        passed=bool(ok),
        runtime=time.perf_counter() - t0,
        values=values,
    )


# ---------------------------------------------------------------------------
# check 14: determinism of the seeded experiment pipeline
# ---------------------------------------------------------------------------

def _determinism_pass(seed: int, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    files = []
    res = check_continuum_edge(seed=seed, out_dir=out_dir)
    files.append(os.path.join(out_dir, "continuum-edge.csv"))
    model = default_model()
    table = threshold_table(model, make_grid(1, 256, 16.0))
    rows = [(str(a), lam) for a in TWO_CLUSTERS for lam in table.per_cluster[a]]
    rows.append(("zero", 0.0))
    sio.write_csv(os.path.join(out_dir, "thresholds.csv"), ("cluster", "threshold"), rows)
    files.append(os.path.join(out_dir, "thresholds.csv"))
    curve = dispersion_scan(model, make_grid(1, 256, 16.0), (0.0, 0.1, -0.1), tol=1e-7)
    sio.write_csv(os.path.join(out_dir, "dispersion.csv"),
                  ("s", "lambda", "lambda_minus_s2", "residual", "flagged"),
                  [(s, l, l - s * s, r, bool(f)) for s, l, r, f in
                   zip(curve.s_values, curve.lambdas, curve.residuals, curve.flagged)])
    files.append(os.path.join(out_dir, "dispersion.csv"))
    return files


def check_determinism(seed: int = DEFAULT_SEED, out_dir=None) -> CheckResult:
    import tempfile

    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        files_a = _determinism_pass(seed, os.path.join(tmp, "a"))
        files_b = _determinism_pass(seed, os.path.join(tmp, "b"))
        identical = True
        for fa, fb in zip(files_a, files_b):
            with open(fa, "rb") as f1, open(fb, "rb") as f2:
                if f1.read() != f2.read():
                    identical = False
        if out_dir is not None:
            sio.write_csv(os.path.join(out_dir, "determinism.csv"),
                          ("file", "identical"),
                          [(os.path.basename(f), identical) for f in files_a])
    return CheckResult(
        name="determinism",
        passed=identical,
        runtime=time.perf_counter() - t0,
        values={"files_compared": len(files_a)},
    )


ALL_CHECKS = (
    check_continuum_edge,
    check_sqrt_identity,
    check_pair_dispersion,
    check_fiber_shift,
    check_virial,
    check_commutator_paths,
    check_free_positivity,
    check_interacting_positivity,
    check_partition,
    check_propagator,
    check_local_decay,
    check_minimal_velocity,
    check_channels,
    check_determinism,
)

FAST_CHECKS = (
    check_continuum_edge,
    check_sqrt_identity,
    check_fiber_shift,
    check_partition,
    check_determinism,
)


def verify_all(seed: int = DEFAULT_SEED, out_dir=None, fast: bool = False,
               printer=print, checks=None) -> list[CheckResult]:
    """Run the acceptance checks, one line per check; returns all results.

    A check whose preconditions fail is reported as skipped and the suite
    continues; assertion failures are reported as FAIL.
    """
    if checks is None:
        checks = FAST_CHECKS if fast else ALL_CHECKS
    results = []
    for chk in checks:
        try:
            result = chk(seed=seed, out_dir=out_dir)
        except ScatterError as exc:
            result = CheckResult(name=chk.__name__.replace("check_", "").replace("_", "-"),
                                 passed=False, runtime=0.0, skipped=True,
                                 message=f"precondition: {exc}")
        if printer is not None:
            printer(result.line())
        results.append(result)
    return results
