"""Direct and Picard-iteration solvers for the simplified liquid-crystal flow.

State is the pair (u, tau) with u the divergence-free velocity and tau the
deviation of the director field from a fixed unit far-field vector dbar:
d = tau + dbar, |dbar| = 1. The evolution solved here is

    u_t   = mu Lap u - P[ u.grad u + div(grad tau (.) grad tau) ]
    tau_t =     Lap tau - u.grad tau + |grad tau|^2 (tau + dbar)

with P the Leray projector and (grad tau (.) grad tau)_{ij} =
sum_k d_i tau_k d_j tau_k. All products are formed pointwise on the
collocation grid and dealiased; the cubic director term is assembled from
two dealiased quadratics so no aliased energy reaches retained modes.

Two integration modes:

* direct: classical RK4 on the Duhamel (integrating-factor) form, so the
  stiff linear heat part is integrated exactly and the scheme reduces to the
  exact semigroup when the nonlinearity vanishes.
* picard: the linearizing iteration used in small-data existence arguments.
  Each iterate solves linear heat problems forced by the previous iterate's
  nonlinear terms, starting from the pure heat flow of the data; successive
  differences are monitored in the critical norms and their ratios exposed.

The velocity mean is conserved at zero exactly (the projected nonlinearity
has no k = 0 component). The director deviation's mean is allowed to evolve:
the source |grad tau|^2 (tau + dbar) carries a genuine mean component, and
suppressing it would corrupt the unit-sphere constraint on d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dyadic import DyadicPartition, build_partition
from .monitor import CriterionConfig, RunReport, build_report
from .norms import INF, BesovIndex, BlockNormSeries, block_lp_norms
from .spectral import (BlowUpError, Grid, PhysicalField, SpectralField,
                       dealias, divergence, gradient, hermitian_expand,
                       leray_project, read_field, to_physical, to_spectral,
                       write_field)

# Injected right-hand sides may return coefficient arrays or SpectralFields.
RhsFn = Callable[["State"], tuple]


@dataclass
class State:
    """Velocity/director-deviation pair at one instant."""

    u: SpectralField
    tau: SpectralField
    t: float
    dbar: np.ndarray

    def __post_init__(self):
        if self.u.grid != self.tau.grid:
            raise ValueError("u and tau must share a grid")
        if self.u.rank != 1 or self.tau.rank != 1:
            raise ValueError("u and tau must be rank-1 fields")
        self.dbar = np.asarray(self.dbar, dtype=np.float64)
        if self.dbar.shape != (self.u.grid.dim,):
            raise ValueError("dbar must have one entry per dimension")
        if abs(np.linalg.norm(self.dbar) - 1.0) > 1e-12:
            raise ValueError("dbar must be a unit vector")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def max_divergence(self) -> float:
        return float(np.max(np.abs(divergence(self.u).coeffs)))

    def director(self) -> PhysicalField:
        """Physical director field d = tau + dbar."""
        vals = to_physical(self.tau).values.copy()
        for i in range(self.grid.dim):
            vals[i] += self.dbar[i]
        return PhysicalField(self.grid, 1, vals)


@dataclass
class SolverConfig:
    """Run parameters for both integration modes."""

    t_end: float = 1.0
    dt: float | None = None          # None: use the stability rule
    mu: float = 1.0                  # viscosity
    a: float = 1.0                   # heat coefficient for semigroup probes
    mode: str = "direct"             # "direct" or "picard"
    report_stride: int | None = None  # steps between recorded rows
    blowup_factor: float = 1e6       # abort when E(t) > factor * E(0)
    renormalize_director: bool = False
    picard_tol: float = 1e-10
    picard_max_iter: int = 12

    def __post_init__(self):
        if self.mode not in ("direct", "picard"):
            raise ValueError(f"mode must be 'direct' or 'picard', got {self.mode}")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.mu <= 0 or self.a <= 0:
            raise ValueError("mu and a must be positive")


def critical_indices(dim: int) -> tuple[BesovIndex, BesovIndex]:
    """Critical indices: B^{N/2-1}_{2,1} for u and B^{N/2}_{2,1} for tau."""
    return (BesovIndex(dim / 2.0 - 1.0, 2.0, 1.0),
            BesovIndex(dim / 2.0, 2.0, 1.0))


def heat_propagate(f: SpectralField, coef: float, dt: float) -> SpectralField:
    """Exact heat semigroup: multiply each mode by exp(-coef |k|^2 dt)."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if coef < 0:
        raise ValueError("coef must be nonnegative")
    return SpectralField(f.grid, f.rank,
                         f.coeffs * np.exp(-coef * f.grid.k_squared * dt))


# ---------------------------------------------------------------------------
# Nonlinear right-hand sides (heat parts excluded; handled by the propagator)
# ---------------------------------------------------------------------------

def _nonlinear_rhs(u_coeffs: np.ndarray, tau_coeffs: np.ndarray,
                   dbar: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Fused evaluation of both nonlinear terms with batched transforms.

    All intermediate work runs on the rfft half-spectrum (the fields are
    real, so the full spectrum is redundant); the outputs are expanded back
    to the full conjugate-symmetric layout at the end.
    """
    dim, n = grid.dim, grid.points
    h = n // 2 + 1
    half = (Ellipsis, slice(0, h))
    scale = float(n ** dim)
    axes = tuple(range(-dim, 0))
    ik = 1j * grid.deriv_wavenumbers[half]
    mask = grid.dealias_mask[half]

    u_h = u_coeffs[half]
    tau_h = tau_coeffs[half]
    grad_u = ik[:, None] * u_h[None, :]      # (i, j): d_i u_j
    grad_tau = ik[:, None] * tau_h[None, :]  # (i, k): d_i tau_k
    hshape = grid.shape[:-1] + (h,)
    batch = np.concatenate([
        u_h, tau_h,
        grad_u.reshape((dim * dim,) + hshape),
        grad_tau.reshape((dim * dim,) + hshape),
    ])
    phys = np.fft.irfftn(batch, s=grid.shape, axes=axes) * scale
    u_p = phys[:dim]
    tau_p = phys[dim:2 * dim]
    gu_p = phys[2 * dim:2 * dim + dim * dim].reshape((dim, dim) + grid.shape)
    gt_p = phys[2 * dim + dim * dim:].reshape((dim, dim) + grid.shape)

    adv_u = np.einsum("i...,ij...->j...", u_p, gu_p)
    adv_tau = np.einsum("i...,ik...->k...", u_p, gt_p)
    stress = np.einsum("ik...,jk...->ij...", gt_p, gt_p)
    grad_sq = np.einsum("ik...,ik...->...", gt_p, gt_p)

    fwd = np.concatenate([
        adv_u, adv_tau,
        stress.reshape((dim * dim,) + grid.shape),
        grad_sq[None],
    ])
    spec = np.fft.rfftn(fwd, axes=axes) / scale
    spec *= mask
    adv_u_h = spec[:dim]
    adv_tau_h = spec[dim:2 * dim]
    stress_h = spec[2 * dim:2 * dim + dim * dim].reshape((dim, dim) + hshape)
    grad_sq_h = spec[-1]

    # cubic term from two dealiased quadratics: |grad tau|^2 back to physical
    grad_sq_d = np.fft.irfftn(grad_sq_h, s=grid.shape, axes=axes) * scale
    cubic = np.fft.rfftn(grad_sq_d[None] * tau_p, axes=axes) / scale
    cubic *= mask

    # velocity: -P[ adv + div(stress) ]
    force = adv_u_h + np.einsum("i...,ij...->j...", ik, stress_h)
    k = grid.wavenumbers[half]
    k2 = grid.k_squared[half].copy()
    zero = (0,) * dim
    k2[zero] = 1.0
    kdotf = np.einsum("i...,i...->...", k, force)
    proj = force - k * (kdotf / k2)[None]
    proj[(slice(None),) + zero] = 0.0
    rhs_u = -proj

    rhs_tau = -adv_tau_h + cubic + grad_sq_h[None] * dbar.reshape((dim,) + (1,) * dim)
    return (hermitian_expand(rhs_u, dim, n), hermitian_expand(rhs_tau, dim, n))


def rhs_velocity(state: State) -> SpectralField:
    """-P[u.grad u + div(grad tau (.) grad tau)], dealiased."""
    ru, _ = _nonlinear_rhs(state.u.coeffs, state.tau.coeffs, state.dbar, state.grid)
    return SpectralField(state.grid, 1, ru)


def rhs_director(state: State) -> SpectralField:
    """-u.grad tau + |grad tau|^2 (tau + dbar), dealiased."""
    _, rt = _nonlinear_rhs(state.u.coeffs, state.tau.coeffs, state.dbar, state.grid)
    return SpectralField(state.grid, 1, rt)


def stable_dt(state: State) -> float:
    """Conservative step bound for the explicit nonlinear terms.

    dt <= min( 0.5 / (max|u| k_max), 0.25 / (k_max^2 max(1, ||grad tau||_inf)) )
    with k_max the dealiasing cutoff frequency.
    """
    k_max = state.grid.dealias_cutoff
    u_max = float(np.max(to_physical(state.u).magnitude()))
    g_max = float(np.max(to_physical(gradient(state.tau)).magnitude()))
    advective = math.inf if u_max == 0.0 else 0.5 / (u_max * k_max)
    director = 0.25 / (k_max ** 2 * max(1.0, g_max))
    return min(advective, director)


@dataclass
class _StepFactors:
    e_u: np.ndarray
    e_u_half: np.ndarray
    e_tau: np.ndarray
    e_tau_half: np.ndarray
    dt: float


def _make_factors(grid: Grid, mu: float, dt: float) -> _StepFactors:
    k2 = grid.k_squared
    return _StepFactors(
        e_u=np.exp(-mu * k2 * dt), e_u_half=np.exp(-mu * k2 * (dt / 2.0)),
        e_tau=np.exp(-k2 * dt), e_tau_half=np.exp(-k2 * (dt / 2.0)), dt=dt)


def _project_velocity(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    k = grid.wavenumbers
    k2 = grid.k_squared.copy()
    zero = (0,) * grid.dim
    k2[zero] = 1.0
    kdotv = np.einsum("i...,i...->...", k, coeffs)
    out = coeffs - k * (kdotv / k2)[None]
    out[(slice(None),) + zero] = 0.0
    return out


def _coerce(value) -> np.ndarray:
    return value.coeffs if isinstance(value, SpectralField) else np.asarray(value)


def _step_core(state: State, factors: _StepFactors,
               rhs_fn: RhsFn | None, renormalize: bool) -> State:
    """One integrating-factor RK4 step.

    With w = exp(-tL) y the system becomes w' = exp(-tL) N(exp(tL) w);
    classical RK4 on w gives, back in y variables,

        F1 = N(y)                     F2 = N(E_h (y + dt/2 F1))
        F3 = N(E_h y + dt/2 F2)       F4 = N(E y + dt E_h F3)
        y+ = E y + dt/6 (E F1 + 2 E_h (F2 + F3) + F4)

    where E, E_h are the half/full-step heat factors of each variable. The
    pure heat limit (N = 0) is exact.
    """
    grid = state.grid
    dt = factors.dt
    u0, tau0 = state.u.coeffs, state.tau.coeffs

    def rhs(u_c, tau_c, t):
        if rhs_fn is not None:
            st = State(SpectralField(grid, 1, u_c), SpectralField(grid, 1, tau_c),
                       t, state.dbar)
            fu, ftau = rhs_fn(st)
            return _coerce(fu), _coerce(ftau)
        return _nonlinear_rhs(u_c, tau_c, state.dbar, grid)

    f1u, f1t = rhs(u0, tau0, state.t)
    f2u, f2t = rhs(factors.e_u_half * (u0 + 0.5 * dt * f1u),
                   factors.e_tau_half * (tau0 + 0.5 * dt * f1t),
                   state.t + 0.5 * dt)
    f3u, f3t = rhs(factors.e_u_half * u0 + 0.5 * dt * f2u,
                   factors.e_tau_half * tau0 + 0.5 * dt * f2t,
                   state.t + 0.5 * dt)
    f4u, f4t = rhs(factors.e_u * u0 + dt * factors.e_u_half * f3u,
                   factors.e_tau * tau0 + dt * factors.e_tau_half * f3t,
                   state.t + dt)

    u_new = factors.e_u * u0 + (dt / 6.0) * (
        factors.e_u * f1u + 2.0 * factors.e_u_half * (f2u + f3u) + f4u)
    tau_new = factors.e_tau * tau0 + (dt / 6.0) * (
        factors.e_tau * f1t + 2.0 * factors.e_tau_half * (f2t + f3t) + f4t)

    u_new = _project_velocity(u_new, grid)  # keep div u = 0 against drift

    new = State(SpectralField(grid, 1, u_new), SpectralField(grid, 1, tau_new),
                state.t + dt, state.dbar)
    if renormalize:
        new = _renormalize(new)
    return new


def _renormalize(state: State) -> State:
    d = state.director().values
    mag = np.sqrt(np.sum(d ** 2, axis=0))
    d = d / mag[None]
    for i in range(state.grid.dim):
        d[i] -= state.dbar[i]
    tau = dealias(to_spectral(PhysicalField(state.grid, 1, d)))
    return State(state.u, tau, state.t, state.dbar)


def step_direct(state: State, cfg: SolverConfig, dt: float,
                rhs_fn: RhsFn | None = None) -> State:
    """Advance one step of size dt; see _step_core for the scheme."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    factors = _make_factors(state.grid, cfg.mu, dt)
    return _step_core(state, factors, rhs_fn, cfg.renormalize_director)


# ---------------------------------------------------------------------------
# Trajectories and the direct solve loop
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Recorded rows of a run: states and per-block norm series."""

    part: DyadicPartition
    times: np.ndarray
    states: list[State]
    u_l2: np.ndarray      # (n_blocks, n_rows)
    u_linf: np.ndarray
    tau_l2: np.ndarray
    tau_linf: np.ndarray
    dt: float
    dbar: np.ndarray
    blowup: BlowUpError | None = None

    def series(self, var: str, p: float) -> BlockNormSeries:
        key = {("u", 2.0): self.u_l2, ("u", INF): self.u_linf,
               ("tau", 2.0): self.tau_l2, ("tau", INF): self.tau_linf}
        try:
            values = key[(var, p)]
        except KeyError:
            raise ValueError(f"no recorded series for ({var!r}, p={p})") from None
        qs = np.arange(self.part.q_min, self.part.q_max + 1)
        return BlockNormSeries(qs, self.times, values, p)


class _Recorder:
    def __init__(self, part: DyadicPartition):
        self.part = part
        self.times: list[float] = []
        self.states: list[State] = []
        self.cols: dict[str, list[np.ndarray]] = {
            "u_l2": [], "u_linf": [], "tau_l2": [], "tau_linf": []}

    def record(self, state: State) -> None:
        self.times.append(state.t)
        self.states.append(state)
        self.cols["u_l2"].append(block_lp_norms(state.u, self.part, 2.0))
        self.cols["u_linf"].append(block_lp_norms(state.u, self.part, INF))
        self.cols["tau_l2"].append(block_lp_norms(state.tau, self.part, 2.0))
        self.cols["tau_linf"].append(block_lp_norms(state.tau, self.part, INF))

    def build(self, dt: float, dbar: np.ndarray) -> Trajectory:
        def stack(name):
            cols = self.cols[name]
            return (np.stack(cols, axis=1) if cols
                    else np.zeros((self.part.n_blocks, 0)))
        return Trajectory(part=self.part, times=np.asarray(self.times),
                          states=self.states, u_l2=stack("u_l2"),
                          u_linf=stack("u_linf"), tau_l2=stack("tau_l2"),
                          tau_linf=stack("tau_linf"), dt=dt, dbar=dbar)


def _critical_weights(part: DyadicPartition, dim: int) -> tuple[np.ndarray, np.ndarray]:
    qs = np.arange(part.q_min, part.q_max + 1)
    return 2.0 ** ((dim / 2.0 - 1.0) * qs), 2.0 ** ((dim / 2.0) * qs)


def _fast_critical_e(u_c: np.ndarray, tau_c: np.ndarray, masks_sq: np.ndarray,
                     w_u: np.ndarray, w_tau: np.ndarray) -> float:
    pu = np.sum(np.abs(u_c) ** 2, axis=0).ravel()
    pt = np.sum(np.abs(tau_c) ** 2, axis=0).ravel()
    return float(w_u @ np.sqrt(masks_sq @ pu) + w_tau @ np.sqrt(masks_sq @ pt))


def prepare_initial(u0: SpectralField, tau0: SpectralField,
                    dbar: np.ndarray) -> State:
    """Dealias, project the velocity and zero its mean; leave tau's mean."""
    u = leray_project(dealias(u0))
    tau = dealias(tau0)
    return State(u, tau, 0.0, dbar)


def solve(u0: SpectralField, tau0: SpectralField, dbar: np.ndarray,
          cfg: SolverConfig, crit: CriterionConfig | None = None,
          rhs_fn: RhsFn | None = None, part: DyadicPartition | None = None,
          config_echo: dict | None = None) -> tuple[Trajectory, RunReport]:
    """Integrate to cfg.t_end; returns the trajectory and its monitor report.

    Direct mode steps with the integrating-factor RK4 scheme, checking the
    blow-up threshold every step: the run aborts (flagged on trajectory and
    report, with the last valid time and norms) when the critical norm sum
    exceeds cfg.blowup_factor times its initial value or turns non-finite.
    Picard mode delegates to picard_iterate and records the final iterate;
    the report then carries the successive-difference ratios.
    """
    state = prepare_initial(u0, tau0, dbar)
    grid = state.grid
    if part is None:
        part = build_partition(grid)
    if crit is None:
        crit = CriterionConfig.default_for(grid.dim)

    if cfg.mode == "picard":
        result = picard_iterate(u0, tau0, dbar, cfg, part)
        report = build_report(result.trajectory, crit, picard=result,
                              config_echo=config_echo)
        return result.trajectory, report

    rule = stable_dt(state)
    dt = min(cfg.dt, rule) if cfg.dt is not None else rule
    n_steps = max(1, math.ceil(cfg.t_end / dt - 1e-12))
    dt = cfg.t_end / n_steps
    stride = cfg.report_stride or max(1, round(n_steps / 256))

    masks_sq = part.stacked_masks().reshape(part.n_blocks, -1) ** 2
    w_u, w_tau = _critical_weights(part, grid.dim)
    e0 = _fast_critical_e(state.u.coeffs, state.tau.coeffs, masks_sq, w_u, w_tau)
    threshold = cfg.blowup_factor * e0 if e0 > 0 else math.inf

    recorder = _Recorder(part)
    recorder.record(state)
    factors = _make_factors(grid, cfg.mu, dt)
    blowup: BlowUpError | None = None
    for i in range(n_steps):
        state = _step_core(state, factors, rhs_fn, cfg.renormalize_director)
        e_now = _fast_critical_e(state.u.coeffs, state.tau.coeffs,
                                 masks_sq, w_u, w_tau)
        if not math.isfinite(e_now) or e_now > threshold:
            blowup = BlowUpError(
                f"critical norm {e_now:.6g} past threshold {threshold:.6g} "
                f"at t = {state.t:.6g}", time=state.t,
                norms={"E": e_now, "E0": e0})
            if math.isfinite(e_now):
                recorder.record(state)
            break
        if (i + 1) % stride == 0 or i == n_steps - 1:
            recorder.record(state)

    traj = recorder.build(dt, state.dbar)
    traj.blowup = blowup
    report = build_report(traj, crit, config_echo=config_echo)
    return traj, report


# ---------------------------------------------------------------------------
# Duhamel quadrature and the Picard iteration
# ---------------------------------------------------------------------------

def duhamel_integral(forcings: Sequence[SpectralField], times: Sequence[float],
                     coef: float) -> SpectralField:
    """int_0^T exp(-coef |k|^2 (T - s)) G(s) ds by trapezoid on the samples.

    Uses the exact per-mode integrating factor between samples, swept
    forward, which is algebraically identical to the weighted trapezoid sum.
    """
    if len(forcings) == 0:
        raise ValueError("empty forcing sequence")
    t = np.asarray(times, dtype=np.float64)
    if t.size != len(forcings):
        raise ValueError("one forcing per time sample required")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("time samples must be strictly increasing")
    grid = forcings[0].grid
    k2 = grid.k_squared
    acc = np.zeros_like(forcings[0].coeffs)
    for i in range(t.size - 1):
        h = t[i + 1] - t[i]
        decay = np.exp(-coef * k2 * h)
        acc = decay * (acc + 0.5 * h * forcings[i].coeffs) \
            + 0.5 * h * forcings[i + 1].coeffs
    return SpectralField(grid, forcings[0].rank, acc)


@dataclass
class PicardResult:
    """Outcome of the linearizing iteration."""

    trajectory: Trajectory
    iterate_series: list[Trajectory]
    diffs: list[float]
    ratios: list[float]
    converged: bool
    iterations: int


def _sample_rows(n_samples: int, stride: int) -> np.ndarray:
    rows = np.arange(0, n_samples, stride)
    if rows[-1] != n_samples - 1:
        rows = np.append(rows, n_samples - 1)
    return rows


def _traj_from_arrays(times: np.ndarray, u_arr: np.ndarray, tau_arr: np.ndarray,
                      rows: np.ndarray, part: DyadicPartition, dt: float,
                      dbar: np.ndarray) -> Trajectory:
    rec = _Recorder(part)
    grid = part.grid
    for r in rows:
        st = State(SpectralField(grid, 1, u_arr[r].copy()),
                   SpectralField(grid, 1, tau_arr[r].copy()),
                   float(times[r]), dbar)
        rec.record(st)
    return rec.build(dt, dbar)


def picard_iterate(u0: SpectralField, tau0: SpectralField, dbar: np.ndarray,
                   cfg: SolverConfig,
                   part: DyadicPartition | None = None) -> PicardResult:
    """Run the linearizing iteration on [0, t_end].

    Iterate 1 is the heat flow exp(a t Lap) of both data fields. Iterate
    n + 1 solves the linear heat problems (coefficients mu and 1) forced by
    iterate n's nonlinear terms via the trapezoidal Duhamel sweep on the
    direct-mode time grid. Stops when the sup-in-time critical-norm distance
    between successive iterates falls below cfg.picard_tol; reports the
    successive-difference ratios either way.
    """
    state0 = prepare_initial(u0, tau0, dbar)
    grid = state0.grid
    if part is None:
        part = build_partition(grid)

    rule = stable_dt(state0)
    dt = min(cfg.dt, rule) if cfg.dt is not None else rule
    n_steps = max(1, math.ceil(cfg.t_end / dt - 1e-12))
    dt = cfg.t_end / n_steps
    times = np.arange(n_steps + 1) * dt
    stride = cfg.report_stride or max(1, round(n_steps / 64))
    rows = _sample_rows(n_steps + 1, stride)

    k2 = grid.k_squared
    shape = (n_steps + 1, grid.dim) + grid.shape
    masks_sq = part.stacked_masks().reshape(part.n_blocks, -1) ** 2
    w_u, w_tau = _critical_weights(part, grid.dim)

    def sup_diff(u_a, tau_a, u_b, tau_b) -> float:
        du = np.sum(np.abs(u_a - u_b) ** 2, axis=1).reshape(n_steps + 1, -1)
        dtau = np.sum(np.abs(tau_a - tau_b) ** 2, axis=1).reshape(n_steps + 1, -1)
        per_t = (np.sqrt(du @ masks_sq.T) @ w_u
                 + np.sqrt(dtau @ masks_sq.T) @ w_tau)
        return float(np.max(per_t))

    # iterate 1: pure heat flow with the probe coefficient a
    decay_a = np.exp(-cfg.a * k2 * dt)
    u_prev = np.empty(shape, dtype=np.complex128)
    tau_prev = np.empty(shape, dtype=np.complex128)
    u_prev[0], tau_prev[0] = state0.u.coeffs, state0.tau.coeffs
    for i in range(n_steps):
        u_prev[i + 1] = decay_a * u_prev[i]
        tau_prev[i + 1] = decay_a * tau_prev[i]

    iterate_series = [_traj_from_arrays(times, u_prev, tau_prev, rows, part,
                                        dt, state0.dbar)]
    diffs: list[float] = []
    ratios: list[float] = []
    converged = False
    iterations = 1

    decay_u = np.exp(-cfg.mu * k2 * dt)
    decay_tau = np.exp(-k2 * dt)
    for _ in range(cfg.picard_max_iter):
        u_next = np.empty(shape, dtype=np.complex128)
        tau_next = np.empty(shape, dtype=np.complex128)
        u_next[0], tau_next[0] = state0.u.coeffs, state0.tau.coeffs
        fu_prev, ft_prev = _nonlinear_rhs(u_prev[0], tau_prev[0],
                                          state0.dbar, grid)
        for i in range(n_steps):
            fu_next, ft_next = _nonlinear_rhs(u_prev[i + 1], tau_prev[i + 1],
                                              state0.dbar, grid)
            u_next[i + 1] = decay_u * (u_next[i] + 0.5 * dt * fu_prev) \
                + 0.5 * dt * fu_next
            tau_next[i + 1] = decay_tau * (tau_next[i] + 0.5 * dt * ft_prev) \
                + 0.5 * dt * ft_next
            fu_prev, ft_prev = fu_next, ft_next

        if not (np.all(np.isfinite(u_next[-1])) and np.all(np.isfinite(tau_next[-1]))):
            raise BlowUpError("non-finite iterate in Picard sweep",
                              time=float(times[-1]))

        diff = sup_diff(u_next, tau_next, u_prev, tau_prev)
        diffs.append(diff)
        if len(diffs) >= 2 and diffs[-2] > 0:
            ratios.append(diffs[-1] / diffs[-2])
        iterations += 1
        u_prev, tau_prev = u_next, tau_next
        iterate_series.append(_traj_from_arrays(times, u_prev, tau_prev, rows,
                                                part, dt, state0.dbar))
        if diff < cfg.picard_tol:
            converged = True
            break

    return PicardResult(trajectory=iterate_series[-1],
                        iterate_series=iterate_series, diffs=diffs,
                        ratios=ratios, converged=converged,
                        iterations=iterations)


# ---------------------------------------------------------------------------
# State snapshots: u, tau and the far-field director as three field records
# ---------------------------------------------------------------------------

def save_state(path, state: State) -> None:
    """Write a state snapshot: records for u, tau, and dbar (constant field)."""
    grid = state.grid
    dbar_vals = np.broadcast_to(
        state.dbar.reshape((grid.dim,) + (1,) * grid.dim),
        (grid.dim,) + grid.shape).copy()
    with open(path, "wb") as fh:
        write_field(fh, to_physical(state.u), state.t)
        write_field(fh, to_physical(state.tau), state.t)
        write_field(fh, PhysicalField(grid, 1, dbar_vals), state.t)


def load_state(path, period: float | None = None) -> State:
    kwargs = {} if period is None else {"period": period}
    with open(path, "rb") as fh:
        u_p, t = read_field(fh, **kwargs)
        tau_p, _ = read_field(fh, **kwargs)
        dbar_p, _ = read_field(fh, **kwargs)
    flat = dbar_p.flat_components().reshape(dbar_p.grid.dim, -1)
    if np.max(np.ptp(flat, axis=1)) > 1e-12:
        raise ValueError("far-field director record is not constant")
    dbar = flat[:, 0]
    return State(to_spectral(u_p), to_spectral(tau_p), t, dbar)
