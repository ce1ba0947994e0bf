"""Pseudospectral time integration of the coupled system

    u_t + (u v)_x + u_xxx = 0,    v_t + u u_x = 0

in the lab frame or a frame moving at constant speed. The linear symbols
i(k^3 + s k) for u and i s k for v are handled exactly through integrating
factors; the quadratic terms are evaluated pseudospectrally with 2/3-rule
dealiasing (products truncated to |k| <= N/3, state kept in the same band).

Stability note: the integrating-factor RK4 stage phases interact with the
advective coupling, so for large-amplitude states (the traveling waves, with
fields of size ~10) the usable time step is much smaller than the advective
CFL estimate; see NOTES.md. The conservation and accuracy tests
pin parameter choices inside the measured stable envelope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waves import GridFunction, WaveParams, eval_profile

__all__ = [
    "SimState",
    "PreprocessRecord",
    "Trajectory",
    "BlowUpError",
    "WindowTooShortError",
    "make_state",
    "state_fields",
    "preprocess",
    "undo_preprocess",
    "step",
    "simulate",
    "growth_rate_experiment",
    "conserved_of_state",
]

BLOWUP_LIMIT = 1e12


class BlowUpError(RuntimeError):
    """A coefficient left the finite range; carries the last finite time."""

    def __init__(self, message: str, t_last: float, trajectory=None):
        super().__init__(message)
        self.t_last = t_last
        self.trajectory = trajectory


class WindowTooShortError(ValueError):
    """The deviation left the linear regime before the fit window closed."""


@dataclass(frozen=True, eq=False)
class SimState:
    """Spectral state: full-length complex FFT coefficient arrays (Hermitian)."""

    t: float
    u_hat: np.ndarray
    v_hat: np.ndarray
    frame_speed: float
    L: float

    @property
    def N(self) -> int:
        return self.u_hat.size

    def hermitian_defect(self) -> float:
        """Max deviation of the coefficient arrays from Hermitian symmetry."""
        d = 0.0
        for h in (self.u_hat, self.v_hat):
            d = max(d, float(np.max(np.abs(h - np.conj(h[_reflect(h.size)])))))
        scale = max(float(np.max(np.abs(self.u_hat))), float(np.max(np.abs(self.v_hat))), 1.0)
        return d / scale


def _reflect(N: int) -> np.ndarray:
    return (-np.arange(N)) % N


def _dealias_mask(N: int) -> np.ndarray:
    kidx = np.fft.fftfreq(N, d=1.0 / N)
    return np.abs(kidx) <= N // 3


def make_state(u: GridFunction, v: GridFunction, frame_speed: float = 0.0) -> SimState:
    if u.N != v.N or u.L != v.L:
        raise ValueError("u and v must share the same grid")
    mask = _dealias_mask(u.N)
    return SimState(t=0.0, u_hat=np.fft.fft(u.samples) * mask,
                    v_hat=np.fft.fft(v.samples) * mask,
                    frame_speed=float(frame_speed), L=u.L)


def state_fields(s: SimState):
    """Physical-space (u, v) as GridFunctions."""
    u = np.fft.ifft(s.u_hat).real
    v = np.fft.ifft(s.v_hat).real
    return GridFunction(s.L, u), GridFunction(s.L, v)


# ---------------------------------------------------------------------------
# mean-zero preconditioning of v

@dataclass(frozen=True)
class PreprocessRecord:
    g0: float
    shift_rule: str


def preprocess(u0: GridFunction, v0: GridFunction):
    """Remove the mean of v0; evolution then runs with mean-zero v.

    The removed mean g0 turns into the spatial shift x -> x + g0 t that
    undo_preprocess applies when mapping states back to the lab frame. In the
    shifted frame the u equation keeps its lab form while v is transported at
    speed g0, so the downstream evolution is
    simulate(u0', v0', ..., frame_speed=0.0, frame_speed_v=rec.g0).
    """
    if u0.N != v0.N or u0.L != v0.L:
        raise ValueError("u0 and v0 must share the same grid")
    g0 = float(np.mean(v0.samples))
    v_shifted = GridFunction(v0.L, v0.samples - g0)
    rec = PreprocessRecord(g0=g0, shift_rule=f"x -> x + ({g0!r}) * t applied at output")
    return u0, v_shifted, rec


def undo_preprocess(rec: PreprocessRecord, u: GridFunction, v: GridFunction, t: float):
    """Map a preprocessed state at time t back to a lab-frame solution."""
    shift = rec.g0 * t
    k = 2.0 * np.pi * np.fft.fftfreq(u.N, d=u.L / u.N)
    phase = np.exp(-1j * k * shift)
    u_lab = np.fft.ifft(np.fft.fft(u.samples) * phase).real
    v_lab = np.fft.ifft(np.fft.fft(v.samples) * phase).real + rec.g0
    return GridFunction(u.L, u_lab), GridFunction(v.L, v_lab)


# ---------------------------------------------------------------------------
# the integrating-factor RK4 stepper

class _Stepper:
    """Precomputed multipliers for fixed (N, L, frame speeds, dt, dealias).

    The two components may ride in different frames: the mean-zero
    preconditioning shifts coordinates by g0 t, which leaves the u equation in
    lab form but transports v at speed g0 (the extra g0 dv/dx is linear and is
    absorbed exactly into v's integrating factor).
    """

    def __init__(self, N: int, L: float, frame_speed: float, dt: float, dealias: bool = True,
                 frame_speed_v: float | None = None):
        k = 2.0 * np.pi * np.fft.fftfreq(N, d=L / N)
        kd = k.copy()
        kd[N // 2] = 0.0  # unpaired Nyquist mode breaks Hermitian symmetry
        self.kd = kd
        self.mask = _dealias_mask(N) if dealias else np.ones(N, dtype=bool)
        self.dt = dt
        sv = frame_speed if frame_speed_v is None else frame_speed_v
        om_u = kd**3 + frame_speed * kd
        om_v = sv * kd
        self.E2u = np.exp(1j * om_u * dt / 2.0)
        self.E2v = np.exp(1j * om_v * dt / 2.0)
        self.E1u = self.E2u**2
        self.E1v = self.E2v**2

    def nonlinear(self, u_hat, v_hat):
        u = np.fft.ifft(u_hat).real
        v = np.fft.ifft(v_hat).real
        nu = -1j * self.kd * (np.fft.fft(u * v) * self.mask)
        nv = -0.5j * self.kd * (np.fft.fft(u * u) * self.mask)
        return nu, nv

    def advance(self, u_hat, v_hat):
        dt = self.dt
        # overflow/invalid are the blow-up detection signal, not a fault
        with np.errstate(over="ignore", invalid="ignore"):
            au, av = self.nonlinear(u_hat, v_hat)
            bu, bv = self.nonlinear(self.E2u * (u_hat + 0.5 * dt * au),
                                    self.E2v * (v_hat + 0.5 * dt * av))
            cu, cv = self.nonlinear(self.E2u * u_hat + 0.5 * dt * bu,
                                    self.E2v * v_hat + 0.5 * dt * bv)
            du, dv = self.nonlinear(self.E1u * u_hat + dt * self.E2u * cu,
                                    self.E1v * v_hat + dt * self.E2v * cv)
            u_next = self.E1u * u_hat + dt / 6.0 * (self.E1u * au + 2.0 * self.E2u * (bu + cu) + du)
            v_next = self.E1v * v_hat + dt / 6.0 * (self.E1v * av + 2.0 * self.E2v * (bv + cv) + dv)
        return u_next, v_next


def step(s: SimState, dt: float, dealias: bool = True) -> SimState:
    """Advance one IFRK4 step. For long runs prefer simulate (reuses multipliers)."""
    if not (dt > 0.0):
        raise ValueError(f"dt must be positive (got {dt!r})")
    stepper = _Stepper(s.N, s.L, s.frame_speed, dt, dealias)
    u_next, v_next = stepper.advance(s.u_hat, s.v_hat)
    _check_finite(u_next, v_next, s.t + dt)
    return SimState(t=s.t + dt, u_hat=u_next, v_hat=v_next,
                    frame_speed=s.frame_speed, L=s.L)


def _check_finite(u_hat, v_hat, t, trajectory=None):
    bad = (not np.all(np.isfinite(u_hat)) or not np.all(np.isfinite(v_hat))
           or np.max(np.abs(u_hat)) > BLOWUP_LIMIT * u_hat.size
           or np.max(np.abs(v_hat)) > BLOWUP_LIMIT * v_hat.size)
    if bad:
        raise BlowUpError(f"solution blew up near t = {t:.6g}", t_last=t,
                          trajectory=trajectory)


def conserved_of_state(s: SimState):
    from .waves import conserved_quantities

    u, v = state_fields(s)
    return conserved_quantities(u, v)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: list
    conserved: np.ndarray       # rows: (t, m_u, m_v, e_mixed, l2)
    max_rel_drift: float


def simulate(u0: GridFunction, v0: GridFunction, T: float, dt: float,
             frame_speed: float = 0.0, sample_every: int | None = None,
             dealias: bool = True, frame_speed_v: float | None = None) -> Trajectory:
    """Evolve (u0, v0) to time T, logging the four conserved quantities.

    frame_speed_v overrides the v-component frame (used by the mean-zero
    preconditioning round trip, where u stays in lab form while v is
    transported at g0). Samples are taken every sample_every steps (default:
    ~64 samples total). Raises BlowUpError carrying the partial trajectory if
    the state leaves the finite range.
    """
    if not (T > 0.0 and dt > 0.0):
        raise ValueError("T and dt must be positive")
    n_steps = int(round(T / dt))
    if sample_every is None:
        sample_every = max(1, n_steps // 64)

    if u0.N != v0.N or u0.L != v0.L:
        raise ValueError("u0 and v0 must share the same grid")
    mask = _dealias_mask(u0.N) if dealias else np.ones(u0.N, dtype=bool)
    state = SimState(t=0.0, u_hat=np.fft.fft(u0.samples) * mask,
                     v_hat=np.fft.fft(v0.samples) * mask,
                     frame_speed=float(frame_speed), L=u0.L)
    stepper = _Stepper(state.N, state.L, state.frame_speed, dt, dealias,
                       frame_speed_v=frame_speed_v)

    times = [0.0]
    states = [state]
    logs = [(0.0, *conserved_of_state(state))]
    u_hat, v_hat = state.u_hat, state.v_hat
    t = 0.0
    for n in range(1, n_steps + 1):
        u_hat, v_hat = stepper.advance(u_hat, v_hat)
        t = n * dt
        if n % sample_every == 0 or n == n_steps:
            partial = Trajectory(times=np.asarray(times), states=states,
                                 conserved=np.asarray(logs), max_rel_drift=np.nan)
            _check_finite(u_hat, v_hat, t, trajectory=partial)
            snap = SimState(t=t, u_hat=u_hat.copy(), v_hat=v_hat.copy(),
                            frame_speed=state.frame_speed, L=state.L)
            times.append(t)
            states.append(snap)
            logs.append((t, *conserved_of_state(snap)))

    logs = np.asarray(logs)
    q0 = logs[0, 1:]
    scale = np.maximum(np.abs(q0), 1.0)
    drift = float(np.max(np.abs(logs[:, 1:] - q0) / scale))
    return Trajectory(times=np.asarray(times), states=states, conserved=logs,
                      max_rel_drift=drift)


# ---------------------------------------------------------------------------
# growth-rate experiment

@dataclass(frozen=True)
class GrowthResult:
    lambda_fit: float
    lambda_lin: float
    rel_err: float
    times: np.ndarray
    deviations: np.ndarray


def growth_rate_experiment(p: WaveParams, eps: float, T: float, N: int = 256,
                           dt: float = 1e-3) -> GrowthResult:
    """Seed the wave with eps times the most unstable eigenmode and fit the rate.

    Requires an unstable mode from the collocation eigensolve; for this wave
    family the computed spectrum is purely imaginary, so the seed step raises
    NoUnstableModeError (see NOTES.md). The fitting machinery itself is
    exercised by the oscillation-frequency cross-check in the tests.
    """
    from .spectra import unstable_eigenmode

    if not (1e-8 <= eps <= 1e-3):
        raise ValueError(f"eps must lie in [1e-8, 1e-3] (got {eps!r})")

    lam, U, V = unstable_eigenmode(p, N)  # raises NoUnstableModeError if stable
    lam_lin = float(lam.real)
    x = np.arange(N) * (p.L / N)
    psi, phi = eval_profile(p, x)
    znorm = np.sqrt(p.L / N * (np.sum(np.abs(U) ** 2) + np.sum(np.abs(V) ** 2)))
    u0 = GridFunction(p.L, psi + eps * U.real / znorm)
    v0 = GridFunction(p.L, phi + eps * V.real / znorm)

    traj = simulate(u0, v0, T, dt, frame_speed=p.c)
    times, devs = deviation_series(traj, p)
    lam_fit = fit_growth_rate(times, devs, p, eps)
    return GrowthResult(lambda_fit=lam_fit, lambda_lin=lam_lin,
                        rel_err=abs(lam_fit - lam_lin) / abs(lam_lin),
                        times=times, deviations=devs)


def deviation_series(traj: Trajectory, p: WaveParams):
    """L2 norm of (u - psi, v - phi) at each sampled state (co-moving frame)."""
    devs = []
    for s in traj.states:
        u, v = state_fields(s)
        psi, phi = eval_profile(p, u.x)
        w = p.L / u.N
        devs.append(np.sqrt(w * (np.sum((u.samples - psi) ** 2)
                                 + np.sum((v.samples - phi) ** 2))))
    return traj.times, np.asarray(devs)


def fit_growth_rate(times: np.ndarray, devs: np.ndarray, p: WaveParams,
                    eps: float, linear_ceiling: float = 1e-2) -> float:
    """Least-squares slope of log(deviation) over the exponential window.

    The window keeps samples after a 10% warmup and below linear_ceiling
    times the wave norm; fewer than five qualifying samples is an error.
    """
    wave_norm = np.sqrt(p.L * np.mean(eval_profile(p, np.linspace(0, p.L, 256))[0] ** 2))
    ok = (times >= 0.1 * times[-1]) & (devs < linear_ceiling * wave_norm) & (devs > 0)
    if int(np.sum(ok)) < 5:
        raise WindowTooShortError(
            f"only {int(np.sum(ok))} samples inside the linear-regime window"
        )
    A = np.vstack([times[ok], np.ones(int(np.sum(ok)))]).T
    slope, _ = np.linalg.lstsq(A, np.log(devs[ok]), rcond=None)[0]
    return float(slope)
