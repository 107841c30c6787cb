"""Advection-diffusion d(theta)/dt + div(u theta) = kappa Lap theta for piecewise flows.

Pseudo-spectral on an n x n grid with the 2/3 rule: theta is kept on the box
|k|_inf <= K, K = ceil(n/3) - 1, and the flux u*theta is formed on the grid and
projected back to the box.  With divergence-free u of spectral radius <= K the
projected advection operator is exactly skew-adjoint.  Each step is a Strang
split: half diffusion, advection with the frozen segment field, half
diffusion.  The advection substep is either an exact Chebyshev propagator
(default) or classical RK4 under CFL <= 0.5.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import fft
from scipy.special import jv

from .flows import FlowParams, FrozenFlow, ModeTable, PiecewiseFlow, build_piecewise_flow
from .spectrum import SpectrumError


class TransportError(RuntimeError):
    pass


def retained_kmax(n: int) -> int:
    return int(math.ceil(n / 3) - 1)


class SpectralGrid:
    """rfft wavenumbers, dealiasing mask and norms on an n x n grid."""

    def __init__(self, n: int):
        self.n = n
        self.K = retained_kmax(n)
        kx = fft.fftfreq(n, 1.0 / n)
        ky = fft.rfftfreq(n, 1.0 / n)
        self.kx, self.ky = np.meshgrid(kx, ky, indexing="ij")
        self.k2 = self.kx**2 + self.ky**2
        self.mask = (np.abs(self.kx) <= self.K) & (np.abs(self.ky) <= self.K)
        # -i k masked, so that A theta_hat = dx * F(u_x theta) + dy * F(u_y theta)
        self.dx = -1j * self.kx * self.mask
        self.dy = -1j * self.ky * self.mask
        # Parseval weights for the half spectrum
        w = np.full(self.ky.shape, 2.0)
        w[:, 0] = 1.0
        if n % 2 == 0:
            w[:, -1] = 1.0
        self.weights = w

    def forward(self, th):
        return fft.rfft2(th, axes=(-2, -1)) * self.mask

    def backward(self, th_hat):
        return fft.irfft2(th_hat, s=(self.n, self.n), axes=(-2, -1))

    def energy(self, th_hat):
        """||theta||_2^2 = (2 pi / n)^2 sum theta^2, from the half spectrum."""
        a = np.abs(th_hat) ** 2 * self.weights
        return (2.0 * np.pi) ** 2 * a.sum(axis=(-2, -1)) / self.n**4

    def mean(self, th_hat):
        return th_hat[..., 0, 0].real / self.n**2


class Advection:
    """theta_hat -> -P div(u theta) for a frozen field u."""

    def __init__(self, grid: SpectralGrid, u: np.ndarray):
        self.g = grid
        self.u = u
        speed = float(np.sqrt((u * u).sum(0)).max())
        self.speed = speed
        self.radius = 1.01 * speed * math.sqrt(2.0) * grid.K + 1e-300

    def __call__(self, th_hat):
        g = self.g
        th = g.backward(th_hat)
        fx = fft.rfft2(self.u[0] * th, axes=(-2, -1), overwrite_x=True)
        fy = fft.rfft2(self.u[1] * th, axes=(-2, -1), overwrite_x=True)
        fx *= g.dx
        fy *= g.dy
        fx += fy
        return fx

    def chebyshev(self, th_hat, tau: float, tol: float = 1e-14):
        """exp(tau A) theta_hat for skew A with |spectrum| <= radius.

        Uses exp(a Y) = J_0(a) + 2 sum_k J_k(a) Q_k(Y), Q_{k+1} = 2 Y Q_k + Q_{k-1},
        with Y = A / radius and a = tau * radius.
        """
        a = tau * self.radius
        if self.speed == 0.0 or tau == 0.0:
            return th_hat
        m = int(a + 10.0 * max(a, 1.0) ** (1 / 3) + 20)
        J = jv(np.arange(m + 1), a)
        s = 2.0 / self.radius
        p0 = th_hat
        p1 = self(th_hat) / self.radius
        out = J[0] * p0 + (2 * J[1]) * p1
        for k in range(2, m + 1):
            p2 = self(p1)
            p2 *= s
            p2 += p0
            p0, p1 = p1, p2
            out += (2 * J[k]) * p1
            if k > a and abs(J[k]) < tol:
                break
        # A annihilates the mean; the series only reproduces that to rounding
        out[..., 0, 0] = th_hat[..., 0, 0]
        return out

    def rk4(self, th_hat, tau: float, cfl: float = 0.5, max_substeps: int = 100000):
        h = 2.0 * np.pi / self.g.n
        m = max(1, math.ceil(tau * self.speed / (cfl * h)))
        if m > max_substeps:
            raise TransportError(f"CFL substep count {m} exceeds cap {max_substeps}")
        dt = tau / m
        y = th_hat
        for _ in range(m):
            k1 = self(y)
            k2 = self(y + 0.5 * dt * k1)
            k3 = self(y + 0.5 * dt * k2)
            k4 = self(y + dt * k3)
            y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return y


@dataclass
class TransportRun:
    kappa: np.ndarray
    t: np.ndarray
    energy: np.ndarray  # (len(t), len(kappa))
    mean: np.ndarray
    snapshots: dict = field(default_factory=dict)
    final: np.ndarray | None = None

    @property
    def dissipated(self) -> np.ndarray:
        return self.energy[0] - self.energy[-1]


def _as_field(theta0, n):
    th = np.asarray(theta0, float)
    if th.shape != (n, n):
        raise TransportError(f"initial field shape {th.shape} does not match grid {n}")
    return th


def advect_diffuse(theta0, flow: PiecewiseFlow | FrozenFlow, kappa, T: float, dt: float | None = None,
                   integrator: str = "chebyshev", snapshot_times=(), zero_flow: bool = False) -> TransportRun:
    """Solve for one flow realization; kappa may be a scalar or a list.

    Several kappa values share the flow and are advanced together.  dt must
    divide eps; default dt = eps.
    """
    kappas = np.atleast_1d(np.asarray(kappa, float))
    if np.any(kappas < 0):
        raise SpectrumError("kappa", "must be >= 0")
    n = flow.n
    grid = SpectralGrid(n)
    if flow.max_wavenumber() > grid.K:
        raise SpectrumError("kmax", f"flow wavenumber {flow.max_wavenumber()} exceeds retained K={grid.K} at n={n}")
    dt = flow.eps if dt is None else dt
    sub = flow.eps / dt
    if abs(sub - round(sub)) > 1e-9 or round(sub) < 1:
        raise SpectrumError("dt", f"dt={dt} must divide eps={flow.eps}")
    sub = int(round(sub))
    nsteps = int(round(T / dt))
    if abs(nsteps * dt - T) > 1e-9 * max(T, 1):
        raise SpectrumError("T", f"T={T} is not a multiple of dt={dt}")
    if nsteps > sub * flow.count:
        raise SpectrumError("T", f"T={T} runs past the flow's {flow.count} segments")

    th0 = _as_field(theta0, n)
    th_hat = np.repeat(grid.forward(th0)[None], len(kappas), 0)
    half = np.exp(-0.5 * kappas[:, None, None] * grid.k2[None] * dt)
    t = np.arange(nsteps + 1) * dt
    energy = np.empty((nsteps + 1, len(kappas)))
    mean = np.empty((nsteps + 1, len(kappas)))
    energy[0] = grid.energy(th_hat)
    mean[0] = grid.mean(th_hat)
    want = {int(round(s / dt)) for s in snapshot_times}
    snaps = {}
    if 0 in want:
        snaps[0.0] = grid.backward(th_hat)
    adv = None
    for i in range(nsteps):
        seg = i // sub
        if i % sub == 0:
            u = np.zeros((2, n, n)) if zero_flow else flow.segments[seg]
            adv = Advection(grid, u)
        th_hat = half * th_hat
        if integrator == "chebyshev":
            th_hat = adv.chebyshev(th_hat, dt)
        elif integrator == "rk4":
            th_hat = adv.rk4(th_hat, dt)
        else:
            raise SpectrumError("integrator", f"unknown integrator {integrator!r}")
        th_hat = half * th_hat
        energy[i + 1] = grid.energy(th_hat)
        mean[i + 1] = grid.mean(th_hat)
        if i + 1 in want:
            snaps[float(t[i + 1])] = grid.backward(th_hat)
    return TransportRun(kappas, t, energy, mean, snaps, grid.backward(th_hat))


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass
class EnsembleStats:
    t: np.ndarray
    mean_energy: np.ndarray  # (len(t), len(kappa))
    stderr: np.ndarray
    n_realizations: int
    kappa: np.ndarray
    samples: np.ndarray | None = None  # (realizations, len(t), len(kappa))
    mean_drift: float = 0.0  # max |spatial mean(t) - spatial mean(0)| over all runs

    def at(self, time: float, j: int = 0):
        i = int(np.argmin(np.abs(self.t - time)))
        return float(self.mean_energy[i, j]), float(self.stderr[i, j])


@dataclass(frozen=True)
class MCJob:
    model: str
    params: FlowParams
    eps: float
    kappas: tuple
    T: float
    seed: int
    realization: int
    dt: float | None = None
    integrator: str = "chebyshev"
    zero_flow: bool = False


def _run_job(job: MCJob, theta0):
    flow = build_piecewise_flow(job.model, job.params, job.eps, job.T, job.seed, stream=(job.realization,))
    run = advect_diffuse(theta0, flow, list(job.kappas), job.T, job.dt, job.integrator, zero_flow=job.zero_flow)
    return run.t, run.energy, run.mean


def run_ensemble(model: str, params: FlowParams, eps: float, kappa, theta0, T: float,
                 n_realizations: int, seed: int, dt: float | None = None, jobs: int = 1,
                 integrator: str = "chebyshev", realizations=None, zero_flow: bool = False):
    """Energy traces for every realization; realization r uses flow stream (seed, r)."""
    reals = list(range(n_realizations)) if realizations is None else list(realizations)
    if len(set(reals)) != len(reals):
        raise SpectrumError("realizations", "duplicate realization streams")
    kappas = tuple(float(k) for k in np.atleast_1d(kappa))
    todo = [MCJob(model, params, eps, kappas, T, seed, r, dt, integrator, zero_flow) for r in reals]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            out = list(ex.map(_run_job, todo, [theta0] * len(todo)))
    else:
        out = [_run_job(j, theta0) for j in todo]
    t = out[0][0]
    E = np.stack([o[1] for o in out])
    M = np.stack([o[2] for o in out])
    return t, E, M, np.array(kappas)


def mc_energy(model: str, params: FlowParams, eps: float, kappa, theta0, T: float,
              n_realizations: int, seed: int, dt: float | None = None, jobs: int = 1,
              integrator: str = "chebyshev", zero_flow: bool = False) -> EnsembleStats:
    if n_realizations < 2:
        raise SpectrumError("realizations", "need at least 2 realizations for a standard error")
    t, E, M, kappas = run_ensemble(model, params, eps, kappa, theta0, T, n_realizations, seed, dt, jobs,
                                   integrator, zero_flow=zero_flow)
    mean = E.mean(0)
    se = E.std(0, ddof=1) / np.sqrt(len(E))
    drift = float(np.max(np.abs(M - M[:, :1])))
    return EnsembleStats(t, mean, se, len(E), kappas, E, drift)


@dataclass
class SweepTable:
    kappa: np.ndarray
    dissipated: np.ndarray
    stderr: np.ndarray
    initial_energy: float
    final_energy: np.ndarray
    final_stderr: np.ndarray
    samples: np.ndarray | None = None  # per-realization dissipation (r, kappa)
    energy: np.ndarray | None = None  # traces (r, len(t), kappa)
    mean_drift: float = 0.0

    def fractions(self) -> np.ndarray:
        return self.dissipated / self.initial_energy

    def rows(self):
        return zip(self.kappa, self.dissipated, self.stderr)


def dissipation_sweep(model: str, params: FlowParams, eps: float, kappa_list, theta0, T: float,
                      n: int, seed: int, dt: float | None = None, jobs: int = 1,
                      integrator: str = "chebyshev") -> SweepTable:
    """Mean of ||theta0||^2 - ||theta(T)||^2 per kappa, realizations shared across kappa."""
    kl = np.asarray(kappa_list, float)
    if np.any(np.diff(kl) >= 0):
        raise SpectrumError("kappa_list", "must be strictly decreasing")
    t, E, M, kappas = run_ensemble(model, params, eps, kl, theta0, T, n, seed, dt, jobs, integrator)
    diss = E[:, 0, :] - E[:, -1, :]
    se = diss.std(0, ddof=1) / np.sqrt(len(diss)) if len(diss) > 1 else np.zeros(len(kl))
    fse = E[:, -1, :].std(0, ddof=1) / np.sqrt(len(E)) if len(E) > 1 else np.zeros(len(kl))
    drift = float(np.max(np.abs(M - M[:, :1])))
    return SweepTable(kappas, diss.mean(0), se, float(E[0, 0, 0]), E[:, -1, :].mean(0), fse, diss, E, drift)


@dataclass
class GapReport:
    kappa: list
    dissipated: list
    stderr: list
    initial_energy: float
    limit_dissipation: float
    uncertainty: float
    verdict: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def energy_gap_witness(table: SweepTable, detect: float = 0.25) -> GapReport:
    """Extrapolate dissipation to kappa -> 0 from a decades-spaced sweep.

    Aitken extrapolation on the last three values when their differences
    shrink geometrically, otherwise the smallest-kappa value.  The gap is
    reported as "gap detected" when the extrapolated dissipation minus two
    uncertainties exceeds detect * ||theta0||^2, "gap vanishing" when the
    dissipation falls monotonically and the limit plus two uncertainties is
    below it, and "inconclusive" otherwise.
    """
    k, dsp, se = table.kappa, table.dissipated, table.stderr
    if len(k) < 3 or k[0] / k[-1] < 99:
        raise SpectrumError("kappa_list", "need at least 3 values spanning 2 decades")
    E0 = table.initial_energy
    d1, d2, d3 = dsp[-3:]
    r = (d2 - d3) / (d1 - d2) if d1 != d2 else np.inf
    if 0 < r < 1:
        limit = d3 - (d2 - d3) * r / (1 - r)
        limit = max(limit, 0.0)
    else:
        limit = d3
    unc = float(np.sqrt(np.sum(np.asarray(se[-3:]) ** 2)))
    monotone = bool(np.all(np.diff(dsp) < 0))
    if limit - 2 * unc > detect * E0:
        verdict = "gap detected"
    elif monotone and limit + 2 * unc < detect * E0:
        verdict = "gap vanishing"
    else:
        verdict = "inconclusive"
    return GapReport(list(map(float, k)), list(map(float, dsp)), list(map(float, se)), E0,
                     float(limit), unc, verdict)


def cosine_initial(n: int) -> np.ndarray:
    """theta0 = cos(x1) on the n x n grid."""
    x = 2.0 * np.pi * np.arange(n) / n
    return np.repeat(np.cos(x)[:, None], n, 1)


__all__ = [
    "SpectralGrid", "Advection", "TransportRun", "advect_diffuse", "EnsembleStats", "mc_energy",
    "run_ensemble", "SweepTable", "dissipation_sweep", "GapReport", "energy_gap_witness",
    "cosine_initial", "retained_kmax", "ModeTable",
]
