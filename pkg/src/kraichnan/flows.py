"""Piecewise-constant-in-time random drifts.

A flow with correlation time eps uses the field u_j on [(j-1) eps, j eps),
scaled by eps^-1/2.  Segments are generated lazily from their own random
stream, so a flow is reproducible from (model, params, eps, T, seed, stream)
and never has to be held in memory in full.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectrum import (
    ProfileSampler,
    ShearSpectrum,
    SpectrumConfig,
    SpectrumError,
    VectorFieldSampler,
    rng_for,
    spectral_tensor_array,
    wavevector_box,
)

MODELS = ("smooth_mode", "oriented_shear", "bounded_shear_drift", "white_kraichnan", "white_shear")


@dataclass(frozen=True)
class FlowParams:
    """Spatial parameters shared by the flow models (d = 2)."""

    n: int = 64
    alpha: float = 0.5
    eta: float = 0.0
    rho: str = "gaussian"
    kmax: int = 21

    def spectrum(self) -> SpectrumConfig:
        return SpectrumConfig(2, self.alpha, self.eta, self.rho, self.kmax)

    def shear(self) -> ShearSpectrum:
        return ShearSpectrum(self.alpha, self.kmax)


# --------------------------------------------------------------------------
# smooth single-mode model


@dataclass
class ModeTable:
    """Vector trigonometric modes f_j with weights c_j, sum c_j^2 = 1.

    Modes are perp(k) cos(k.x) and perp(k) sin(k.x) over a half plane of
    wavevectors, all scaled by one constant so that sum_j c_j^2 f_j(x) f_j(y)^T
    equals the Kraichnan covariance D(x - y).
    """

    k: np.ndarray  # (m, 2) integer
    trig: np.ndarray  # (m,) 0 = cos, 1 = sin
    direction: np.ndarray  # (m, 2) unit, perpendicular to k
    weights: np.ndarray  # c_j^2
    scale: float

    @classmethod
    def from_spectrum(cls, cfg: SpectrumConfig | None = None) -> "ModeTable":
        cfg = SpectrumConfig(2, 0.5, 0.0, "gaussian", 32) if cfg is None else cfg
        k = wavevector_box(cfg.kmax, 2)
        half = (k[:, 0] > 0) | ((k[:, 0] == 0) & (k[:, 1] > 0))
        k = k[half]
        lam = np.trace(spectral_tensor_array(cfg, k), axis1=1, axis2=2)
        perp = np.stack([-k[:, 1], k[:, 0]], 1) / np.linalg.norm(k, axis=1)[:, None]
        # each half-plane k contributes 2 lam P cos(k.r) = 2 lam P (cos cos + sin sin)
        w = np.concatenate([2 * lam, 2 * lam])
        W = w.sum()
        return cls(np.concatenate([k, k]), np.repeat([0, 1], len(k)), np.concatenate([perp, perp]),
                   w / W, float(np.sqrt(W)))

    def __len__(self):
        return len(self.weights)

    def mode(self, j: int, x: np.ndarray) -> np.ndarray:
        """f_j at points x (..., 2), returns (2, ...)."""
        phase = x @ self.k[j].astype(float)
        s = np.cos(phase) if self.trig[j] == 0 else np.sin(phase)
        return self.scale * np.multiply.outer(self.direction[j], s)

    def covariance(self, x, y) -> np.ndarray:
        """sum_j c_j^2 f_j(x) f_j(y)^T for single points x, y."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        px, py = self.k @ x, self.k @ y
        sx = np.where(self.trig == 0, np.cos(px), np.sin(px))
        sy = np.where(self.trig == 0, np.cos(py), np.sin(py))
        w = self.weights * self.scale**2 * sx * sy
        return np.einsum("m,mi,mj->ij", w, self.direction, self.direction)


def sample_smooth_mode_segment(table: ModeTable, seed, n: int) -> np.ndarray:
    rng = rng_for(seed)
    j = rng.choice(len(table), p=table.weights)
    z = rng.standard_normal()
    return z * table.mode(j, 2.0 * np.pi * _grid(n))


def _grid(n):
    x = np.arange(n) / n
    return np.stack(np.meshgrid(x, x, indexing="ij"), -1)


# --------------------------------------------------------------------------
# shear models


def sample_oriented_shear_segment(shear: ShearSpectrum, seed, n: int, d: int = 2,
                                  sampler: ProfileSampler | None = None) -> np.ndarray:
    """sqrt(2) f(x) e_y or sqrt(2) f(y) e_x with probability 1/2 each."""
    if d != 2:
        raise SpectrumError("d", "shear flows are defined for d = 2 only")
    rng = rng_for(seed)
    sampler = ProfileSampler(shear, n) if sampler is None else sampler
    vertical = rng.random() < 0.5
    f = np.sqrt(2.0) * sampler.sample(rng)
    u = np.zeros((2, n, n))
    if vertical:
        u[1] = f[:, None]
    else:
        u[0] = f[None, :]
    return u


def sample_bounded_shear_drift_segment(shear: ShearSpectrum, seed, n: int, d: int = 2,
                                       sampler: ProfileSampler | None = None) -> np.ndarray:
    """g(x) e_y + h(y) e_x + 2 K X (e_x + e_y) with +-1 Bernoulli coefficients."""
    if d != 2:
        raise SpectrumError("d", "shear flows are defined for d = 2 only")
    if shear.alpha <= 0.5:
        raise SpectrumError("alpha", f"bounded shears need alpha > 1/2, got {shear.alpha}")
    rng = rng_for(seed)
    sampler = ProfileSampler(shear, n) if sampler is None else sampler
    K = shear.bound()
    g = sampler.sample(rng, bernoulli=True)
    h = sampler.sample(rng, bernoulli=True)
    X = rng.choice([-1.0, 1.0])
    u = np.empty((2, n, n))
    u[0] = h[None, :] + 2 * K * X
    u[1] = g[:, None] + 2 * K * X
    return u


def sample_white_shear_segment(shear: ShearSpectrum, seed, n: int,
                               sampler: ProfileSampler | None = None) -> np.ndarray:
    """f1(y) e_x + f2(x) e_y with independent Gaussian profiles (covariance D_s)."""
    rng = rng_for(seed)
    sampler = ProfileSampler(shear, n) if sampler is None else sampler
    u = np.empty((2, n, n))
    u[0] = sampler.sample(rng)[None, :]
    u[1] = sampler.sample(rng)[:, None]
    return u


# --------------------------------------------------------------------------
# piecewise flows


class _Segments:
    def __init__(self, flow: "PiecewiseFlow"):
        self.flow = flow

    def __len__(self):
        return self.flow.count

    def __getitem__(self, j):
        if not 0 <= j < len(self):
            raise IndexError(j)
        return self.flow.scaling * self.flow.raw_segment(j)

    def __iter__(self):
        return (self[j] for j in range(len(self)))


@dataclass
class PiecewiseFlow:
    model: str
    params: FlowParams
    eps: float
    T: float
    seed: int
    stream: tuple = ()
    table: ModeTable | None = None
    _sampler: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.model not in MODELS:
            raise SpectrumError("model", f"unknown model {self.model!r}")
        if not self.eps > 0:
            raise SpectrumError("eps", f"must be positive, got {self.eps}")
        if not self.T > 0:
            raise SpectrumError("T", f"must be positive, got {self.T}")
        p = self.params
        if self.model == "smooth_mode":
            if self.table is None:
                self.table = ModeTable.from_spectrum()
            if p.n < 2 * int(np.abs(self.table.k).max()) + 1:
                raise SpectrumError("n", "grid does not resolve the mode table")
        elif self.model == "white_kraichnan":
            self._sampler = VectorFieldSampler(p.spectrum(), p.n)
        else:
            self._sampler = ProfileSampler(p.shear(), p.n)
            if self.model == "bounded_shear_drift" and p.alpha <= 0.5:
                raise SpectrumError("alpha", f"bounded shears need alpha > 1/2, got {p.alpha}")

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def count(self) -> int:
        return max(1, math.ceil(self.T / self.eps - 1e-9))

    def max_wavenumber(self) -> int:
        if self.model == "smooth_mode":
            return int(np.abs(self.table.k).max())
        return self.params.kmax

    @property
    def scaling(self) -> float:
        return self.eps ** -0.5

    @property
    def segments(self) -> _Segments:
        return _Segments(self)

    def segment_rng(self, j: int) -> np.random.Generator:
        return rng_for(self.seed, *self.stream, j)

    def raw_segment(self, j: int) -> np.ndarray:
        """Unscaled field u_{j+1} (0-based j)."""
        rng = self.segment_rng(j)
        n, m = self.params.n, self.model
        if m == "white_kraichnan":
            return self._sampler.sample(rng)
        if m == "smooth_mode":
            return sample_smooth_mode_segment(self.table, rng, n)
        if m == "oriented_shear":
            return sample_oriented_shear_segment(self.params.shear(), rng, n, sampler=self._sampler)
        if m == "bounded_shear_drift":
            return sample_bounded_shear_drift_segment(self.params.shear(), rng, n, sampler=self._sampler)
        return sample_white_shear_segment(self.params.shear(), rng, n, sampler=self._sampler)

    def segment_number(self, t: float) -> int:
        """1-based segment governing time t; segment j covers [(j-1) eps, j eps)."""
        return int(math.floor(t / self.eps + 1e-9)) + 1

    def at(self, t: float) -> np.ndarray:
        return self.segments[self.segment_number(t) - 1]

    def covariance_at_zero(self) -> np.ndarray:
        """Spatial covariance E u(x) u(x)^T of one unscaled segment."""
        p = self.params
        if self.model in ("white_kraichnan", "smooth_mode"):
            cfg = p.spectrum() if self.model == "white_kraichnan" else None
            if cfg is None:
                return self.table.covariance(np.zeros(2), np.zeros(2))
            k = wavevector_box(cfg.kmax, 2)
            return spectral_tensor_array(cfg, k).sum(0)
        Df0 = float(p.shear().covariance(0.0))
        out = Df0 * np.eye(2)
        if self.model == "bounded_shear_drift":
            out += 4 * p.shear().bound() ** 2 * np.ones((2, 2))
        return out


@dataclass
class FrozenFlow:
    """A flow given by explicit segment fields (already scaled), eps apart.

    Used for steady fields and for transformed copies of a sampled flow.
    """

    fields: list
    eps: float
    model: str = "frozen"

    def __post_init__(self):
        self.fields = [np.asarray(u, float) for u in self.fields]
        if not self.fields or any(u.shape != self.fields[0].shape for u in self.fields):
            raise SpectrumError("fields", "need at least one field, all the same shape")
        if not self.eps > 0:
            raise SpectrumError("eps", f"must be positive, got {self.eps}")

    @property
    def n(self) -> int:
        return self.fields[0].shape[-1]

    @property
    def count(self) -> int:
        return len(self.fields)

    @property
    def segments(self) -> list:
        return self.fields

    def max_wavenumber(self, tol: float = 1e-12) -> int:
        n = self.n
        k = np.abs(np.fft.fftfreq(n, 1.0 / n))
        kinf = np.maximum.outer(k, k)
        out = 0
        for u in self.fields:
            F = np.abs(np.fft.fft2(u, axes=(-2, -1))).max(0)
            live = F > tol * max(F.max(), 1e-300)
            if live.any():
                out = max(out, int(kinf[live].max()))
        return out


def steady_flow(u: np.ndarray, T: float) -> FrozenFlow:
    """Time-independent field u on [0, T)."""
    return FrozenFlow([u], T)


def build_piecewise_flow(model: str, params: FlowParams, eps: float, T: float, seed: int,
                         stream: tuple = (), table: ModeTable | None = None) -> PiecewiseFlow:
    return PiecewiseFlow(model, params, float(eps), float(T), int(seed), tuple(stream), table)
