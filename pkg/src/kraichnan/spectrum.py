"""Kraichnan drift covariance spectra and Gaussian field synthesis on [-pi, pi]^d.

Grids used throughout the package are uniform with n points per axis,
x_j = 2*pi*j/n in FFT ordering, so index 0 is the origin.  Distances use the
representative of x in [-pi, pi).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft

CUTOFFS = {
    "gaussian": lambda t: np.exp(-np.asarray(t, float) ** 2),
    "exponential": lambda t: np.exp(-np.asarray(t, float)),
}


class SpectrumError(ValueError):
    """Invalid spectrum configuration or out-of-range request."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class AliasingError(SpectrumError):
    pass


@dataclass(frozen=True)
class SpectrumConfig:
    d: int = 2
    alpha: float = 0.5
    eta: float = 0.0
    rho: str = "gaussian"
    kmax: int = 64

    def __post_init__(self):
        if self.d not in (2, 3):
            raise SpectrumError("d", f"must be 2 or 3, got {self.d}")
        if not 0.0 < self.alpha < 1.0:
            raise SpectrumError("alpha", f"must lie in (0, 1), got {self.alpha}")
        if not self.eta >= 0.0:
            raise SpectrumError("eta", f"must be >= 0, got {self.eta}")
        if self.rho not in CUTOFFS:
            raise SpectrumError("rho", f"unknown cutoff profile {self.rho!r}")
        if int(self.kmax) != self.kmax or self.kmax < 1:
            raise SpectrumError("kmax", f"must be an integer >= 1, got {self.kmax}")

    def cutoff(self, t):
        return CUTOFFS[self.rho](t)

    def with_kmax(self, kmax: int) -> "SpectrumConfig":
        return SpectrumConfig(self.d, self.alpha, self.eta, self.rho, kmax)


@dataclass(frozen=True)
class SpectralTensor:
    k: tuple
    value: np.ndarray


@dataclass(frozen=True)
class ShearSpectrum:
    """One-dimensional profile spectrum c_k = |k|^-(1+2 alpha), 0 < |k| <= kmax."""

    alpha: float = 0.5
    kmax: int = 64
    coefficients: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise SpectrumError("alpha", f"must lie in (0, 1), got {self.alpha}")
        if int(self.kmax) != self.kmax or self.kmax < 1:
            raise SpectrumError("kmax", f"must be an integer >= 1, got {self.kmax}")
        k = np.arange(-self.kmax, self.kmax + 1)
        c = np.zeros(k.shape)
        nz = k != 0
        c[nz] = np.abs(k[nz]) ** (-(1.0 + 2.0 * self.alpha))
        object.__setattr__(self, "coefficients", c)

    def coefficient(self, k: int) -> float:
        if abs(k) > self.kmax:
            raise SpectrumError("k", f"|k|={abs(k)} exceeds kmax={self.kmax}")
        return float(self.coefficients[k + self.kmax])

    def profile_amplitudes(self) -> np.ndarray:
        """Amplitudes of cos(kx) and sin(kx), k = 1..kmax, in the real series of a profile.

        A profile sum_k a_k (X_k cos kx + Y_k sin kx) with unit-variance
        X, Y has covariance D_f.
        """
        k = np.arange(1, self.kmax + 1)
        return np.sqrt(2.0 * k ** (-(1.0 + 2.0 * self.alpha)))

    def bound(self) -> float:
        """Sum of |coefficient| over every cosine and sine term (the sup bound K)."""
        return float(2.0 * self.profile_amplitudes().sum())

    def covariance(self, x) -> np.ndarray:
        """D_f(x) = sum_{k != 0} c_k cos(kx)."""
        x = np.asarray(x, float)
        k = np.arange(1, self.kmax + 1)
        ck = self.coefficients[self.kmax + 1:]
        return 2.0 * np.cos(np.multiply.outer(x, k)) @ ck


# --------------------------------------------------------------------------
# wavevector grids


def wavevector_box(kmax: int, d: int) -> np.ndarray:
    """All integer k with |k|_inf <= kmax, shape (m, d)."""
    r = np.arange(-kmax, kmax + 1)
    return np.stack(np.meshgrid(*([r] * d), indexing="ij"), -1).reshape(-1, d)


def spectral_tensor_array(cfg: SpectrumConfig, k: np.ndarray) -> np.ndarray:
    """Vectorized D-hat for an (..., d) array of integer wavevectors."""
    k = np.asarray(k)
    d = cfg.d
    if k.shape[-1] != d:
        raise SpectrumError("k", f"expected {d} components, got {k.shape[-1]}")
    kf = k.astype(float)
    k2 = np.sum(kf * kf, -1)
    out = np.zeros(k.shape[:-1] + (d, d))
    nz = k2 > 0
    kk = kf[nz]
    kn = np.sqrt(k2[nz])
    proj = np.eye(d) - kk[:, :, None] * kk[:, None, :] / k2[nz][:, None, None]
    amp = kn ** (-(d + 2.0 * cfg.alpha)) * cfg.cutoff(cfg.eta * kn)
    out[nz] = proj * amp[:, None, None]
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def eval_spectral_tensor(cfg: SpectrumConfig, k) -> SpectralTensor:
    k = tuple(int(v) for v in np.atleast_1d(k))
    if len(k) != cfg.d:
        raise SpectrumError("k", f"expected {cfg.d} components, got {len(k)}")
    if max(abs(v) for v in k) > cfg.kmax:
        raise SpectrumError("k", f"|k|_inf exceeds kmax={cfg.kmax}")
    return SpectralTensor(k, spectral_tensor_array(cfg, np.array(k))[()])


def eval_real_covariance(cfg: SpectrumConfig, x) -> np.ndarray:
    """D(x) by direct cosine summation; x has shape (d,) or (m, d)."""
    x = np.asarray(x, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    k = wavevector_box(cfg.kmax, cfg.d)
    dh = spectral_tensor_array(cfg, k).reshape(len(k), -1)
    out = np.cos(x @ k.T.astype(float)) @ dh
    out = out.reshape(len(x), cfg.d, cfg.d)
    out = 0.5 * (out + np.swapaxes(out, -1, -2))
    return out[0] if single else out


def covariance_on_grid(cfg: SpectrumConfig, n: int) -> np.ndarray:
    """D at every point of the n^d grid, shape (n,)*d + (d, d).

    Exact (to rounding) for any n: modes are folded onto k mod n before an
    inverse FFT, which is the same cosine sum evaluated on the grid.
    """
    d = cfg.d
    k = wavevector_box(cfg.kmax, d)
    dh = spectral_tensor_array(cfg, k)
    acc = np.zeros((n,) * d + (d, d))
    np.add.at(acc, tuple((k % n).T), dh)
    out = fft.ifftn(acc, axes=tuple(range(d))).real * n**d
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def grid_points(n: int, d: int) -> np.ndarray:
    """Representatives in [-pi, pi)^d of the grid points, shape (n,)*d + (d,)."""
    x1 = 2.0 * np.pi * np.arange(n) / n
    x1 = np.where(x1 >= np.pi, x1 - 2.0 * np.pi, x1)
    return np.stack(np.meshgrid(*([x1] * d), indexing="ij"), -1)


def wavenumbers(n: int, d: int) -> list[np.ndarray]:
    f = fft.fftfreq(n, 1.0 / n)
    return list(np.meshgrid(*([f] * d), indexing="ij"))


# --------------------------------------------------------------------------
# sampling


def rng_for(seed, *stream) -> np.random.Generator:
    """Generator for a stream below a root seed.

    Contract: the stream (seed, s1, s2, ...) is
    default_rng(SeedSequence(seed, spawn_key=(s1, s2, ...))).  Passing a
    Generator returns it unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream)))


def _check_grid(n, kmax):
    if n < 2 * kmax + 1:
        raise AliasingError("n", f"grid {n} < 2*kmax+1 = {2 * kmax + 1}")


class VectorFieldSampler:
    """Precomputed synthesis of divergence-free Gaussian fields on an n-grid.

    Random draws are made on the wavevector box, not the grid, so one seed
    gives the same field at every resolution that resolves kmax.
    """

    def __init__(self, cfg: SpectrumConfig, n: int):
        _check_grid(n, cfg.kmax)
        self.cfg, self.n = cfg, n
        d = cfg.d
        k = wavevector_box(cfg.kmax, d)
        lam = spectral_tensor_array(cfg, k)
        # D-hat = lambda * P with P idempotent, so sqrt(D-hat) = D-hat / sqrt(lambda)
        tr = np.trace(lam, axis1=1, axis2=2) / (d - 1)
        scale = np.zeros_like(tr)
        scale[tr > 0] = 1.0 / np.sqrt(tr[tr > 0])
        self.root = lam * scale[:, None, None]
        self.index = tuple((k % n).T)
        self.nmodes = len(k)

    def coefficients(self, rng) -> np.ndarray:
        d, n = self.cfg.d, self.n
        z = rng.standard_normal((self.nmodes, d)) + 1j * rng.standard_normal((self.nmodes, d))
        uh = np.einsum("mij,mj->mi", self.root, z)
        out = np.zeros((d,) + (n,) * d, complex)
        for i in range(d):
            out[(i,) + self.index] = uh[:, i]
        return out

    def sample(self, rng) -> np.ndarray:
        d, n = self.cfg.d, self.n
        uh = self.coefficients(rng_for(rng))
        return fft.ifftn(uh, axes=tuple(range(1, d + 1))).real * n**d


class ProfileSampler:
    """Gaussian (or +-1 Bernoulli) shear profiles for a ShearSpectrum."""

    def __init__(self, shear: ShearSpectrum, n: int):
        _check_grid(n, shear.kmax)
        self.shear, self.n = shear, n
        self.amp = shear.profile_amplitudes()

    def sample(self, rng, bernoulli: bool = False) -> np.ndarray:
        rng = rng_for(rng)
        m = self.shear.kmax
        if bernoulli:
            z = rng.choice(np.array([-1.0, 1.0]), size=(2, m))
        else:
            z = rng.standard_normal((2, m))
        return _profile(self.n, self.amp * z[0], self.amp * z[1])


def sample_gaussian_field(spec, seed, n: int | None = None) -> np.ndarray:
    """One Gaussian sample on the n-point grid (default n = 2*kmax + 2).

    For a SpectrumConfig returns a divergence-free vector field (d, n, ..., n)
    with covariance D.  For a ShearSpectrum returns a 1-D profile (n,) with
    covariance D_f.  The real series uses independent standard normals on
    cos and sin of each retained mode.
    """
    if isinstance(spec, ShearSpectrum):
        n = 2 * spec.kmax + 2 if n is None else n
        return ProfileSampler(spec, n).sample(seed)
    if isinstance(spec, SpectrumConfig):
        n = 2 * spec.kmax + 2 if n is None else n
        return VectorFieldSampler(spec, n).sample(seed)
    raise TypeError(f"unsupported spectrum {type(spec).__name__}")


def _profile(n, cos_amp, sin_amp):
    """Evaluate sum_k cos_amp[k-1] cos(kx) + sin_amp[k-1] sin(kx) on the grid."""
    c = np.zeros(n, complex)
    m = len(cos_amp)
    c[1:m + 1] = 0.5 * (cos_amp - 1j * sin_amp)
    c[n - m:] = np.conj(c[1:m + 1])[::-1]
    return fft.ifft(c).real * n


def profile_from_coefficients(n: int, cos_amp, sin_amp) -> np.ndarray:
    _check_grid(n, len(cos_amp))
    return _profile(n, np.asarray(cos_amp, float), np.asarray(sin_amp, float))


def spectral_divergence(u: np.ndarray) -> float:
    """max_k |k . u_hat(k)| for a vector field on the grid."""
    d = u.shape[0]
    n = u.shape[1]
    uh = fft.fftn(u, axes=tuple(range(1, d + 1))) / n**d
    ks = wavenumbers(n, d)
    div = sum(ks[i] * uh[i] for i in range(d))
    return float(np.max(np.abs(div)))
