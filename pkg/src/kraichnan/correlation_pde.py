"""Two-point correlation equation dg/dt = div(a grad g) on the torus.

Two discretizations live here:

* a finite-volume scheme on the node grid (``diffusion_operator``, ``step``,
  ``solve``) with a theta-method in time and a CG solve per step.  In d = 2
  the default stencil comes from an obtuse-superbase split of a(x), which
  makes every edge weight nonnegative and implicit Euler monotone;
* a Fourier-Galerkin form (``SpectralCorrelation``) restricted to a box of
  wavevectors, exactly matching the closure of the dealiased pseudo-spectral
  transport solver.  It is the Monte Carlo oracle.
"""
from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import fft
from scipy.special import ive

from .spectrum import ShearSpectrum, SpectrumConfig, spectral_tensor_array, wavevector_box
from .tensor import TensorField


class SolverError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class FitError(ValueError):
    pass


@dataclass
class GridField:
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def l2(self) -> float:
        """Continuum L2 norm, sqrt(sum g^2 h^d)."""
        h = 2.0 * np.pi / self.n
        return float(np.sqrt(np.sum(self.values**2) * h**self.d))

    def linf(self) -> float:
        return float(np.abs(self.values).max())


def _values(g):
    return g.values if isinstance(g, GridField) else np.asarray(g, float)


def autocorrelation(theta0) -> GridField:
    """g0(x) = |T^d|^-1 * integral theta0(y) theta0(y + x) dy, by FFT."""
    th = _values(theta0)
    F = fft.fftn(th)
    g = fft.ifftn(np.conj(F) * F).real / th.size
    return GridField(g)


# --------------------------------------------------------------------------
# finite-volume operator


def selling_split(values: np.ndarray, max_iter: int = 200):
    """Split 2x2 PSD tensors as a = sum_i w_i e_i e_i^T with w_i >= 0.

    Selling's reduction: flip superbases (b0, b1, b2), b0 + b1 + b2 = 0, until
    all pairs satisfy b_i.a b_j <= 0.  Then the offsets are e_ij = b_k rotated
    by 90 degrees and w_ij = -b_i.a b_j.  Returns integer offsets (..., 3, 2)
    and weights (..., 3).
    """
    shape = values.shape[:-2]
    A = values.reshape(-1, 2, 2)
    m = len(A)
    b = np.empty((m, 3, 2), dtype=np.int64)
    b[:, 0] = (1, 0)
    b[:, 1] = (0, 1)
    b[:, 2] = (-1, -1)
    pairs = ((0, 1, 2), (0, 2, 1), (1, 2, 0))
    for _ in range(max_iter):
        done = True
        for i, j, k in pairs:
            prod = np.einsum("mi,mij,mj->m", b[:, i], A, b[:, j])
            bad = prod > 1e-14 * np.abs(A).reshape(m, -1).max(1)
            if bad.any():
                done = False
                bi, bj = b[bad, i].copy(), b[bad, j].copy()
                b[bad, i] = -bi
                b[bad, k] = bi - bj
        if done:
            break
    else:
        raise SolverError("Selling reduction did not terminate (tensor not positive definite?)")
    off = np.empty((m, 3, 2), dtype=np.int64)
    w = np.empty((m, 3))
    for idx, (i, j, k) in enumerate(pairs):
        off[:, idx] = np.stack([-b[:, k, 1], b[:, k, 0]], axis=-1)
        w[:, idx] = np.maximum(-np.einsum("mi,mij,mj->m", b[:, i], A, b[:, j]), 0.0)
    return off.reshape(shape + (3, 2)), w.reshape(shape + (3,))


def _monotone_operator(a: TensorField) -> sp.csr_matrix:
    n = a.n
    h = 2.0 * np.pi / n
    off, w = selling_split(a.values)
    if np.abs(off[w > 0]).max(initial=0) >= n // 2:
        raise SolverError("tensor too anisotropic for the grid: stencil wider than half the torus")
    ix, iy = np.indices((n, n))
    src = np.ravel_multi_index((ix, iy), (n, n))
    rows, cols, data = [], [], []
    for m in range(3):
        wm = 0.5 * w[..., m]
        for sgn in (1, -1):
            # node x hands half its weight to each of the edges (x, x +- e)
            jx = (ix + sgn * off[..., m, 0]) % n
            jy = (iy + sgn * off[..., m, 1]) % n
            dst = np.ravel_multi_index((jx, jy), (n, n))
            rows += [src.ravel(), dst.ravel()]
            cols += [dst.ravel(), src.ravel()]
            data += [wm.ravel(), wm.ravel()]
    N = n * n
    W = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    W.sum_duplicates()
    deg = np.asarray(W.sum(axis=1)).ravel()
    return ((W - sp.diags(deg)) / (h * h)).tocsr()


def diffusion_operator(a: TensorField, scheme: str | None = None) -> sp.csr_matrix:
    """Sparse L with dg/dt = L g.

    ``scheme="monotone"`` (default in d = 2) uses nonnegative edge weights from
    ``selling_split``; ``scheme="corner"`` (any d) is described below.
    """
    scheme = scheme or ("monotone" if a.d == 2 else "corner")
    if scheme == "monotone":
        if a.d != 2:
            raise SolverError("the monotone scheme is implemented for d = 2")
        return _monotone_operator(a)
    if scheme != "corner":
        raise SolverError(f"unknown scheme {scheme!r}")
    return _corner_operator(a)


def _corner_operator(a: TensorField) -> sp.csr_matrix:
    """Sparse L with dg/dt = L g, from a corner-based finite-volume energy.

    Each cell carries the average of its 2^d node tensors.  At every cell
    corner the gradient is formed from the d cell edges meeting there, and the
    discrete energy sums G.a_cell G over corners.  L is minus the gradient of
    that energy divided by the node volume: symmetric, negative semidefinite,
    zero row sums, and the 5-point Laplacian when a = I.
    """
    vals = a.values
    n, d = a.n, a.d
    h = 2.0 * np.pi / n
    corners = list(itertools.product((0, 1), repeat=d))
    ac = sum(np.roll(vals, [-c for c in v], axis=tuple(range(d))) for v in corners) / 2**d
    base = np.indices((n,) * d)

    def node(offset):
        idx = [(base[i] + offset[i]) % n for i in range(d)]
        return np.ravel_multi_index(idx, (n,) * d).ravel()

    rows, cols, data = [], [], []
    for v in corners:
        edges = []
        for i in range(d):
            hi = list(v); hi[i] = 1
            lo = list(v); lo[i] = 0
            edges.append((node(hi), node(lo)))
        for i in range(d):
            for j in range(d):
                w = ac[..., i, j].ravel()
                if not np.any(w):
                    continue
                for p, sp_ in ((edges[i][0], 1.0), (edges[i][1], -1.0)):
                    for q, sq in ((edges[j][0], 1.0), (edges[j][1], -1.0)):
                        rows.append(p)
                        cols.append(q)
                        data.append(sp_ * sq * w)
    N = n**d
    K = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    K.sum_duplicates()
    return (-K / (2**d * h * h)).tocsr()


class Stepper:
    """Theta-method time stepper for a fixed operator and dt.

    theta=1 is implicit Euler (the default), theta=0.5 Crank-Nicolson.
    """

    def __init__(self, L, dt, theta=1.0, rtol=1e-10, maxiter=None, method="cg"):
        if dt <= 0:
            raise SolverError(f"dt must be positive, got {dt}")
        N = L.shape[0]
        self.L, self.dt, self.theta, self.rtol = L, dt, theta, rtol
        self.maxiter = 10 * N if maxiter is None else maxiter
        self.A = (sp.identity(N, format="csr") - theta * dt * L).tocsr()
        self.B = None if theta == 1.0 else (sp.identity(N, format="csr") + (1 - theta) * dt * L).tocsr()
        self.method = method
        if method == "direct":
            self._lu = spla.splu(self.A.tocsc())
        else:
            diag = self.A.diagonal()
            self.M = sp.diags(1.0 / diag)
        self.iterations = 0

    def __call__(self, g: np.ndarray) -> np.ndarray:
        shape = g.shape
        x0 = g.ravel()
        m = x0.mean()
        rhs = x0 if self.B is None else self.B @ x0
        if self.method == "direct":
            x = self._lu.solve(rhs)
        else:
            count = [0]

            def cb(_):
                count[0] += 1

            x, info = spla.cg(self.A, rhs, x0=x0, rtol=self.rtol, atol=0.0,
                              maxiter=self.maxiter, M=self.M, callback=cb)
            self.iterations += count[0]
            if info != 0:
                res = np.linalg.norm(rhs - self.A @ x) / max(np.linalg.norm(rhs), 1e-300)
                raise SolverError("CG did not converge", res)
        # the mean decouples exactly from the dynamics; remove solver residual from it
        x = x - (x.mean() - m)
        return x.reshape(shape)


def step(g, a: TensorField, dt: float, theta: float = 1.0, scheme: str | None = None) -> GridField:
    """One time step of the finite-volume scheme."""
    L = diffusion_operator(a, scheme)
    return GridField(Stepper(L, dt, theta)(_values(g)))


@dataclass
class Solution:
    t: np.ndarray
    g_at_0: np.ndarray
    l2_norm: np.ndarray
    linf_norm: np.ndarray
    mean: np.ndarray
    snapshots: dict = field(default_factory=dict)
    final: np.ndarray | None = None

    def trace_rows(self):
        return zip(self.t, self.g_at_0, self.l2_norm, self.linf_norm)


def solve(g0, a: TensorField, T: float, dt: float, snapshot_times=(), theta: float = 1.0,
          method: str = "cg", operator=None, scheme: str | None = None) -> Solution:
    """Integrate to time T, recording (t, g(t,0), ||g||_2, ||g||_inf) every step."""
    g = _values(g0).copy()
    if abs(g.mean()) > 1e-12 * max(np.abs(g).max(), 1.0):
        warnings.warn("initial correlation has nonzero mean; it will not decay to 0", stacklevel=2)
    L = diffusion_operator(a, scheme) if operator is None else operator
    stepper = Stepper(L, dt, theta, method=method)
    nsteps = int(round(T / dt))
    if not np.isclose(nsteps * dt, T, rtol=1e-9, atol=1e-12):
        raise SolverError(f"T={T} is not a multiple of dt={dt}")
    h = 2.0 * np.pi / a.n
    vol = h**a.d
    origin = (0,) * g.ndim
    t = np.arange(nsteps + 1) * dt
    g0v, l2, linf, mean = (np.empty(nsteps + 1) for _ in range(4))
    snaps = {}
    want = sorted(int(round(s / dt)) for s in snapshot_times)
    for i in range(nsteps + 1):
        if i:
            g = stepper(g)
        g0v[i] = g[origin]
        l2[i] = np.sqrt(np.sum(g * g) * vol)
        linf[i] = np.abs(g).max()
        mean[i] = g.mean()
        if i in want:
            snaps[float(t[i])] = g.copy()
    return Solution(t, g0v, l2, linf, mean, snaps, g)


# --------------------------------------------------------------------------
# fitting


@dataclass
class DecayFit:
    rate: float
    prefactor: float
    window: tuple
    residual: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def default_discard(alpha: float) -> float:
    return max(1.0, 2.0 / (1.0 - alpha))


def fit_decay(t, v, discard: float = 0.0, t_hi: float | None = None, floor: float | None = None) -> DecayFit:
    """Least squares of log v against t on [discard, t_hi].

    With ``floor`` the window also ends before the first time |v| drops to
    floor * |v[0]|, so values lost in roundoff are not fitted.
    """
    t = np.asarray(t, float)
    v = np.asarray(v, float)
    sel = t >= discard - 1e-12
    if t_hi is not None:
        sel &= t <= t_hi + 1e-12
    if floor is not None:
        low = np.flatnonzero(np.abs(v) <= floor * abs(v[0]))
        if len(low):
            sel &= t < t[low[0]]
    tw, vw = t[sel], v[sel]
    if len(tw) < 10:
        raise FitError(f"need >= 10 points in the fit window, got {len(tw)}")
    if np.any(vw <= 0):
        raise FitError("non-positive values in the fit window (no decay or noise floor)")
    slope, intercept = np.polyfit(tw, np.log(vw), 1)
    model = np.exp(intercept + slope * tw)
    resid = float(np.max(np.abs(model - vw) / vw))
    return DecayFit(float(-slope), float(np.exp(intercept)), (float(tw[0]), float(tw[-1])), resid)


# --------------------------------------------------------------------------
# Nash profile and dense spectral gap


def nash_profile(a: TensorField, dt: float, T: float, theta: float = 1.0):
    """(t, ||g(t)||_2) from the discrete delta at the origin."""
    n, d = a.n, a.d
    g0 = np.zeros((n,) * d)
    g0[(0,) * d] = 1.0 / (2.0 * np.pi / n) ** d
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = solve(g0, a, T, dt, theta=theta, method="direct")
    return sol.t, sol.l2_norm


def loglog_slope(t, v, t_lo, t_hi) -> float:
    t = np.asarray(t)
    sel = (t >= t_lo) & (t <= t_hi)
    return float(np.polyfit(np.log(t[sel]), np.log(np.asarray(v)[sel]), 1)[0])


def spectral_gap(a: TensorField, scheme: str | None = None) -> float:
    """Smallest nonzero eigenvalue of -L by dense symmetric eigensolve."""
    L = diffusion_operator(a, scheme).toarray()
    ev = np.sort(np.linalg.eigvalsh(-0.5 * (L + L.T)))
    return float(ev[1])


# --------------------------------------------------------------------------
# Fourier-Galerkin correlation equation


def kraichnan_symbol(cfg: SpectrumConfig, kmax: int) -> np.ndarray:
    """D-hat on the box |q|_inf <= kmax as a (2kmax+1, 2kmax+1, 2, 2) array."""
    if cfg.d != 2:
        raise ValueError("the Fourier-Galerkin solver is implemented for d = 2")
    q = wavevector_box(kmax, 2)
    return spectral_tensor_array(cfg.with_kmax(max(cfg.kmax, kmax)), q).reshape(2 * kmax + 1, 2 * kmax + 1, 2, 2)


def shear_symbol(shear: ShearSpectrum, kmax: int) -> np.ndarray:
    """D-hat of diag(D_f(y), D_f(x)) on the box: mass only on the two axes."""
    out = np.zeros((2 * kmax + 1, 2 * kmax + 1, 2, 2))
    m = np.arange(-kmax, kmax + 1)
    c = np.where((m != 0) & (np.abs(m) <= shear.kmax), np.abs(np.where(m == 0, 1, m)) ** (-(1.0 + 2 * shear.alpha)), 0.0)
    out[kmax, :, 0, 0] = c  # q = (0, m): u_x varies along y
    out[:, kmax, 1, 1] = c
    return out


class SpectralCorrelation:
    """dG/dt = M G for the correlation spectrum G(k) on |k|_inf <= K.

    (M G)(k) = -2 kappa |k|^2 G(k) + sum_q k.D(q)k [G(k - q) - G(k)], with q
    over velocity modes and k - q restricted to the box.  That restriction is
    what the 2/3-dealiased transport solver produces, so E||theta||^2 from the
    solver equals (2 pi)^2 sum_k G(k) up to Monte Carlo and time-step error.
    """

    def __init__(self, symbol: np.ndarray, K: int, kappa: float):
        Ku = (symbol.shape[0] - 1) // 2
        self.K, self.Ku, self.kappa = K, Ku, kappa
        r = np.arange(-K, K + 1)
        self.kx, self.ky = np.meshgrid(r, r, indexing="ij")
        self.P = fft.next_fast_len(2 * K + 2 * Ku + 1)
        s = (self.P, self.P)
        self._D = [fft.rfft2(symbol[..., 0, 0], s=s), fft.rfft2(symbol[..., 0, 1], s=s),
                   fft.rfft2(symbol[..., 1, 1], s=s)]
        loss = self._gain(np.ones((2 * K + 1, 2 * K + 1)))
        k2 = self.kx**2 + self.ky**2
        self.diag = -2.0 * kappa * k2 - loss
        self.radius = 2.0 * np.max(-self.diag) * (1 + 1e-6) + 1e-300

    @classmethod
    def kraichnan(cls, cfg: SpectrumConfig, K: int, kappa: float, velocity_kmax: int | None = None):
        return cls(kraichnan_symbol(cfg, K if velocity_kmax is None else velocity_kmax), K, kappa)

    @classmethod
    def shear(cls, shear: ShearSpectrum, K: int, kappa: float, velocity_kmax: int | None = None):
        return cls(shear_symbol(shear, K if velocity_kmax is None else velocity_kmax), K, kappa)

    def _gain(self, G):
        Gh = fft.rfft2(G, s=(self.P, self.P))
        sl = slice(self.Ku, self.Ku + 2 * self.K + 1)
        c = [fft.irfft2(Gh * Dh, s=(self.P, self.P))[sl, sl] for Dh in self._D]
        return self.kx**2 * c[0] + 2 * self.kx * self.ky * c[1] + self.ky**2 * c[2]

    def apply(self, G):
        return self.diag * G + self._gain(G)

    def propagate(self, G, t: float, tol: float = 1e-15):
        """exp(t M) G via a Chebyshev series on the spectrum [-radius, 0]."""
        if t == 0:
            return G.copy()
        a = 0.5 * t * self.radius
        X = lambda v: 2.0 * self.apply(v) / self.radius + v  # noqa: E731
        p0, p1 = G, X(G)
        out = ive(0, a) * p0 + 2 * ive(1, a) * p1
        k = 1
        while True:
            k += 1
            p0, p1 = p1, 2 * X(p1) - p0
            c = ive(k, a)
            out = out + 2 * c * p1
            if k > a and c < tol * ive(0, a):
                return out

    def initial_from_field(self, theta0: np.ndarray) -> np.ndarray:
        """G(k) = |theta-hat_k|^2 on the box, for a deterministic theta0 on an n x n grid."""
        n = theta0.shape[0]
        th = fft.fft2(theta0) / theta0.size
        idx = np.ix_(self.kx[:, 0] % n, self.ky[0] % n)
        return np.abs(th[idx]) ** 2

    def energies(self, G0, times):
        """E||theta(t)||^2 = (2 pi)^2 sum G at increasing times."""
        out, G, t0 = [], G0, 0.0
        for t in times:
            G = self.propagate(G, t - t0)
            t0 = t
            out.append(4.0 * np.pi**2 * G.sum())
        return np.array(out)

    def correlation_at(self, G, x) -> float:
        """g(x) = sum_k G(k) e^{ik.x}."""
        return float(np.sum(G * np.cos(self.kx * x[0] + self.ky * x[1])))
