"""Effective diffusion tensor a(x) = 2 kappa I + D(0) - D(x) and its lower bounds."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .spectrum import (
    ShearSpectrum,
    SpectrumConfig,
    SpectrumError,
    covariance_on_grid,
    grid_points,
)


@dataclass
class TensorField:
    n: int
    values: np.ndarray  # (n,)*d + (d, d)
    kappa: float
    provenance: object = None

    @property
    def d(self) -> int:
        return self.values.shape[-1]

    def min_eigenvalue(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.values)[..., 0]


def assemble_tensor(cfg: SpectrumConfig, kappa: float, n: int) -> TensorField:
    """a(x) on the n^d grid.

    D is evaluated exactly on the grid by mode folding, so n is not tied to
    kmax (no aliasing is possible in a pointwise cosine sum).
    """
    if kappa < 0:
        raise SpectrumError("kappa", f"must be >= 0, got {kappa}")
    if n < 2:
        raise SpectrumError("n", f"grid must have at least 2 points, got {n}")
    D = covariance_on_grid(cfg, n)
    d = cfg.d
    origin = (0,) * d
    a = D[origin] - D + 2.0 * kappa * np.eye(d)
    a[origin] = 2.0 * kappa * np.eye(d)
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    return TensorField(n, a, float(kappa), cfg)


def uniform_tensor(n: int, d: int = 2, scale: float = 1.0) -> TensorField:
    """Constant tensor scale*I, used for heat-equation checks."""
    a = np.broadcast_to(scale * np.eye(d), (n,) * d + (d, d)).copy()
    return TensorField(n, a, scale / 2.0, "uniform")


def assemble_shear_tensor(shear: ShearSpectrum, kappa: float, mean_drift=(0.0, 0.0),
                          n: int = 128, d: int = 2) -> TensorField:
    """a_s(x, y) = 2 kappa I + D_s(0, 0) - D_s(x, y), D_s = diag(D_f(y), D_f(x)) + v v^T."""
    if d != 2:
        raise SpectrumError("d", "shear tensor is defined for d = 2 only")
    if kappa < 0:
        raise SpectrumError("kappa", f"must be >= 0, got {kappa}")
    if np.shape(mean_drift) != (2,):
        raise SpectrumError("mean_drift", "must be a 2-vector")
    x = grid_points(n, 1)[..., 0]
    Df = shear.covariance(x)
    Ds = np.zeros((n, n, 2, 2))
    Ds[..., 0, 0] = Df[None, :]  # u_x depends on y
    Ds[..., 1, 1] = Df[:, None]
    # v v^T is constant in x and drops out of D_s(0) - D_s(x); it is never
    # added, so the cancellation is exact rather than up to rounding
    a = Ds[0, 0] - Ds + 2.0 * kappa * np.eye(2)
    a[0, 0] = 2.0 * kappa * np.eye(2)
    return TensorField(n, a, float(kappa), shear)


# --------------------------------------------------------------------------
# lower-bound verification


@dataclass
class BoundReport:
    alpha: float
    eta: float
    kappa: float
    beta: float
    kmax: int
    empirical_c: float
    exact_c: float
    argmin: list
    regime_mins: dict = field(default_factory=dict)
    refinement_delta: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _directions(d: int, m: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((m, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return np.vstack([np.eye(d), w])


def quotient_min(field: TensorField, beta: float, directions: int = 64, seed: int = 0):
    """Per-point min over directions of w.a(x)w / |x|^(2 beta), plus exact eigen minimum.

    Returns (sampled, exact, radius) arrays over the grid; the origin is NaN.
    """
    d = field.d
    x = grid_points(field.n, d)
    r = np.linalg.norm(x, axis=-1)
    W = _directions(d, directions, seed)
    q = np.einsum("...ij,mi,mj->...m", field.values, W, W).min(-1)
    lam = field.min_eigenvalue()
    with np.errstate(divide="ignore", invalid="ignore"):
        w = r ** (2.0 * beta)
        sampled = np.where(r > 0, q / w, np.nan)
        exact = np.where(r > 0, lam / w, np.nan)
    return sampled, exact, r


def verify_lower_bound(field: TensorField, beta: float, directions: int = 64,
                       seed: int = 0, refine: bool = False) -> BoundReport:
    cfg = field.provenance
    alpha = getattr(cfg, "alpha", float("nan"))
    eta = getattr(cfg, "eta", 0.0)
    if isinstance(cfg, (SpectrumConfig, ShearSpectrum)) and not alpha <= beta <= 1.0:
        raise SpectrumError("beta", f"must lie in [alpha, 1] = [{alpha}, 1], got {beta}")
    sampled, exact, r = quotient_min(field, beta, directions, seed)
    i = np.nanargmin(sampled)
    c = float(sampled.flat[i])
    argmin = [int(v) for v in np.unravel_index(i, sampled.shape)]
    # exact eigenproblem at the sampled argmin, plus the global exact min
    c_exact = float(min(np.nanmin(exact), exact.flat[i]))

    regimes = {}
    for name, mask in (("inner", (r > 0) & (r <= eta)), ("outer", (r > 0) & (r >= eta))):
        regimes[name] = float(np.min(sampled[mask])) if mask.any() else "regime empty"

    delta = None
    if refine:
        if not isinstance(cfg, SpectrumConfig):
            raise SpectrumError("refine", "needs a Kraichnan spectrum provenance")
        fine = assemble_tensor(cfg.with_kmax(2 * cfg.kmax), field.kappa, field.n)
        c_fine = verify_lower_bound(fine, beta, directions, seed).empirical_c
        delta = abs(c_fine - c) / abs(c_fine)
    return BoundReport(float(alpha), float(eta), field.kappa, float(beta),
                       int(getattr(cfg, "kmax", 0)), c, c_exact, argmin, regimes, delta)


def small_scale_min(cfg: SpectrumConfig, n: int, eta: float | None = None) -> float:
    """min over 0 < |x| <= eta of lambda_min(a(x)) / |x|^2 at kappa = 0."""
    eta = cfg.eta if eta is None else eta
    a = assemble_tensor(cfg, 0.0, n)
    r = np.linalg.norm(grid_points(n, cfg.d), axis=-1)
    mask = (r > 0) & (r <= eta)
    if not mask.any():
        raise SpectrumError("n", f"no grid point with 0 < |x| <= {eta} at n={n}")
    return float(np.min(a.min_eigenvalue()[mask] / r[mask] ** 2))
