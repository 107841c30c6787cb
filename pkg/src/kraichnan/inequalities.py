"""Ratio checks for weighted Poincare and Nash-type inequalities on [-pi, pi]^2.

Each check returns lhs / rhs for one trigonometric polynomial; the suites
report the largest ratio over random samples.  Integrals use the midpoint
rule on a uniform M x M grid, so no node sits on the singular points x = 0
or y = 0 of the weights.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

SUITES = ("weighted_poincare", "weighted_nash", "nonradial_poincare", "nonradial_nash", "nonradial_lq")


class InequalityError(ValueError):
    pass


@dataclass
class TestFunction:
    """g(x) = Re sum_k c_k exp(i k.x) over |k|_inf <= degree, d = 2.

    ``coeffs`` has shape (2q+1, 2q+1); index [q, q] is the mean mode.
    """

    __test__ = False  # not a pytest class

    coeffs: np.ndarray
    mean_zero: bool = True

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, complex)
        if self.mean_zero:
            q = self.degree
            self.coeffs[q, q] = 0.0

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @classmethod
    def from_cosines(cls, amplitudes: dict, degree: int | None = None, mean_zero: bool = True):
        """Build from {(k1, k2): amplitude of cos(k.x)}."""
        q = max(max(abs(a), abs(b)) for a, b in amplitudes) if degree is None else degree
        c = np.zeros((2 * q + 1, 2 * q + 1), complex)
        for (a, b), amp in amplitudes.items():
            c[a + q, b + q] += amp
        return cls(c, mean_zero)

    @classmethod
    def random(cls, degree: int, rng, mean_zero: bool = True):
        r = np.arange(-degree, degree + 1)
        kx, ky = np.meshgrid(r, r, indexing="ij")
        scale = 1.0 / (1.0 + kx**2 + ky**2)
        z = rng.standard_normal((2,) + kx.shape)
        return cls(scale * (z[0] + 1j * z[1]), mean_zero)

    def evaluate(self, m: int):
        """(g, g_x, g_y) on the m x m midpoint grid, plus the node coordinates."""
        q = self.degree
        h = 2.0 * np.pi / m
        x = -np.pi + (np.arange(m) + 0.5) * h
        k = np.arange(-q, q + 1)
        E = np.exp(1j * np.outer(x, k))  # (m, 2q+1)
        C = self.coeffs
        g = (E @ C @ E.T).real
        gx = (E @ (1j * k[:, None] * C) @ E.T).real
        gy = (E @ (1j * k[None, :] * C) @ E.T).real
        X, Y = np.meshgrid(x, x, indexing="ij")
        return g, gx, gy, X, Y, h

    def is_zero(self) -> bool:
        return not np.any(np.abs(self.coeffs) > 0)


def _norm(f, h, p=2.0):
    return float((np.sum(np.abs(f) ** p) * h * h) ** (1.0 / p))


def _check(g: TestFunction, quad: int, need_mean_zero: bool):
    if g.is_zero():
        raise InequalityError("g is identically zero")
    if need_mean_zero and abs(g.coeffs[g.degree, g.degree]) > 0:
        raise InequalityError("g must have zero mean")
    if quad < 4 * g.degree:
        raise InequalityError(f"quadrature {quad} < 4 * degree = {4 * g.degree}")


def nash_exponent(d: int, beta: float) -> float:
    return d / (d + 2.0 - 2.0 * beta)


def nonradial_nash_exponent(gamma: float) -> float:
    return (1.0 - gamma) / 2.0


def check_weighted_poincare(g: TestFunction, quad: int) -> float:
    """||g||_2 / || |x| grad g ||_2."""
    _check(g, quad, True)
    f, fx, fy, X, Y, h = g.evaluate(quad)
    r = np.hypot(X, Y)
    return _norm(f, h) / _norm(r * np.hypot(fx, fy), h)


def check_weighted_nash(g: TestFunction, beta: float, quad: int, d: int = 2) -> float:
    """||g||_2 / [(|| |x|^beta grad g ||_2^a + ||g||_2^a) ||g||_1^(1-a)]."""
    _check(g, quad, False)
    if not 0.0 < beta < 1.0:
        raise InequalityError(f"beta must lie in (0, 1), got {beta}")
    a = nash_exponent(d, beta)
    f, fx, fy, X, Y, h = g.evaluate(quad)
    r = np.hypot(X, Y)
    l2 = _norm(f, h)
    grad = _norm(r**beta * np.hypot(fx, fy), h)
    return l2 / ((grad**a + l2**a) * _norm(f, h, 1.0) ** (1.0 - a))


def _mixed(fx, fy, X, Y, gamma, h):
    return _norm(np.abs(X) ** gamma * fy, h) + _norm(np.abs(Y) ** gamma * fx, h)


def check_nonradial(g: TestFunction, gamma: float, suite: str = "poincare", quad: int = 64,
                    q: float = 2.0) -> float:
    """Mixed-weight ratios.

    poincare: ||g||_2 / (|| |x|^gamma d_y g || + || |y|^gamma d_x g ||)
    nash:     ||g||_2 / [(same)^(1-a) ||g||_1^a],  a = (1 - gamma)/2
    lq:       ||g||_q / (same), any 1 <= q < 2/gamma
    """
    if not 0.0 <= gamma < 1.0:
        raise InequalityError(f"gamma must lie in [0, 1), got {gamma}")
    _check(g, quad, True)
    f, fx, fy, X, Y, h = g.evaluate(quad)
    mixed = _mixed(fx, fy, X, Y, gamma, h)
    if suite == "poincare":
        return _norm(f, h) / mixed
    if suite == "nash":
        a = nonradial_nash_exponent(gamma)
        return _norm(f, h) / (mixed ** (1.0 - a) * _norm(f, h, 1.0) ** a)
    if suite == "lq":
        if not (1.0 <= q and (gamma == 0 or q < 2.0 / gamma)):
            raise InequalityError(f"q={q} outside [1, 2/gamma)")
        return _norm(f, h, q) / mixed
    raise InequalityError(f"unknown nonradial suite {suite!r}")


@dataclass
class RatioReport:
    suite: str
    samples: int
    max_ratio: float
    median_ratio: float
    refinement_delta: float
    quad: int
    degree: int
    seed: int
    flagged: list = field(default_factory=list)
    ratios: list = field(default_factory=list, repr=False)

    def to_json(self, with_ratios: bool = False) -> str:
        out = asdict(self)
        if not with_ratios:
            out.pop("ratios")
        return json.dumps(out, indent=2)


def _ratio(suite, g, quad, beta, gamma, q):
    if suite == "weighted_poincare":
        return check_weighted_poincare(g, quad)
    if suite == "weighted_nash":
        return check_weighted_nash(g, beta, quad)
    if suite == "nonradial_poincare":
        return check_nonradial(g, gamma, "poincare", quad)
    if suite == "nonradial_nash":
        return check_nonradial(g, gamma, "nash", quad)
    if suite == "nonradial_lq":
        return check_nonradial(g, gamma, "lq", quad, q)
    raise InequalityError(f"unknown suite {suite!r}")


def run_suite(suite: str, n_samples: int = 200, degree: int = 8, seed: int = 0, quad: int | None = None,
              beta: float = 0.5, gamma: float = 0.5, q: float = 2.0) -> RatioReport:
    """Random mean-zero polynomials, ratio at quad and 2*quad."""
    if n_samples < 1:
        raise InequalityError("n_samples must be >= 1")
    if suite not in SUITES:
        raise InequalityError(f"unknown suite {suite!r}")
    quad = 8 * degree if quad is None else quad
    rng = np.random.default_rng(seed)
    ratios, fine, flagged = [], [], []
    running = 0.0
    for i in range(n_samples):
        g = TestFunction.random(degree, rng)
        r = _ratio(suite, g, quad, beta, gamma, q)
        ratios.append(r)
        fine.append(_ratio(suite, g, 2 * quad, beta, gamma, q))
        if i >= 50 and r > 10 * running:
            flagged.append(i)
        running = max(running, r)
    ratios = np.array(ratios)
    mx, mx_fine = ratios.max(), max(fine)
    return RatioReport(suite, n_samples, float(mx), float(np.median(ratios)),
                       float(abs(mx_fine - mx) / mx_fine), quad, degree, seed, flagged, ratios.tolist())
