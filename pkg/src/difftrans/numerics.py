"""Floating-point evaluation of theta, elliptic gamma, the V integral and equation residuals.

Everything is complex double. Truncated products report tail bounds where
that is cheap; the contour integral reports a node-doubling estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .exactgroup import P, Q, EPS
from .thetafield import ThetaQuotient

DEFAULT_N = 60
DEFAULT_M = 1024
POLE_TOL = 1e-12
CONTOUR_TOL = 1e-6
_TINY = 1e-300


class PoleError(ArithmeticError):
    pass


class WindowError(ValueError):
    pass


def _check_nome(p: complex, name: str = "p"):
    if not abs(p) < 1:
        raise ValueError(f"|{name}| must be < 1, got {abs(p):.3g}")


def qpoch(z, p: complex, N: int = DEFAULT_N):
    """Truncated (z; p)_N, vectorized over ``z``."""
    z = np.asarray(z, dtype=complex)
    pw = p ** np.arange(N)
    return np.prod(1 - z[..., None] * pw, axis=-1)


def theta_eval(z, p: complex, N: int = DEFAULT_N):
    """theta(z; p) = (z; p)_inf (p/z; p)_inf truncated at j < N."""
    _check_nome(p)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("theta is undefined at z = 0")
    out = qpoch(z, p, N) * qpoch(p / z, p, N)
    return complex(out) if out.ndim == 0 else out


def theta_near_zero(z, p: complex, N: int = DEFAULT_N, tol: float = POLE_TOL) -> bool:
    """Whether some factor of the truncated product is within ``tol`` of 0."""
    z = np.asarray(z, dtype=complex)[..., None]
    pw = p ** np.arange(N)
    return bool(np.any(np.abs(1 - z * pw) < tol) or np.any(np.abs(1 - p * pw / z) < tol))


def theta_tail_bound(z, p: complex, N: int = DEFAULT_N):
    """Bound on |theta - theta_N| from the omitted factors j >= N.

    If the omitted factors are 1 - a_j with sum |a_j| <= s, their product is
    within expm1(s) of 1.
    """
    z = np.asarray(z, dtype=complex)
    ap = abs(p)
    s = (np.abs(z) + ap / np.abs(z)) * ap ** N / (1 - ap)
    rel = np.expm1(s)
    return np.abs(qpoch(z, p, N) * qpoch(p / z, p, N)) * rel


def theta_with_bound(z, p: complex, N: int = DEFAULT_N):
    return theta_eval(z, p, N), theta_tail_bound(z, p, N)


def _grid(p: complex, q: complex, N: int, zmax: float) -> np.ndarray:
    j = np.arange(N)[:, None]
    k = np.arange(N)[None, :]
    g = (p ** j * q ** k).ravel()
    # factors with |z g| below double resolution are exactly 1
    return g[np.abs(g) * max(zmax, 1.0) > 1e-18]


def qpoch2(z, p: complex, q: complex, N: int = DEFAULT_N):
    """Truncated (z; p, q)_inf over j, k < N."""
    z = np.asarray(z, dtype=complex)
    g = _grid(p, q, N, float(np.abs(z).max(initial=1.0)))
    return np.prod(1 - z[..., None] * g, axis=-1)


def elliptic_gamma_eval(z, p: complex, q: complex, N: int = DEFAULT_N):
    """Gamma(z; p, q) = (pq/z; p, q)_inf / (z; p, q)_inf."""
    _check_nome(p)
    _check_nome(q, "q")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise PoleError("elliptic gamma is undefined at z = 0")
    g = _grid(p, q, N, float(np.abs(z).max(initial=1.0)))
    fac = 1 - z[..., None] * g
    if np.any(np.abs(fac) < POLE_TOL):
        raise PoleError("argument hits a pole p^-j q^-k of the elliptic gamma function")
    out = qpoch2(p * q / z, p, q, N) / np.prod(fac, axis=-1)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NumericParams:
    p: complex
    q: complex
    epsilons: tuple[complex, ...]
    N: int = DEFAULT_N
    M: int = DEFAULT_M
    hypergeometric: bool = True
    balance_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "p", complex(self.p))
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "epsilons", tuple(complex(e) for e in self.epsilons))
        if len(self.epsilons) != 8:
            raise ValueError("eight epsilon parameters are required")
        if self.N < 8 or self.M < 8:
            raise ValueError("truncation N and node count M must be at least 8")
        _check_nome(self.p)
        if self.hypergeometric:
            _check_nome(self.q, "q")
        elif abs(self.q) == 1:
            raise ValueError("|q| = 1 is not supported")
        if any(e == 0 for e in self.epsilons):
            raise ValueError("parameters must be nonzero")

    def balancing_residual(self) -> float:
        target = self.p ** 2 * self.q ** 2
        return abs(np.prod(self.epsilons) - target) / abs(target)

    def check_balancing(self):
        if self.hypergeometric and self.balancing_residual() > self.balance_tol:
            raise WindowError(f"balancing residual {self.balancing_residual():.3g} exceeds {self.balance_tol:g}")

    def values(self) -> dict[str, complex]:
        """Numeric values of the symbolic generators, for :meth:`Monomial.evaluate`."""
        out = {P: self.p, Q: self.q}
        out.update(zip(EPS, self.epsilons))
        return out

    def replace(self, **kw) -> "NumericParams":
        d = dict(p=self.p, q=self.q, epsilons=self.epsilons, N=self.N, M=self.M,
                 hypergeometric=self.hypergeometric, balance_tol=self.balance_tol)
        d.update(kw)
        return NumericParams(**d)


def A_eval(z, params: NumericParams):
    """prod theta(e_j z) / (theta(z^2) theta(q z^2))."""
    p, q, N = params.p, params.q, params.N
    z = np.asarray(z, dtype=complex)
    num = np.ones_like(z)
    for e in params.epsilons:
        num = num * theta_eval(e * z, p, N)
    if theta_near_zero(z ** 2, p, N) or theta_near_zero(q * z ** 2, p, N):
        raise PoleError("z is (numerically) a pole of A")
    den = theta_eval(z ** 2, p, N) * theta_eval(q * z ** 2, p, N)
    out = num / den
    return complex(out) if out.ndim == 0 else out


def nu_eval(params: NumericParams) -> complex:
    e, q = params.epsilons, params.q
    return complex(np.prod([theta_eval(e[j] * e[7] / q, params.p, params.N) for j in range(6)]))


def hypergeo_a_eval(z, params: NumericParams):
    """a(z) = (nu - A(qz) - A(1/(qz))) / A(qz)."""
    q = params.q
    Aq = A_eval(q * np.asarray(z, dtype=complex), params)
    Ai = A_eval(1 / (q * np.asarray(z, dtype=complex)), params)
    return (nu_eval(params) - Aq - Ai) / Aq


def hypergeo_b_eval(z, params: NumericParams):
    """b(z) = A(1/(qz)) / A(qz)."""
    q = params.q
    z = np.asarray(z, dtype=complex)
    return A_eval(1 / (q * z), params) / A_eval(q * z, params)


def trapezoid_unit_circle(func: Callable[[np.ndarray], np.ndarray], M: int, offset: float = 0.0) -> complex:
    """(1/(2 pi i)) * contour integral of func(z) dz/z on |z| = 1 with M equispaced nodes.

    Exact for Laurent polynomials with all exponents below M in absolute value.
    """
    z = np.exp(2j * math.pi * (np.arange(M) + offset) / M)
    return complex(np.mean(func(z)))


@dataclass(frozen=True)
class VIntegral:
    value: complex
    error: float
    nodes: int


def _v_integrand(z: np.ndarray, t: Sequence[complex], p: complex, q: complex, N: int) -> np.ndarray:
    out = np.ones_like(z)
    for tj in t:
        out = out * elliptic_gamma_eval(tj * z, p, q, N) * elliptic_gamma_eval(tj / z, p, q, N)
    # 1/(Gamma(z^2) Gamma(z^-2)) = theta(z^2; p) theta(z^-2; q): no removable poles at z = +-1
    return out * theta_eval(z ** 2, p, N) * theta_eval(z ** -2, q, N)


def v_integral_eval(t: Sequence[complex], p: complex, q: complex, M: int = DEFAULT_M, N: int = DEFAULT_N,
                    symmetrize: bool = False, balance_tol: float = 1e-10) -> VIntegral:
    """kappa * contour integral over |z| = 1 of the V integrand, dz/z.

    The trapezoid rule on M equispaced nodes is combined with the M
    half-shifted nodes into the 2M rule; ``error`` is |V_M - V_2M| and
    ``value`` is V_2M.
    """
    t = [complex(x) for x in t]
    if len(t) != 8:
        raise ValueError("V takes eight parameters")
    _check_nome(p)
    _check_nome(q, "q")
    if M < 8:
        raise ValueError("need at least 8 nodes")
    gap = 1 - max(abs(x) for x in t)
    if gap <= 0:
        raise WindowError("all |t_j| must be < 1 for the unit circle to separate the pole sequences")
    if gap < CONTOUR_TOL:
        raise PoleError(f"integrand pole within {gap:.2e} of the contour")
    target = p ** 2 * q ** 2
    if abs(np.prod(t) - target) > balance_tol * abs(target):
        raise WindowError("parameters violate the balancing condition prod t_j = p^2 q^2")
    kappa = complex(qpoch(p, p, N) * qpoch(q, q, N)) / (4j * math.pi)

    def integrand(z):
        f = _v_integrand(z, t, p, q, N)
        if symmetrize:
            f = 0.5 * (f + _v_integrand(1 / z, t, p, q, N))
        return f

    def rule(offset: float) -> complex:
        return kappa * 2j * math.pi * trapezoid_unit_circle(integrand, M, offset)

    v0 = rule(0.0)
    v1 = rule(0.5)
    v2 = 0.5 * (v0 + v1)
    return VIntegral(v2, abs(v0 - v2), 2 * M)


def epsilons_from_t(t15: Sequence[complex], c: complex, t8: complex, p: complex, q: complex) -> tuple[complex, ...]:
    """e_j = q/(c t_j) (j <= 5), e8 = c/t8, e7 = e8/q, e6 = c^2 p^4 / e8."""
    e = [q / (c * tj) for tj in t15]
    e8 = c / t8
    return tuple(e + [c * c * p ** 4 / e8, e8 / q, e8])


def t_from_epsilons(eps: Sequence[complex], p: complex, q: complex) -> tuple[tuple[complex, ...], complex, complex]:
    """Inverse of :func:`epsilons_from_t`: returns (t1..t5, c, t8), c = sqrt(e6 e8)/p^2."""
    c = complex(np.sqrt(complex(eps[5]) * complex(eps[7]))) / p ** 2
    return tuple(q / (c * e) for e in eps[:5]), c, c / complex(eps[7])


def _f_arguments(params: NumericParams, z: complex):
    t15, c, t8 = t_from_epsilons(params.epsilons, params.p, params.q)
    return list(t15) + [c * z, c / z, t8], c


def f_window_violations(params: NumericParams, z: complex) -> list[str]:
    t, _ = _f_arguments(params, z)
    return [f"|t{j + 1}| = {abs(x):.4g} >= 1" for j, x in enumerate(t) if abs(x) >= 1]


def strict_window_violations(params: NumericParams, z: complex) -> list[str]:
    """Constraints sqrt|pq| < |t_j| < 1 (j <= 5) and sqrt|pq| < |q^+-1 t_j| < 1 (j = 6, 7, 8).

    Only reported; the defining integral converges under the weaker |t_j| < 1.
    """
    t, _ = _f_arguments(params, z)
    lo = math.sqrt(abs(params.p * params.q))
    out = []
    for j, x in enumerate(t):
        mags = [abs(x)] if j < 5 else [abs(params.q * x), abs(x / params.q)]
        for m in mags:
            if not lo < m < 1:
                out.append(f"t{j + 1}: {m:.4g} outside ({lo:.4g}, 1)")
    return out


def check_case_b(params: NumericParams, tol: float = 1e-10):
    e = params.epsilons
    if abs(e[7] - e[6] * params.q) > tol * abs(e[7]):
        raise WindowError("the integral representation needs e8 = e7 q")
    params.check_balancing()


def f_eval(params: NumericParams, z: complex, M: int | None = None, N: int | None = None,
           with_error: bool = False):
    """V(q/(c e_1), ..., q/(c e_5), c z, c/z, c/e8) divided by
    Gamma(c^2 z/e8) Gamma(c^2/(z e8)) Gamma(e8 z) Gamma(e8/z)."""
    M = params.M if M is None else M
    N = params.N if N is None else N
    check_case_b(params)
    z = complex(z)
    bad = f_window_violations(params, z)
    if bad:
        raise WindowError("parameter window violated: " + "; ".join(bad))
    t, c = _f_arguments(params, z)
    p, q, e8 = params.p, params.q, params.epsilons[7]
    v = v_integral_eval(t, p, q, M, N, balance_tol=1e-8)
    den = elliptic_gamma_eval(np.array([c * c * z / e8, c * c / (z * e8), e8 * z, e8 / z]), p, q, N)
    d = complex(np.prod(den))
    val = v.value / d
    return (val, v.error / abs(d)) if with_error else val


@dataclass(frozen=True)
class Residual:
    max: float
    per_sample: tuple[float, ...]
    degenerate: bool = False
    failures: tuple[str, ...] = field(default=())


def _relative(terms: Sequence[complex]) -> tuple[float, bool]:
    scale = sum(abs(x) for x in terms)
    if scale < _TINY:
        return 0.0, True
    return abs(sum(terms)) / scale, False


def hypergeo_residual(y: Callable[[complex], complex], params: NumericParams,
                      z_samples: Sequence[complex]) -> Residual:
    """max over samples of |A(z)(y(qz)-y(z)) + A(1/z)(y(z/q)-y(z)) + nu y(z)| / sum of |terms|."""
    q = params.q
    nu = nu_eval(params)
    out, degen = [], False
    for z in z_samples:
        yz, yq, yi = y(z), y(q * z), y(z / q)
        Az, Ai = A_eval(z, params), A_eval(1 / z, params)
        r, d = _relative([Az * yq, -Az * yz, Ai * yi, -Ai * yz, nu * yz])
        out.append(r)
        degen |= d
    return Residual(max(out, default=0.0), tuple(out), degen)


def riccati_residual(u: Callable[[complex], complex], a_eval: Callable[[complex], complex],
                     b_eval: Callable[[complex], complex], z_samples: Sequence[complex],
                     shift: complex) -> Residual:
    """max over samples of |u(z) u(shift z) + a(z) u(z) + b(z)| / sum of |terms|."""
    out, degen = [], False
    for z in z_samples:
        uz = u(z)
        r, d = _relative([uz * u(shift * z), a_eval(z) * uz, b_eval(z)])
        out.append(r)
        degen |= d
    return Residual(max(out, default=0.0), tuple(out), degen)


def tq_eval(f: ThetaQuotient, z, values: Mapping[str, complex], N: int = DEFAULT_N):
    """Numeric value of a theta quotient at the level-k variable ``z``."""
    p = complex(values[P])
    z = np.asarray(z, dtype=complex)
    out = f.constant.evaluate(values) * z ** f.zpow
    for xi, n in f.factors:
        out = out * theta_eval(xi.evaluate(values) * z, p, N) ** n
    return complex(out) if np.ndim(out) == 0 else out


def demo_params(N: int = DEFAULT_N, M: int = 2048) -> NumericParams:
    """Parameters inside the strict window for z, qz and z/q with |z| = 1.

    |p|, |q| <= 0.35; e8 = e7 q holds so the integral representation applies.
    """
    p = 0.02 + 0.005j
    q = 0.3 + 0.05j
    c = 0.28 * np.exp(0.3j)
    angles = (0.4, 1.7, 2.9, -2.2, -0.8)
    mags = (0.27, 0.29, 0.28, 0.285, 0.283)
    t15 = [m * np.exp(1j * a) for m, a in zip(mags, angles)]
    t8 = p ** 2 * q ** 2 / (np.prod(t15) * c * c)
    return NumericParams(p, q, epsilons_from_t(t15, c, t8, p, q), N=N, M=M)


def sample_contour(n: int, seed: int, rmin: float = 0.97, rmax: float = 1.03) -> list[complex]:
    rng = np.random.default_rng(seed)
    r = rng.uniform(rmin, rmax, n)
    phi = rng.uniform(0, 2 * math.pi, n)
    return [complex(x) for x in r * np.exp(1j * phi)]


def sample_annulus(n: int, seed: int, rmin: float = 0.5, rmax: float = 2.0) -> list[complex]:
    return sample_contour(n, seed, rmin, rmax)
