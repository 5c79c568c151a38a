"""Relaxation kernels of the linearized fractional Maxwell model.

All kernels are evaluated through their spectral (inverse-Laplace)
representations, which are non-oscillatory integrals over the half-line:

    W0(t)  = (sin(pi a)/pi) int_0^inf exp(-r t) r^(a-1) / q(r) dr
    Ea(t)  = (sin(pi a)/pi) int_0^inf exp(-r t) r^a / q(r) dr
    q(r)   = r^(2a) + 2 r^a cos(pi a) + 1

with a = alpha.  W0 is the relaxation function (W0(0) = 1, completely
monotone), Ea = -W0' its resolvent kernel, and

    rho = Ea * t^(-beta)/Gamma(1-beta)        (Laplace symbol s^(beta-1)/(s^alpha+1))

the composite memory kernel mediating stress from strain history.  Collapsing
the Bromwich integral of s^(beta-1)/(s^alpha+1) onto the negative real axis
gives the one-dimensional form used internally,

    rho(t) = (1/pi) int_0^inf exp(-r t) r^(beta-1) (sin(pi b) + r^a sin(pi d)) / q(r) dr

with b = beta, d = beta - alpha.  The same density integrated against

    psi_nu(r, t) = (-1)^nu (exp(-r t) - sum_{j<nu} (-r t)^j / j!) / r^nu

yields the iterated antiderivatives of rho (and of W0, Ea) in closed
one-integral form; these are what the product-integration time steppers
consume.  ``KernelTable`` caches them as log-log cubic splines so that inner
loops never re-run adaptive quadrature.

The public point evaluators (``w0``, ``e_alpha``, ``rho``) always use direct
adaptive quadrature; ``rho`` performs the defining convolution with the
endpoint singularities of both factors split out, and is cross-checked
against the spectral form in the test suite.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .quadrature import QuadratureSpec, integrate, integrate_halfline

DEFAULT_QUADRATURE = QuadratureSpec()

_SERIES_CUTOFF = 4.0


@dataclass(frozen=True)
class KernelParams:
    """Fractional orders of the model and the exponents derived from them.

    Requires 0 < alpha < beta < 1; then delta = beta - alpha lies in (0, 1)
    and omega = delta / (2 - delta) in (0, delta).
    """

    alpha: float
    beta: float
    delta: float = field(init=False)
    omega: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha < self.beta < 1.0):
            raise ValueError(
                f"fractional orders must satisfy 0 < alpha < beta < 1, "
                f"got alpha={self.alpha}, beta={self.beta}"
            )
        object.__setattr__(self, "delta", self.beta - self.alpha)
        object.__setattr__(self, "omega", self.delta / (2.0 - self.delta))


def _piecewise_density(head, tail):
    """Combine head (r <= 1) and tail (r > 1) branches without overflow.

    The two algebraically equivalent forms keep every intermediate finite on
    their own side, so extreme quadrature nodes (r near 0 or 1e300) never
    produce inf/inf.
    """

    def g(r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        low = r <= 1.0
        if np.any(low):
            out[low] = head(r[low])
        if np.any(~low):
            out[~low] = tail(r[~low])
        return out

    return g


def relaxation_density(alpha: float):
    """Spectral density of W0: r -> (sin(pi a)/pi) r^(a-1)/q(r)."""
    a = alpha
    cos_a = math.cos(math.pi * a)
    scale = math.sin(math.pi * a) / math.pi

    def head(r):
        ra = r**a
        return scale * r ** (a - 1.0) / (ra * ra + 2.0 * cos_a * ra + 1.0)

    def tail(r):
        inv = r**-a
        return scale * r ** (-a - 1.0) / (1.0 + 2.0 * cos_a * inv + inv * inv)

    return _piecewise_density(head, tail)


def resolvent_density(alpha: float):
    """Spectral density of Ea: r -> (sin(pi a)/pi) r^a/q(r)."""
    a = alpha
    cos_a = math.cos(math.pi * a)
    scale = math.sin(math.pi * a) / math.pi

    def head(r):
        ra = r**a
        return scale * ra / (ra * ra + 2.0 * cos_a * ra + 1.0)

    def tail(r):
        inv = r**-a
        return scale * inv / (1.0 + 2.0 * cos_a * inv + inv * inv)

    return _piecewise_density(head, tail)


def memory_density(alpha: float, beta: float):
    """Spectral density of rho: r -> r^(b-1)(sin(pi b) + r^a sin(pi d))/(pi q(r))."""
    a, b, d = alpha, beta, beta - alpha
    cos_a = math.cos(math.pi * a)
    sin_b = math.sin(math.pi * b)
    sin_d = math.sin(math.pi * d)

    def head(r):
        ra = r**a
        return (
            r ** (b - 1.0)
            * (sin_b + ra * sin_d)
            / (math.pi * (ra * ra + 2.0 * cos_a * ra + 1.0))
        )

    def tail(r):
        inv = r**-a
        return (
            (sin_b * r ** (b - 1.0 - 2.0 * a) + sin_d * r ** (d - 1.0))
            / (math.pi * (1.0 + 2.0 * cos_a * inv + inv * inv))
        )

    return _piecewise_density(head, tail)


def _phi(nu: int, x):
    """Stable evaluation of phi_nu(x) = sum_k (-x)^k / (k+nu)!.

    phi_0 = exp(-x); phi_nu is the nu-th iterated antiderivative weight:
    int_0^t psi_(nu-1) = psi_nu with psi_nu(r, t) = t^nu phi_nu(r t).
    """
    x = np.asarray(x, dtype=float)
    if nu == 0:
        return np.exp(-x)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        term = np.full_like(xs, 1.0 / math.factorial(nu))
        acc = term.copy()
        for k in range(1, 60):
            term = term * (-xs) / (k + nu)
            acc += term
            if np.all(np.abs(term) <= 1e-18 * np.abs(acc)):
                break
        out[small] = acc
    if np.any(~small):
        xl = x[~small]
        poly = np.zeros_like(xl)
        for j in range(nu):
            poly += (-xl) ** j / math.factorial(j)
        out[~small] = ((-1.0) ** nu) * (np.exp(-xl) - poly) / xl**nu
    return out


def antiderivative_integral(
    density,
    nu: int,
    t: float,
    spec: QuadratureSpec,
    singularity_exponent: float,
    decay_exponent: float | None,
):
    """int_0^inf psi_nu(r, t) * density(r) dr, the nu-th antiderivative at t.

    Rescaled to x = r t so the exponential/phi weight keeps a fixed scale
    regardless of t; only the density's knee moves, which adaptive
    subdivision picks up in log coordinates.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return 0.0 if nu >= 1 else math.nan

    if nu == 0:

        def f(x):
            return density(x / t) * np.exp(-x) / t

    else:

        def f(x):
            return density(x / t) * _phi(nu, x) * t ** (nu - 1)

    value, _ = integrate_halfline(
        f,
        spec,
        singularity_exponent=singularity_exponent,
        decay_exponent=decay_exponent,
    )
    return value


def w0(t: float, params: KernelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Relaxation function W0(t); returns exactly 1.0 at t = 0."""
    if t < 0.0 or not math.isfinite(t):
        raise ValueError("w0 requires finite t >= 0")
    if t == 0.0:
        return 1.0
    g = relaxation_density(params.alpha)
    value, _ = integrate_halfline(
        lambda r: g(r) * np.exp(-r * t),
        spec,
        singularity_exponent=params.alpha,
        decay_exponent=params.alpha,
    )
    return value


def e_alpha(t: float, params: KernelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Resolvent kernel Ea(t) = -W0'(t); defined for t > 0 only."""
    if t <= 0.0 or not math.isfinite(t):
        raise ValueError("e_alpha requires finite t > 0 (the integral diverges at 0)")
    g = resolvent_density(params.alpha)
    value, _ = integrate_halfline(
        lambda r: g(r) * np.exp(-r * t),
        spec,
        singularity_exponent=1.0 + params.alpha,
        decay_exponent=None,
    )
    return value


def mu_kernels(t: float, params: KernelParams) -> tuple[float, float]:
    """Power-law memory kernels (t^-alpha/Gamma(1-alpha), t^-beta/Gamma(1-beta))."""
    if t <= 0.0:
        raise ValueError("memory kernels require t > 0")
    mu1 = t ** (-params.alpha) / math.gamma(1.0 - params.alpha)
    mu2 = t ** (-params.beta) / math.gamma(1.0 - params.beta)
    return mu1, mu2


def rho(
    t: float,
    params: KernelParams,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    resolvent=None,
) -> float:
    """Memory kernel rho(t) = (Ea * s^-beta/Gamma(1-beta))(t) for t > 0.

    Evaluates the defining convolution, split at t/2 so the s^-beta
    singularity of the power factor and the s^(alpha-1) singularity of Ea
    each sit at the left endpoint of their own piece.  ``resolvent`` may
    supply a vectorized Ea evaluator (e.g. a KernelTable method); by default
    a local spline of direct Ea quadratures is built, accurate well beyond
    the requested tolerances.
    """
    if t <= 0.0 or not math.isfinite(t):
        raise ValueError("rho requires finite t > 0")
    if resolvent is None:
        table = KernelTable.for_range(params, 1e-7 * t, t)
        resolvent = table.e_alpha
    coeff = 1.0 / math.gamma(1.0 - params.beta)
    half = 0.5 * t

    def near_power(s):
        return resolvent(t - s) * coeff * s ** (-params.beta)

    def near_resolvent(sigma):
        return resolvent(sigma) * coeff * (t - sigma) ** (-params.beta)

    v1, _ = integrate(near_power, 0.0, half, spec, left_exponent=1.0 - params.beta)
    v2, _ = integrate(near_resolvent, 0.0, half, spec, left_exponent=params.alpha)
    return v1 + v2


def rho_spectral(
    t: float, params: KernelParams, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """rho(t) by the one-dimensional spectral integral (fast internal route)."""
    if t <= 0.0 or not math.isfinite(t):
        raise ValueError("rho requires finite t > 0")
    g = memory_density(params.alpha, params.beta)
    value, _ = integrate_halfline(
        lambda r: g(r) * np.exp(-r * t),
        spec,
        singularity_exponent=params.beta,
        decay_exponent=None,
    )
    return value


# --- cached log-log spline tables ------------------------------------------

_TABLE_CACHE: dict = {}
_TABLE_LOCK = threading.Lock()

def _family_spec(name: str, alpha: float, beta: float | None):
    """Density, antiderivative order and endpoint exponents for one family."""
    if name == "ew1":
        return resolvent_density(alpha), 1, 1.0 + alpha, alpha
    if name == "e_alpha":
        return resolvent_density(alpha), 0, 1.0 + alpha, None
    if name == "iw0":
        return relaxation_density(alpha), 1, alpha, 1.0 + alpha
    if beta is None:
        raise ValueError(f"kernel family {name!r} needs both fractional orders")
    delta = beta - alpha
    if name == "rho":
        return memory_density(alpha, beta), 0, beta, None
    if name in ("r1", "r2", "r3"):
        nu = int(name[1])
        return memory_density(alpha, beta), nu, beta, 1.0 - delta
    raise KeyError(name)


def _family_values_fixed(density, nu, p_left, decay, t_values, rel_target=1e-9):
    """Antiderivative-family values at many times from one fixed panel layout.

    Works in the rescaled variable x = r t, where the phi_nu weight is the
    same for every t; only density(x/t) changes, so the integrand can be
    evaluated as one (node, time) array and panel-summed.  The left algebraic
    endpoint is handled by the exact power map w = x**p_left; the right tail
    is covered by log-spaced panels out to where the algebraic decay makes the
    remainder negligible.  A 12/24-point Gauss pair provides the error check.
    """
    t_values = np.asarray(t_values, dtype=float)
    t_max = float(t_values.max())
    t_min = float(t_values.min())

    if nu == 0:
        x_max = 60.0
    else:
        c = decay if decay is not None else 1.0
        # crude bound: relative tail ~ t^(1+c) x_max^-c, pushed below 1e-13
        decades = max(8.0, ((1.0 + c) * math.log10(max(t_max, 1.0)) + 13.0) / c)
        x_max = 10.0 ** min(decades, 90.0)

    # the mapped cutoff x_min = w_min^(1/p) must sit far below the x ~ t mass
    # scale of the smallest tabulated time
    w_min_decades = min(-14.0, p_left * (math.log10(t_min) - 13.0 / p_left))
    w_min_decades = max(w_min_decades, -250.0)
    w_edges = np.logspace(w_min_decades, 0.0, int(-4 * w_min_decades) + 1)
    x_right_edges = np.logspace(0.0, math.log10(x_max), int(6 * math.log10(x_max)) + 1)

    from .quadrature import panel_nodes, panel_sums

    inv_p = 1.0 / p_left

    def weight(x):
        return np.exp(-x) if nu == 0 else _phi(nu, x)

    def accumulate(order):
        w_nodes = panel_nodes(w_edges, order)
        x_left = w_nodes**inv_p
        jac_left = inv_p * w_nodes ** (inv_p - 1.0)
        x_right = panel_nodes(x_right_edges, order)
        phi_left = weight(x_left) * jac_left
        phi_right = weight(x_right)

        total = np.zeros(t_values.size)
        for start in range(0, t_values.size, 128):
            tc = t_values[start : start + 128]
            vals_l = density(x_left[:, None] / tc[None, :]) * phi_left[:, None]
            vals_r = density(x_right[:, None] / tc[None, :]) * phi_right[:, None]
            total[start : start + 128] = panel_sums(
                vals_l, w_edges, order
            ) + panel_sums(vals_r, x_right_edges, order)
        return total

    hi = accumulate("hi")
    lo = accumulate("lo")
    rel_err = np.max(np.abs(hi - lo) / np.maximum(np.abs(hi), 1e-300))
    if rel_err > rel_target:
        raise RuntimeError(
            f"fixed-layout kernel tabulation failed its error check ({rel_err:.2e})"
        )
    prefactor = 1.0 / t_values if nu == 0 else t_values ** (nu - 1)
    return prefactor * hi


class KernelTable:
    """Spline-backed evaluators for the kernel family of one parameter set.

    Values are tabulated on a logarithmic grid by adaptive quadrature and
    interpolated as log-log cubic splines (every family member is positive
    with power-law behavior at both ends of the range, so the log-log graphs
    are nearly straight and the interpolation error is far below the
    quadrature tolerance).  Splines are built lazily per family.

    Family members, all for the given (alpha, beta):

    * ``ew1``      1 - W0(t) = int_0^t Ea
    * ``e_alpha``  Ea(t)
    * ``iw0``      int_0^t W0
    * ``rho``      rho(t)
    * ``r1/r2/r3`` first/second/third iterated antiderivatives of rho

    Instances are immutable after construction of each spline and safe to
    share across threads.
    """

    POINTS_PER_DECADE = 96

    def __init__(
        self,
        alpha: float,
        beta: float | None,
        t_min: float,
        t_max: float,
    ):
        if not (0.0 < t_min < t_max):
            raise ValueError("need 0 < t_min < t_max")
        self.alpha = alpha
        self.beta = beta
        self.t_min = t_min
        self.t_max = t_max
        n = max(8, int(math.ceil(self.POINTS_PER_DECADE * math.log10(t_max / t_min))))
        self._log_t = np.linspace(math.log(t_min), math.log(t_max), n)
        self._splines: dict[str, CubicSpline] = {}
        self._build_lock = threading.Lock()

    @classmethod
    def for_range(
        cls,
        params: KernelParams | None,
        t_min: float,
        t_max: float,
        alpha: float | None = None,
    ) -> "KernelTable":
        """Shared table covering [t_min, t_max], snapped outward to decades.

        Pass ``params`` for the full family; pass ``alpha`` alone when only
        the W0-side members are needed.
        """
        if params is not None:
            a, b = params.alpha, params.beta
        else:
            a, b = alpha, None
        lo = math.floor(math.log10(t_min)) - 1
        hi = math.ceil(math.log10(t_max)) + 1
        key = (a, b, lo, hi)
        with _TABLE_LOCK:
            table = _TABLE_CACHE.get(key)
            if table is None:
                table = cls(a, b, 10.0**lo, 10.0**hi)
                _TABLE_CACHE[key] = table
        return table

    def _spline(self, name: str) -> CubicSpline:
        sp = self._splines.get(name)
        if sp is not None:
            return sp
        with self._build_lock:
            sp = self._splines.get(name)
            if sp is not None:
                return sp
            g, nu, sing, decay = _family_spec(name, self.alpha, self.beta)
            vals = _family_values_fixed(g, nu, sing, decay, np.exp(self._log_t))
            if np.any(vals <= 0.0):
                raise RuntimeError(f"kernel family {name} produced non-positive values")
            sp = CubicSpline(self._log_t, np.log(vals))
            self._splines[name] = sp
        return sp

    def _eval(self, name: str, t, zero_value: float | None = 0.0):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        out = np.empty_like(tt)
        zero = tt == 0.0
        if np.any(zero):
            if zero_value is None:
                raise ValueError(f"kernel family {name} is singular at t = 0")
            out[zero] = zero_value
        pos = ~zero
        if np.any(pos):
            tp = tt[pos]
            if np.any(tp < self.t_min * (1.0 - 1e-12)) or np.any(
                tp > self.t_max * (1.0 + 1e-12)
            ):
                raise ValueError(
                    f"kernel table range [{self.t_min:g}, {self.t_max:g}] "
                    f"does not cover requested times"
                )
            tp = np.clip(tp, self.t_min, self.t_max)
            out[pos] = np.exp(self._spline(name)(np.log(tp)))
        return float(out[0]) if scalar else out

    def ew1(self, t):
        return self._eval("ew1", t, zero_value=0.0)

    def w0(self, t):
        return 1.0 - self._eval("ew1", t, zero_value=0.0)

    def iw0(self, t):
        return self._eval("iw0", t, zero_value=0.0)

    def e_alpha(self, t):
        return self._eval("e_alpha", t, zero_value=None)

    def rho(self, t):
        return self._eval("rho", t, zero_value=None)

    def r1(self, t):
        return self._eval("r1", t, zero_value=0.0)

    def r2(self, t):
        return self._eval("r2", t, zero_value=0.0)

    def r3(self, t):
        return self._eval("r3", t, zero_value=0.0)
