"""Modal Cauchy problems of the linearized model, by two independent routes.

Each Stokes mode carries a scalar history problem

    alpha'(t) = -lam (rho * alpha)(t) - b sqrt(lam) W0(t),   alpha(0) = alpha0.

Route one (``solve_mode``) integrates the equation once, turning it into a
second-kind Volterra equation

    alpha(t) + lam (R * alpha)(t) = alpha0 - b sqrt(lam) int_0^t W0,

with R the antiderivative of rho, and steps it by implicit product
integration: alpha is piecewise linear, the memory weights int R(t_n - tau)
over each panel are exact (antiderivative differences near the diagonal,
Gauss evaluation of the smooth R far from it), and the diagonal weight is
solved for in closed form, which keeps the stepping stable for stiff
eigenvalues.

Route two (``mode_value_laplace``) inverts the explicit Laplace symbols on
the limiting Bromwich contour x = 0: oscillation-bounded panels carry
exp(i y t) accurately, the conditionally convergent velocity term is
regularized by subtracting the exactly invertible reference 1/(1+s), and the
truncated tails are corrected by two integration-by-parts terms with the
residual reported as an error estimate.

A third representation (``CutModeEvaluator``) collapses the inversion onto
the branch cut plus the resolvent pole pair.  It is non-oscillatory, costs
one exp per node, and vectorizes over whole eigenvalue batches; the large
spectra used by field norms and decay studies are evaluated this way.  All
three routes are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fracops import SampledFunction, TimeGrid
from .kernels import KernelParams, KernelTable
from .quadrature import QuadratureError, QuadratureSpec, integrate
from .symbols import ResolventSymbols, forcing_symbol, resolvent_symbol

_GL4_NODES, _GL4_WEIGHTS = np.polynomial.legendre.leggauss(4)
_GL12 = np.polynomial.legendre.leggauss(12)
_GL24 = np.polynomial.legendre.leggauss(24)

_FAR_PANEL_RATIO = 40.0


@dataclass(frozen=True)
class ModalProblem:
    """Eigenvalues with initial coefficients: the discrete state of the IBVP."""

    lambdas: np.ndarray
    alpha0: np.ndarray
    b: np.ndarray
    params: KernelParams

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        a0 = np.asarray(self.alpha0, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if not (lam.ndim == 1 and lam.shape == a0.shape == b.shape):
            raise ValueError("lambdas, alpha0 and b must be equal-length vectors")
        if lam.size == 0 or lam[0] <= 0.0 or np.any(np.diff(lam) < 0.0):
            raise ValueError("eigenvalues must be positive and nondecreasing")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(a0)) and np.all(np.isfinite(b))):
            raise ValueError("modal data must be finite")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "alpha0", a0)
        object.__setattr__(self, "b", b)

    @property
    def mode_count(self) -> int:
        return self.lambdas.size


@dataclass
class ModalTrajectory:
    """Sampled mode history: alpha, (rho * alpha), optional derivatives."""

    grid: TimeGrid
    alpha: np.ndarray
    rho_conv: np.ndarray
    dalpha: np.ndarray | None = None
    d2alpha: np.ndarray | None = None


def _mode_table(params: KernelParams, grid: TimeGrid) -> KernelTable:
    t1 = grid.nodes[1]
    return KernelTable.for_range(params, max(0.5 * t1, 1e-280), grid.horizon)


def _memory_weights(table: KernelTable, t_n: float, t: np.ndarray, h: np.ndarray, n: int):
    """Panel weights A_i = int_panel R(t_n - tau) dtau of the slope expansion
    (rho * alpha)(t_n) = alpha(0) R(t_n) + sum_i s_i A_i.

    Near the diagonal the weights are exact antiderivative differences of R;
    far panels use 4-point Gauss on R itself, which avoids the cancellation
    of nearly equal antiderivative values.
    """
    hh = h[:n]
    d_lo = t_n - t[1 : n + 1]
    far = d_lo >= _FAR_PANEL_RATIO * hh
    A = np.empty(n)
    if np.any(far):
        mid = 0.5 * (t[:n][far] + t[1 : n + 1][far])
        half = 0.5 * hh[far]
        tau = mid[:, None] + half[:, None] * _GL4_NODES[None, :]
        rvals = table.r1((t_n - tau).ravel()).reshape(tau.shape)
        A[far] = half * (rvals @ _GL4_WEIGHTS)
    near = ~far
    if np.any(near):
        d_hi = t_n - t[:n]
        A[near] = table.r2(d_hi[near]) - table.r2(d_lo[near])
    return A


def solve_mode(
    problem: ModalProblem, k: int, grid: TimeGrid, table: KernelTable | None = None
) -> ModalTrajectory:
    """Integrate one modal history problem by implicit product integration.

    The history equation is integrated over each step with the trapezoidal
    rule in the outer variable while the memory term (rho * alpha) itself is
    assembled from exact panel moments of the piecewise-linear solution; the
    implicit diagonal weight is solved in closed form.  In the stiff limit
    lam * h^(2-delta) -> inf the one-step multiplier tends to zero, so large
    eigenvalues stay stable on coarse late-time panels.

    alpha(0) is stored exactly; (rho * alpha) is returned alongside.
    """
    lam = float(problem.lambdas[k])
    a0 = float(problem.alpha0[k])
    b = float(problem.b[k])
    params = problem.params
    if table is None:
        table = _mode_table(params, grid)
    t = grid.nodes
    n_steps = grid.node_count
    h = np.diff(t)
    sqrt_lam = math.sqrt(lam)

    iw0_nodes = table.iw0(t)
    r1_nodes = table.r1(t)

    alpha = np.empty(n_steps + 1)
    rho_conv = np.empty(n_steps + 1)
    slopes = np.empty(n_steps)
    alpha[0] = a0
    rho_conv[0] = 0.0

    for n in range(1, n_steps + 1):
        hn = h[n - 1]
        A = _memory_weights(table, t[n], t, h, n)
        diag = A[n - 1] / hn
        history = a0 * r1_nodes[n]
        if n > 1:
            history += slopes[: n - 1] @ A[: n - 1]
        forcing = b * sqrt_lam * (iw0_nodes[n] - iw0_nodes[n - 1])
        numer = (
            alpha[n - 1] * (1.0 + 0.5 * lam * A[n - 1])
            - 0.5 * lam * hn * (history + rho_conv[n - 1])
            - forcing
        )
        alpha[n] = numer / (1.0 + 0.5 * lam * A[n - 1])
        if not math.isfinite(alpha[n]):
            raise ArithmeticError(
                f"mode {k}: time stepping produced a non-finite value at "
                f"step {n} (t = {t[n]:g})"
            )
        slopes[n - 1] = (alpha[n] - alpha[n - 1]) / hn
        rho_conv[n] = history + slopes[n - 1] * A[n - 1]
    return ModalTrajectory(grid=grid, alpha=alpha, rho_conv=rho_conv)


def solve_mode_extrapolated(
    problem: ModalProblem, k: int, grid: TimeGrid, table: KernelTable | None = None
) -> ModalTrajectory:
    """Richardson-accelerated mode solve on ``grid``.

    Runs the product-integration stepper on the grid and its dyadic
    refinement (graded grids nest exactly) and cancels the leading h^2 error
    term.  Both runs are plain time stepping; no transform-domain information
    enters, so this stays a pure second route against the Laplace inversion.
    """
    fine = grid.refined(2)
    if table is None:
        table = _mode_table(problem.params, fine)
    coarse_traj = solve_mode(problem, k, grid, table=table)
    fine_traj = solve_mode(problem, k, fine, table=table)
    alpha = (4.0 * fine_traj.alpha[::2] - coarse_traj.alpha) / 3.0
    rho_conv = (4.0 * fine_traj.rho_conv[::2] - coarse_traj.rho_conv) / 3.0
    return ModalTrajectory(grid=grid, alpha=alpha, rho_conv=rho_conv)


def trajectory_values(traj: ModalTrajectory, times, which: str = "alpha"):
    """Cubic readout of a trajectory field at arbitrary query times."""
    from scipy.interpolate import CubicSpline

    data = getattr(traj, which)
    if data is None:
        raise ValueError(f"trajectory does not carry {which!r} samples")
    return CubicSpline(traj.grid.nodes, data)(np.asarray(times, dtype=float))


def memory_convolution(values: np.ndarray, grid: TimeGrid, table: KernelTable) -> np.ndarray:
    """(rho * f)(t_n) for sampled f, with the piecewise-linear f integrated
    exactly against the memory kernel."""
    t = grid.nodes
    h = np.diff(t)
    vals = np.asarray(values, dtype=float)
    slopes = np.diff(vals) / h
    r1_nodes = table.r1(t)
    out = np.empty_like(vals)
    out[0] = 0.0
    for n in range(1, t.size):
        A = _memory_weights(table, t[n], t, h, n)
        out[n] = vals[0] * r1_nodes[n] + slopes[:n] @ A
    return out


def mode_derivatives(
    traj: ModalTrajectory,
    problem: ModalProblem,
    k: int,
    table: KernelTable | None = None,
) -> ModalTrajectory:
    """Fill the first and second derivative samples of a mode trajectory.

    alpha' comes from the history equation itself; alpha'' from its
    differentiated form alpha'' = lam^2 (rho*rho*alpha) + lam^(3/2) b (rho*W0)
    + sqrt(lam) b Ea.  The resolvent kernel Ea blows up like t^(alpha-1) at
    t = 0, so with b != 0 the second derivative at the initial node is
    undefined and stored as nan.
    """
    lam = float(problem.lambdas[k])
    b = float(problem.b[k])
    params = problem.params
    grid = traj.grid
    if table is None:
        table = _mode_table(params, grid)
    t = grid.nodes
    sqrt_lam = math.sqrt(lam)

    w0_nodes = table.w0(t)
    dalpha = -lam * traj.rho_conv - b * sqrt_lam * w0_nodes

    rho_rho_alpha = memory_convolution(traj.rho_conv, grid, table)
    d2alpha = lam * lam * rho_rho_alpha
    if b != 0.0:
        rho_w0 = memory_convolution(w0_nodes, grid, table)
        e_tail = np.empty_like(t)
        e_tail[0] = math.nan
        e_tail[1:] = table.e_alpha(t[1:])
        d2alpha = d2alpha + lam * sqrt_lam * b * rho_w0 + sqrt_lam * b * e_tail
    return ModalTrajectory(
        grid=grid,
        alpha=traj.alpha,
        rho_conv=traj.rho_conv,
        dalpha=dalpha,
        d2alpha=d2alpha,
    )


def solve_modes(
    problem: ModalProblem,
    grid: TimeGrid,
    indices=None,
    max_workers: int | None = None,
    derivatives: bool = False,
) -> list[ModalTrajectory]:
    """Solve a set of modes, mode-parallel over a thread pool.

    The kernel table is built once up front and then shared read-only.
    """
    if indices is None:
        indices = range(problem.mode_count)
    indices = list(indices)
    table = _mode_table(problem.params, grid)
    for name in ("iw0", "r1", "r2", "r3", "ew1"):
        table._spline(name)  # warm the lazily built splines before sharing
    if derivatives:
        table._spline("e_alpha")

    def run(k):
        traj = solve_mode(problem, k, grid, table=table)
        if derivatives:
            traj = mode_derivatives(traj, problem, k, table=table)
        return traj

    if max_workers is not None and max_workers > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(run, indices))
    return [run(k) for k in indices]


# --- Bromwich route on the limiting contour x = 0 ---------------------------


def _head_integral(fvals_fn, y0: float, t: float, exponent: float, spec: QuadratureSpec):
    """int_0^y0 F(iy) exp(iyt) dy with the y^(exponent-1)-type variation of F
    near 0 linearized by a power map."""

    def g(y):
        return fvals_fn(1j * y) * np.exp(1j * y * t)

    value, err = integrate(g, 0.0, y0, spec, left_exponent=exponent)
    return complex(value), err


def _panel_batch(fvals_fn, edges: np.ndarray, t: float):
    """Oscillatory panel sums with a 12/24-point error estimate."""
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    def contributions(nodes, weights):
        y = mid[:, None] + half[:, None] * nodes[None, :]
        vals = fvals_fn(1j * y) * np.exp(1j * y * t)
        return half * (vals @ weights)

    c_hi = contributions(*_GL24)
    c_lo = contributions(*_GL12)
    return np.sum(c_hi), float(np.sum(np.abs(c_hi - c_lo)))


def _oscillatory_edges(y_start: float, y_stop: float, t: float, growth: float = 1.15):
    """Log-growing panel edges, capped so exp(iyt) turns by at most pi/4."""
    cap = math.pi / (4.0 * t) if t > 0.0 else math.inf
    edges = [y_start]
    y = y_start
    while y < y_stop:
        y = min(y * growth + 1e-300, y + cap, y_stop)
        edges.append(y)
    return np.asarray(edges)


def _contour_integral(
    sym_derivs,
    y0: float,
    head_exponent: float,
    t: float,
    abs_tol: float,
    a_start: float,
):
    """int_0^inf F(iy) exp(iyt) dy for a symbol with derivatives.

    Integrates head + oscillation-bounded panels up to an adaptively extended
    cutoff A, then corrects the remainder with two integration-by-parts terms;
    the third-derivative scale provides the tail error estimate.
    """
    spec = QuadratureSpec(abs_tol=0.1 * abs_tol, rel_tol=1e-12, max_subdivisions=4000)
    fval = lambda s: sym_derivs(s)[0]
    total, err = _head_integral(fval, y0, t, head_exponent, spec)

    a_current = y0
    a_target = max(a_start, 4.0 * y0)
    for _ in range(60):
        edges = _oscillatory_edges(a_current, a_target, t)
        batch, batch_err = _panel_batch(fval, edges, t)
        total += batch
        err += batch_err
        a_current = a_target

        f, f1, f2 = sym_derivs(1j * a_current)
        phase = np.exp(1j * a_current * t)
        it = 1j * t
        tail = phase * (-f / it + f1 / (it * it))
        tail_err = abs(f2) * a_current / (3.0 * t * t)
        if tail_err <= 0.5 * abs_tol:
            return complex(total + tail), err + tail_err
        a_target = 2.0 * a_current
    raise QuadratureError(
        f"contour tail did not converge by A = {a_current:.3e} "
        f"(tail estimate {tail_err:.3e}, target {abs_tol:.3e})",
        complex(total + tail),
        err + tail_err,
    )


def velocity_contour_integral(t: float, mu: float, params: KernelParams, abs_tol: float = 1e-10):
    """lim_A int_{-A}^{A} T_mu(iy) exp(iyt) dy, tail-corrected, with estimate.

    The conditionally convergent part is the exactly known transform of
    1/(1+s); what is integrated numerically decays absolutely like y^-2.
    """
    if t <= 0.0:
        raise ValueError("the velocity contour integral requires t > 0")
    sym = ResolventSymbols(params, mu)
    scale = max(mu ** (1.0 / (2.0 - params.beta)), mu ** (1.0 / (2.0 - params.delta)))
    y0 = 0.5 * min(1.0, scale) if mu > 0 else 0.5
    a_start = max(10.0, 4.0 * scale)
    value, err = _contour_integral(
        sym.t_shifted_derivs, y0, 2.0 - params.beta, t, math.pi * abs_tol, a_start
    )
    return 2.0 * value.real + 2.0 * math.pi * math.exp(-t), 2.0 * err


def stress_contour_integral(t: float, mu: float, params: KernelParams, abs_tol: float = 1e-10):
    """lim_A int_{-A}^{A} (T_mu w)(iy) exp(iyt) dy with error estimate."""
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    sym = ResolventSymbols(params, mu)
    scale = max(mu ** (1.0 / (2.0 - params.beta)), mu ** (1.0 / (2.0 - params.delta)))
    y0 = 0.5 * min(1.0, scale) if mu > 0 else 0.5
    a_start = max(10.0, 4.0 * scale)
    value, err = _contour_integral(
        sym.tw_derivs, y0, 1.0 - params.delta, max(t, 0.0), math.pi * abs_tol, a_start
    )
    return 2.0 * value.real, 2.0 * err


def mode_value_laplace(
    t: float,
    lam: float,
    alpha0_k: float,
    b_k: float,
    params: KernelParams,
    abs_tol: float = 1e-10,
) -> float:
    """alpha_k(t) by Bromwich inversion on the x = 0 contour.

    Raises on t = 0 (the velocity term converges only conditionally there)
    and propagates an accuracy error when the tail cannot be certified.
    """
    if t <= 0.0:
        raise ValueError("the Laplace route requires t > 0; alpha(0) is the datum")
    if lam < 0.0:
        raise ValueError("the eigenvalue must be nonnegative")
    total = 0.0
    if alpha0_k != 0.0:
        i_t, _ = velocity_contour_integral(t, lam, params, abs_tol)
        total += i_t * alpha0_k
    if b_k != 0.0:
        i_tw, _ = stress_contour_integral(t, lam, params, abs_tol)
        total -= i_tw * math.sqrt(lam) * b_k
    return total / (2.0 * math.pi)


# --- branch-cut + pole-pair bulk evaluator ----------------------------------


class CutModeEvaluator:
    """Non-oscillatory inverse transforms for whole eigenvalue batches.

    For each requested symbol the inverse transform splits into the residue
    contribution of the stable pole pair and an absolutely convergent
    integral of the branch-cut jump density against exp(-zt).  The cut
    integral shares one panel layout across the batch: the z-power factors
    are computed once, only the +mu shift differs per eigenvalue.
    """

    _EXPONENTS = {
        "velocity": lambda p: 2.0 - p.beta,  # density ~ z^(1-beta): H -> mu at 0
        "stress": lambda p: 1.0 - p.delta,
        "memory_velocity": lambda p: 3.0 - p.beta,
        "memory_stress": lambda p: p.alpha,
    }

    def __init__(self, params: KernelParams, points_per_decade: int = 6):
        self.params = params
        self.ppd = points_per_decade

    def _layout(self, which: str, t_min: float, t_max: float):
        p_left = self._EXPONENTS[which](self.params)
        w_lo = min(-14.0, -13.0 - p_left * math.log10(max(t_max, 1.0)))
        w_edges = np.logspace(w_lo, 0.0, int(-4 * w_lo) + 1)
        decay = {
            "velocity": 2.0 - self.params.delta,
            "stress": min(1.0 + self.params.alpha, 3.0 - self.params.delta),
            "memory_velocity": 1.0 - self.params.delta + 1.0,
            "memory_stress": 2.0 - self.params.delta,
        }[which]
        z_hi = min(10.0 ** (14.0 / decay), 80.0 / t_min + 10.0)
        z_edges = np.logspace(0.0, math.log10(z_hi), int(self.ppd * math.log10(z_hi)) + 2)
        return p_left, w_edges, z_edges

    def _cut_density_parts(self, z: np.ndarray):
        """mu-independent pieces: numerators and the mu-free part of H."""
        p = self.params
        pi = math.pi
        h_base = z ** (2.0 - p.beta) * np.exp(1j * pi * (2.0 - p.beta)) + z ** (
            2.0 - p.delta
        ) * np.exp(1j * pi * (2.0 - p.delta))
        return h_base

    def _numerator(self, which: str, z: np.ndarray):
        p = self.params
        pi = math.pi
        if which == "velocity":
            return z ** (1.0 - p.beta) * np.exp(1j * pi * (1.0 - p.beta)) + z ** (
                1.0 - p.delta
            ) * np.exp(1j * pi * (1.0 - p.delta))
        if which == "stress":
            return z ** (-p.delta) * np.exp(-1j * pi * p.delta)
        if which == "memory_velocity":
            return np.ones_like(z, dtype=complex)
        if which == "memory_stress":
            return (
                z ** (p.alpha - 1.0)
                * np.exp(1j * pi * (p.alpha - 1.0))
                / (z**p.alpha * np.exp(1j * pi * p.alpha) + 1.0)
            )
        raise KeyError(which)

    def _residue_coeff(self, which: str, s0: complex) -> complex:
        p = self.params
        h1 = (2.0 - p.beta) * s0 ** (1.0 - p.beta) + (2.0 - p.delta) * s0 ** (
            1.0 - p.delta
        )
        if which == "velocity":
            return (s0 ** (1.0 - p.beta) + s0 ** (1.0 - p.delta)) / h1
        if which == "stress":
            return s0 ** (-p.delta) / h1
        if which == "memory_velocity":
            return 1.0 / h1
        if which == "memory_stress":
            return s0 ** (p.alpha - 1.0) / ((s0**p.alpha + 1.0) * h1)
        raise KeyError(which)

    def poles(self, mus: np.ndarray) -> np.ndarray:
        out = np.empty(mus.size, dtype=complex)
        for i, mu in enumerate(np.asarray(mus, dtype=float)):
            out[i] = ResolventSymbols(self.params, float(mu)).pole()
        return out

    def evaluate(
        self,
        which: str,
        mus: np.ndarray,
        times: np.ndarray,
        mu_chunk: int = 256,
        rel_check: float = 1e-8,
    ) -> np.ndarray:
        """Inverse-transform values, shaped (len(mus), len(times)); t > 0."""
        mus = np.asarray(mus, dtype=float)
        times = np.asarray(times, dtype=float)
        if np.any(times <= 0.0):
            raise ValueError("cut evaluation requires strictly positive times")
        if np.any(mus <= 0.0):
            raise ValueError("cut evaluation requires strictly positive eigenvalues")

        p_left, w_edges, z_edges = self._layout(which, float(times.min()), float(times.max()))
        inv_p = 1.0 / p_left
        poles = self.poles(mus)

        def assemble(order):
            from .quadrature import panel_nodes, panel_weights

            w_nodes = panel_nodes(w_edges, order)
            z_left = w_nodes**inv_p
            wt_left = panel_weights(w_edges, order) * inv_p * w_nodes ** (inv_p - 1.0)
            z_right = panel_nodes(z_edges, order)
            wt_right = panel_weights(z_edges, order)
            z_all = np.concatenate([z_left, z_right])
            wt_all = np.concatenate([wt_left, wt_right])

            num = self._numerator(which, z_all)
            h_base = self._cut_density_parts(z_all)
            exp_zt = np.exp(-np.outer(z_all, times))
            results = np.empty((mus.size, times.size))
            for start in range(0, mus.size, mu_chunk):
                mu_blk = mus[start : start + mu_chunk]
                dens = -np.imag(num[:, None] / (h_base[:, None] + mu_blk[None, :])) / math.pi
                results[start : start + mu_chunk] = (dens * wt_all[:, None]).T @ exp_zt
            return results

        cut_hi = assemble("hi")
        cut_lo = assemble("lo")

        res_coeff = np.array([self._residue_coeff(which, s0) for s0 in poles])
        pole_part = 2.0 * np.real(res_coeff[:, None] * np.exp(poles[:, None] * times[None, :]))

        out = cut_hi + pole_part
        ref_scale = np.maximum(np.max(np.abs(out), axis=1, keepdims=True), 1e-300)
        err = np.max(np.abs(cut_hi - cut_lo) / ref_scale)
        if err > rel_check:
            raise QuadratureError(
                f"cut-integral layout failed its error check ({err:.2e})", out, err
            )
        return out


def mode_values_bulk(
    problem: ModalProblem,
    times: np.ndarray,
    include_memory: bool = False,
    mu_chunk: int = 256,
):
    """alpha_k(t) (and optionally (rho*alpha_k)(t)) for every mode at once.

    Returns arrays shaped (mode_count, len(times)), evaluated by the
    pole-plus-cut representation; times must be strictly positive.
    """
    ev = CutModeEvaluator(problem.params)
    lam = problem.lambdas
    sq = np.sqrt(lam)
    a_part = ev.evaluate("velocity", lam, times, mu_chunk)
    alpha = problem.alpha0[:, None] * a_part
    if np.any(problem.b != 0.0):
        b_part = ev.evaluate("stress", lam, times, mu_chunk)
        alpha = alpha - (sq * problem.b)[:, None] * b_part
    if not include_memory:
        return alpha, None
    qa = ev.evaluate("memory_velocity", lam, times, mu_chunk)
    rho_conv = problem.alpha0[:, None] * qa
    if np.any(problem.b != 0.0):
        qb = ev.evaluate("memory_stress", lam, times, mu_chunk)
        rho_conv = rho_conv - (sq * problem.b)[:, None] * qb
    return alpha, rho_conv
