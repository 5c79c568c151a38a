"""Velocity and stress fields in the Stokes eigenbasis, with graded norms.

Two basis flavors cover the two uses.  A synthetic spectrum (lam_k = c k^(2/3),
the Weyl scaling of a three-dimensional Stokes operator) is enough for every
estimate that only touches eigenvalues.  A periodic-box basis provides actual
divergence-free eigenfunctions: trigonometric modes e cos(m.x), e sin(m.x)
with polarization e orthogonal to the wavevector m, eigenvalue |m|^2, sampled
on a lattice fine enough that all inner products of basis modes (and of their
gradients) are lattice-exact.

The graded norms are coefficient sums: with eps_k = grad(w_k)/sqrt(lam_k),

    |u|_{H_theta}^2  = sum lam^theta |<u|w_k>|^2
    |S|_{D_gamma}^2  = sum lam^gamma |<S|eps_k>|^2 + |Pi(S)|^2
    |S|_{Delta_th}^2 = sum lam^th (|<S|eps_k>|^2 + |<S|eps_k^T>|^2) + |P(S)|^2

where Pi projects onto the complement of span(eps_k) and P onto the
complement of span(eps_k, eps_k^T).  Stress fields are stored in the
decomposed form the dynamics produces: symmetric-pair coefficients c_k along
grad(w_k) + grad(w_k)^T plus the relaxing initial stress W0(t) S0, with S0
itself kept as (eps coefficients, eps^T coefficients, orthogonal remainder
norm), so every norm is an exact finite combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelParams
from .modal import ModalProblem, ModalTrajectory, trajectory_values


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalue list, optionally with explicit periodic-box eigenfunctions."""

    kind: str
    lambdas: np.ndarray
    w: np.ndarray | None = None  # (modes, 3, points) on the lattice
    grad_w: np.ndarray | None = None  # (modes, 3, 3, points)
    volume: float | None = None
    lattice_shape: tuple | None = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.size == 0 or np.any(lam <= 0.0) or np.any(np.diff(lam) < 0.0):
            raise ValueError("eigenvalues must be positive and nondecreasing")
        object.__setattr__(self, "lambdas", lam)

    @property
    def mode_count(self) -> int:
        return self.lambdas.size

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Lattice inner product int f.g dx (componentwise contraction),
        exact for band-limited fields; works for vector and tensor fields."""
        if self.volume is None:
            raise ValueError("inner products need a periodic-box basis")
        prod = f * g
        comp_axes = tuple(range(prod.ndim - 1))
        return self.volume * float(np.mean(np.sum(prod, axis=comp_axes)))

    def eps(self, k: int) -> np.ndarray:
        return self.grad_w[k] / math.sqrt(self.lambdas[k])


def build_synthetic_basis(count: int, c: float = 1.0) -> SpectralBasis:
    """Weyl-scaled synthetic spectrum lam_k = c k^(2/3)."""
    if count < 1 or c <= 0.0:
        raise ValueError("need count >= 1 and c > 0")
    k = np.arange(1, count + 1, dtype=float)
    return SpectralBasis(kind="synthetic", lambdas=c * k ** (2.0 / 3.0))


def _polarization_pair(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal pair perpendicular to the wavevector."""
    axis = np.zeros(3)
    axis[np.argmin(np.abs(m))] = 1.0
    e1 = np.cross(axis, m).astype(float)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(m, e1).astype(float)
    e2 /= np.linalg.norm(e2)
    return e1, e2


def build_periodic_basis(max_wavevector: int, count: int | None = None) -> SpectralBasis:
    """Divergence-free trigonometric Stokes modes on the 2pi-periodic box.

    Modes are sorted by eigenvalue |m|^2 (ties broken lexicographically) and
    sampled on a (4 M + 1)^3 lattice, on which products of any two basis
    modes integrate exactly; discrete orthonormality therefore holds to
    rounding.
    """
    if max_wavevector < 1:
        raise ValueError("max_wavevector must be >= 1")
    M = max_wavevector
    L = 4 * M + 1
    xs = 2.0 * math.pi * np.arange(L) / L
    X = np.stack(np.meshgrid(xs, xs, xs, indexing="ij"), axis=0).reshape(3, -1)
    volume = (2.0 * math.pi) ** 3
    amp = math.sqrt(2.0 / volume)

    half_space = []
    for mx in range(-M, M + 1):
        for my in range(-M, M + 1):
            for mz in range(-M, M + 1):
                m = (mx, my, mz)
                if m == (0, 0, 0):
                    continue
                if m < tuple(-c for c in m):
                    continue  # keep one of each +-m pair
                half_space.append(m)
    half_space.sort(key=lambda m: (m[0] ** 2 + m[1] ** 2 + m[2] ** 2, m))

    modes = []
    for m in half_space:
        mv = np.asarray(m, dtype=float)
        lam = float(mv @ mv)
        phase = mv @ X
        cos_p, sin_p = np.cos(phase), np.sin(phase)
        for e in _polarization_pair(mv):
            for trig, dtrig in ((cos_p, -sin_p), (sin_p, cos_p)):
                w = amp * e[:, None] * trig[None, :]
                grad = amp * e[:, None, None] * mv[None, :, None] * dtrig[None, None, :]
                modes.append((lam, w, grad))

    if count is not None:
        if count > len(modes):
            raise ValueError(
                f"requested {count} modes but max_wavevector={M} provides {len(modes)}"
            )
        modes = modes[:count]

    lambdas = np.array([m[0] for m in modes])
    w = np.stack([m[1] for m in modes])
    grad_w = np.stack([m[2] for m in modes])
    return SpectralBasis(
        kind="periodic_box",
        lambdas=lambdas,
        w=w,
        grad_w=grad_w,
        volume=volume,
        lattice_shape=(L, L, L),
    )


@dataclass(frozen=True)
class StressDecomposition:
    """Stress tensor in the (eps_k, eps_k^T, remainder) coordinates."""

    eps_coeffs: np.ndarray
    eps_t_coeffs: np.ndarray
    remainder_norm: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.eps_coeffs, dtype=float)
        bt = np.asarray(self.eps_t_coeffs, dtype=float)
        if a.shape != bt.shape or a.ndim != 1:
            raise ValueError("coefficient lists must be equal-length vectors")
        if self.remainder_norm < 0.0:
            raise ValueError("remainder norm must be nonnegative")
        object.__setattr__(self, "eps_coeffs", a)
        object.__setattr__(self, "eps_t_coeffs", bt)

    @classmethod
    def zero(cls, count: int) -> "StressDecomposition":
        return cls(np.zeros(count), np.zeros(count), 0.0)


@dataclass(frozen=True)
class VelocityField:
    basis: SpectralBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.mode_count,):
            raise ValueError("one coefficient per basis mode required")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class StressField:
    """c_k along grad(w_k)+grad(w_k)^T plus the relaxed initial stress."""

    basis: SpectralBasis
    sym_coeffs: np.ndarray
    w0_value: float = 0.0
    s0: StressDecomposition | None = None

    def __post_init__(self):
        c = np.asarray(self.sym_coeffs, dtype=float)
        if c.shape != (self.basis.mode_count,):
            raise ValueError("one symmetric-pair coefficient per mode required")
        object.__setattr__(self, "sym_coeffs", c)

    def eps_components(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(coefficients along eps_k, along eps_k^T, remainder norm)."""
        sq = np.sqrt(self.basis.lambdas)
        a = sq * self.sym_coeffs
        bt = sq * self.sym_coeffs
        rem = 0.0
        if self.s0 is not None:
            a = a + self.w0_value * self.s0.eps_coeffs
            bt = bt + self.w0_value * self.s0.eps_t_coeffs
            rem = abs(self.w0_value) * self.s0.remainder_norm
        return a, bt, rem


def project_initial_data(
    basis: SpectralBasis,
    u0_coeffs: np.ndarray,
    s0: StressDecomposition,
    params: KernelParams,
) -> ModalProblem:
    """Modal initial data from field coefficients: b_k = sqrt(lam_k) a_k.

    Only the eps-components of the initial stress force the modes; the
    eps^T part and the orthogonal remainder relax passively under W0.
    """
    u0 = np.asarray(u0_coeffs, dtype=float)
    if u0.shape != (basis.mode_count,) or s0.eps_coeffs.shape != u0.shape:
        raise ValueError("coefficient lists must match the basis size")
    b = np.sqrt(basis.lambdas) * s0.eps_coeffs
    return ModalProblem(lambdas=basis.lambdas, alpha0=u0, b=b, params=params)


def assemble_velocity(
    basis: SpectralBasis,
    trajectories: list[ModalTrajectory] | np.ndarray,
    t: float | None = None,
) -> VelocityField:
    """Velocity coefficients at time t (or directly from a coefficient vector)."""
    if isinstance(trajectories, np.ndarray) and trajectories.ndim == 1:
        return VelocityField(basis, trajectories)
    coeffs = np.array([trajectory_values(tr, t, "alpha") for tr in trajectories])
    return VelocityField(basis, coeffs)


def assemble_stress(
    basis: SpectralBasis,
    trajectories: list[ModalTrajectory] | np.ndarray,
    t: float,
    w0_value: float,
    s0: StressDecomposition | None = None,
) -> StressField:
    """Stress field at time t: sym_coeffs c_k = (rho * alpha_k)(t), plus W0(t) S0."""
    if isinstance(trajectories, np.ndarray) and trajectories.ndim == 1:
        c = trajectories
    else:
        c = np.array([trajectory_values(tr, t, "rho_conv") for tr in trajectories])
    return StressField(basis, c, w0_value=w0_value, s0=s0)


def h_norm(u: VelocityField, theta: float) -> float:
    """Velocity norm |u|_{H_theta}."""
    return math.sqrt(float(np.sum(u.basis.lambdas**theta * u.coeffs**2)))


def d_norm(S: StressField, gamma: float) -> float:
    """Stress norm |S|_{D_gamma} (gamma >= 0)."""
    if gamma < 0.0:
        raise ValueError("D-norms are defined for nonnegative index")
    a, bt, rem = S.eps_components()
    lam = S.basis.lambdas
    return math.sqrt(float(np.sum(lam**gamma * a**2) + np.sum(bt**2) + rem**2))


def delta_norm(S: StressField, theta: float) -> float:
    """Stress norm |S|_{Delta_theta}; theta may be negative (dual index),
    in which case the same coefficient formula applies."""
    a, bt, rem = S.eps_components()
    lam = S.basis.lambdas
    return math.sqrt(float(np.sum(lam**theta * (a**2 + bt**2)) + rem**2))


def velocity_on_lattice(u: VelocityField) -> np.ndarray:
    """Physical-space samples of the velocity field (periodic box only)."""
    return np.tensordot(u.coeffs, u.basis.w, axes=(0, 0))


def sym_stress_on_lattice(S: StressField) -> np.ndarray:
    """Lattice samples of the symmetric-pair part sum c_k (grad w + grad^T w)."""
    g = np.tensordot(S.sym_coeffs, S.basis.grad_w, axes=(0, 0))
    return g + np.swapaxes(g, 0, 1)


def decompose_tensor_field(basis: SpectralBasis, tensor: np.ndarray) -> StressDecomposition:
    """Coefficients of a lattice tensor field along (eps_k, eps_k^T).

    The remainder norm is computed by Pythagoras on the lattice, which is
    exact for fields band-limited within the basis lattice.
    """
    if basis.grad_w is None:
        raise ValueError("decomposition needs a periodic-box basis")
    sq = np.sqrt(basis.lambdas)
    flat_eps = basis.grad_w / sq[:, None, None, None]
    a = basis.volume * np.mean(
        np.sum(flat_eps * tensor[None, :, :, :], axis=(1, 2)), axis=1
    )
    eps_t = np.swapaxes(flat_eps, 1, 2)
    bt = basis.volume * np.mean(
        np.sum(eps_t * tensor[None, :, :, :], axis=(1, 2)), axis=1
    )
    total = basis.volume * float(np.mean(np.sum(tensor * tensor, axis=(0, 1))))
    rem_sq = total - float(np.sum(a**2) + np.sum(bt**2))
    return StressDecomposition(a, bt, math.sqrt(max(rem_sq, 0.0)))
