"""Laplace-domain symbols of the modal resolvent.

With principal-branch fractional powers and mu >= 0, the mode with eigenvalue
mu has transfer symbols

    T_mu(s) = s^(1-b) (s^a + 1) / (s^(2-b) (s^a + 1) + mu)
            = (s^(1-b) + s^(1-d)) / H_mu(s),      H_mu(s) = s^(2-b) + s^(2-d) + mu
    w(s)    = 1 / (s^(1-a) (s^a + 1)) = 1 / (s + s^(1-a))

where a = alpha, b = beta, d = beta - alpha.  The response to initial
velocity data is carried by T_mu, the response to initial stress by T_mu w;
the memory convolution (rho * alpha) has symbols Q_mu = 1/H_mu and
s^(a-1) / ((s^a + 1) H_mu), obtained by multiplying with the transform of rho.

H_mu has exactly one zero pair off the negative real axis, at angle between
pi/(2-b) (small mu) and pi/(2-d) (large mu); always in the open left
half-plane, which is the rest-state stability of the model.  ``pole`` finds
the upper zero by Newton iteration from the asymptotic guesses; the residues
and the branch-cut jump densities below give fast non-oscillatory inverse
transforms.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .kernels import KernelParams


def _check_off_cut(s: complex):
    if s == 0 or (s.real <= 0.0 and s.imag == 0.0):
        raise ValueError("symbol is evaluated off the branch cut (-inf, 0]")


def resolvent_symbol(s: complex, mu: float, params: KernelParams) -> complex:
    """T_mu(s) with principal-branch powers; s must avoid (-inf, 0]."""
    s = complex(s)
    _check_off_cut(s)
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    b, d = params.beta, params.delta
    num = s ** (1.0 - b) + s ** (1.0 - d)
    den = s ** (2.0 - b) + s ** (2.0 - d) + mu
    return num / den


def forcing_symbol(s: complex, params: KernelParams) -> complex:
    """w(s) = 1/(s^(1-a)(s^a+1)); s must avoid (-inf, 0]."""
    s = complex(s)
    _check_off_cut(s)
    return 1.0 / (s + s ** (1.0 - params.alpha))


class ResolventSymbols:
    """Vectorized symbol family for one (alpha, beta) pair and eigenvalue mu."""

    def __init__(self, params: KernelParams, mu: float):
        if mu < 0.0:
            raise ValueError("mu must be nonnegative")
        self.params = params
        self.mu = mu

    def _nh(self, s):
        p = self.params
        num = s ** (1.0 - p.beta) + s ** (1.0 - p.delta)
        den = s ** (2.0 - p.beta) + s ** (2.0 - p.delta) + self.mu
        return num, den

    def t_symbol(self, s):
        num, den = self._nh(s)
        return num / den

    def tw_symbol(self, s):
        p = self.params
        _, den = self._nh(s)
        return s ** (-p.delta) / den

    def t_shifted(self, s):
        """G(s) = T_mu(s) - 1/(1+s): same transform minus an exactly invertible
        reference, decaying like s^-2 on the imaginary axis."""
        return self.t_symbol(s) - 1.0 / (1.0 + s)

    def _derivative_pieces(self, s):
        p = self.params
        b, d = p.beta, p.delta
        N = s ** (1.0 - b) + s ** (1.0 - d)
        N1 = (1.0 - b) * s ** (-b) + (1.0 - d) * s ** (-d)
        N2 = -(1.0 - b) * b * s ** (-b - 1.0) - (1.0 - d) * d * s ** (-d - 1.0)
        H = s ** (2.0 - b) + s ** (2.0 - d) + self.mu
        H1 = (2.0 - b) * s ** (1.0 - b) + (2.0 - d) * s ** (1.0 - d)
        H2 = (2.0 - b) * (1.0 - b) * s ** (-b) + (2.0 - d) * (1.0 - d) * s ** (-d)
        return N, N1, N2, H, H1, H2

    @staticmethod
    def _quotient_derivs(u, u1, u2, H, H1, H2):
        val = u / H
        d1 = (u1 * H - u * H1) / (H * H)
        d2 = u2 / H - 2.0 * u1 * H1 / (H * H) - u * H2 / (H * H) + 2.0 * u * H1 * H1 / (H**3)
        return val, d1, d2

    def t_shifted_derivs(self, s):
        """(G, G', G'') for the shifted velocity symbol."""
        N, N1, N2, H, H1, H2 = self._derivative_pieces(s)
        val, d1, d2 = self._quotient_derivs(N, N1, N2, H, H1, H2)
        ref = 1.0 / (1.0 + s)
        return val - ref, d1 + ref**2, d2 - 2.0 * ref**3

    def tw_derivs(self, s):
        """(Tw, (Tw)', (Tw)'') for the stress symbol."""
        p = self.params
        c = -p.delta
        u = s**c
        u1 = c * s ** (c - 1.0)
        u2 = c * (c - 1.0) * s ** (c - 2.0)
        _, _, _, H, H1, H2 = self._derivative_pieces(s)
        return self._quotient_derivs(u, u1, u2, H, H1, H2)

    # --- pole pair and residues ---------------------------------------

    def pole(self) -> complex:
        """Upper-half-plane zero of H_mu, by Newton from asymptotic guesses."""
        p = self.params
        mu = self.mu
        if mu == 0.0:
            raise ValueError("mu = 0 has no resolvent pole (T_0 = 1/s)")
        if mu >= 1.0:
            r0 = mu ** (1.0 / (2.0 - p.delta))
            th0 = math.pi / (2.0 - p.delta)
        else:
            r0 = mu ** (1.0 / (2.0 - p.beta))
            th0 = math.pi / (2.0 - p.beta)
        s = r0 * cmath.exp(1j * th0)
        scale = max(mu, 1.0)
        for _ in range(80):
            H = s ** (2.0 - p.beta) + s ** (2.0 - p.delta) + mu
            if abs(H) <= 1e-13 * scale:
                break
            H1 = (2.0 - p.beta) * s ** (1.0 - p.beta) + (2.0 - p.delta) * s ** (1.0 - p.delta)
            step = H / H1
            # keep the iterate in the upper half-plane, off the cut
            s_new = s - step
            while s_new.imag <= 0.0:
                step *= 0.5
                s_new = s - step
            s = s_new
        else:
            raise RuntimeError(f"pole search did not converge for mu={mu}")
        if s.real >= 0.0:
            raise RuntimeError(f"found pole with nonnegative real part at mu={mu}")
        return s

    def h_prime(self, s):
        p = self.params
        return (2.0 - p.beta) * s ** (1.0 - p.beta) + (2.0 - p.delta) * s ** (1.0 - p.delta)

    # --- branch-cut jump densities ------------------------------------

    def _cut_pieces(self, z: np.ndarray):
        """N and H evaluated just above the cut, at s = z e^(i pi)."""
        p = self.params
        b, d = p.beta, p.delta
        e = lambda c: np.exp(1j * math.pi * c)
        N = z ** (1.0 - b) * e(1.0 - b) + z ** (1.0 - d) * e(1.0 - d)
        H = z ** (2.0 - b) * e(2.0 - b) + z ** (2.0 - d) * e(2.0 - d) + self.mu
        return N, H

    def cut_t(self, z: np.ndarray) -> np.ndarray:
        """-(1/pi) Im T_mu(z e^(i pi)): density of the algebraic part of the
        velocity response."""
        N, H = self._cut_pieces(z)
        return -np.imag(N / H) / math.pi

    def cut_tw(self, z: np.ndarray) -> np.ndarray:
        p = self.params
        _, H = self._cut_pieces(z)
        val = z ** (-p.delta) * np.exp(-1j * math.pi * p.delta) / H
        return -np.imag(val) / math.pi

    def cut_q(self, z: np.ndarray) -> np.ndarray:
        """Density for Q_mu = 1/H (memory convolution of the velocity part)."""
        _, H = self._cut_pieces(z)
        return -np.imag(1.0 / H) / math.pi

    def cut_qw(self, z: np.ndarray) -> np.ndarray:
        """Density for s^(a-1)/((s^a+1) H) (memory convolution, stress part)."""
        p = self.params
        a = p.alpha
        _, H = self._cut_pieces(z)
        val = (
            z ** (a - 1.0)
            * np.exp(1j * math.pi * (a - 1.0))
            / ((z**a * np.exp(1j * math.pi * a) + 1.0) * H)
        )
        return -np.imag(val) / math.pi
