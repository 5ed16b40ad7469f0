"""Bound eigenstates of the Morse and harmonic oscillators.

Morse eigenfunctions use the standard bound-state construction in the
variable z = 2*lambda*exp(-a(x-x0)), with a generalized Laguerre
polynomial and a log-gamma normalization; everything is cross-checked
against an independent finite-difference diagonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eig_banded, eigh_tridiagonal
from scipy.special import gammaln

from .errors import DomainError, UnboundStateError
from .potentials import HarmonicPotential, MorsePotential, Potential

__all__ = [
    "Eigenstate",
    "MorseSpectrumParams",
    "morse_energy",
    "morse_state",
    "harmonic_state",
    "fd_diagonalize",
    "FDResult",
]


@dataclass(frozen=True)
class Eigenstate:
    """A normalized real bound state with its exact spatial derivative."""

    n: int
    energy: float
    psi: Callable[[np.ndarray], np.ndarray]
    dpsi: Callable[[np.ndarray], np.ndarray]
    potential: Potential
    mass: float
    hbar: float


@dataclass(frozen=True)
class MorseSpectrumParams:
    """Dimensionless depth lambda = sqrt(2 M D)/(a hbar) and derived bound count."""

    potential: MorsePotential
    mass: float = 1.0
    hbar: float = 1.0

    @property
    def lam(self) -> float:
        return math.sqrt(2.0 * self.mass * self.potential.D) / (self.potential.a * self.hbar)

    @property
    def omega(self) -> float:
        return self.potential.a * math.sqrt(2.0 * self.potential.D / self.mass)

    @property
    def n_max(self) -> int:
        return math.ceil(self.lam - 0.5) - 1


def morse_energy(params: MorseSpectrumParams, n: int) -> float:
    """Closed-form Morse energy E_n = hw(n+1/2) - (hw)^2 (n+1/2)^2 / (4D)."""
    if n < 0:
        raise DomainError("quantum number must be >= 0")
    if n > params.n_max:
        raise UnboundStateError(
            f"n={n} is unbound: only n <= {params.n_max} bound states (lambda={params.lam:g})"
        )
    hw = params.hbar * params.omega
    half = n + 0.5
    return hw * half - hw**2 * half**2 / (4.0 * params.potential.D)


def _genlaguerre(n: int, alpha: float, z: np.ndarray) -> np.ndarray:
    """L_n^{(alpha)}(z) by upward recurrence in the degree."""
    L_prev = np.ones_like(z)
    if n == 0:
        return L_prev
    L = 1.0 + alpha - z
    for k in range(1, n):
        L_prev, L = L, ((2 * k + 1 + alpha - z) * L - (k + alpha) * L_prev) / (k + 1)
    return L


def morse_state(params: MorseSpectrumParams, n: int) -> Eigenstate:
    """Normalized Morse bound state psi_n with analytic derivative."""
    energy = morse_energy(params, n)  # validates n
    pot = params.potential
    lam = params.lam
    a = pot.a
    alpha = 2.0 * lam - 2.0 * n - 1.0
    s = lam - n - 0.5  # exponent of z
    log_norm = 0.5 * (
        math.log(a) + math.log(alpha) + gammaln(n + 1) - gammaln(2.0 * lam - n)
    )

    def _z(x):
        return 2.0 * lam * np.exp(-a * (np.asarray(x, dtype=float) - pot.x0))

    def psi(x):
        z = _z(x)
        with np.errstate(divide="ignore"):
            logpre = log_norm + s * np.log(z) - 0.5 * z
        pre = np.where(z > 0, np.exp(logpre), 0.0)
        return pre * _genlaguerre(n, alpha, z)

    def dpsi(x):
        z = _z(x)
        with np.errstate(divide="ignore"):
            logpre = log_norm + s * np.log(z) - 0.5 * z
        pre = np.where(z > 0, np.exp(logpre), 0.0)
        L = _genlaguerre(n, alpha, z)
        dL = -_genlaguerre(n - 1, alpha + 1.0, z) if n >= 1 else np.zeros_like(z)
        # d/dx = -a z d/dz applied to pre(z) * L(z)
        return -a * pre * ((s - 0.5 * z) * L + z * dL)

    return Eigenstate(n=n, energy=energy, psi=psi, dpsi=dpsi,
                      potential=pot, mass=params.mass, hbar=params.hbar)


def _hermite_pair(n: int, xi: np.ndarray):
    """Physicists' Hermite H_n and H_{n-1} by recurrence."""
    H_prev = np.ones_like(xi)
    if n == 0:
        return H_prev, np.zeros_like(xi)
    H = 2.0 * xi
    for k in range(1, n):
        H_prev, H = H, 2.0 * xi * H - 2.0 * k * H_prev
    return H, H_prev


def harmonic_state(M: float, omega: float, n: int, hbar: float = 1.0) -> Eigenstate:
    """Hermite-function eigenstate of V = (1/2) M omega^2 x^2."""
    if n < 0:
        raise DomainError("quantum number must be >= 0")
    if M <= 0 or omega <= 0 or hbar <= 0:
        raise DomainError("M, omega and hbar must be positive")
    pot = HarmonicPotential(M=M, omega=omega)
    beta = math.sqrt(M * omega / hbar)
    log_norm = 0.25 * math.log(M * omega / (math.pi * hbar)) - 0.5 * (
        n * math.log(2.0) + gammaln(n + 1)
    )
    norm = math.exp(log_norm)

    def psi(x):
        xi = beta * np.asarray(x, dtype=float)
        H, _ = _hermite_pair(n, xi)
        return norm * H * np.exp(-0.5 * xi**2)

    def dpsi(x):
        xi = beta * np.asarray(x, dtype=float)
        H, H_minus = _hermite_pair(n, xi)
        return norm * beta * (2.0 * n * H_minus - xi * H) * np.exp(-0.5 * xi**2)

    return Eigenstate(n=n, energy=hbar * omega * (n + 0.5), psi=psi, dpsi=dpsi,
                      potential=pot, mass=M, hbar=hbar)


@dataclass(frozen=True)
class FDResult:
    """Eigenpairs of the tridiagonal finite-difference Hamiltonian."""

    x: np.ndarray
    energies: np.ndarray       # sorted ascending
    states: np.ndarray         # states[:, i] normalized w.r.t. trapezoid weights
    accuracy_warning: bool     # grid may not contain the state support


def fd_diagonalize(pot: Potential, M: float, hbar: float,
                   x_min: float, x_max: float, n_points: int,
                   n_states: int = 8, stencil: int = 5) -> FDResult:
    """Independent oracle: diagonalize -(hbar^2/2M) d^2/dx^2 + V on a uniform grid.

    stencil=5 uses the 4th-order symmetric 5-point Laplacian (banded solve);
    stencil=3 is the classic tridiagonal scheme, O(dx^2).
    """
    if n_points < 512:
        raise DomainError("fd_diagonalize requires at least 512 grid points")
    if stencil not in (3, 5):
        raise DomainError("stencil must be 3 or 5")
    x = np.linspace(x_min, x_max, n_points)
    dx = x[1] - x[0]
    t = hbar**2 / (2.0 * M * dx**2)
    n_states = min(n_states, n_points)
    if stencil == 3:
        diag = 2.0 * t + pot(x)
        off = np.full(n_points - 1, -t)
        energies, vecs = eigh_tridiagonal(diag, off, select="i",
                                          select_range=(0, n_states - 1))
    else:
        bands = np.zeros((3, n_points))
        bands[0] = 30.0 * t / 12.0 + pot(x)
        bands[1] = -16.0 * t / 12.0
        bands[2] = t / 12.0
        energies, vecs = eig_banded(bands, lower=True, select="i",
                                    select_range=(0, n_states - 1))
    w = np.full(n_points, dx)
    w[0] = w[-1] = 0.5 * dx
    vecs = vecs / np.sqrt(np.sum(w[:, None] * vecs**2, axis=0))
    edge = max(np.max(np.abs(vecs[0, :])), np.max(np.abs(vecs[-1, :])))
    warn = bool(edge > 1e-6 * np.max(np.abs(vecs)))
    return FDResult(x=x, energies=energies, states=vecs, accuracy_warning=warn)
