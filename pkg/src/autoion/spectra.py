"""Photoelectron spectra from the analytic (Laplace-transform) solution.

The continuum amplitude splits into two branches oscillating at the dressed
frequencies ``xi_1``, ``xi_2`` of atom a.  For long times each branch is a
sum of four Lorentzian amplitudes with poles ``Lambda_j + xi_k``; the
conditional spectra then oscillate at the Rabi frequency while their sum
stays constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import branch_weights, build, pole_set, projections
from .numerics import EigenSystem, eigen_system
from .params import RabiSpec, SystemParams, rabi

LONG_TIME_FACTOR = 10.0
DEFAULT_HALF_WIDTH = 5.0
DEFAULT_POINTS = 2001
DARK_TOL = 1e-6


@dataclass(frozen=True)
class EnergyGrid:
    E_min: float
    E_max: float
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("grid needs at least two points")
        if not self.E_max > self.E_min:
            raise ValueError("grid must be strictly increasing")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.E_min, self.E_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.E_max - self.E_min) / (self.n_points - 1)

    @classmethod
    def default(cls, p: SystemParams, half_width: float = DEFAULT_HALF_WIDTH, n_points: int = DEFAULT_POINTS):
        """``E_L +- 5 Gamma`` on 2001 points."""
        G = p.Gamma if p.Gamma > 0 else 1.0
        return cls(p.E_L - half_width * G, p.E_L + half_width * G, n_points)


@dataclass(frozen=True)
class Solution:
    """Everything needed to evaluate amplitudes for one parameter set."""

    params: SystemParams
    eig: EigenSystem
    rabi: RabiSpec
    weights: np.ndarray  # [branch l, channel k, eigen j]
    proj: tuple
    Bh: np.ndarray
    c0: np.ndarray

    @property
    def xi(self) -> np.ndarray:
        return np.array([self.rabi.xi_1, self.rabi.xi_2])

    @property
    def poles(self) -> np.ndarray:
        """``poles[l, j] = Lambda_j + xi_l``."""
        return self.xi[:, None] + self.eig.lambdas[None, :]

    @property
    def t_min(self) -> float:
        """Onset of the long-time regime, ``10 / min_j |Im Lambda_j|``.

        Eigenvalues whose residues vanish to rounding (states dark to the
        continuum and the pump) never show up in the spectra and are skipped.
        """
        w = np.max(np.abs(self.weights), axis=(0, 1))
        live = w > DARK_TOL * w.max() if w.max() > 0 else np.ones(w.size, dtype=bool)
        g = np.min(np.abs(self.eig.lambdas.imag[live]))
        return math.inf if g == 0 else LONG_TIME_FACTOR / g

    @property
    def t_trapped(self) -> float:
        """``10 / min_j |Im Lambda_j|`` over all eigenvalues, weak ones included.

        Differs from :attr:`t_min` when a nearly dark state traps a small
        amount of population; its transient stays at the ``DARK_TOL`` level.
        """
        g = np.min(np.abs(self.eig.lambdas.imag))
        return math.inf if g == 0 else LONG_TIME_FACTOR / g


def solve(p: SystemParams, c0=None) -> Solution:
    proj = projections(p)  # fails first on a vanishing Rabi splitting
    mats = build(p, c0=c0)
    es = eigen_system(mats.M)
    return Solution(
        params=p,
        eig=es,
        rabi=rabi(p),
        weights=branch_weights(p, es, c0=c0),
        proj=(proj.K1, proj.K2),
        Bh=mats.B.conj().T,
        c0=mats.c0,
    )


def _as_solution(p) -> Solution:
    return p if isinstance(p, Solution) else solve(p)


def branch_amplitudes(p, E, t=None) -> np.ndarray:
    """Branch amplitudes ``d^{xi_l}_k(E, t)``, shape ``(2, 2, len(E))``.

    With ``t=None`` the time-independent long-time factor is returned (the
    phase ``exp[i(xi_l - E)t]`` stripped off).
    """
    sol = _as_solution(p)
    E = np.atleast_1d(np.asarray(E, dtype=float))
    lam = sol.eig.lambdas
    out = np.empty((2, 2, E.size), dtype=complex)
    for l, xi in enumerate(sol.xi):
        denom = E[:, None] - lam[None, :] - xi  # (nE, 4)
        if t is None:
            u = 1j / denom
        else:
            u = 1j * (np.exp(1j * (xi - E[:, None]) * t) - np.exp(-1j * lam[None, :] * t)) / denom
        # d = i K B^dagger P U P^-1 c0 = i * sum_j A_j u_j
        out[l] = 1j * (sol.weights[l] @ u.T)
    return out


def amplitude(p, E, t: float):
    """Finite-time continuum amplitudes ``(d_0, d_1)`` at energies ``E``."""
    br = branch_amplitudes(p, E, t)
    d = br.sum(axis=0)
    return d[0], d[1]


def long_time_amplitude(p, E, t: float):
    """Long-time form of ``(d_0, d_1)``: transients dropped."""
    sol = _as_solution(p)
    red = branch_amplitudes(sol, E)
    E = np.atleast_1d(np.asarray(E, dtype=float))
    phase = np.exp(1j * (sol.xi[:, None] - E[None, :]) * t)  # (2, nE)
    d = (red * phase[:, None, :]).sum(axis=0)
    return d[0], d[1]


@dataclass(frozen=True)
class ReducedAmplitudes:
    """``a[l, k]`` with ``d^{xi_l}_k = a[l, k] exp[i(xi_l - E) t]`` for long times."""

    E: np.ndarray
    a: np.ndarray
    t_min: float


def reduced_amplitudes(p, grid) -> ReducedAmplitudes:
    sol = _as_solution(p)
    E = grid.values if isinstance(grid, EnergyGrid) else np.asarray(grid, dtype=float)
    return ReducedAmplitudes(E=E, a=branch_amplitudes(sol, E), t_min=sol.t_min)


@dataclass(frozen=True)
class SpectrumDecomposition:
    """Steady and oscillating parts of the long-time conditional spectra.

    ``I_0(E, t) = I_st_0 + I_osc cos(delta_xi t + phi)`` and
    ``I_1(E, t) = I_st_1 - I_osc cos(delta_xi t + phi)``.  Arrays are divided
    by ``norm_const`` (trapezoid integral of the raw ``I_lt``) unless that
    vanishes.
    """

    E: np.ndarray
    I_st_0: np.ndarray
    I_st_1: np.ndarray
    I_osc: np.ndarray
    phi: np.ndarray
    norm_const: float
    delta_xi: float
    t_min: float
    phi_1: np.ndarray = None

    @property
    def I_lt(self) -> np.ndarray:
        return self.I_st_0 + self.I_st_1

    def conditional(self, t: float):
        """Normalized ``(I_0^lt, I_1^lt)`` at time ``t``."""
        c = self.I_osc * np.cos(self.delta_xi * t + self.phi)
        return self.I_st_0 + c, self.I_st_1 - c


def decompose(p, grid, normalize: bool = True) -> SpectrumDecomposition:
    sol = _as_solution(p)
    red = reduced_amplitudes(sol, grid)
    a = red.a
    I_st_0 = np.abs(a[0, 0]) ** 2 + np.abs(a[1, 0]) ** 2
    I_st_1 = np.abs(a[0, 1]) ** 2 + np.abs(a[1, 1]) ** 2
    I_osc = 2 * np.abs(a[0, 0]) * np.abs(a[1, 0])
    # |a1 e^{i xi1 t} + a2 e^{i xi2 t}|^2 with xi2 - xi1 = delta_xi
    phi = np.angle(a[1, 0] * np.conj(a[0, 0]))
    phi_1 = np.angle(a[1, 1] * np.conj(a[0, 1]))
    I_lt = I_st_0 + I_st_1
    norm = float(np.trapezoid(I_lt, red.E)) if red.E.size > 1 else 0.0
    scale = norm if (normalize and norm > 0) else 1.0
    return SpectrumDecomposition(
        E=red.E,
        I_st_0=I_st_0 / scale,
        I_st_1=I_st_1 / scale,
        I_osc=I_osc / scale,
        phi=phi,
        norm_const=norm,
        delta_xi=sol.rabi.delta_xi,
        t_min=sol.t_min,
        phi_1=phi_1,
    )


def total_spectrum(p, E, t=None) -> np.ndarray:
    """``|d_0|^2 + |d_1|^2``; the long-time spectrum when ``t`` is None."""
    if t is None:
        a = branch_amplitudes(p, E)
        return np.sum(np.abs(a) ** 2, axis=(0, 1))
    d0, d1 = amplitude(p, E, t)
    return np.abs(d0) ** 2 + np.abs(d1) ** 2


def local_maxima(y: np.ndarray, rel_height: float = 1e-3) -> np.ndarray:
    """Indices of strict interior local maxima above ``rel_height * max``."""
    y = np.asarray(y)
    idx = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    return idx[y[idx] > rel_height * y.max()]
