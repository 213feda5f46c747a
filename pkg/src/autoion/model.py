"""Matrices of the equations of motion and the pole structure of the spectra.

Discrete amplitudes are ordered ``(c00, c10, c01, c11)`` (first index atom a,
second atom b); continuum amplitudes ``(d0, d1)`` carry atom a in its ground
or excited state.  Everything is written in the frame rotating with the pump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import DegenerateRabi
from .numerics import EigenSystem, eigen_system
from .params import RabiSpec, SystemParams, rabi

RABI_TOL = 1e-10
GROUND = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)


@dataclass(frozen=True)
class ModelMatrices:
    A: np.ndarray
    B: np.ndarray
    M: np.ndarray
    K0: np.ndarray
    c0: np.ndarray

    def K_of_E(self, E: float) -> np.ndarray:
        """Continuum block ``K(E) = (E - E_L) + K0``."""
        return self.K0 + E * np.eye(2)


@dataclass(frozen=True)
class ProjectionMatrices:
    K1: np.ndarray
    K2: np.ndarray


@dataclass(frozen=True)
class PoleSet:
    """The eight complex frequencies ``Lambda_j + xi_k``.

    ``poles[j, k]`` belongs to eigenvalue ``j`` and dressed frequency ``k``.
    """

    poles: np.ndarray
    lambdas: np.ndarray
    rabi: RabiSpec

    @property
    def flat(self) -> np.ndarray:
        return self.poles.ravel()

    @property
    def pairs(self):
        return [tuple(self.poles[j]) for j in range(self.poles.shape[0])]


def build(p: SystemParams, c0=None) -> ModelMatrices:
    """Assemble ``A``, ``B``, ``M = A - i pi B B^dagger`` and the ``K`` block.

    ``c0`` overrides the initial discrete amplitudes (experimental; the
    analysis assumes both atoms start in their ground states).
    """
    ma = p.mu_a * p.alpha_L
    mb = p.mu_b * p.alpha_L
    m = p.mu * p.alpha_L
    cj = np.conj
    A = np.array(
        [
            [0, cj(ma), cj(mb), 0],
            [ma, p.dE_a, cj(p.J_ab), cj(mb)],
            [mb, p.J_ab, p.dE_b, cj(ma)],
            [0, mb, ma, p.dE_a + p.dE_b],
        ],
        dtype=complex,
    )
    B = np.array(
        [
            [cj(m), 0],
            [cj(p.J), cj(m)],
            [cj(p.V), 0],
            [0, cj(p.V)],
        ],
        dtype=complex,
    )
    M = A - 1j * math.pi * (B @ B.conj().T)
    K0 = np.array([[-p.E_L, cj(ma)], [ma, -p.E_L + p.dE_a]], dtype=complex)
    c0 = GROUND.copy() if c0 is None else np.asarray(c0, dtype=complex)
    return ModelMatrices(A=A, B=B, M=M, K0=K0, c0=c0)


def _check_rabi(spec: RabiSpec, tol: float):
    if spec.delta_xi <= tol:
        raise DegenerateRabi(
            f"Rabi splitting {spec.delta_xi:.3g} below {tol:g}: atom a resonant with zero pump; "
            "perturb Omega by at least 1e-8"
        )


def projections(p: SystemParams, tol: float = RABI_TOL) -> ProjectionMatrices:
    """Branch matrices ``K_k`` splitting the continuum amplitudes by ``xi_k``.

    ``K_k`` is minus the spectral projector of ``K(E)`` onto its eigenvalue
    ``E - xi_k``, so ``K1 + K2 = -1`` and ``K1 K2 = 0``.
    """
    spec = rabi(p)
    _check_rabi(spec, tol)
    ma = p.mu_a * p.alpha_L
    out = []
    dx = spec.delta_xi
    # E_a - 2 E_L + xi_k and xi_k - E_L, without cancellation at small dx
    for k, s in ((1, 1.0), (2, -1.0)):
        mat = np.array(
            [[(p.dE_a - s * dx) / 2, -np.conj(ma)], [-ma, -(p.dE_a + s * dx) / 2]],
            dtype=complex,
        )
        out.append(s / dx * mat)
    return ProjectionMatrices(*out)


def printed_projections(p: SystemParams, tol: float = RABI_TOL) -> ProjectionMatrices:
    """Branch matrices with ``E_a`` and ``E_L`` on the diagonal, as sometimes
    quoted for the frame with ``E_L = 0``.

    Only agrees with :func:`projections` (up to an overall sign) when
    ``E_L = 0``; kept for comparison.
    """
    spec = rabi(p)
    _check_rabi(spec, tol)
    ma = p.mu_a * p.alpha_L
    out = []
    for k, xi in ((1, spec.xi_1), (2, spec.xi_2)):
        mat = np.array([[p.E_a + xi, -np.conj(ma)], [-ma, p.E_L + xi]], dtype=complex)
        out.append((-1) ** k / spec.delta_xi * mat)
    return ProjectionMatrices(*out)


def effective_eigensystem(p: SystemParams) -> EigenSystem:
    return eigen_system(build(p).M)


def pole_set(p: SystemParams, es: EigenSystem | None = None) -> PoleSet:
    spec = rabi(p)
    if es is None:
        es = effective_eigensystem(p)
    xi = np.array([spec.xi_1, spec.xi_2])
    return PoleSet(poles=es.lambdas[:, None] + xi[None, :], lambdas=es.lambdas, rabi=spec)


def branch_weights(p: SystemParams, es: EigenSystem | None = None, c0=None) -> np.ndarray:
    """Residue coefficients ``A[l, k, j] = [K_l B^dagger P]_kj [P^-1 c0]_j``.

    ``l`` indexes the dressed frequency, ``k`` the channel and ``j`` the
    eigenvalue.
    """
    mats = build(p, c0=c0)
    if es is None:
        es = eigen_system(mats.M)
    proj = projections(p)
    Bh = mats.B.conj().T
    w = es.P_inv @ mats.c0
    out = np.empty((2, 2, 4), dtype=complex)
    for l, K in enumerate((proj.K1, proj.K2)):
        out[l] = (K @ Bh @ es.P) * w[None, :]
    return out

