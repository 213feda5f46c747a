"""Physical and reduced parameters, and the Rabi frequencies of atom a.

Units are dimensionless with hbar = 1.  Couplings to the continuum are
energy independent (flat continuum), so the widths are
``gamma = pi |coupling|**2`` and principal-value shifts vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DegenerateCoupling

# |Im q| above this (relative) marks an asymmetry parameter as complex.
Q_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Energies, dipole moments and couplings of the two-atom model.

    ``mu_a``, ``mu_b`` and ``mu`` are the dipole moments of atom a, of the
    bound state of b and of the continuum of b; ``V`` is the configuration
    interaction, ``J`` and ``J_ab`` the energy-transfer couplings into the
    continuum and into the bound state of b; ``alpha_L`` the pump amplitude
    at frequency ``E_L``.
    """

    E_a: float = 1.0
    E_b: float = 1.0
    E_L: float = 1.0
    mu_a: complex = 0.0
    mu_b: complex = 0.0
    mu: complex = 1.0
    V: complex = 0.0
    J: complex = 0.0
    J_ab: complex = 0.0
    alpha_L: complex = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("E_a", "E_b", "E_L"):
                value = float(value)
            else:
                value = complex(value)
            if not np.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, value)

    @property
    def dE_a(self) -> float:
        return self.E_a - self.E_L

    @property
    def dE_b(self) -> float:
        return self.E_b - self.E_L

    @property
    def gamma_a(self) -> float:
        return math.pi * abs(self.J) ** 2

    @property
    def gamma_b(self) -> float:
        return math.pi * abs(self.V) ** 2

    @property
    def Gamma(self) -> float:
        return self.gamma_a + self.gamma_b

    @property
    def pump_rate(self) -> float:
        """``pi |mu alpha_L|**2``, the shift between quartic and eigenvalues."""
        return math.pi * abs(self.mu * self.alpha_L) ** 2

    def with_alpha(self, alpha_L: complex) -> SystemParams:
        return replace(self, alpha_L=alpha_L)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, complex):
                out[f.name] = [value.real, value.imag]
            else:
                out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> SystemParams:
        kwargs = {}
        names = {f.name for f in fields(cls)}
        for key, value in data.items():
            if key not in names:
                raise KeyError(f"unknown SystemParams field {key!r}")
            if isinstance(value, (list, tuple)):
                if len(value) != 2:
                    raise ValueError(f"{key}: complex values are [re, im] pairs")
                value = complex(value[0], value[1])
            kwargs[key] = value
        return cls(**kwargs)


@dataclass(frozen=True)
class ReducedParams:
    """Figure-caption parametrization: Fano parameters, widths and pump.

    ``q_a``/``q_b`` are carried as complex numbers; ``q_complex`` flags
    parameter sets where either has a non-negligible imaginary part.
    """

    q_a: complex
    q_b: complex
    gamma_a: float
    gamma_b: float
    Omega: float
    dE_a: float = 0.0
    dE_b: float = 0.0
    q_complex: bool = False
    omega_complex: bool = False

    def __post_init__(self):
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise ValueError("widths must be nonnegative")
        if self.gamma_a + self.gamma_b <= 0:
            raise ValueError("total width Gamma must be positive")

    @property
    def Gamma(self) -> float:
        return self.gamma_a + self.gamma_b

    @property
    def Q(self) -> complex:
        return (self.gamma_a * self.q_a + self.gamma_b * self.q_b) / self.Gamma


@dataclass(frozen=True)
class RabiSpec:
    xi_1: float
    xi_2: float
    delta_xi: float


def _asymmetry(dipole: complex, mu: complex, coupling: complex, name: str) -> complex:
    denom = math.pi * mu * coupling.conjugate()
    if denom == 0:
        if dipole == 0:
            return 0j
        raise DegenerateCoupling(f"{name} undefined: zero coupling with nonzero dipole")
    return dipole / denom


def derive_reduced(p: SystemParams) -> ReducedParams:
    """Map physical couplings onto ``(q_a, q_b, gamma_a, gamma_b, Omega)``."""
    if p.mu == 0:
        raise DegenerateCoupling("continuum dipole mu must be nonzero")
    q_a = _asymmetry(p.mu_a, p.mu, p.J, "q_a")
    q_b = _asymmetry(p.mu_b, p.mu, p.V, "q_b")
    gamma_a, gamma_b = p.gamma_a, p.gamma_b
    Gamma = gamma_a + gamma_b
    if Gamma <= 0:
        raise DegenerateCoupling("total width Gamma = pi(|J|^2 + |V|^2) vanishes")
    Q = (gamma_a * q_a + gamma_b * q_b) / Gamma
    omega_c = math.sqrt(4 * math.pi * Gamma) * (Q + 1j) * p.mu * p.alpha_L
    omega_complex = abs(omega_c.imag) > 1e-10 * max(abs(omega_c), 1e-300)
    Omega = abs(omega_c) if omega_complex else omega_c.real
    q_complex = any(abs(q.imag) > Q_IMAG_TOL * max(1.0, abs(q)) for q in (q_a, q_b))
    return ReducedParams(
        q_a=q_a,
        q_b=q_b,
        gamma_a=gamma_a,
        gamma_b=gamma_b,
        Omega=Omega,
        dE_a=p.dE_a,
        dE_b=p.dE_b,
        q_complex=q_complex,
        omega_complex=omega_complex,
    )


def pump_amplitude(Omega: float, Gamma: float, Q: complex, mu: complex = 1.0) -> complex:
    """Pump amplitude ``alpha_L`` producing pump parameter ``Omega``."""
    return Omega / (math.sqrt(4 * math.pi * Gamma) * (Q + 1j) * mu)


def realize_couplings(
    r: ReducedParams, E_a: float, E_b: float, E_L: float, J_ab: complex = 0.0
) -> SystemParams:
    """Physical couplings in the gauge ``mu = 1``, ``J`` and ``V`` real positive.

    The detunings stored in ``r`` are ignored; the energies passed in win.
    """
    J = math.sqrt(r.gamma_a / math.pi)
    V = math.sqrt(r.gamma_b / math.pi)
    if J == 0 and r.q_a != 0:
        raise DegenerateCoupling("q_a != 0 needs gamma_a > 0")
    if V == 0 and r.q_b != 0:
        raise DegenerateCoupling("q_b != 0 needs gamma_b > 0")
    return SystemParams(
        E_a=E_a,
        E_b=E_b,
        E_L=E_L,
        mu=1.0,
        J=J,
        V=V,
        mu_a=complex(r.q_a) * math.pi * J,
        mu_b=complex(r.q_b) * math.pi * V,
        J_ab=J_ab,
        alpha_L=pump_amplitude(r.Omega, r.Gamma, r.Q),
    )


def figure_params(
    q_a: float,
    q_b: float,
    gamma_a: float,
    gamma_b: float,
    Omega: float,
    E_a: float = 1.0,
    E_b: float = 1.0,
    E_L: float = 1.0,
    J_ab: complex = 0.0,
) -> SystemParams:
    """Shortcut from caption-style parameters to :class:`SystemParams`."""
    r = ReducedParams(q_a, q_b, gamma_a, gamma_b, Omega, E_a - E_L, E_b - E_L)
    return realize_couplings(r, E_a, E_b, E_L, J_ab=J_ab)


def rabi(p: SystemParams) -> RabiSpec:
    """Dressed frequencies ``xi_1 < xi_2`` of the pumped two-level atom."""
    dE_a = p.dE_a
    delta_xi = math.hypot(dE_a, 2 * abs(p.mu_a * p.alpha_L))
    return RabiSpec(
        xi_1=p.E_L - (dE_a + delta_xi) / 2,
        xi_2=p.E_L - (dE_a - delta_xi) / 2,
        delta_xi=delta_xi,
    )
