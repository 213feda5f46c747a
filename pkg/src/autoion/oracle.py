"""Brute-force check of the analytic spectra.

The continuum is replaced by ``n_bins`` uniform bins; each bin couples with
strength ``coupling * sqrt(w)`` so the discrete sum approximates the energy
integral.  The resulting finite Hermitian system is integrated with an
adaptive explicit Runge-Kutta method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure
from .model import build
from .params import SystemParams
from .spectra import amplitude, solve

DEFAULT_HALF_WIDTH = 8.0
DEFAULT_BINS = 1600
RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class ContinuumDiscretization:
    E_min: float
    E_max: float
    n_bins: int = DEFAULT_BINS

    def __post_init__(self):
        if self.n_bins < 1 or not self.E_max > self.E_min:
            raise ValueError("need E_max > E_min and at least one bin")

    @property
    def weight(self) -> float:
        return (self.E_max - self.E_min) / self.n_bins

    @property
    def energies(self) -> np.ndarray:
        w = self.weight
        return self.E_min + w * (np.arange(self.n_bins) + 0.5)

    def covers(self, p: SystemParams, half_width: float = DEFAULT_HALF_WIDTH) -> bool:
        G = p.Gamma
        return self.E_min <= p.E_L - half_width * G and self.E_max >= p.E_L + half_width * G

    @classmethod
    def default(cls, p: SystemParams, n_bins: int = DEFAULT_BINS, half_width: float = DEFAULT_HALF_WIDTH):
        G = p.Gamma if p.Gamma > 0 else 1.0
        return cls(p.E_L - half_width * G, p.E_L + half_width * G, n_bins)


@dataclass(frozen=True)
class OracleRun:
    """Amplitudes at the output instants.

    ``d[i, k, n]`` is the continuum amplitude density of channel ``k`` in
    bin ``n`` at ``times[i]``, comparable to the analytic ``d_k(E_n, t)``.
    """

    times: np.ndarray
    c: np.ndarray
    d: np.ndarray
    norm_history: np.ndarray
    disc: ContinuumDiscretization

    @property
    def energies(self) -> np.ndarray:
        return self.disc.energies

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm_history - 1.0)))

    def spectrum(self, i: int) -> np.ndarray:
        return np.sum(np.abs(self.d[i]) ** 2, axis=0)


def _rhs_factory(p: SystemParams, disc: ContinuumDiscretization):
    mats = build(p)
    A, B = mats.A, mats.B
    sw = np.sqrt(disc.weight)
    Bs = B * sw
    Bsh = Bs.conj().T
    E = disc.energies
    diag0 = E - p.E_L
    diag1 = E - p.E_L + p.dE_a
    ma = p.mu_a * p.alpha_L
    n = disc.n_bins

    def rhs(_t, y):
        c = y[:4]
        x0 = y[4 : 4 + n]
        x1 = y[4 + n :]
        dc = A @ c + Bs[:, 0] * x0.sum() + Bs[:, 1] * x1.sum()
        g = Bsh @ c
        dx0 = diag0 * x0 + np.conj(ma) * x1 + g[0]
        dx1 = ma * x0 + diag1 * x1 + g[1]
        return -1j * np.concatenate([dc, dx0, dx1])

    return rhs


def integrate(
    p: SystemParams,
    disc: ContinuumDiscretization | None = None,
    t_end: float = 50.0,
    n_out: int = 51,
    times=None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> OracleRun:
    """Integrate from both atoms in their ground states up to ``t_end``."""
    if disc is None:
        disc = ContinuumDiscretization.default(p)
    if times is None:
        if t_end <= 0:
            raise ValueError("t_end must be positive")
        times = np.linspace(0.0, t_end, n_out)
    times = np.asarray(times, dtype=float)
    n = disc.n_bins
    y0 = np.zeros(4 + 2 * n, dtype=complex)
    y0[0] = 1.0
    rhs = _rhs_factory(p, disc)
    sol = solve_ivp(
        rhs,
        (0.0, float(times[-1])),
        y0,
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepFailure(sol.message)
    Y = sol.y.T
    c = Y[:, :4]
    x = Y[:, 4:].reshape(len(times), 2, n)
    norm = np.sum(np.abs(c) ** 2, axis=1) + np.sum(np.abs(x) ** 2, axis=(1, 2))
    d = x / np.sqrt(disc.weight)
    return OracleRun(times=times, c=c, d=d, norm_history=norm, disc=disc)


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb > 0 else float(np.linalg.norm(a))


def compare(run: OracleRun, p: SystemParams) -> dict:
    """Relative L2 error of the oracle spectrum against the analytic one,
    per output instant (``t = 0`` is skipped)."""
    sol = solve(p)
    E = run.energies
    rows = []
    for i, t in enumerate(run.times):
        if t == 0:
            continue
        d0, d1 = amplitude(sol, E, t)
        analytic = np.abs(d0) ** 2 + np.abs(d1) ** 2
        rows.append({"t": float(t), "rel_l2": relative_l2(run.spectrum(i), analytic)})
    return {"n_bins": run.disc.n_bins, "max_norm_drift": run.max_norm_drift, "errors": rows}


def convergence_table(p: SystemParams, times, bins=(800, 1600), half_width: float = DEFAULT_HALF_WIDTH):
    """Oracle-vs-analytic errors for successive bin counts on a fixed window."""
    out = []
    for nb in bins:
        disc = ContinuumDiscretization.default(p, n_bins=nb, half_width=half_width)
        run = integrate(p, disc, times=np.concatenate([[0.0], np.asarray(times, dtype=float)]))
        out.append(compare(run, p))
    return out
