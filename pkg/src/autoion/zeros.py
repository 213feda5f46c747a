"""Fano, Fano-like and dynamical zeros of the long-time spectra.

Each long-time branch amplitude is ``-sum_j A_j / (E - r_j)`` with poles
``r_j = Lambda_j + xi_l``; clearing denominators gives a cubic ``p_kl``.
A Fano zero is a real root shared by all four cubics.  A dynamical zero of
channel ``k`` is a real frequency where the two branches have equal modulus,
i.e. a real root of ``|p_k1 Q_2|^2 - |p_k2 Q_1|^2`` with ``Q_l`` the pole
products.  All root finding happens in the scaled variable
``x = (E - E_b) / Gamma``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import NumericalError, SingularDeterminant
from .numerics import EPS, ComplexPolynomial, roots
from .params import SystemParams, derive_reduced, pump_amplitude
from .spectra import EnergyGrid, Solution, branch_amplitudes, solve, total_spectrum

REAL_TOL = 1e-7
NEAR_REAL_TOL = 1e-4
DOUBLE_ROOT_TOL = 1e-9
ROOT_RESIDUAL_TOL = 1e-8
MERGE_REAL_TOL = 1e-7
RESOLVE_TOL = 1e-8
TAIL_LIMIT = 1e4
COMMON_ROOT_TOL = 1e-6
ZERO_RESIDUAL_TOL = 1e-6
PHASE_TOL = 1e-4
MISMATCH_TOL = 1e-8
BRANCH_GAP = 0.5
MAX_FANO = 3
MAX_DYNAMICAL = 15


@dataclass(frozen=True)
class ZeroPolynomials:
    """Residues, cubic numerators and equal-modulus polynomials.

    ``A[l, k, j]`` are the residues for dressed frequency ``l`` and channel
    ``k``; ``cubics[k][l]`` is ``p_kl`` in the energy ``E``; ``dyn[k]`` is the
    real-coefficient equal-modulus polynomial of channel ``k`` in the scaled
    variable ``x = (E - center) / scale``.
    """

    A: np.ndarray
    cubics: tuple
    dyn: tuple
    center: float
    scale: float
    poles: np.ndarray
    factors: tuple = ()

    def to_energy(self, x):
        return self.center + self.scale * np.asarray(x)


@dataclass(frozen=True)
class FanoZero:
    E_F: float
    residual: float
    kind: str  # "exact" | "common-root" | "weak-pump"


@dataclass(frozen=True)
class DynamicalZero:
    E_D: float
    channel: int
    t_D_phase: float
    t_D: float
    min_intensity: float
    branch_mismatch: float


def _cubic(A: np.ndarray, r: np.ndarray, lead=None) -> np.ndarray:
    """Ascending coefficients of ``sum_j A_j prod_{m != j} (z - r_m)``.

    ``lead`` replaces ``sum_j A_j`` when its exact value is known.
    """
    c = np.zeros(4, dtype=complex)
    for j in range(4):
        others = np.delete(r, j)
        e1 = others.sum()
        e2 = others[0] * others[1] + others[0] * others[2] + others[1] * others[2]
        e3 = others.prod()
        c += A[j] * np.array([-e3, e2, -e1, 1.0])
    if lead is not None:
        c[3] = lead
    return c


def leading_coefficients(sol: Solution) -> np.ndarray:
    """``sum_j A_j = [K_l B^dagger c0]_k`` without the eigenvectors, ``[l, k]``."""
    return np.array([K @ sol.Bh @ sol.c0 for K in sol.proj])


def _ldexp(z, e: int):
    """``z * 2**e`` without overflow in the intermediate power."""
    z = np.asarray(z, dtype=complex)
    return np.ldexp(z.real, e) + 1j * np.ldexp(z.imag, e)


def _poly_from_roots(r: np.ndarray) -> np.ndarray:
    return np.poly(r)[::-1]


def _mul(a, b):
    return np.convolve(a, b)


def _modulus_square(f: np.ndarray):
    """Coefficients of ``f(x) conj(f(x))`` on the real axis and their rounding scale."""
    sq = _mul(f, np.conj(f))
    bound = _mul(np.abs(f), np.abs(f))
    return sq, bound


def zero_polynomials(p, center: float | None = None, scale: float | None = None) -> ZeroPolynomials:
    sol = p if isinstance(p, Solution) else solve(p)
    prm = sol.params
    A = sol.weights
    poles = sol.poles  # [l, j]
    if center is None:
        center = prm.E_b
    if scale is None:
        scale = prm.Gamma if prm.Gamma > 0 else 1.0
    lead = leading_coefficients(sol)
    cubics = tuple(
        tuple(ComplexPolynomial(_cubic(A[l, k], poles[l]), trim_tol=0.0) for l in range(2)) for k in range(2)
    )
    rs = (poles - center) / scale
    dyn = []
    factors = []
    for k in range(2):
        # the condition is homogeneous in the residues; unit scale avoids underflow
        size = max(np.max(np.abs(A[:, k])), np.max(np.abs(lead[:, k])))
        e = -int(np.frexp(size)[1]) if size > 0 else 0
        f = []
        fac = []
        for l in range(2):
            num = _cubic(_ldexp(A[l, k], e), rs[l], lead=_ldexp(lead[l, k], e))
            fac.append((num, rs[1 - l]))
            f.append(_mul(num, _poly_from_roots(rs[1 - l])))
        factors.append(tuple(fac))
        s1, b1 = _modulus_square(f[0])
        s2, b2 = _modulus_square(f[1])
        g = s1 - s2
        bound = b1 + b2
        if np.max(np.abs(g.imag)) > 1e3 * EPS * max(np.max(bound), 1e-300) * g.size:
            raise NumericalError("equal-modulus polynomial is not real on the real axis")
        g = g.real
        # drop leading terms that cancel to rounding level
        n = g.size
        while n > 1 and abs(g[n - 1]) <= 64 * g.size * EPS * bound[n - 1]:
            n -= 1
        dyn.append(g[:n])
    return ZeroPolynomials(A=A, cubics=cubics, dyn=tuple(dyn), center=center, scale=scale, poles=poles, factors=tuple(factors))


def _equal_modulus(zp: ZeroPolynomials, k: int, x: float):
    """``g``, ``g'``, the scale ``|f_1|^2 + |f_2|^2`` and the rounding error
    of ``g`` at real ``x``.

    Evaluated from the factored form, which is far better conditioned than
    the expanded coefficients.  The error bound matters where both ``f_l``
    vanish (a Fano zero), since the relative scale is meaningless there.
    """
    vals, ders, errs = [], [], []
    for num, other in zp.factors[k]:
        c = np.polynomial.polynomial.polyval(x, num)
        dc = np.polynomial.polynomial.polyval(x, num[1:] * np.arange(1, num.size))
        diff = x - other
        q = np.prod(diff)
        dq = q * np.sum(1.0 / diff)
        vals.append(c * q)
        ders.append(dc * q + c * dq)
        cond = np.polynomial.polynomial.polyval(abs(x), np.abs(num)) * abs(q)
        errs.append(16 * num.size * EPS * cond)
    f1, f2 = vals
    g = abs(f1) ** 2 - abs(f2) ** 2
    dg = 2 * (ders[0] * np.conj(f1)).real - 2 * (ders[1] * np.conj(f2)).real
    err = 2 * (abs(f1) * errs[0] + abs(f2) * errs[1]) + errs[0] ** 2 + errs[1] ** 2
    return g, dg, abs(f1) ** 2 + abs(f2) ** 2, err


def _polish(zp: ZeroPolynomials, k: int, x: float, max_steps: int = 80) -> float:
    for _ in range(max_steps):
        g, dg, _, _ = _equal_modulus(zp, k, x)
        if dg == 0 or not np.isfinite(dg):
            break
        step = g / dg
        if abs(step) > 1e-2 * max(1.0, abs(x)):
            break
        x -= step
        if abs(step) <= 4 * EPS * max(1.0, abs(x)):
            break
    return float(x)


def equal_modulus_roots(zp: ZeroPolynomials, k: int) -> np.ndarray:
    """Real roots (scaled variable) of the channel-k equal-modulus polynomial.

    Candidates are polished by Newton steps on the factored form and kept
    only if the equal-modulus condition then holds to ``ROOT_RESIDUAL_TOL``
    relative to ``|f_1|^2 + |f_2|^2``.  Near-real (not strictly real) roots
    must meet the tighter ``DOUBLE_ROOT_TOL``: they are the split image of a
    double root.  Roots whose position rounding cannot pin down (far tails
    where both branches decay alike) are dropped.  Coincident roots are
    merged.
    """
    g = np.asarray(zp.dyn[k])
    if g.size < 2 or np.all(g == 0):
        return np.zeros(0)
    z = roots(ComplexPolynomial(g)).roots
    reach = TAIL_LIMIT * max(1.0, float(np.max(np.abs(zp.poles - zp.center))) / zp.scale)
    out = []
    for zi in z:
        size = max(1.0, abs(zi.real))
        if abs(zi.imag) > NEAR_REAL_TOL * size or abs(zi.real) > reach:
            continue
        x = _polish(zp, k, zi.real)
        gx, dg, sc, err = _equal_modulus(zp, k, x)
        if abs(zi.imag) > REAL_TOL * size and abs(gx) > max(DOUBLE_ROOT_TOL * sc, err):
            continue
        if abs(gx) > max(ROOT_RESIDUAL_TOL * sc, err):
            continue  # artefact of the expanded coefficients
        if dg != 0 and EPS * sc / abs(dg) > RESOLVE_TOL * max(1.0, abs(x)):
            continue  # branches equal to rounding over a wide range: position undetermined
        out.append(x)
    out.sort()
    merged = []
    for x in out:
        if merged and abs(x - merged[-1]) <= MERGE_REAL_TOL * max(1.0, abs(x)):
            continue
        merged.append(x)
    return np.array(merged)


def spectrum_max(sol: Solution, grid: EnergyGrid | None = None) -> float:
    """Maximum of ``I_lt`` on the grid and at the pole positions inside it.

    Sharp peaks narrower than the grid spacing are caught by the latter.
    """
    if grid is None:
        grid = EnergyGrid.default(sol.params)
    E = grid.values
    peaks = sol.poles.real.ravel()
    peaks = peaks[(peaks >= E[0]) & (peaks <= E[-1])]
    return float(np.max(total_spectrum(sol, np.concatenate([E, peaks]))))


def _has_pump(sol: Solution) -> bool:
    return bool(np.any(sol.weights != 0))


def fano_zeros(p, grid: EnergyGrid | None = None, tol: float = ZERO_RESIDUAL_TOL) -> list:
    """Real frequencies shared by all four cubic numerators, confirmed by the
    normalized long-time spectrum."""
    sol = p if isinstance(p, Solution) else solve(p)
    if not _has_pump(sol):
        return []
    I_max = spectrum_max(sol, grid)
    if not I_max > 0:
        return []
    zp = zero_polynomials(sol)
    prm = sol.params
    rs = (zp.poles - zp.center) / zp.scale
    lead = leading_coefficients(sol)
    e = -int(np.frexp(max(np.max(np.abs(zp.A)), np.max(np.abs(lead))))[1])
    cub_x = [[_cubic(_ldexp(zp.A[l, k], e), rs[l], lead=_ldexp(lead[l, k], e)) for l in range(2)] for k in range(2)]
    root_sets = []
    for k in range(2):
        for l in range(2):
            c = cub_x[k][l]
            if np.max(np.abs(c)) == 0:
                root_sets.append(None)  # identically zero: no constraint
                continue
            root_sets.append(roots(ComplexPolynomial(c)).expanded())
    constrained = [r for r in root_sets if r is not None]
    if not constrained:
        return []
    ref = min(constrained, key=len)
    found = []
    for z in ref:
        if abs(z.imag) > COMMON_ROOT_TOL * max(1.0, abs(z.real)):
            continue
        if all(np.min(np.abs(r - z)) <= COMMON_ROOT_TOL * max(1.0, abs(z)) for r in constrained):
            E = float(zp.to_energy(z.real))
            res = float(total_spectrum(sol, [E])[0]) / I_max if I_max > 0 else 0.0
            if res <= tol and not any(abs(E - f.E_F) <= COMMON_ROOT_TOL * zp.scale for f in found):
                found.append(FanoZero(E_F=E, residual=res, kind=_fano_kind(prm, E)))
    return found[:MAX_FANO]


def _fano_kind(p: SystemParams, E: float) -> str:
    # decoupling condition mu_b J = J_ab mu with the zero at E_b - gamma_b q_b
    if p.J != 0 and p.mu != 0 and p.V != 0:
        if abs(p.mu_b * p.J - p.J_ab * p.mu) <= 1e-10 * max(abs(p.mu_b * p.J), abs(p.J_ab * p.mu), 1e-300):
            q_b = p.mu_b / (math.pi * p.mu * np.conj(p.V))
            if abs(E - (p.E_b - p.gamma_b * q_b.real)) <= 1e-6 * max(1.0, p.Gamma):
                return "exact"
    return "common-root"


def _verify_dynamical(sol: Solution, E: float, k: int, n_samples: int = 64):
    """Minimum over one Rabi period of the channel-k long-time spectrum."""
    a = branch_amplitudes(sol, [E])[:, k, 0]
    dxi = sol.rabi.delta_xi
    phi = float(np.angle(a[1] * np.conj(a[0])))
    t_D = ((math.pi - phi) % (2 * math.pi)) / dxi
    xi = sol.xi

    def intensity(t):
        t = np.atleast_1d(t)
        d = a[0] * np.exp(1j * (xi[0] - E) * t) + a[1] * np.exp(1j * (xi[1] - E) * t)
        return np.abs(d) ** 2

    ts = np.linspace(0.0, 2 * math.pi / dxi, n_samples, endpoint=False)
    vals = intensity(np.concatenate([ts, [t_D]]))
    mism = abs(abs(a[0]) - abs(a[1]))
    return float(vals.min()), phi, t_D, mism, float(vals[-1])


def dynamical_zeros(p, channels=(0, 1), grid: EnergyGrid | None = None, tol: float = ZERO_RESIDUAL_TOL) -> list:
    """Real frequencies where a conditional spectrum touches zero once per
    Rabi period, each checked by minimizing that spectrum over one period."""
    sol = p if isinstance(p, Solution) else solve(p)
    if not _has_pump(sol):
        return []
    I_max = spectrum_max(sol, grid)
    if not I_max > 0:
        return []  # spectrum underflows: nothing to resolve
    zp = zero_polynomials(sol)
    out = []
    for k in channels:
        found = []
        for x in equal_modulus_roots(zp, k):
            E = float(zp.to_energy(x))
            vmin, phi, t_D, mism, at_tD = _verify_dynamical(sol, E, k)
            if I_max > 0 and (vmin > tol * I_max or mism > MISMATCH_TOL * math.sqrt(I_max)):
                continue
            if any(abs(E - z.E_D) <= 1e-9 * zp.scale * max(1.0, abs(x)) for z in found):
                continue
            found.append(
                DynamicalZero(
                    E_D=E,
                    channel=k,
                    t_D_phase=(sol.rabi.delta_xi * t_D + phi),
                    t_D=t_D,
                    min_intensity=vmin / I_max if I_max > 0 else 0.0,
                    branch_mismatch=mism / math.sqrt(I_max) if I_max > 0 else 0.0,
                )
            )
        out.extend(found[:MAX_DYNAMICAL])
    return out


# ---------------------------------------------------------------------------
# weak-pump limit: dressed continuum of the one-excitation manifold


def _weak_pump_terms(p: SystemParams):
    """Products ``q gamma`` and ``q t`` written without dividing by couplings."""
    mu = p.mu
    t = math.pi * np.conj(p.J_ab) * p.J * np.conj(p.V)
    qa_ga = p.mu_a * p.J / mu  # q_a gamma_a
    qb_gb = p.mu_b * p.V / mu  # q_b gamma_b
    qa_tc = p.mu_a * p.J_ab * p.V / mu  # q_a t*
    qb_t = p.mu_b * np.conj(p.J_ab) * p.J / mu  # q_b t
    return t, qa_ga, qb_gb, qa_tc, qb_t


def weak_pump_discriminant(p: SystemParams) -> complex:
    _, qa_ga, qb_gb, qa_tc, qb_t = _weak_pump_terms(p)
    dEab = p.E_a - p.E_b
    return (
        dEab**2
        + (qa_ga + qb_gb) ** 2
        - 2 * dEab * (qa_ga - qb_gb)
        + 4 * abs(p.J_ab) ** 2
        - 4 * qa_tc
        - 4 * qb_t
    )


def weak_pump_zeros(p: SystemParams, imag_tol: float = 1e-10) -> list:
    """Fano-like zeros of the weak-pump spectrum (zeros of the dressed dipole).

    Returns an empty list when the discriminant is negative or not real.
    """
    if p.mu == 0:
        return []
    _, qa_ga, qb_gb, _, _ = _weak_pump_terms(p)
    D = complex(weak_pump_discriminant(p))
    if abs(D.imag) > imag_tol * max(abs(D), 1e-300):
        return []
    centre = (p.E_a + p.E_b - qa_ga - qb_gb) / 2
    if abs(centre.imag) > imag_tol * max(1.0, abs(centre)):
        return []
    if D.real < 0:
        return []
    s = math.sqrt(D.real) / 2
    Es = sorted({centre.real + s, centre.real - s})
    return [FanoZero(E_F=float(E), residual=abs(weak_pump_quadratic(p, E)), kind="weak-pump") for E in Es]


def weak_pump_quadratic(p: SystemParams, E: float) -> complex:
    """Numerator of the dressed dipole; vanishes at the Fano-like zeros."""
    _, qa_ga, qb_gb, qa_tc, qb_t = _weak_pump_terms(p)
    x = E - p.E_b
    const = qa_tc + qb_t - qb_gb * (p.E_a - p.E_b) - abs(p.J_ab) ** 2
    return x * x + (p.E_b - p.E_a + qa_ga + qb_gb) * x + const


@dataclass(frozen=True)
class DressedDipole:
    mu_bar: complex
    a: complex
    b: complex
    det: complex


def effective_dipole(p: SystemParams, E: float, full: bool = False):
    """Dipole from the ground state into the dressed continuum state at ``E``.

    The continuum is flat, so renormalized energies and couplings equal the
    bare ones.  With ``full=True`` the mixing coefficients of atom a and of
    the bound state of b are returned as well.
    """
    E = float(E)
    t, qa_ga, qb_gb, qa_tc, qb_t = _weak_pump_terms(p)
    ga, gb = p.gamma_a, p.gamma_b
    D = (
        (E - p.E_a) * (E - p.E_b)
        + 1j * ga * (E - p.E_b)
        + 1j * gb * (E - p.E_a)
        - abs(p.J_ab) ** 2
        + 2j * t.real
    )
    scale = max(1.0, abs(E - p.E_a), abs(E - p.E_b), p.Gamma) ** 2
    if abs(D) < 1e-14 * scale:
        raise SingularDeterminant(f"dressed-continuum determinant vanishes at E = {E}")
    Dc = np.conj(D)
    # (q_a + i)[gamma_a (E - E_b) + t*] and (q_b + i)[gamma_b (E - E_a) + t]
    term_a = qa_ga * (E - p.E_b) + qa_tc + 1j * (ga * (E - p.E_b) + np.conj(t))
    term_b = qb_gb * (E - p.E_a) + qb_t + 1j * (gb * (E - p.E_a) + t)
    mu_bar = (1 + (term_a + term_b) / Dc) * p.mu
    if not full:
        return complex(mu_bar)
    a = ((E - p.E_b) * np.conj(p.J) + np.conj(p.J_ab) * np.conj(p.V)) / D
    b = ((E - p.E_a) * np.conj(p.V) + p.J_ab * np.conj(p.J)) / D
    return DressedDipole(mu_bar=complex(mu_bar), a=complex(a), b=complex(b), det=complex(D))


# ---------------------------------------------------------------------------
# sweeps over the pump parameter


@dataclass
class ZeroTrajectory:
    """Dynamical-zero branches in normalized frequency ``(E_D - E_b) / Gamma``.

    ``points`` has one row per (Omega, channel, zero); ``branch_id`` links
    rows of the same continuous branch.
    """

    omega_values: np.ndarray
    zeros: dict  # (i_omega, channel) -> sorted array of normalized frequencies
    points: list = field(default_factory=list)  # (Omega, branch_id, channel, x)
    events: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def counts(self, channel: int) -> np.ndarray:
        return np.array(
            [len(self.zeros.get((i, channel), ())) if (i, channel) in self.zeros else -1 for i in range(len(self.omega_values))]
        )

    @property
    def success_fraction(self) -> float:
        return 1.0 - len(self.failures) / max(1, len(self.omega_values))


def params_at_omega(p_base: SystemParams, Omega: float) -> SystemParams:
    """``p_base`` with the pump amplitude set from the pump parameter."""
    r = derive_reduced(p_base)
    return p_base.with_alpha(pump_amplitude(Omega, r.Gamma, r.Q, p_base.mu))


def _link(prev_ends: dict, xs: np.ndarray, next_id: int, gap: float):
    """Greedy nearest-neighbour matching of new zeros onto open branches."""
    pairs = sorted(
        ((abs(x - xe), i, bid) for i, x in enumerate(xs) for bid, xe in prev_ends.items()),
        key=lambda t: t[0],
    )
    assign = {}
    used = set()
    for dist, i, bid in pairs:
        if dist > gap:
            break
        if i in assign or bid in used:
            continue
        assign[i] = bid
        used.add(bid)
    ends = {}
    for i, x in enumerate(xs):
        if i not in assign:
            assign[i] = next_id
            next_id += 1
        ends[assign[i]] = x
    return assign, ends, next_id


def _zeros_at(p_base: SystemParams, Om: float, channels):
    try:
        if Om == 0:
            raise NumericalError("Omega = 0 has no pumping")
        return dynamical_zeros(params_at_omega(p_base, Om), channels=channels)
    except NumericalError as exc:
        return exc


def sweep(
    p_base: SystemParams,
    omega_grid,
    channels=(0, 1),
    gap: float = BRANCH_GAP,
    window=None,
    threads: int = 1,
) -> ZeroTrajectory:
    """Dynamical zeros along a pump-parameter grid, linked into branches.

    ``window`` optionally restricts branches to normalized frequencies inside
    ``(lo, hi)``; event parity is then only meaningful away from its edges.
    Grid points are independent and may be spread over ``threads`` workers;
    the result does not depend on that number.
    """
    omegas = np.asarray(omega_grid, dtype=float)
    if omegas.size < 1 or not np.all(np.isfinite(omegas)):
        raise ValueError("omega grid must be finite and nonempty")
    G = p_base.Gamma
    traj = ZeroTrajectory(omega_values=omegas, zeros={})
    work = partial(_zeros_at, p_base, channels=channels)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, omegas))
    else:
        results = [work(Om) for Om in omegas]
    for i, (Om, zs) in enumerate(zip(omegas, results)):
        if isinstance(zs, NumericalError):
            traj.failures.append({"Omega": float(Om), "error": type(zs).__name__, "message": str(zs)})
            continue
        for k in channels:
            xs = np.sort([(z.E_D - p_base.E_b) / G for z in zs if z.channel == k])
            if window is not None:
                xs = xs[(xs > window[0]) & (xs < window[1])]
            traj.zeros[(i, k)] = xs
    next_id = 0
    for k in channels:
        ends = {}
        prev_i = None
        for i, Om in enumerate(omegas):
            if (i, k) not in traj.zeros:
                ends = {}
                prev_i = None
                continue
            xs = traj.zeros[(i, k)]
            assign, ends, next_id = _link(ends, xs, next_id, gap)
            for j, x in enumerate(xs):
                traj.points.append((float(Om), assign[j], k, float(x)))
            if prev_i is not None:
                n0, n1 = len(traj.zeros[(prev_i, k)]), len(xs)
                if n0 != n1:
                    traj.events.append(
                        {
                            "channel": k,
                            "Omega_from": float(omegas[prev_i]),
                            "Omega_to": float(Om),
                            "count_from": n0,
                            "count_to": n1,
                            "kind": "creation" if n1 > n0 else "annihilation",
                            "pairwise": (n1 - n0) % 2 == 0,
                        }
                    )
            prev_i = i
    return traj
