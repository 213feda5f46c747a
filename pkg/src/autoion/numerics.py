"""Complex polynomial roots and the small eigen-problems built on them.

A single simultaneous-iteration (Aberth-Ehrlich) solver handles every
polynomial in the package: the quartic for the evolution eigenvalues, the
cubics whose common roots are Fano zeros and the high-order polynomials
whose real roots are dynamical zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DefectiveMatrix, NoConvergence

EPS = np.finfo(float).eps
MAX_DEGREE = 16
TRIM_TOL = 1e-14
MERGE_TOL = 1e-7
RESIDUAL_TOL = 1e-8
MAX_ITER = 500
DEFECTIVE_COND = 1e10


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial with complex coefficients in ascending order of degree."""

    coeffs: np.ndarray
    trim_tol: float = TRIM_TOL

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        scale = np.max(np.abs(c))
        n = c.size
        while n > 1 and abs(c[n - 1]) <= self.trim_tol * scale:
            n -= 1
        c = c[:n].copy()
        if c.size - 1 > MAX_DEGREE:
            raise ValueError(f"degree {c.size - 1} exceeds {MAX_DEGREE}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return horner(self.coeffs, z)

    def derivative(self) -> ComplexPolynomial:
        if self.degree == 0:
            return ComplexPolynomial([0.0])
        k = np.arange(1, self.coeffs.size)
        return ComplexPolynomial(self.coeffs[1:] * k, trim_tol=0.0)

    @classmethod
    def from_roots(cls, roots) -> ComplexPolynomial:
        # np.poly returns descending order
        return cls(np.poly(np.asarray(roots, dtype=complex))[::-1])


@dataclass(frozen=True)
class RootSet:
    """Distinct roots with multiplicities and residuals ``|p(root)|``."""

    roots: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray
    iterations: int = 0

    def expanded(self) -> np.ndarray:
        """Roots repeated according to multiplicity."""
        return np.repeat(self.roots, self.multiplicities)

    def __len__(self):
        return int(np.sum(self.multiplicities))


def horner(coeffs, z):
    """Evaluate ascending-order coefficients at ``z`` (scalar or array)."""
    z = np.asarray(z)
    acc = np.zeros_like(z, dtype=complex) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _horner_with_derivative(coeffs, z):
    p = np.full_like(z, coeffs[-1], dtype=complex)
    dp = np.zeros_like(z, dtype=complex)
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(coeffs) -> np.ndarray:
    n = coeffs.size - 1
    lead = abs(coeffs[-1])
    # Fujiwara bound on root moduli and the geometric mean as the circle radius
    bound = 2 * max(abs(coeffs[n - k] / coeffs[-1]) ** (1.0 / k) for k in range(1, n + 1))
    centroid = -coeffs[-2] / (n * coeffs[-1])
    radius = abs(coeffs[0] / lead) ** (1.0 / n) if coeffs[0] != 0 else bound / 2
    radius = min(max(radius, 1e-3 * bound), bound)
    angles = 2 * math.pi * np.arange(n) / n + 0.4
    return centroid + radius * np.exp(1j * angles)


def _aberth(coeffs, max_iter):
    n = coeffs.size - 1
    z = _initial_guesses(coeffs)
    converged = np.zeros(n, dtype=bool)
    for it in range(1, max_iter + 1):
        p, dp = _horner_with_derivative(coeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p == 0, 0, p / dp)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0)
        w[converged] = 0
        z = z - w
        converged |= np.abs(w) <= 4 * EPS * np.maximum(np.abs(z), 1e-300)
        if converged.all():
            return z, it, True
    return z, max_iter, False


def _taylor_shift_values(coeffs, c, m):
    """|p^(j)(c)| / j! and a rounding-scale bound for j < m."""
    vals, scales = [], []
    cur = np.asarray(coeffs, dtype=complex)
    absc = np.abs(cur)
    for j in range(m):
        vals.append(abs(horner(cur, c)))
        scales.append(float(horner(absc, abs(c)).real))
        if cur.size <= 1:
            break
        k = np.arange(1, cur.size)
        cur = cur[1:] * k / (j + 1)
        absc = np.abs(cur)
    return vals, scales


def _polish_multiple(coeffs, c, m, steps=8):
    """Newton on the ``(m-1)``-th derivative, where an ``m``-fold root is simple."""
    d = np.asarray(coeffs, dtype=complex)
    for _ in range(m - 1):
        d = d[1:] * np.arange(1, d.size)
    if d.size < 2:
        return c
    for _ in range(steps):
        f, df = _horner_with_derivative(d, c)
        if df == 0:
            break
        step = f / df
        if not np.isfinite(step) or abs(step) > 1e-3 * max(1.0, abs(c)):
            break
        c = c - step
        if abs(step) <= 4 * EPS * max(1.0, abs(c)):
            break
    return c


def _cluster(coeffs, z, merge_tol):
    """Group simultaneous-iteration output into distinct roots with multiplicity."""
    n = z.size
    order = np.argsort(z.real)
    z = z[order]
    used = np.zeros(n, dtype=bool)
    out_roots, out_mult = [], []
    loose = max(EPS ** (1.0 / max(n, 1)), 1e-4)
    for i in range(n):
        if used[i]:
            continue
        scale_i = max(1.0, abs(z[i]))
        # tight merging by tolerance
        group = [i]
        for j in range(i + 1, n):
            if not used[j] and abs(z[j] - z[i]) <= merge_tol * scale_i:
                group.append(j)
        # loose group: numerically indistinguishable from a multiple root
        cand = [j for j in range(n) if not used[j] and abs(z[j] - z[i]) <= loose * scale_i]
        root = None
        if len(cand) > len(group):
            m = len(cand)
            c = _polish_multiple(coeffs, np.mean(z[cand]), m)
            vals, scales = _taylor_shift_values(coeffs, c, m)
            if len(vals) == m and all(
                v <= 1e3 * n * EPS * s * max(1.0, abs(c)) ** 0 for v, s in zip(vals, scales)
            ):
                group, root = cand, c
        for j in group:
            used[j] = True
        out_roots.append(np.mean(z[group]) if root is None else root)
        out_mult.append(len(group))
    return np.array(out_roots, dtype=complex), np.array(out_mult, dtype=int)


def roots(
    p: ComplexPolynomial,
    merge_tol: float = MERGE_TOL,
    max_iter: int = MAX_ITER,
    residual_tol: float = RESIDUAL_TOL,
) -> RootSet:
    """All complex roots of ``p`` by Aberth-Ehrlich iteration.

    Starting points lie on a circle around the root centroid, so the result
    is deterministic.  Roots closer than ``merge_tol`` (relative), or whose
    centroid is numerically a multiple root, are reported once with their
    multiplicity.
    """
    if not isinstance(p, ComplexPolynomial):
        p = ComplexPolynomial(p)
    coeffs = p.coeffs
    n = p.degree
    if n < 1:
        raise ValueError("need a polynomial of degree >= 1")
    # zero roots factor out exactly
    k0 = 0
    while coeffs[k0] == 0:
        k0 += 1
    reduced = coeffs[k0:] / coeffs[-1]
    z = np.zeros(0, dtype=complex)
    iterations = 0
    ok = True
    if reduced.size - 1 == 1:
        z = np.array([-reduced[0]])
    elif reduced.size - 1 > 1:
        z, iterations, ok = _aberth(reduced, max_iter)
    z = np.concatenate([np.zeros(k0, dtype=complex), z])
    scale = np.max(np.abs(coeffs))
    res_all = np.abs(horner(coeffs, z))
    bound = residual_tol * scale * np.maximum(1.0, np.abs(z)) ** n
    if not ok and np.any(res_all > bound):
        raise NoConvergence(
            f"Aberth iteration did not converge in {max_iter} steps", roots=z, residuals=res_all
        )
    r, m = _cluster(coeffs, z, merge_tol)
    return RootSet(roots=r, multiplicities=m, residuals=np.abs(horner(coeffs, r)), iterations=iterations)


def root_array(p: ComplexPolynomial, **kw) -> np.ndarray:
    """Roots repeated by multiplicity, convenient for multiset comparisons."""
    return roots(p, **kw).expanded()


# ---------------------------------------------------------------------------
# eigen-problems


@dataclass(frozen=True)
class EigenSystem:
    lambdas: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    condition: float
    meta: dict = field(default_factory=dict)


def characteristic_polynomial(M: np.ndarray) -> ComplexPolynomial:
    """``det(z I - M)`` via the Faddeev-LeVerrier recursion."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    Mk = np.zeros_like(M)
    ident = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        Mk = M @ (Mk + c[n - k + 1] * ident)
        c[n - k] = -np.trace(Mk) / k
    return ComplexPolynomial(c, trim_tol=0.0)


def _polish_eigenvalue(M, lam, steps=3):
    # Newton on det(M - z) through the trace of the resolvent
    n = M.shape[0]
    for _ in range(steps):
        A = M - lam * np.eye(n)
        try:
            tr = np.trace(np.linalg.solve(A, np.eye(n)))
        except np.linalg.LinAlgError:
            break
        if not np.isfinite(tr) or tr == 0:
            break
        step = 1.0 / tr
        if abs(step) > 1e-6 * max(1.0, abs(lam)):
            break
        lam = lam - step
    return lam


def null_vector(A: np.ndarray) -> np.ndarray:
    """Unit vector spanning the numerical null space of a rank-deficient ``A``.

    Gaussian elimination with complete pivoting; the last pivot is treated
    as zero and the free variable set to one.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    cols = np.arange(n)
    for k in range(n - 1):
        sub = np.abs(A[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        A[[k, i]] = A[[i, k]]
        A[:, [k, j]] = A[:, [j, k]]
        cols[[k, j]] = cols[[j, k]]
        piv = A[k, k]
        if piv == 0:
            break
        f = A[k + 1 :, k] / piv
        A[k + 1 :, k:] -= np.outer(f, A[k, k:])
    x = np.zeros(n, dtype=complex)
    x[n - 1] = 1.0
    for k in range(n - 2, -1, -1):
        if A[k, k] == 0:
            x[k] = 0.0
            continue
        x[k] = -(A[k, k + 1 :] @ x[k + 1 :]) / A[k, k]
    v = np.zeros(n, dtype=complex)
    v[cols] = x
    return v / np.linalg.norm(v)


def _refine_vector(M, lam, v, steps=2):
    n = M.shape[0]
    shift = lam + 1e-13 * max(1.0, np.max(np.abs(M)))
    A = M - shift * np.eye(n)
    for _ in range(steps):
        try:
            w = np.linalg.solve(A, v)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(w)):
            break
        v = w / np.linalg.norm(w)
    return v


def eigen_system(M: np.ndarray) -> EigenSystem:
    """Eigenvalues (characteristic-polynomial roots) and eigenvectors of ``M``."""
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix must be finite")
    n = M.shape[0]
    char = characteristic_polynomial(M)
    lambdas = root_array(char)
    lambdas = np.array([_polish_eigenvalue(M, lam) for lam in lambdas])
    P = np.empty((n, n), dtype=complex)
    for j, lam in enumerate(lambdas):
        v = null_vector(M - lam * np.eye(n))
        P[:, j] = _refine_vector(M, lam, v)
    # phase convention: largest component real positive
    for j in range(n):
        k = np.argmax(np.abs(P[:, j]))
        P[:, j] *= abs(P[k, j]) / P[k, j]
    condition = float(np.linalg.cond(P))
    if not np.isfinite(condition) or condition > DEFECTIVE_COND:
        raise DefectiveMatrix(f"eigenvector matrix condition {condition:.3g} exceeds {DEFECTIVE_COND:g}")
    P_inv = np.linalg.inv(P)
    return EigenSystem(lambdas=lambdas, P=P, P_inv=P_inv, condition=condition)


def quartic_coefficients(p) -> ComplexPolynomial:
    """Monic quartic whose roots, shifted by ``-i pi |mu alpha_L|^2``, are the
    eigenvalues of the effective evolution matrix.

    Coefficients are written out in closed form in terms of the detunings,
    widths and the combined couplings ``M_a = mu_a - i pi mu J*`` etc.
    """
    pi = math.pi
    dEa = p.dE_a
    gam_a, gam_b = p.gamma_a, p.gamma_b
    al2 = abs(p.alpha_L) ** 2
    al4 = al2 * al2
    mu, mu_a, mu_b, J, V, Jab = p.mu, p.mu_a, p.mu_b, p.J, p.V, p.J_ab
    cj = np.conj
    Eb = p.dE_b - 1j * gam_b + 1j * p.pump_rate
    Ma = mu_a - 1j * pi * mu * cj(J)
    Mac = cj(mu_a) - 1j * pi * cj(mu) * J
    Mb = mu_b - 1j * pi * mu * cj(V)
    Mbc = cj(mu_b) - 1j * pi * cj(mu) * V
    jab = Jab - 1j * pi * J * cj(V)
    jabc = cj(Jab) - 1j * pi * cj(J) * V
    amu2 = abs(mu_a) ** 2

    a0 = (dEa + Eb) * (
        -Eb * Ma * Mac + (-dEa + 1j * gam_a) * Mb * Mbc + (Ma * Mbc * jab + Mac * Mb * jabc)
    ) * al2 + (Ma * Mac * amu2 + Mb**2 * Mbc**2 - (Ma * cj(mu_a) + Mac * mu_a) * Mb * Mbc) * al4
    a1 = (
        (-dEa + 1j * gam_a) * (dEa + Eb) * Eb
        + ((dEa - 1j * gam_a) * amu2 + (dEa + 2 * Eb) * Ma * Mac + (2 * dEa - 1j * gam_a + 2 * Eb) * Mb * Mbc)
        * al2
        + (dEa + Eb) * jab * jabc
        - ((mu_a + Ma) * Mbc * jab + (cj(mu_a) + Mac) * Mb * jabc) * al2
    )
    a2 = (
        dEa * (dEa - 1j * gam_a)
        + (3 * dEa - 2j * gam_a) * Eb
        + Eb**2
        - (Ma * Mac + amu2 + 2 * Mb * Mbc) * al2
        - jab * jabc
    )
    a3 = -2 * dEa - 2 * Eb + 1j * gam_a
    return ComplexPolynomial([a0, a1, a2, a3, 1.0], trim_tol=0.0)
