"""Convergence-rate quantities for uniform and residual-weighted Kaczmarz.

The weighted rule contracts the expected squared error at least by
``1 - inf_z J_p(z)`` per step, with

    J_p(z) = ||Az||_{p+2}^{p+2} / (||Az||_p^p ||z||_2^2),

while uniform sampling on unit rows gives ``1 - sigma_min^2 / m``. Hölder's
inequality yields ``J_p(z) >= ||Az||^2 / (m ||z||^2) >= sigma_min^2 / m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import FloorViolated, SingularOrIllConditioned, ZeroVector
from .linsys import NormalizedSystem
from .sampling import power_ratio

ZERO_GUARD = 1e-300
JITTER_THRESHOLD = 1e-13


@dataclass(frozen=True)
class SpectralInfo:
    sigma_min: float
    v_min: np.ndarray
    frobenius_sq: float
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class RateReport:
    """Bracket on the weighted contraction for one exponent ``p``.

    ``jp_floor <= inf J_p <= jp_inf_estimate``; the lower end is proven, the
    upper end is the best value the multistart search found.
    """

    p: float
    rk_factor: float
    jp_floor: float
    jp_inf_estimate: float
    weighted_factor_estimate: float
    jp_value_at: dict = field(default_factory=dict)
    argmin: np.ndarray | None = None
    argmin_alignment: float | None = None


def jp(system: NormalizedSystem, z, p: float) -> float:
    z = np.asarray(z, dtype=np.float64)
    zmax = np.max(np.abs(z))
    if zmax <= ZERO_GUARD:
        raise ZeroVector("J_p is undefined at z = 0")
    # scale-free, so normalizing first keeps tiny or huge z representable
    u = z / zmax
    u /= np.linalg.norm(u)
    y = system.A @ u
    if not np.any(y):
        raise ZeroVector("Az = 0; A is rank deficient")
    return power_ratio(y, p)


def jp_grad(system: NormalizedSystem, z, p: float) -> np.ndarray:
    """Analytic gradient of ``J_p`` at ``z`` (all ``(Az)_i`` nonzero when ``p < 1``)."""
    z = np.asarray(z, dtype=np.float64)
    N = float(z @ z)
    y = system.A @ z
    a = np.abs(y)
    s = a.max()
    t = a / s
    sg = np.sign(y)
    tp = t ** p
    S2 = float(tp @ (t * t))
    S0 = float(tp.sum())
    J = s * s * S2 / (S0 * N)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.where(t > 0, t ** (p - 1.0), 0.0) * sg
    high = tp * t * sg
    dlog = (p + 2.0) * (system.A.T @ high) / (s * S2) - p * (system.A.T @ low) / (s * S0) - 2.0 * z / N
    return J * dlog


def smallest_singular(system: NormalizedSystem, tol: float = 1e-10,
                      max_iters: int = 10_000, seed: int = 0) -> SpectralInfo:
    """Smallest singular pair by inverse power iteration on ``A^T A``.

    ``A^T A`` is Cholesky-factored once. Iteration stops when successive
    Rayleigh quotients agree to ``tol`` (relative) and the eigen-residual is
    below ``1e-9``.

    Raises
    ------
    SingularOrIllConditioned
        If ``A^T A`` is not numerically positive definite.
    """
    A = system.A
    m, n = A.shape
    if m < n:
        raise SingularOrIllConditioned(f"{m}x{n} matrix cannot have full column rank")
    M = A.T @ A
    try:
        factor = linalg.cho_factor(M, lower=False, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularOrIllConditioned(str(exc)) from None
    if not np.all(np.isfinite(factor[0])) or np.min(np.abs(np.diag(factor[0]))) == 0:
        raise SingularOrIllConditioned("Cholesky factor of A^T A is degenerate")

    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    lam_old = float(np.linalg.norm(A @ v) ** 2)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        w = linalg.cho_solve(factor, v, check_finite=False)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            raise SingularOrIllConditioned("inverse iteration broke down")
        v = w / nw
        Mv = M @ v
        lam = float(v @ Mv)
        res = np.linalg.norm(Mv - lam * v)
        if abs(lam - lam_old) <= tol * abs(lam) and res <= 1e-9:
            converged = True
            break
        lam_old = lam

    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size and v[nonzero[0]] < 0:
        v = -v
    v.flags.writeable = False
    sigma = float(np.linalg.norm(A @ v))
    return SpectralInfo(sigma_min=sigma, v_min=v, frobenius_sq=float(np.sum(A * A)),
                        iterations_used=it, converged=converged)


def rk_rate(system: NormalizedSystem, spectral: SpectralInfo) -> float:
    """Uniform-sampling contraction ``1 - sigma_min^2 / m`` (unit rows, so ``||A||_F^2 = m``)."""
    return 1.0 - spectral.sigma_min ** 2 / system.m


def _sphere_descent(system, z, p, rng, max_iters=2000, gtol=1e-13):
    z = z / np.linalg.norm(z)
    if np.min(np.abs(system.A @ z)) < JITTER_THRESHOLD:
        z = z + 1e-12 * rng.standard_normal(z.size)
        z /= np.linalg.norm(z)
    f = jp(system, z, p)
    eta = 1.0
    for _ in range(max_iters):
        g = jp_grad(system, z, p)
        g -= (g @ z) * z
        gn2 = float(g @ g)
        if not np.isfinite(gn2) or gn2 <= gtol ** 2:
            break
        eta *= 2.0
        while True:
            cand = z - eta * g
            cand /= np.linalg.norm(cand)
            fc = jp(system, cand, p)
            if fc <= f - 1e-4 * eta * gn2:
                break
            eta *= 0.5
            if eta < 1e-16:
                return z, f
        if f - fc <= 1e-15 * f:
            z, f = cand, fc
            break
        z, f = cand, fc
        if np.min(np.abs(system.A @ z)) < JITTER_THRESHOLD:
            z = z + 1e-12 * rng.standard_normal(z.size)
            z /= np.linalg.norm(z)
            f = jp(system, z, p)
    return z, f


def jp_inf_estimate(system: NormalizedSystem, p: float, restarts: int = 4, seed: int = 0,
                    spectral: SpectralInfo | None = None, max_iters: int = 2000) -> RateReport:
    """Estimate ``inf_z J_p(z)`` from above by projected descent on the unit sphere.

    Starts are the smallest right singular vector, the least-squares preimage
    of the all-ones vector and ``restarts - 1`` random unit vectors; both
    structured probes are also reported in ``jp_value_at``.

    Raises
    ------
    FloorViolated
        If the estimate drops below ``sigma_min^2 / m`` by more than ``1e-10``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    spectral = spectral or smallest_singular(system)
    floor = spectral.sigma_min ** 2 / system.m
    rng = np.random.default_rng(seed)
    ones_pre = np.linalg.lstsq(system.A, np.ones(system.m), rcond=None)[0]
    probes = {"v_min": spectral.v_min, "ones_image": ones_pre}
    values = {name: jp(system, z, p) for name, z in probes.items()}

    starts = [("v_min", spectral.v_min), ("ones_image", ones_pre)]
    starts += [(f"random_{j}", rng.standard_normal(system.n)) for j in range(1, restarts)]
    best_z, best_f = None, np.inf
    for name, z0 in starts:
        z, f = _sphere_descent(system, np.array(z0, dtype=np.float64), p, rng, max_iters)
        values[f"descent_{name}"] = f
        if f < best_f:
            best_z, best_f = z, f
    for name, z in probes.items():
        if values[name] < best_f:
            best_z, best_f = z / np.linalg.norm(z), values[name]

    if best_f < floor - 1e-10:
        raise FloorViolated(f"J_p estimate {best_f!r} below proven floor {floor!r}")
    # within tolerance of the floor the gap is rounding; the infimum cannot be lower
    best_f = max(best_f, floor)
    return RateReport(
        p=float(p),
        rk_factor=rk_rate(system, spectral),
        jp_floor=floor,
        jp_inf_estimate=float(best_f),
        weighted_factor_estimate=1.0 - float(best_f),
        jp_value_at=values,
        argmin=best_z,
        argmin_alignment=float(abs(best_z @ spectral.v_min)),
    )


def rk_sv_identity_check(system: NormalizedSystem, x, sigma: float, v) -> tuple[float, float]:
    """One uniform step projected on a right singular vector, both ways.

    ``lhs`` averages ``<x_{k+1} - x*, v>`` over all ``m`` equally likely
    outcomes; ``rhs`` is ``(1 - sigma^2 / m) <x_k - x*, v>``.
    """
    if system.solution is None:
        raise ValueError("system has no stored solution")
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    A, b = system.A, system.b
    lam = b - A @ x
    # row i of `outcomes` is x + lam_i a_i
    outcomes = x[None, :] + lam[:, None] * A
    lhs = float(np.mean((outcomes - system.solution) @ v))
    rhs = (1.0 - sigma ** 2 / system.m) * float((x - system.solution) @ v)
    return lhs, rhs
