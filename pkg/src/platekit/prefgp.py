"""Latent-utility model over the weight grid from pairwise comparisons.

A zero-mean GP prior with a squared-exponential kernel sits on the full
discrete grid; comparison answers enter through a probit likelihood on the
scaled utility difference. The posterior is approximated by a Gaussian at
the likelihood mode (Laplace); because each comparison only touches two
grid points, all linear algebra runs on the small set of active points and
the posterior covariance is kept in low-rank downdate form.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import NumericalError
from .scene import WeightGrid

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GpHyperparams:
    """Kernel and likelihood scales. Length scales are per weight dimension.

    The comparison noise is deliberately moderate: near-deterministic
    likelihoods make mislabeled (synthesized) comparisons override the
    smooth preference signal around the optimum.
    """

    signal_var: float = 1.0
    length_scale: tuple[float, ...] = (0.15,)
    noise: float = 0.5
    jitter: float = 1e-8

    def __post_init__(self):
        if self.signal_var <= 0 or self.noise <= 0 or self.jitter <= 0:
            raise ValueError("hyperparameters must be strictly positive")
        if any(l <= 0 for l in self.length_scale):
            raise ValueError("length scales must be strictly positive")

    def scales(self, n_dims: int) -> np.ndarray:
        ls = self.length_scale
        if len(ls) == 1:
            return np.full(n_dims, ls[0])
        if len(ls) != n_dims:
            raise ValueError(f"need 1 or {n_dims} length scales, got {len(ls)}")
        return np.asarray(ls, dtype=float)


@dataclass(frozen=True)
class PrefRecord:
    """One answered comparison: grid indices of both candidates and the label.

    y = 1 means the second candidate was preferred.
    """

    i0: int
    i1: int
    y: int
    provenance: str = "direct"
    timestamp: float = 0.0

    def __post_init__(self):
        if self.y not in (0, 1):
            raise ValueError("answer must be 0 or 1")
        if self.provenance not in ("direct", "synthesized"):
            raise ValueError("provenance must be 'direct' or 'synthesized'")


@dataclass(frozen=True)
class ComparisonDataset:
    records: tuple[PrefRecord, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def extended(self, *records: PrefRecord) -> "ComparisonDataset":
        return ComparisonDataset(self.records + tuple(records))

    def validate(self, grid: WeightGrid) -> None:
        n = len(grid)
        for r in self.records:
            if not (0 <= r.i0 < n and 0 <= r.i1 < n):
                raise ValueError(f"record {r} outside grid of size {n}")

    def dump_lines(self) -> str:
        return "".join(
            json.dumps(
                {"i0": r.i0, "i1": r.i1, "y": r.y, "provenance": r.provenance,
                 "t": r.timestamp}
            )
            + "\n"
            for r in self.records
        )

    @classmethod
    def load_lines(cls, text: str) -> "ComparisonDataset":
        records = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            records.append(
                PrefRecord(d["i0"], d["i1"], d["y"], d["provenance"], d.get("t", 0.0))
            )
        return cls(tuple(records))


def kernel(w, w_prime, hp: GpHyperparams) -> float:
    """Squared-exponential covariance between two weight vectors."""
    a = np.asarray(w, dtype=float)
    b = np.asarray(w_prime, dtype=float)
    if a.shape != b.shape:
        raise ValueError("weight dimension mismatch")
    ls = hp.scales(a.shape[-1])
    return float(hp.signal_var * np.exp(-0.5 * np.sum(((a - b) / ls) ** 2)))


def kernel_matrix(a: np.ndarray, b: np.ndarray, hp: GpHyperparams) -> np.ndarray:
    """Covariance between two sets of weight vectors, shape (len(a), len(b))."""
    ls = hp.scales(a.shape[1])
    diff = (a[:, None, :] - b[None, :, :]) / ls
    return hp.signal_var * np.exp(-0.5 * np.sum(diff * diff, axis=-1))


def pref_likelihood(f0: float, f1: float, noise: float) -> float:
    """Probability that the second candidate is preferred given utilities."""
    if noise <= 0:
        raise ValueError("comparison noise must be positive")
    return float(ndtr((f1 - f0) / (SQRT2 * noise)))


_AXIS_CHOL_CACHE: dict[tuple[int, float, float], np.ndarray] = {}


def _axis_chol(points: int, length_scale: float, jitter: float) -> np.ndarray:
    """Cached Cholesky factor of the unit-variance SE kernel on one grid axis."""
    key = (points, length_scale, jitter)
    hit = _AXIS_CHOL_CACHE.get(key)
    if hit is None:
        axis = np.linspace(0.0, 1.0, points)
        diff = (axis[:, None] - axis[None, :]) / length_scale
        hit = _chol_with_escalation(np.exp(-0.5 * diff * diff), jitter)
        _AXIS_CHOL_CACHE[key] = hit
    return hit


def _chol_with_escalation(mat: np.ndarray, jitter: float) -> np.ndarray:
    j = jitter
    eye = np.eye(mat.shape[0])
    while j <= 1e-2:
        try:
            return np.linalg.cholesky(mat + j * eye)
        except np.linalg.LinAlgError:
            j *= 10.0
    raise NumericalError("matrix not positive definite despite jitter escalation")


class GaussianApprox:
    """Gaussian posterior over latent utilities on the full grid.

    Stores the mean densely and the covariance as a low-rank downdate of
    the prior: cov = K - C G^-1 C^T, with one column of C per effective
    comparison. ``covariance`` materializes the dense matrix on demand.
    """

    def __init__(self, grid: WeightGrid, hp: GpHyperparams, mean: np.ndarray,
                 c_cols: np.ndarray, g_chol: np.ndarray, u_rows: np.ndarray,
                 lam: np.ndarray, active: np.ndarray):
        self.grid = grid
        self.hp = hp
        self.mean = mean
        self._c = c_cols          # (n, m_eff)
        self._g_chol = g_chol     # (m_eff, m_eff) lower Cholesky of G
        self._u = u_rows          # (m_eff, r) likelihood rows over active points
        self._lam = lam           # (m_eff,) curvature of each comparison
        self.active = active      # (r,) active grid indices

    @property
    def n(self) -> int:
        return len(self.grid)

    def prior_matrix(self) -> np.ndarray:
        pts = self.grid.points
        return kernel_matrix(pts, pts, self.hp)

    @property
    def covariance(self) -> np.ndarray:
        cov = self.prior_matrix()
        if self._c.shape[1]:
            from scipy.linalg import solve_triangular

            w = solve_triangular(self._g_chol, self._c.T, lower=True)
            cov = cov - w.T @ w
        return cov

    def predict(self, indices) -> tuple[np.ndarray, np.ndarray]:
        """Marginal mean and variance at the requested grid indices."""
        idx = np.asarray(indices, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError("grid index out of range")
        means = self.mean[idx]
        prior_var = np.full(idx.shape, self.hp.signal_var)
        if not self._c.shape[1]:
            return means, prior_var
        from scipy.linalg import solve_triangular

        w = solve_triangular(self._g_chol, self._c[idx].T, lower=True)
        var = prior_var - np.sum(w * w, axis=0)
        return means, np.maximum(var, 0.0)

    def _prior_sample(self, rng: np.random.Generator) -> np.ndarray:
        """Joint draw from the prior via the Kronecker structure of the grid."""
        p = self.grid.points_per_dim
        nd = self.grid.n_dims
        ls = self.hp.scales(nd)
        z = rng.standard_normal(p**nd).reshape((p,) * nd)
        for d in range(nd):
            ld = _axis_chol(p, float(ls[d]), self.hp.jitter)
            z = np.tensordot(ld, z, axes=(1, d))
            z = np.moveaxis(z, 0, d)
        return math.sqrt(self.hp.signal_var) * z.reshape(-1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One joint posterior draw over all grid points (pathwise update)."""
        f0 = self._prior_sample(rng)
        if not self._c.shape[1]:
            return self.mean + f0
        from scipy.linalg import cho_solve

        eps = rng.standard_normal(self._lam.shape[0]) / np.sqrt(self._lam)
        resid = self._u @ f0[self.active] + eps
        return self.mean + f0 - self._c @ cho_solve((self._g_chol, True), resid)


_EP_PASSES = 120
_EP_DAMPING = 0.7
_EP_TOL = 1e-9


def fit_posterior(
    data: ComparisonDataset, hp: GpHyperparams, grid: WeightGrid
) -> GaussianApprox:
    """Gaussian approximation of the comparison posterior.

    Expectation propagation with one Gaussian site per comparison, run in
    the subspace of grid points that appear in the data. Each site acts on
    the scalar projection z_i = u_i^T f, so the posterior is the prior
    downdated by rank-one terms; the same factors drive prediction and
    joint sampling. Deterministic: fixed sweep order and damping.
    """
    data.validate(grid)
    n = len(grid)
    if len(data) == 0:
        return GaussianApprox(
            grid, hp, np.zeros(n), np.zeros((n, 0)), np.zeros((0, 0)),
            np.zeros((0, 0)), np.zeros(0), np.zeros(0, dtype=int),
        )

    active = np.unique([i for r in data.records for i in (r.i0, r.i1)])
    pos = {int(a): k for k, a in enumerate(active)}
    r_dim = active.shape[0]
    m = len(data)

    scale = 1.0 / (SQRT2 * hp.noise)
    u_rows = np.zeros((m, r_dim))
    for k, rec in enumerate(data.records):
        sign = 1.0 if rec.y == 1 else -1.0
        u_rows[k, pos[rec.i1]] += sign * scale
        u_rows[k, pos[rec.i0]] -= sign * scale

    pts = grid.points
    k_aa = kernel_matrix(pts[active], pts[active], hp) + hp.jitter * np.eye(r_dim)

    tau = np.zeros(m)
    nu = np.zeros(m)
    sigma = k_aa.copy()
    mu = np.zeros(r_dim)

    for _ in range(_EP_PASSES):
        max_delta = 0.0
        for i in range(m):
            u = u_rows[i]
            su = sigma @ u
            v_i = float(u @ su)
            m_i = float(u @ mu)
            denom = 1.0 - tau[i] * v_i
            if denom <= 1e-12:
                continue
            v_cav = v_i / denom
            m_cav = (m_i / v_i - nu[i]) * v_cav if v_i > 0 else 0.0
            if v_cav <= 0:
                continue

            # moments of the tilted distribution Phi(z) * N(z; m_cav, v_cav)
            s = math.sqrt(1.0 + v_cav)
            z0 = m_cav / s
            log_rho = _log_npdf(z0) - float(log_ndtr(z0))
            rho = math.exp(log_rho) / s
            m_hat = m_cav + v_cav * rho
            v_hat = v_cav - v_cav * v_cav * rho * (z0 / s + rho)
            v_hat = max(v_hat, 1e-12)

            tau_new = max(1.0 / v_hat - 1.0 / v_cav, 0.0)
            nu_new = m_hat / v_hat - m_cav / v_cav
            d_tau = _EP_DAMPING * (tau_new - tau[i])
            d_nu = _EP_DAMPING * (nu_new - nu[i])

            # rank-one posterior update for the site change
            denom_upd = 1.0 + d_tau * v_i
            if denom_upd <= 1e-12:
                continue
            sigma = sigma - np.outer(su, su) * (d_tau / denom_upd)
            tau[i] += d_tau
            nu[i] += d_nu
            mu = sigma @ (u_rows.T @ nu)
            max_delta = max(max_delta, abs(d_tau), abs(d_nu))
        if max_delta < _EP_TOL:
            break

    k_na = kernel_matrix(pts, pts[active], hp)
    keep = tau > 1e-12
    u_eff = u_rows[keep]
    tau_eff = tau[keep]
    nu_eff = nu[keep]
    if u_eff.shape[0]:
        c_cols = k_na @ u_eff.T
        g_mat = np.diag(1.0 / tau_eff) + u_eff @ k_aa @ u_eff.T
        g_chol = _chol_with_escalation(g_mat, hp.jitter)
        from scipy.linalg import cho_solve

        mean = c_cols @ cho_solve((g_chol, True), nu_eff / tau_eff)
    else:
        c_cols = np.zeros((n, 0))
        g_chol = np.zeros((0, 0))
        mean = np.zeros(n)
    return GaussianApprox(grid, hp, mean, c_cols, g_chol, u_eff, tau_eff, active)


def _log_npdf(z) -> float:
    return -0.5 * z * z - 0.5 * math.log(2 * math.pi)


def predict(q: GaussianApprox, indices) -> tuple[np.ndarray, np.ndarray]:
    """Marginal means and variances at the given grid indices."""
    return q.predict(indices)


def sample_utility(q: GaussianApprox, rng: np.random.Generator) -> np.ndarray:
    """One joint draw of the latent utility over the whole grid."""
    return q.sample(rng)
