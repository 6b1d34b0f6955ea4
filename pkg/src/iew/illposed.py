"""First-kind equations K*u = f: s-values, low-rank bounds, regularization.

The s-value decomposition lives in the weighted inner product of the
rule: A u = sum_j s_j (u, u_j) v_j with both systems orthonormal under
the quadrature weights.  ``solve_first_kind`` recovers u from noisy data
by truncated SVD or by Tikhonov with the discrepancy principle
||A u - f_delta|| ~ 1.2 delta (bisection on log alpha).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import DiscreteOperator, QuadRule


@dataclass
class SValueDecomposition:
    """s_1 >= s_2 >= ... >= 0 with weighted-orthonormal systems u_j, v_j."""

    s: np.ndarray
    right: np.ndarray       # columns u_j (domain side)
    left: np.ndarray        # columns v_j (range side)
    rank: int
    rule: QuadRule

    def apply(self, u) -> np.ndarray:
        """Reconstruction A u = sum_j s_j (u, u_j) v_j."""
        coeffs = self.right.conj().T @ (self.rule.weights * np.asarray(u))
        return self.left @ (self.s * coeffs)

    def coefficients(self, f) -> np.ndarray:
        """Range-side coefficients (f, v_j)."""
        return self.left.conj().T @ (self.rule.weights * np.asarray(f))


@dataclass
class NoisyData:
    f_delta: np.ndarray
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("noise bound delta must be nonnegative")


@dataclass
class RegularizedSolution:
    u_delta: np.ndarray
    method: str
    parameter: float
    discrepancy: float
    noise_dominates: bool = False
    principle_satisfied: bool = True


def svalue_decompose(op: DiscreteOperator) -> SValueDecomposition:
    """SVD in the weighted model; rank counts s_j above 1e-12 * s_1."""
    w_sqrt = np.sqrt(op.rule.weights)
    B = op.weighted_matrix()
    U, s, Vh = np.linalg.svd(B)
    right = Vh.conj().T / w_sqrt[:, None]
    left = U / w_sqrt[:, None]
    rank = int(np.count_nonzero(s > 1e-12 * max(s[0], 1e-300)))
    return SValueDecomposition(s=s, right=right, left=left, rank=rank, rule=op.rule)


def best_rank_error(decomp: SValueDecomposition, j: int) -> float:
    """Best possible operator-norm error over rank-j approximants: s_{j+1}.

    The decomposition truncated to its first j terms achieves it; j >= rank
    returns 0.
    """
    if j < 0:
        raise ValueError("rank index j must be >= 0")
    if j >= decomp.rank:
        return 0.0
    return float(decomp.s[j])


def truncated_matrix(decomp: SValueDecomposition, j: int) -> np.ndarray:
    """Node-space matrix of the rank-j truncation (the optimal competitor)."""
    w = decomp.rule.weights
    cols = decomp.left[:, :j] * decomp.s[:j]
    return cols @ (decomp.right[:, :j].conj().T * w[None, :])


def operator_norm(matrix: np.ndarray, rule: QuadRule) -> float:
    """Weighted-l2 operator norm via the similarity transform."""
    s = np.sqrt(rule.weights)
    return float(np.linalg.svd((matrix * s[:, None]) / s[None, :], compute_uv=False)[0])


def seeded_noise(rule: QuadRule, delta: float, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random vector with weighted norm exactly delta."""
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(rule.n)
    return delta * xi / rule.norm(xi)


def solve_first_kind(op: DiscreteOperator, data: NoisyData, method: str = "tsvd",
                     truncation: int | None = None, tau: float | None = None,
                     discrepancy_factor: float = 1.2) -> RegularizedSolution:
    """Regularized solve of K*u = f_delta with ||f_delta - f|| <= delta.

    tsvd      keep modes with s_j > tau; tau defaults to sqrt(delta)*s_1,
              or pass an explicit ``truncation`` level (exact-data runs use
              delta = 0 with explicit truncation).
    tikhonov  u = (A^*A + alpha I)^{-1} A^* f_delta with alpha from the
              discrepancy principle ||A u - f_delta|| ~ 1.2*delta
              (bisection on log alpha, 5% residual tolerance).

    delta >= ||f_delta|| means the data is all noise: returns u = 0 with
    the ``noise_dominates`` flag.
    """
    f = np.asarray(data.f_delta, dtype=complex)
    rule = op.rule
    decomp = svalue_decompose(op)
    s = decomp.s
    g = decomp.coefficients(f)
    fnorm = rule.norm(f)

    if data.delta > 0 and data.delta >= fnorm:
        return RegularizedSolution(
            u_delta=np.zeros(op.n, dtype=complex), method=method, parameter=np.inf,
            discrepancy=fnorm, noise_dominates=True, principle_satisfied=False,
        )

    if method == "tsvd":
        if truncation is not None:
            keep = np.zeros(len(s), dtype=bool)
            keep[:min(truncation, decomp.rank)] = True
            parameter = float(truncation)
        else:
            if data.delta <= 0:
                raise ValueError("tsvd with delta = 0 needs an explicit truncation level")
            thresh = np.sqrt(data.delta) * s[0] if tau is None else tau
            keep = s > thresh
            parameter = float(thresh)
        coeffs = np.where(keep, g / np.where(keep, s, 1.0), 0.0)
        u = decomp.right @ coeffs
        disc = rule.norm(op.apply(u) - f)
        return RegularizedSolution(u_delta=u, method="tsvd", parameter=parameter,
                                   discrepancy=float(disc))

    if method == "tikhonov":
        if data.delta <= 0:
            raise ValueError("tikhonov needs delta > 0 for the discrepancy principle")
        target = discrepancy_factor * data.delta

        def resid(alpha: float) -> float:
            filt = alpha / (s**2 + alpha)
            return float(np.sqrt(np.sum(np.abs(filt * g) ** 2)))

        lo, hi = np.log10(1e-16 * s[0] ** 2 + 1e-300), np.log10(1e4 * s[0] ** 2)
        satisfied = True
        if resid(10.0**lo) > target * 1.05:
            alpha = 10.0**lo          # residual floor above target: principle failed
            satisfied = False
        elif resid(10.0**hi) < target * 0.95:
            alpha = 10.0**hi
            satisfied = False
        else:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                r = resid(10.0**mid)
                if abs(r - target) <= 0.05 * target:
                    lo = hi = mid
                    break
                if r > target:
                    hi = mid
                else:
                    lo = mid
            alpha = 10.0 ** (0.5 * (lo + hi))
        u = decomp.right @ (s / (s**2 + alpha) * g)
        disc = rule.norm(op.apply(u) - f)
        return RegularizedSolution(u_delta=u, method="tikhonov", parameter=float(alpha),
                                   discrepancy=float(disc), principle_satisfied=satisfied)

    raise ValueError(f"unknown method {method!r}")
