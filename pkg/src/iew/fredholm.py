"""Solvers and diagnostics for second-kind equations u = mu*K*u + f.

The discrete model is the weighted-l2 space attached to a quadrature
rule.  All null-space computations run on the similarity transform
B = D^{1/2} (I - mu*M) D^{-1/2}, whose Euclidean SVD maps back to
orthonormal bases in the weighted inner product.

Solver families:

* ``solve_degenerate``    -- finite-rank kernels via the M x M moment system
* ``solve_second_kind``   -- direct solve with full alternative reporting
* ``eig_decompose`` / ``solve_selfadjoint_spectral`` -- selfadjoint resolvent
* ``solve_iterative``     -- plain / resolvent / symmetrized / normal iterations
* ``solve_projection``    -- Galerkin in discrete Fourier or Legendre bases
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import DiscreteOperator, QuadRule


class NotSelfAdjointError(ValueError):
    """The operation requires a selfadjoint (symmetric-kernel) operator."""


class ResonanceError(RuntimeError):
    """The resolvent parameter hit a characteristic value with a resonant load."""


@dataclass
class SolveSpec:
    """Right-hand side and spectral parameters of a second-kind problem."""

    rhs: np.ndarray
    mu: complex = 1.0
    lam: complex = 0.0

    def validated(self, op: DiscreteOperator) -> "SolveSpec":
        rhs = np.asarray(self.rhs)
        if rhs.shape != (op.n,):
            raise ValueError(f"rhs length {rhs.shape} does not match operator size {op.n}")
        return self


@dataclass
class AlternativeReport:
    """Fredholm-alternative diagnostics for I - mu*K.

    ``null_basis`` / ``adjoint_null_basis`` hold orthonormal columns in the
    weighted inner product.  ``general_solution_offsets`` are the
    coefficients of the returned particular solution along the null basis
    (zero for the minimal-norm representative); adding arbitrary constants
    to them sweeps the whole solution family.
    """

    null_dim: int
    adjoint_null_dim: int
    null_basis: np.ndarray
    adjoint_null_basis: np.ndarray
    solvable: bool
    general_solution_offsets: np.ndarray


@dataclass
class SolveReport:
    solution: np.ndarray
    residual: float
    null_dim: int = 0
    solvable: bool = True


@dataclass
class IterativeReport:
    solution: np.ndarray
    iterations: int
    residual_history: np.ndarray
    converged: bool
    diverged: bool = False
    variant: str = "plain"
    rho_estimate: float | None = None
    norm_estimate: float | None = None
    m: float | None = None
    M: float | None = None


@dataclass
class EigenDecomposition:
    """Descending real eigenvalues with weighted-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray         # column j is u_{0j} on the nodes
    rule: QuadRule

    def characteristic_values(self, cutoff: float = 1e-13) -> np.ndarray:
        """mu_j = 1/lambda_j for the eigenvalues that are numerically nonzero."""
        lam = self.eigenvalues
        scale = np.max(np.abs(lam)) if len(lam) else 1.0
        keep = np.abs(lam) > cutoff * max(scale, 1.0)
        return 1.0 / lam[keep]


# ---------------------------------------------------------------------------
# Degenerate kernels
# ---------------------------------------------------------------------------
def solve_degenerate(a_funcs, b_funcs, mu, f, rule: QuadRule):
    """Solve u = mu*K*u + f for K(x,y) = sum_m a_m(x) conj(b_m(y)).

    Reduces to the M x M system u_p = mu sum_m (a_m, b_p) u_m + f_p and
    reconstructs u(x) = mu sum_m a_m(x) u_m + f(x).  Returns
    ``(solution samples, characteristic values)`` where the characteristic
    values are the reciprocals of the nonzero eigenvalues of the moment
    matrix.

    Raises ``np.linalg.LinAlgError`` when mu is a characteristic value and
    f is not orthogonal to the adjoint null space (consistent with the
    alternative); use ``solve_second_kind`` for the full report.
    """
    M = len(a_funcs)
    if M < 1 or len(b_funcs) != M:
        raise ValueError("a_funcs and b_funcs must be nonempty and of equal length")
    x = rule.nodes
    A_samples = np.array([np.asarray(a(x), dtype=complex) for a in a_funcs])   # (M, n)
    B_samples = np.array([np.asarray(b(x), dtype=complex) for b in b_funcs])
    f_samples = np.asarray(f(x), dtype=complex)

    # a_{pm} = (a_m, b_p), f_p = (f, b_p) in the weighted inner product
    amat = np.array([[rule.inner(A_samples[m], B_samples[p]) for m in range(M)]
                     for p in range(M)])
    fvec = np.array([rule.inner(f_samples, B_samples[p]) for p in range(M)])

    sys_matrix = np.eye(M, dtype=complex) - mu * amat
    # rank check for honest alternative behaviour at characteristic mu
    svals = np.linalg.svd(sys_matrix, compute_uv=False)
    if svals[-1] < 1e-12 * max(svals[0], 1.0):
        # singular system: solvable only if rhs is in the range
        u_m, res, _, _ = np.linalg.lstsq(sys_matrix, fvec, rcond=1e-12)
        if np.linalg.norm(sys_matrix @ u_m - fvec) > 1e-8 * max(np.linalg.norm(fvec), 1e-30):
            raise np.linalg.LinAlgError(
                "mu is a characteristic value and f is not solvable (alternative fails)"
            )
    else:
        u_m = np.linalg.solve(sys_matrix, fvec)

    solution = mu * (A_samples.T @ u_m) + f_samples
    eigs = np.linalg.eigvals(amat)
    char_values = 1.0 / eigs[np.abs(eigs) > 1e-13 * max(1.0, np.max(np.abs(eigs)))]
    return solution, char_values


# ---------------------------------------------------------------------------
# Direct solve with alternative report
# ---------------------------------------------------------------------------
def solve_second_kind(op: DiscreteOperator, spec: SolveSpec, tol: float = 1e-10,
                      orth_tol: float = 1e-8):
    """Solve u = mu*K*u + f, reporting the full Fredholm alternative.

    Singular values of I - mu*M below ``tol`` times the largest one are
    treated as null directions.  When the null space is nontrivial the
    right-hand side is tested for orthogonality to the adjoint null basis
    (threshold ``orth_tol`` relative to ||f||) and the minimal-norm
    particular solution is returned.
    """
    spec = spec.validated(op)
    f = np.asarray(spec.rhs, dtype=complex)
    n = op.n
    w_sqrt = np.sqrt(op.rule.weights)

    B = np.eye(n, dtype=complex) - spec.mu * op.weighted_matrix()
    U, s, Vh = np.linalg.svd(B)
    cutoff = tol * max(s[0], 1e-300)
    null_mask = s < cutoff
    null_dim = int(np.count_nonzero(null_mask))

    null_basis = (Vh.conj().T[:, null_mask]) / w_sqrt[:, None]
    adjoint_null_basis = U[:, null_mask] / w_sqrt[:, None]

    fs = w_sqrt * f
    fnorm = np.linalg.norm(fs)
    adj_coeffs = U[:, null_mask].conj().T @ fs
    solvable = bool(np.all(np.abs(adj_coeffs) <= orth_tol * max(fnorm, 1e-30)))

    keep = ~null_mask
    us = Vh.conj().T[:, keep] @ ((U[:, keep].conj().T @ fs) / s[keep])
    u = us / w_sqrt

    residual_vec = u - spec.mu * op.apply(u) - f
    residual = op.rule.norm(residual_vec) / max(op.rule.norm(f), 1e-30)
    offsets = null_basis.conj().T @ (op.rule.weights * u) if null_dim else np.zeros(0)

    report = SolveReport(solution=u, residual=float(residual),
                         null_dim=null_dim, solvable=solvable)
    alt = AlternativeReport(
        null_dim=null_dim, adjoint_null_dim=null_dim,
        null_basis=null_basis, adjoint_null_basis=adjoint_null_basis,
        solvable=solvable, general_solution_offsets=offsets,
    )
    return report, alt


# ---------------------------------------------------------------------------
# Selfadjoint spectral machinery
# ---------------------------------------------------------------------------
def eig_decompose(op: DiscreteOperator, sym_tol: float = 1e-10) -> EigenDecomposition:
    """Eigendecomposition of a selfadjoint operator in the weighted model.

    Works on the Hermitian similarity D^{1/2} M D^{-1/2}; eigenvalues come
    out real and descending, eigenvectors orthonormal in the quadrature
    inner product.
    """
    S = op.weighted_matrix()
    herm_defect = np.linalg.norm(S - S.conj().T)
    if herm_defect > sym_tol * max(np.linalg.norm(S), 1.0):
        raise NotSelfAdjointError(
            f"operator is not selfadjoint (defect {herm_defect:.2e}); "
            "eig_decompose needs a symmetric kernel"
        )
    S = 0.5 * (S + S.conj().T)
    lam, V = np.linalg.eigh(S)
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    V = V[:, order]
    vectors = V / np.sqrt(op.rule.weights)[:, None]
    return EigenDecomposition(eigenvalues=lam, eigenvectors=vectors, rule=op.rule)


def solve_selfadjoint_spectral(decomp: EigenDecomposition, f, lam: complex,
                               resonance_tol: float = 1e-8) -> np.ndarray:
    """Resolvent solve of u = lam*K*u + f through the eigenexpansion.

    u = f0 + sum_j mu_j f_j / (mu_j - lam) u_{0j}, with f0 the component of
    f in N(K) (it passes through untouched, so u - lam*K*u = f holds on the
    discrete level).  A lam within ``resonance_tol`` of a characteristic
    value raises ``ResonanceError`` unless the corresponding load f_j
    vanishes, in which case the resonant term is dropped.
    """
    f = np.asarray(f, dtype=complex)
    rule = decomp.rule
    eigs = decomp.eigenvalues
    scale = max(np.max(np.abs(eigs)), 1e-300)
    nonzero = np.abs(eigs) > 1e-13 * scale

    coeffs = decomp.eigenvectors.conj().T @ (rule.weights * f)   # f_j = (f, u_{0j})
    fnorm = max(rule.norm(f), 1e-30)

    u = f.copy()
    for j in np.nonzero(nonzero)[0]:
        mu_j = 1.0 / eigs[j]
        f_j = coeffs[j]
        if abs(mu_j - lam) <= resonance_tol * max(1.0, abs(mu_j)):
            if abs(f_j) > 1e-10 * fnorm:
                raise ResonanceError(
                    f"lam={lam} is resonant with characteristic value mu_{j+1}={mu_j}"
                )
            u -= f_j * decomp.eigenvectors[:, j]      # drop the resonant term
            continue
        u += (mu_j * f_j / (mu_j - lam) - f_j) * decomp.eigenvectors[:, j]
    return u


def spectral_radius(op: DiscreteOperator, iters: int = 64, seed: int = 0) -> float:
    """Power-iteration estimate of rho(A) with Rayleigh acceleration.

    Exact 0 for nilpotent matrices (the iterate hits the zero vector).
    """
    if iters < 8:
        raise ValueError("need iters >= 8")
    M = op.matrix
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.n)
    if np.iscomplexobj(M):
        v = v + 1j * rng.standard_normal(op.n)
    v = v / np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        est = abs(np.vdot(v, w))         # |Rayleigh quotient|, v normalized
        v = w / nw
    return float(est)


# ---------------------------------------------------------------------------
# Iterative solvers
# ---------------------------------------------------------------------------
def _operator_norm(op: DiscreteOperator, mu: complex = 1.0) -> float:
    return float(np.linalg.svd(mu * op.weighted_matrix(), compute_uv=False)[0])


def solve_iterative(op: DiscreteOperator, spec: SolveSpec, variant: str = "plain",
                    max_iter: int = 500, tol: float = 1e-12,
                    m: float | None = None, M: float | None = None) -> IterativeReport:
    """Iterative solution in one of four variants.

    plain        u_{n+1} = mu*K*u_n + f          (needs ||mu*K|| < 1)
    resolvent    lam*u_{n+1} = K*u_n + f          (needs |lam| > rho(K))
    symmetrized  K*u = f for selfadjoint 0 < m <= K <= M via
                 u_{n+1} = u_n - 2(K*u_n - f)/(m+M)
    normal       K*u = f through the normal equations K^* K u = K^* f,
                 then the symmetrized step with bounds s_min^2, s_max^2

    Divergence (five consecutive growing residuals) stops the run and is
    reported, never silently returned as a converged answer.
    """
    spec = spec.validated(op)
    f = np.asarray(spec.rhs, dtype=complex)
    rule = op.rule
    Mat = op.matrix
    norm_est = None
    rho_est = None

    if variant == "plain":
        step = lambda u: spec.mu * (Mat @ u) + f
        residual = lambda u: rule.norm(u - spec.mu * (Mat @ u) - f)
        norm_est = _operator_norm(op, spec.mu)
    elif variant == "resolvent":
        if spec.lam == 0:
            raise ValueError("resolvent variant needs a nonzero lam")
        step = lambda u: ((Mat @ u) + f) / spec.lam
        residual = lambda u: rule.norm(spec.lam * u - (Mat @ u) - f)
        rho_est = spectral_radius(op)
    elif variant in ("symmetrized", "normal"):
        if variant == "normal":
            Astar = op.adjoint_matrix()
            A2 = Astar @ Mat
            rhs2 = Astar @ f
            if m is None or M is None:
                s = np.linalg.svd(op.weighted_matrix(), compute_uv=False)
                m = 0.99 * float(s[-1]) ** 2 if m is None else m
                M = 1.01 * float(s[0]) ** 2 if M is None else M
        else:
            A2 = Mat
            rhs2 = f
            if m is None or M is None:
                eigs = eig_decompose(op).eigenvalues
                m = 0.99 * float(eigs[-1]) if m is None else m
                M = 1.01 * float(eigs[0]) if M is None else M
        if not 0 < m <= M:
            raise ValueError(f"symmetrized iteration needs 0 < m <= M, got m={m}, M={M}")
        tau = 2.0 / (m + M)
        step = lambda u: u - tau * (A2 @ u - rhs2)
        residual = lambda u: rule.norm(A2 @ u - rhs2)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    u = f.copy()
    history = [residual(u)]
    grow = 0
    converged = False
    diverged = False
    it = 0
    for it in range(1, max_iter + 1):
        u = step(u)
        r = residual(u)
        history.append(r)
        if r <= tol:
            converged = True
            break
        if r > history[-2]:
            grow += 1
            if grow >= 5:
                diverged = True
                break
        else:
            grow = 0

    return IterativeReport(
        solution=u, iterations=it, residual_history=np.array(history),
        converged=converged, diverged=diverged, variant=variant,
        rho_estimate=rho_est, norm_estimate=norm_est, m=m, M=M,
    )


# ---------------------------------------------------------------------------
# Projection (Galerkin) method
# ---------------------------------------------------------------------------
def _basis_samples(family: str, n: int, rule: QuadRule) -> np.ndarray:
    x = rule.nodes
    a, b = rule.a, rule.b
    t = (x - a) / (b - a)
    cols = []
    if family == "legendre":
        from numpy.polynomial.legendre import legval
        for k in range(n):
            c = np.zeros(k + 1)
            c[k] = 1.0
            cols.append(legval(2.0 * t - 1.0, c))
    elif family == "fourier":
        cols.append(np.ones_like(x))
        k = 1
        while len(cols) < n:
            cols.append(np.cos(2.0 * np.pi * k * t))
            if len(cols) < n:
                cols.append(np.sin(2.0 * np.pi * k * t))
            k += 1
    else:
        raise ValueError(f"unknown basis family {family!r}")
    return np.array(cols).T        # (n_nodes, n)


def _orthonormalize(cols: np.ndarray, rule: QuadRule) -> np.ndarray:
    """Gram-Schmidt in the weighted inner product (two passes)."""
    Q = cols.astype(complex).copy()
    for j in range(Q.shape[1]):
        for _ in range(2):
            for i in range(j):
                Q[:, j] -= rule.inner(Q[:, j], Q[:, i]) * Q[:, i]
        nrm = rule.norm(Q[:, j])
        if nrm < 1e-14:
            raise ValueError("basis functions are linearly dependent on the grid")
        Q[:, j] /= nrm
    return Q


@dataclass
class ProjectionStep:
    n: int
    solution: np.ndarray
    error_vs_full: float
    singular: bool = False


def solve_projection(op: DiscreteOperator, spec: SolveSpec, basis_family: str,
                     n_sequence) -> list[ProjectionStep]:
    """Galerkin solves in nested discrete bases, compared to the full solve.

    For each n the equation (I - mu*K) u = f is projected onto the first n
    orthonormalized basis vectors; the error against the full Nystrom
    solution on the same grid is reported.  A singular projected system is
    flagged and larger n are still attempted.
    """
    spec = spec.validated(op)
    f = np.asarray(spec.rhs, dtype=complex)
    full_report, _ = solve_second_kind(op, spec)
    if full_report.null_dim:
        raise ValueError("projection method requires N(I - mu*K) = {0}")
    u_full = full_report.solution

    B = np.eye(op.n, dtype=complex) - spec.mu * op.matrix
    steps = []
    for n in n_sequence:
        Q = _orthonormalize(_basis_samples(basis_family, n, op.rule), op.rule)
        G = Q.conj().T @ (op.rule.weights[:, None] * (B @ Q))
        rhs = Q.conj().T @ (op.rule.weights * f)
        try:
            c = np.linalg.solve(G, rhs)
            if not np.all(np.isfinite(c)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            steps.append(ProjectionStep(n=n, solution=np.full(op.n, np.nan),
                                        error_vs_full=np.inf, singular=True))
            continue
        u_n = Q @ c
        steps.append(ProjectionStep(n=n, solution=u_n,
                                    error_vs_full=op.rule.norm(u_n - u_full)))
    return steps
