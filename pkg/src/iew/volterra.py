"""Volterra solvers: u(x) = mu * int_a^x K(x,y) u(y) dy + f(x).

The triangle is discretized with the trapezoid rule on [a, x_i] (half
weights at both ends), which keeps the Nystrom matrix lower triangular so
the direct solver is plain forward substitution and never meets a
singular system for any mu (the diagonal entries 1 - mu*K(x_i,x_i)*h/2
are guarded; a vanishing one is a discretization artifact and triggers
node doubling).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fredholm import IterativeReport
from .quadrature import DiscreteOperator, Kernel, QuadRule, build_interval_rule


class DiagonalBreakdownError(RuntimeError):
    """Diagonal entry stayed numerically zero after the retry ladder."""


@dataclass
class VolterraProblem:
    kernel: Kernel
    mu: complex
    f: "callable"
    a: float
    b: float
    rule: QuadRule

    def __post_init__(self):
        if self.rule.domain != "interval" or self.rule.n < 8:
            raise ValueError("Volterra problems need an interval rule with n >= 8")
        # continuity surrogate: kernel finite on the sampled triangle
        x = self.rule.nodes
        tri = self.kernel.eval(x[:, None], x[None, :])
        if not np.all(np.isfinite(np.asarray(tri)[np.tril_indices(len(x))])):
            raise ValueError("kernel is not finite on the triangle a <= y <= x <= b")


def volterra_problem(kernel, mu, f, a, b, n) -> VolterraProblem:
    rule = build_interval_rule("trapezoid", n, a, b)
    return VolterraProblem(kernel=kernel, mu=mu, f=f, a=a, b=b, rule=rule)


def triangular_matrix(p: VolterraProblem) -> np.ndarray:
    """Trapezoid-on-triangle weights: V[i, j] = K(x_i, x_j) c_{ij}.

    c_{ij} = h for 0 < j < i, h/2 at j = 0 and j = i, zero above the
    diagonal; row 0 is empty (the integral from a to a).
    """
    x = p.rule.nodes
    n = p.rule.n
    h = (p.b - p.a) / (n - 1)
    K = np.asarray(p.kernel.eval(x[:, None], x[None, :]), dtype=complex)
    C = np.full((n, n), h)
    C[:, 0] = h / 2.0
    idx = np.arange(n)
    C[idx, idx] = h / 2.0
    C[np.triu_indices(n, 1)] = 0.0
    C[0, 0] = 0.0
    return K * C


def as_discrete_operator(p: VolterraProblem) -> DiscreteOperator:
    """The Volterra operator as a full (lower-triangular) Nystrom matrix.

    Feeding this to ``fredholm.solve_second_kind`` reproduces the direct
    solution: a Volterra equation is a special Fredholm one.
    """
    return DiscreteOperator(rule=p.rule, matrix=triangular_matrix(p),
                            symmetric=False, kernel_name=p.kernel.name)


@dataclass
class VolterraSolution:
    nodes: np.ndarray
    values: np.ndarray
    rule: QuadRule
    refinements: int = 0


def solve_volterra_direct(p: VolterraProblem, _retries: int = 3) -> VolterraSolution:
    """Forward substitution on the triangular system; O(h^2) accurate.

    A diagonal entry 1 - mu*K(x_i,x_i)*h/2 within 1e-14 of zero doubles
    the node count (up to 3 retries) before giving up.
    """
    V = triangular_matrix(p)
    n = p.rule.n
    diag = 1.0 - p.mu * np.diag(V)
    if np.min(np.abs(diag)) < 1e-14:
        if _retries <= 0:
            raise DiagonalBreakdownError(
                "triangular diagonal vanished even after node doubling"
            )
        finer = volterra_problem(p.kernel, p.mu, p.f, p.a, p.b, 2 * n)
        sol = solve_volterra_direct(finer, _retries - 1)
        sol.refinements += 1
        return sol

    f = np.asarray(p.f(p.rule.nodes), dtype=complex)
    u = np.zeros(n, dtype=complex)
    u[0] = f[0]
    for i in range(1, n):
        acc = V[i, :i] @ u[:i]
        u[i] = (f[i] + p.mu * acc) / diag[i]
    return VolterraSolution(nodes=p.rule.nodes, values=u, rule=p.rule)


def solve_volterra_picard(p: VolterraProblem, max_iter: int = 200,
                          tol: float = 1e-12) -> IterativeReport:
    """Picard iteration u_{n+1} = mu*V*u_n + f starting from u_1 = f.

    Converges for every mu (Theorem-2 behaviour: the iteration operator
    powers decay factorially); hitting max_iter means tol is too tight for
    the grid, not divergence.
    """
    V = triangular_matrix(p)
    f = np.asarray(p.f(p.rule.nodes), dtype=complex)
    u = f.copy()
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        u_next = p.mu * (V @ u) + f
        diff = float(np.max(np.abs(u_next - u)))
        history.append(diff)
        u = u_next
        if diff <= tol:
            converged = True
            break
    return IterativeReport(
        solution=u, iterations=it, residual_history=np.array(history),
        converged=converged, diverged=False, variant="picard",
    )
