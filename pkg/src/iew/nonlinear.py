"""Constructive fixed-point solvers for Urysohn equations u = A(u).

A(u)(x) = mu * int_D K(x, t, u(t)) dt + f(x) on a quadrature grid.  Three
solvers:

* ``solve_contraction`` -- plain iteration with a certified contraction
  constant q < 1 and the a-priori error bound q^n/(1-q) * ||u1 - u0||.
* ``solve_monotone``    -- sub/supersolution bracketing in the pointwise
  (nodewise) order; iterates squeeze the fixed point from both sides.
* ``solve_continuation``-- homotopy in a load parameter, warm-starting the
  inner solver along lambda = k/steps; per-step convergence doubles as
  the bounded-path check of the underlying fixed-point principle.

The nodewise order realizes the cone of nonnegative functions: it is
normal with constant 1 in the sup norm, which is what makes the monotone
iterates converge once they are squeezed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import QuadRule


class NotAContractionError(RuntimeError):
    """q >= 1 was estimated, or the iterates expanded for 5 straight steps."""


class MonotonicityError(RuntimeError):
    """The operator failed the order-preservation contract on the bracket."""


class PathFailureError(RuntimeError):
    """The inner solver failed at some point of the continuation path."""

    def __init__(self, lam: float, reason: Exception):
        super().__init__(f"continuation failed at lambda={lam}: {reason}")
        self.lam = lam


def estimate_contraction_constant(A: Callable, u0, n_dirs: int = 32,
                                  eps: float = 1e-4, seed: int = 0) -> float:
    """Max of sampled directional difference quotients, inflated by 10%."""
    rng = np.random.default_rng(seed)
    u0 = np.asarray(u0, dtype=float)
    base = A(u0)
    scale = eps * (1.0 + np.max(np.abs(u0)))
    q = 0.0
    for _ in range(n_dirs):
        d = rng.standard_normal(len(u0))
        d /= np.max(np.abs(d))
        q = max(q, float(np.max(np.abs(A(u0 + scale * d) - base)) / scale))
    return 1.1 * q


@dataclass
class UrysohnOperator:
    """A(u) = mu * int K(x, t, u(t)) dt + f on the rule's nodes.

    ``kernel(x, t, u)`` must broadcast over arrays; ``lipschitz_q`` is an
    optional analytic contraction constant that overrides estimation.
    """

    kernel: Callable
    mu: complex
    f: Callable
    rule: QuadRule
    lipschitz_q: float | None = None

    def __post_init__(self):
        self._x = self.rule.nodes[:, None]
        self._t = self.rule.nodes[None, :]
        self._w = self.rule.weights
        self._f = np.asarray(self.f(self.rule.nodes))
        probe = self.kernel(self._x, self._t, np.zeros((1, self.rule.n)))
        if not np.all(np.isfinite(np.asarray(probe))):
            raise ValueError("kernel is not finite on the sampled grid")

    def __call__(self, u) -> np.ndarray:
        vals = self.kernel(self._x, self._t, np.asarray(u)[None, :])
        return self.mu * (np.asarray(vals) @ self._w) + self._f


@dataclass
class ContractionReport:
    solution: np.ndarray
    iterations: int
    residual_history: np.ndarray      # sup-norm successive differences
    q: float
    apriori_bound: np.ndarray         # q^n/(1-q) * ||u1 - u0|| per step
    converged: bool


def solve_contraction(A: Callable, u0, max_iter: int = 200,
                      tol: float = 1e-12) -> ContractionReport:
    """Fixed-point iteration under a certified contraction constant q < 1.

    q comes from ``A.lipschitz_q`` when present, else from sampled
    difference quotients.  Expansion over 5 consecutive steps aborts with
    ``NotAContractionError`` rather than returning a wrong answer.
    """
    q = getattr(A, "lipschitz_q", None)
    if q is None:
        q = estimate_contraction_constant(A, u0)
    if q >= 1.0:
        raise NotAContractionError(f"estimated contraction constant q={q:.3f} >= 1")

    u = np.asarray(u0)
    u1 = A(u)
    first_step = float(np.max(np.abs(u1 - u)))
    diffs = [first_step]
    u = u1
    grow = 0
    converged = first_step <= tol
    it = 1
    while not converged and it < max_iter:
        it += 1
        u_next = A(u)
        d = float(np.max(np.abs(u_next - u)))
        diffs.append(d)
        if d > diffs[-2]:
            grow += 1
            if grow >= 5:
                raise NotAContractionError(
                    f"iterates expanded for 5 consecutive steps (last growth {d:.3e})"
                )
        else:
            grow = 0
        u = u_next
        if d <= tol:
            converged = True
    bound = q ** np.arange(1, len(diffs) + 1) / (1.0 - q) * first_step
    return ContractionReport(solution=u, iterations=it,
                             residual_history=np.array(diffs), q=q,
                             apriori_bound=bound, converged=converged)


@dataclass
class Bracket:
    """Subsolution v and supersolution w with v <= w, A(v) >= v, A(w) <= w."""

    v: np.ndarray
    w: np.ndarray

    @classmethod
    def checked(cls, A: Callable, v, w, slack: float = 1e-12) -> "Bracket":
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        if np.any(v > w + slack):
            raise MonotonicityError("bracket requires v <= w pointwise")
        if np.any(np.real(A(v)) < v - slack):
            raise MonotonicityError("v is not a subsolution: A(v) >= v fails")
        if np.any(np.real(A(w)) > w + slack):
            raise MonotonicityError("w is not a supersolution: A(w) <= w fails")
        return cls(v=v, w=w)


def _spot_check_monotone(A: Callable, b: Bracket, samples: int = 8,
                         seed: int = 0, slack: float = 1e-10):
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        t1 = rng.uniform(0.0, 1.0, size=len(b.v))
        t2 = rng.uniform(0.0, 1.0, size=len(b.v))
        lo = b.v + np.minimum(t1, t2) * (b.w - b.v)
        hi = b.v + np.maximum(t1, t2) * (b.w - b.v)
        if np.any(np.real(A(lo)) > np.real(A(hi)) + slack):
            raise MonotonicityError("operator is not order preserving on the bracket")


@dataclass
class MonotoneResult:
    solution: np.ndarray
    bracket: Bracket
    iterations: int
    converged: bool
    gap_history: np.ndarray


def solve_monotone(A: Callable, b: Bracket, max_iter: int = 500,
                   tol: float = 1e-10) -> MonotoneResult:
    """Monotone iteration v_n = A(v_{n-1}) up, w_n = A(w_{n-1}) down.

    The iterates must stay ordered and move monotonically; any violation
    raises ``MonotonicityError``.  Returns the bracket midpoint once
    ||w_n - v_n||_inf <= tol, or a non-converged report at max_iter.
    """
    _spot_check_monotone(A, b)
    v = b.v.astype(float).copy()
    w = b.w.astype(float).copy()
    gaps = [float(np.max(np.abs(w - v)))]
    converged = gaps[0] <= tol
    it = 0
    slack = 1e-10 * (1.0 + gaps[0])
    while not converged and it < max_iter:
        it += 1
        v_next = np.real(A(v))
        w_next = np.real(A(w))
        if np.any(v_next < v - slack) or np.any(w_next > w + slack):
            raise MonotonicityError("iterates lost monotonicity")
        if np.any(v_next > w_next + slack):
            raise MonotonicityError("bracket iterates crossed")
        v, w = v_next, w_next
        gaps.append(float(np.max(np.abs(w - v))))
        converged = gaps[-1] <= tol
    return MonotoneResult(solution=0.5 * (v + w), bracket=Bracket(v=v, w=w),
                          iterations=it, converged=converged,
                          gap_history=np.array(gaps))


@dataclass
class ContinuationResult:
    solution: np.ndarray
    lambdas: np.ndarray
    inner_iterations: list


def solve_continuation(A: Callable, steps: int, inner: str = "contraction",
                       u0=None, bracket: Bracket | None = None,
                       max_iter: int = 200, tol: float = 1e-12) -> ContinuationResult:
    """Homotopy solve of u = A(u, 1) through lambda_k = k/steps.

    ``A(u, lam)`` maps samples to samples.  Each step warm-starts from the
    previous solution (contraction inner) or re-brackets from the supplied
    bracket (monotone inner).  A failing step raises ``PathFailureError``
    carrying the lambda at which the path broke.
    """
    if steps < 1:
        raise ValueError("need at least one continuation step")
    if inner not in ("contraction", "monotone"):
        raise ValueError(f"unknown inner solver {inner!r}")
    if inner == "contraction" and u0 is None:
        raise ValueError("contraction inner solver needs a starting iterate u0")
    if inner == "monotone" and bracket is None:
        raise ValueError("monotone inner solver needs a bracket")

    lambdas = np.arange(1, steps + 1) / steps
    u = np.asarray(u0, dtype=float) if u0 is not None else 0.5 * (bracket.v + bracket.w)
    inner_iterations = []
    for lam in lambdas:
        frozen = lambda x, _lam=lam: A(x, _lam)
        try:
            if inner == "contraction":
                rep = solve_contraction(frozen, u, max_iter=max_iter, tol=tol)
                if not rep.converged:
                    raise NotAContractionError("inner iteration hit max_iter")
                u = rep.solution
                inner_iterations.append(rep.iterations)
            else:
                res = solve_monotone(frozen,
                                     Bracket.checked(frozen, bracket.v, bracket.w),
                                     max_iter=max_iter, tol=max(tol, 1e-12))
                if not res.converged:
                    raise MonotonicityError("monotone inner solve did not converge")
                u = res.solution
                inner_iterations.append(res.iterations)
        except (NotAContractionError, MonotonicityError) as exc:
            raise PathFailureError(float(lam), exc) from exc
    return ContinuationResult(solution=u, lambdas=lambdas,
                              inner_iterations=inner_iterations)
