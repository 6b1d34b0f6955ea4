"""Quadrature rules and Nystrom assembly of integral operators.

Rules live on an interval [a, b], on the unit circle (parametrized by
angle), or on a sphere surface in R^3 (Gauss-Legendre in cos(theta) times
a uniform angle grid in phi).  A rule carries nodes, positive weights, and
the weighted inner product of the discrete L^2 model used by every solver
in the package.

``assemble_nystrom`` turns a kernel K(x, y) and a rule into the dense
collocation matrix M[i, j] = K(x_i, x_j) w_j.  Weakly singular surface
kernels (``laplace_g``/``helmholtz_g``) get an equivalent-disk diagonal
correction: the self-patch of 1/(4 pi |s-t|) over a flat patch of area A
integrates to sqrt(A/pi)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RegularGridInterpolator


class ConfigurationError(RuntimeError):
    """Raised when an operator is assembled with inconsistent options."""


def _readonly(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadRule:
    """Nodes and weights on an interval, the unit circle, or a sphere.

    Attributes
    ----------
    nodes : ndarray
        Shape (n,) abscissae (interval) or angles (circle); shape (n, 3)
        surface points (sphere).
    weights : ndarray
        Shape (n,), strictly positive; sums to the domain measure.
    domain : str
        One of "interval", "circle", "sphere".
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    a: float | None = None
    b: float | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    normals: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(self.nodes))
        object.__setattr__(self, "weights", _readonly(np.asarray(self.weights, dtype=float)))
        if self.normals is not None:
            object.__setattr__(self, "normals", _readonly(self.normals))
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n}")
        if np.any(self.weights <= 0):
            raise ValueError("all quadrature weights must be positive")
        total = self.weights.sum()
        if abs(total - self.measure) > 1e-12 * max(1.0, abs(self.measure)):
            raise ValueError(
                f"weights sum to {total!r}, expected domain measure {self.measure!r}"
            )

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def measure(self) -> float:
        if self.domain == "interval":
            return self.b - self.a
        if self.domain == "circle":
            return 2.0 * np.pi
        if self.domain == "sphere":
            return 4.0 * np.pi * self.radius**2
        raise ValueError(f"unknown domain {self.domain!r}")

    # -- discrete L^2(D) structure -------------------------------------
    def integrate(self, values) -> complex:
        return np.sum(self.weights * np.asarray(values))

    def inner(self, u, v) -> complex:
        """Weighted inner product (u, v) = sum_i w_i u_i conj(v_i)."""
        return np.sum(self.weights * np.asarray(u) * np.conj(v))

    def norm(self, u) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(np.asarray(u)) ** 2)))


def build_interval_rule(kind: str, n: int, a: float, b: float) -> QuadRule:
    """Build a trapezoid or Gauss-Legendre rule with n nodes on [a, b]."""
    if n < 2:
        raise ValueError(f"interval rule needs n >= 2, got {n}")
    if not a < b:
        raise ValueError(f"invalid bounds: a={a} must be < b={b}")
    if kind == "trapezoid":
        nodes = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2.0
    elif kind == "gauss_legendre":
        x, w = leggauss(n)
        nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
        weights = 0.5 * (b - a) * w
    else:
        raise ValueError(f"unknown rule kind {kind!r}")
    return QuadRule(nodes=nodes, weights=weights, domain="interval", a=a, b=b)


def build_circle_rule(n: int) -> QuadRule:
    """Equispaced angles theta_j = 2 pi j / n with weights 2 pi / n.

    Spectrally accurate for trigonometric polynomials of degree < n/2.
    """
    if n < 4 or n % 2 != 0:
        raise ValueError(f"circle rule needs even n >= 4, got {n}")
    nodes = 2.0 * np.pi * np.arange(n) / n
    weights = np.full(n, 2.0 * np.pi / n)
    return QuadRule(nodes=nodes, weights=weights, domain="circle")


def build_sphere_rule(n_theta: int, n_phi: int, radius: float, center=(0.0, 0.0, 0.0)) -> QuadRule:
    """Product rule on a sphere: Gauss-Legendre in cos(theta) x uniform phi.

    Weights are patch areas and sum to 4 pi radius^2.  Outward unit
    normals are stored for double-layer kernels and flux integrals.
    """
    if radius <= 0:
        raise ValueError(f"sphere radius must be positive, got {radius}")
    if n_theta < 4 or n_phi < 8:
        raise ValueError("sphere rule needs n_theta >= 4 and n_phi >= 8")
    center = np.asarray(center, dtype=float)
    ct, wt = leggauss(n_theta)          # cos(theta) nodes on [-1, 1]
    st = np.sqrt(1.0 - ct**2)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi

    ct_g, phi_g = np.meshgrid(ct, phi, indexing="ij")
    st_g = np.sqrt(1.0 - ct_g**2)
    normals = np.stack(
        [st_g * np.cos(phi_g), st_g * np.sin(phi_g), ct_g], axis=-1
    ).reshape(-1, 3)
    nodes = center[None, :] + radius * normals
    weights = (radius**2 * (2.0 * np.pi / n_phi) * np.repeat(wt, n_phi))
    return QuadRule(
        nodes=nodes, weights=weights, domain="sphere",
        center=center, radius=float(radius), normals=normals,
    )


# ---------------------------------------------------------------------------
# Kernel catalog
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Kernel:
    """A named bivariate kernel K(x, y), possibly complex-valued.

    ``ndim`` is 1 for kernels of scalar arguments and 3 for kernels of
    points in R^3 (surface kernels).  ``weakly_singular`` flags kernels
    that blow up like 1/|x-y| and need the diagonal correction.
    """

    name: str
    fn: Callable
    params: dict = field(default_factory=dict)
    symmetric: bool = False
    weakly_singular: bool = False
    ndim: int = 1

    def eval(self, x, y):
        return self.fn(x, y)


def kernel_const(c) -> Kernel:
    return Kernel("const", lambda x, y: np.broadcast_to(np.asarray(c), np.broadcast(np.asarray(x), np.asarray(y)).shape).copy(),
                  params={"c": c}, symmetric=True)


def kernel_sin_diff() -> Kernel:
    return Kernel("sin_diff", lambda x, y: np.sin(x - y))


def kernel_exp_abs() -> Kernel:
    return Kernel("exp_abs", lambda x, y: np.exp(-np.abs(x - y)), symmetric=True)


def _pair_dist(x, y):
    return np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)


def kernel_laplace_g() -> Kernel:
    def fn(x, y):
        r = _pair_dist(x, y)
        with np.errstate(divide="ignore"):
            return np.where(r == 0, 0.0, 1.0 / (4.0 * np.pi * np.where(r == 0, 1.0, r)))
    return Kernel("laplace_g", fn, symmetric=True, weakly_singular=True, ndim=3)


def kernel_helmholtz_g(k: float) -> Kernel:
    def fn(x, y):
        r = _pair_dist(x, y)
        safe = np.where(r == 0, 1.0, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r == 0, 0.0, np.exp(1j * k * safe) / (4.0 * np.pi * safe))
    return Kernel("helmholtz_g", fn, params={"k": k}, symmetric=True,
                  weakly_singular=True, ndim=3)


def kernel_tabulated(x_grid, y_grid, values) -> Kernel:
    """Bilinear interpolation of tabulated samples; extrapolation raises."""
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    values = np.asarray(values)
    interp = RegularGridInterpolator((x_grid, y_grid), values, method="linear",
                                     bounds_error=True)
    def fn(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        pts = np.stack([x.ravel(), y.ravel()], axis=-1)
        return interp(pts).reshape(x.shape)
    sym = (x_grid.shape == y_grid.shape and np.allclose(x_grid, y_grid)
           and np.allclose(values, values.T))
    return Kernel("tabulated", fn, params={"nx": len(x_grid), "ny": len(y_grid)},
                  symmetric=bool(sym))


def make_kernel(name: str, **params) -> Kernel:
    """Catalog lookup used by the config front end."""
    if name == "const":
        return kernel_const(params["c"])
    if name == "sin_diff":
        return kernel_sin_diff()
    if name == "exp_abs":
        return kernel_exp_abs()
    if name == "laplace_g":
        return kernel_laplace_g()
    if name == "helmholtz_g":
        return kernel_helmholtz_g(params["k"])
    if name == "tabulated":
        return kernel_tabulated(params["x_grid"], params["y_grid"], params["values"])
    raise ValueError(f"unknown kernel {name!r}")


# ---------------------------------------------------------------------------
# Nystrom assembly
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DiscreteOperator:
    """Dense Nystrom discretization of an integral operator.

    ``matrix[i, j] = K(x_i, x_j) w_j`` acts on node samples.  ``symmetric``
    records that the kernel is symmetric, in which case the operator is
    similar to a Hermitian matrix via D^{1/2} matrix D^{-1/2}.
    """

    rule: QuadRule
    matrix: np.ndarray
    symmetric: bool = False
    kernel_name: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.rule.n, self.rule.n):
            raise ValueError(f"matrix shape {m.shape} does not match rule size {self.rule.n}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def n(self) -> int:
        return self.rule.n

    def apply(self, u):
        return self.matrix @ np.asarray(u)

    def weighted_matrix(self) -> np.ndarray:
        """Similarity transform D^{1/2} M D^{-1/2} (Hermitian if selfadjoint)."""
        s = np.sqrt(self.rule.weights)
        return (self.matrix * s[:, None]) / s[None, :]

    def adjoint_matrix(self) -> np.ndarray:
        """Adjoint in the weighted inner product: D^{-1} M^H D."""
        w = self.rule.weights
        return (self.matrix.conj().T * w[None, :]) / w[:, None]


def assemble_nystrom(kernel: Kernel, rule: QuadRule, singular_correction: bool = False) -> DiscreteOperator:
    """Assemble M[i, j] = K(x_i, x_j) w_j on the rule's nodes.

    Weakly singular kernels on a sphere surface require
    ``singular_correction``; the diagonal is then replaced by the
    equivalent-disk self-patch value (plus the smooth ik/(4 pi) remainder
    for the Helmholtz kernel).
    """
    if kernel.weakly_singular and not singular_correction:
        raise ConfigurationError(
            f"kernel {kernel.name!r} is weakly singular; pass singular_correction=True"
        )
    if kernel.ndim == 3:
        if rule.domain != "sphere":
            raise ConfigurationError(f"kernel {kernel.name!r} needs a surface rule")
        X = rule.nodes[:, None, :]
        Y = rule.nodes[None, :, :]
    else:
        X = rule.nodes[:, None]
        Y = rule.nodes[None, :]
    vals = kernel.eval(X, Y)
    matrix = np.asarray(vals) * rule.weights[None, :]
    if kernel.weakly_singular:
        diag = np.sqrt(rule.weights / np.pi) / 2.0
        k = kernel.params.get("k", 0.0)
        if k:
            diag = diag + 1j * k * rule.weights / (4.0 * np.pi)
            matrix = matrix.astype(complex)
        np.fill_diagonal(matrix, diag)
    return DiscreteOperator(rule=rule, matrix=matrix, symmetric=kernel.symmetric,
                            kernel_name=kernel.name)
