"""Small-body acoustic scattering and effective-medium design.

Single scatterer: for a body of characteristic size a with ka << 1 the
scattered field is a monopole g(x, x1) Q plus higher-order terms, and Q
has closed asymptotic forms per boundary condition:

    impedance (u_N = zeta u):  Q ~ -zeta |S| u0(x1),   A = Q / (4 pi)
    Dirichlet (u = 0):         Q ~ -C u0(x1),          A = -C/(4 pi) u0(x1)
    Neumann  (u_N = 0):        dipole response through the polarizability
                               tensor; A = (|D|/4pi)(ik b_pq du0/dx_q b_p
                               + lap u0), anisotropic in the direction b.

The exact boundary-integral solves (``solve_boundary_integral``,
``polarizability_tensor``) act as oracles for those asymptotics on
spheres, where |S| = 4 pi a^2, C = 4 pi a, c = 4 pi.

Many bodies: points x_m carry impedances zeta_m = h(x_m)/a^kappa and are
placed so a region Delta holds ~ a^{-(2-kappa)} int_Delta N dx of them.
The effective field solves the M x M system

    u_j = u0_j - c sum_{m != j} g_jm h_m u_m a^{2-kappa},

which coarse-grains to cube centers (counts -> N_p |Delta_p|) and, as
a -> 0, to the continuum equation

    u(x) = u0(x) - c int g(x, y) h(y) N(y) u(y) dy,

equivalent to a medium with refraction n^2(x) = 1 - c N(x) h(x)/k^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .quadrature import QuadRule


class AsymptoticRegimeError(ValueError):
    """ka is too large for the small-body asymptotics."""


class InfeasibleDensityError(RuntimeError):
    """Requested particle density cannot honor the minimum spacing."""


class ScatteringSolveError(RuntimeError):
    """A dense scattering system came out singular or inaccurate."""


# ---------------------------------------------------------------------------
# Bodies and incident waves
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Body:
    """A small sphere with an impedance, Dirichlet, or Neumann boundary."""

    radius: float
    bc: str = "impedance"
    zeta: complex = 0.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("body radius must be positive")
        if self.bc not in ("impedance", "dirichlet", "neumann"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.bc == "impedance" and np.imag(self.zeta) > 0:
            raise ValueError("uniqueness requires Im zeta <= 0")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def surface_area(self) -> float:
        return 4.0 * np.pi * self.radius**2

    @property
    def volume(self) -> float:
        return 4.0 * np.pi * self.radius**3 / 3.0

    @property
    def capacitance(self) -> float:
        """Electrostatic capacitance of the sphere (Gaussian units): 4 pi a."""
        return 4.0 * np.pi * self.radius


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave u0(x) = exp(i k alpha . x) with |alpha| = 1."""

    k: float
    alpha: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("wavenumber k must be positive")
        alpha = np.asarray(self.alpha, dtype=float)
        if abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
            raise ValueError("alpha must be a unit vector")
        object.__setattr__(self, "alpha", alpha)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.k * (x @ self.alpha))

    def gradient(self, x) -> np.ndarray:
        return 1j * self.k * self.alpha * self(x)[..., None]

    def laplacian(self, x) -> np.ndarray:
        return -self.k**2 * self(x)


def _check_regime(body: Body, wave: IncidentWave, limit: float = 0.1):
    ka = wave.k * body.radius
    if ka > limit:
        raise AsymptoticRegimeError(f"ka = {ka:.3g} exceeds the small-body regime (<= {limit})")


def single_body_charge(body: Body, wave: IncidentWave) -> complex:
    """Leading-order total charge Q = int_S sigma dt of one small body."""
    _check_regime(body, wave)
    u0 = complex(wave(body.center))
    if body.bc == "impedance":
        return -body.zeta * body.surface_area * u0
    if body.bc == "dirichlet":
        return -body.capacitance * u0
    raise AsymptoticRegimeError(
        "Neumann bodies have no monopole at this order; use amplitude()"
    )


def amplitude(body: Body, wave: IncidentWave, beta,
              tensor: np.ndarray | None = None) -> complex:
    """Far-field amplitude for observation direction beta.

    Impedance and Dirichlet bodies scatter isotropically; the Neumann
    amplitude needs the polarizability tensor (computed on a default
    sphere rule when not supplied) and varies with beta . alpha.
    """
    _check_regime(body, wave)
    beta = np.asarray(beta, dtype=float)
    if abs(np.linalg.norm(beta) - 1.0) > 1e-10:
        raise ValueError("beta must be a unit vector")
    u0 = complex(wave(body.center))
    if body.bc == "impedance":
        return -body.zeta * body.surface_area * u0 / (4.0 * np.pi)
    if body.bc == "dirichlet":
        return -body.capacitance * u0 / (4.0 * np.pi)
    if tensor is None:
        rule = sphere_rule_for(body)
        tensor = polarizability_tensor(body, rule)
    grad = wave.gradient(body.center)
    lap = complex(wave.laplacian(body.center))
    return body.volume / (4.0 * np.pi) * complex(
        1j * wave.k * (beta @ tensor @ grad) + lap
    )


def sphere_rule_for(body: Body, n_theta: int = 16, n_phi: int = 32) -> QuadRule:
    from .quadrature import build_sphere_rule
    return build_sphere_rule(n_theta, n_phi, body.radius, body.center)


# ---------------------------------------------------------------------------
# Boundary-integral oracles on the sphere
# ---------------------------------------------------------------------------
def _single_layer_matrix(rule: QuadRule, k: float) -> np.ndarray:
    """G[i, j] = g_k(s_i, t_j) w_j with the equivalent-disk diagonal."""
    from .quadrature import assemble_nystrom, kernel_helmholtz_g, kernel_laplace_g
    kern = kernel_helmholtz_g(k) if k else kernel_laplace_g()
    return np.asarray(assemble_nystrom(kern, rule, singular_correction=True).matrix,
                      dtype=complex)


def _normal_derivative_matrix(rule: QuadRule, k: float) -> np.ndarray:
    """A[i, j] = 2 dg_k(s_i, t_j)/dN_{s_i} w_j on a sphere rule.

    On a sphere of radius a the kernel equals -g_k(r) (1 - i k r)/(2a)
    exactly, so the weakly singular part is -(1/a) times the single-layer
    one and the equivalent-disk diagonal scales accordingly (the smooth
    remainder vanishes at the diagonal).
    """
    s = rule.nodes[:, None, :]
    t = rule.nodes[None, :, :]
    diff = s - t
    r = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(r, 1.0)
    g = np.exp(1j * k * r) / (4.0 * np.pi * r)
    proj = np.einsum("ijk,ik->ij", diff, rule.normals) / r
    A = 2.0 * g * (1j * k - 1.0 / r) * proj * rule.weights[None, :]
    diag = -(1.0 / rule.radius) * np.sqrt(rule.weights / np.pi) / 2.0
    np.fill_diagonal(A, diag)
    return A


def polarizability_tensor(body: Body, rule: QuadRule) -> np.ndarray:
    """Dipole polarizability b_pq = (1/V) int_S t_p sigma_q dt of the body.

    sigma_q solves sigma_q = A0 sigma_q - 2 N_q with A0 the static
    normal-derivative operator; for a sphere the exact tensor is
    -(3/2) delta_pq (the hard-sphere Rayleigh limit fixes the sign).
    """
    if rule.domain != "sphere":
        raise ValueError("polarizability needs a sphere rule")
    A0 = _normal_derivative_matrix(rule, k=0.0)
    lhs = np.eye(rule.n) - np.real(A0)
    rel = rule.nodes - rule.center[None, :]
    sigma = np.linalg.solve(lhs, -2.0 * rule.normals)   # one column per axis
    volume = 4.0 * np.pi * rule.radius**3 / 3.0
    tensor = (rel * rule.weights[:, None]).T @ sigma / volume
    defect = np.max(np.abs(tensor - tensor.T))
    if defect > 1e-6 * max(1.0, np.max(np.abs(tensor))):
        raise ScatteringSolveError(
            f"polarizability came out asymmetric (defect {defect:.2e}); refine the rule"
        )
    return tensor


@dataclass
class BoundarySolution:
    sigma: np.ndarray
    Q: complex


def solve_boundary_integral(body: Body, wave: IncidentWave, rule: QuadRule) -> BoundarySolution:
    """Exact (numerical) oracle for the single-body charge.

    Impedance: the second-kind equation
    (A sigma - sigma)/2 - zeta int g sigma = zeta u0 - u0_N on S.
    Dirichlet: the first-kind single-layer equation int g sigma = -u0.
    No smallness checks: this is the reference the asymptotics are
    compared against.
    """
    if rule.domain != "sphere":
        raise ValueError("boundary solve needs a sphere rule")
    u0 = wave(rule.nodes)
    G = _single_layer_matrix(rule, wave.k)
    if body.bc == "impedance":
        u0n = 1j * wave.k * (rule.normals @ wave.alpha) * u0
        A = _normal_derivative_matrix(rule, wave.k)
        lhs = 0.5 * (A - np.eye(rule.n)) - body.zeta * G
        rhs = body.zeta * u0 - u0n
    elif body.bc == "dirichlet":
        lhs = G
        rhs = -u0
    else:
        raise ValueError("boundary oracle supports impedance and dirichlet bodies")
    sigma = np.linalg.solve(lhs, rhs)
    if not np.all(np.isfinite(sigma)):
        raise ScatteringSolveError("boundary system produced non-finite densities")
    return BoundarySolution(sigma=sigma, Q=complex(np.sum(rule.weights * sigma)))


# ---------------------------------------------------------------------------
# Clouds, media, and the homogenization chain
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Medium:
    """Continuum description: box, density N >= 0, impedance h (Im h <= 0)."""

    box: tuple
    N: Callable
    h: Callable
    c: float = 4.0 * np.pi
    k: float = 1.0

    def __post_init__(self):
        lo = np.asarray(self.box[0], dtype=float)
        hi = np.asarray(self.box[1], dtype=float)
        if np.any(hi <= lo):
            raise ValueError("medium box must have positive extent")
        object.__setattr__(self, "box", (lo, hi))
        probe = lo[None, :] + np.random.default_rng(0).uniform(size=(16, 3)) * (hi - lo)
        if np.any(np.asarray(self.N(probe)) < 0):
            raise ValueError("density N(x) must be nonnegative")
        if np.any(np.imag(np.asarray(self.h(probe))) > 1e-12):
            raise ValueError("impedance rule needs Im h <= 0")

    def n2(self, x) -> np.ndarray:
        return refraction(self, x)


def refraction(medium: Medium, x) -> np.ndarray:
    """Effective refraction coefficient n^2(x) = 1 - c N(x) h(x) / k^2."""
    x = np.asarray(x, dtype=float)
    return 1.0 - medium.c * np.asarray(medium.N(x)) * np.asarray(medium.h(x)) / medium.k**2


@dataclass(frozen=True)
class ParticleCloud:
    """Deterministically placed small bodies with per-point impedances."""

    points: np.ndarray
    radius: float
    kappa_dist: float
    zeta: np.ndarray
    h_values: np.ndarray
    c: float
    d: float
    b: float
    box: tuple
    seed: int
    separation_ok: bool

    @property
    def M(self) -> int:
        return len(self.points)


def _cube_grid(box, b: float):
    lo, hi = box
    extent = hi - lo
    counts = np.round(extent / b).astype(int)
    if np.any(np.abs(counts * b - extent) > 1e-9 * np.max(extent)):
        raise ValueError(f"cube side {b} does not tile the box extents {extent}")
    centers = [lo[i] + b * (np.arange(counts[i]) + 0.5) for i in range(3)]
    mesh = np.meshgrid(*centers, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1), counts


def place_particles(medium: Medium, a: float, kappa_dist: float,
                    b: float | None = None, seed: int = 0) -> ParticleCloud:
    """Place round(a^{-(2-kappa)} int_Delta N dx) points per cube Delta.

    Points sit on a jittered subgrid inside each cube (jitter pitch/8, so
    the spacing never drops below 3/4 of the subgrid pitch); placement is
    deterministic given the seed.  Raises ``InfeasibleDensityError`` when
    the requested density cannot keep bodies separated (spacing < 2a).
    """
    if not 0 <= kappa_dist < 1:
        raise ValueError("kappa_dist must lie in [0, 1)")
    lo, hi = medium.box
    if b is None:
        b = float(np.min(hi - lo)) / 4.0
    cube_centers, _ = _cube_grid(medium.box, b)

    rng = np.random.default_rng(seed)
    all_points = []
    min_pitch = np.inf
    for center in cube_centers:
        # midpoint subsample of int_Delta N dx
        offs = np.array([-0.25, 0.25]) * b
        sub = np.stack(np.meshgrid(*([offs] * 3), indexing="ij"), axis=-1).reshape(-1, 3)
        integral = float(np.mean(medium.N(center[None, :] + sub))) * b**3
        count = int(round(integral / a ** (2.0 - kappa_dist)))
        if count == 0:
            continue
        g = int(np.ceil(count ** (1.0 / 3.0)))
        pitch = b / g
        if 0.75 * pitch < 2.0 * a:
            raise InfeasibleDensityError(
                f"{count} bodies of radius {a} in a cube of side {b} cannot stay separated"
            )
        min_pitch = min(min_pitch, pitch)
        cells = rng.choice(g**3, size=count, replace=False)
        ijk = np.stack(np.unravel_index(np.sort(cells), (g, g, g)), axis=-1)
        base = center - b / 2.0 + (ijk + 0.5) * pitch
        jitter = rng.uniform(-pitch / 8.0, pitch / 8.0, size=base.shape)
        all_points.append(base + jitter)

    if not all_points:
        points = np.zeros((0, 3))
        d = np.inf
    else:
        points = np.concatenate(all_points)
        d = 0.75 * min_pitch
        if len(points) > 1:
            tree = cKDTree(points)
            dist, _ = tree.query(points, k=2)
            d = float(min(d, np.min(dist[:, 1])))

    h_values = np.asarray(medium.h(points)) if len(points) else np.zeros(0)
    zeta = h_values / a**kappa_dist
    separation_ok = bool(len(points) == 0 or (a <= d / 10.0 and d <= b / 10.0))
    return ParticleCloud(points=points, radius=a, kappa_dist=kappa_dist,
                         zeta=np.asarray(zeta), h_values=np.asarray(h_values),
                         c=medium.c, d=float(d), b=float(b), box=medium.box,
                         seed=seed, separation_ok=separation_ok)


def manual_cloud(points, radius: float, kappa_dist: float, h: Callable,
                 c: float = 4.0 * np.pi, box=None, b: float | None = None) -> ParticleCloud:
    """Wrap explicit point positions as a cloud (for constructed tests)."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if box is None:
        lo = points.min(axis=0) - radius
        hi = points.max(axis=0) + radius
        box = (lo, hi)
    else:
        box = (np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float))
    if b is None:
        b = float(np.max(box[1] - box[0]))
    if len(points) > 1:
        tree = cKDTree(points)
        dist, _ = tree.query(points, k=2)
        d = float(np.min(dist[:, 1]))
    else:
        d = np.inf
    h_values = np.asarray(h(points))
    return ParticleCloud(points=points, radius=radius, kappa_dist=kappa_dist,
                         zeta=h_values / radius**kappa_dist, h_values=h_values,
                         c=c, d=d, b=b, box=box, seed=0,
                         separation_ok=bool(radius <= d / 10.0 and d <= b / 10.0))


def _coupling_block(x_rows, x_cols, k: float) -> np.ndarray:
    diff = x_rows[:, None, :] - x_cols[None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    safe = np.where(r == 0, 1.0, r)
    return np.where(r == 0, 0.0, np.exp(1j * k * safe) / (4.0 * np.pi * safe))


def _greens_matrix(points, k: float, chunk: int = 1024) -> np.ndarray:
    n = len(points)
    G = np.empty((n, n), dtype=complex)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        G[lo:hi] = _coupling_block(points[lo:hi], points, k)
    return G


@dataclass
class ManyBodyField:
    points: np.ndarray
    u: np.ndarray
    Q: np.ndarray


def many_body_solve(cloud: ParticleCloud, wave: IncidentWave,
                    max_bodies: int = 20000) -> ManyBodyField:
    """Dense solve of the effective-field system at all particle points.

    u_j = u0_j - c sum_{m != j} g_jm h_m u_m a^{2 - kappa}; charges are
    Q_m = -c h_m u_m a^{2 - kappa}.
    """
    M = cloud.M
    if M < 1:
        raise ValueError("many_body_solve needs at least one body")
    if M > max_bodies:
        raise ScatteringSolveError(f"{M} bodies exceed the dense-solve budget {max_bodies}")
    u0 = wave(cloud.points)
    if M == 1:
        u = u0.copy()
    else:
        scale = cloud.c * cloud.radius ** (2.0 - cloud.kappa_dist)
        A = _greens_matrix(cloud.points, wave.k) * (scale * cloud.h_values)[None, :]
        A[np.diag_indices(M)] = 1.0
        u = np.linalg.solve(A, u0)
        resid = np.max(np.abs(A @ u - u0)) / max(np.max(np.abs(u0)), 1e-300)
        if not np.all(np.isfinite(u)) or resid > 1e-8:
            raise ScatteringSolveError(
                f"effective-field system is near singular (residual {resid:.2e}, "
                f"cond ~ {np.linalg.cond(A):.2e})"
            )
    Q = -cloud.c * cloud.h_values * u * cloud.radius ** (2.0 - cloud.kappa_dist)
    return ManyBodyField(points=cloud.points, u=u, Q=Q)


@dataclass
class CubeReduction:
    centers: np.ndarray
    u: np.ndarray
    deviation_vs_full: float | None


def reduce_to_cubes(cloud: ParticleCloud, medium: Medium, wave: IncidentWave,
                    compare_full: bool = True) -> CubeReduction:
    """Coarse-grained P x P version of the many-body system on cube centers.

    u_q = u0_q - c sum_{p != q} g_qp h_p u_p N_p |Delta_p|.  When
    ``compare_full`` is set the report includes the max relative deviation
    from the full solution averaged per cube.
    """
    centers, counts = _cube_grid(cloud.box, cloud.b)
    P = len(centers)
    u0 = wave(centers)
    if P == 1:
        u = u0.copy()
    else:
        weights = np.asarray(medium.h(centers)) * np.asarray(medium.N(centers)) * cloud.b**3
        A = _coupling_block(centers, centers, wave.k) * (cloud.c * weights)[None, :]
        A[np.diag_indices(P)] = 1.0
        u = np.linalg.solve(A, u0)

    deviation = None
    if compare_full and cloud.M:
        full = many_body_solve(cloud, wave)
        lo, _ = cloud.box
        idx = np.floor((cloud.points - lo[None, :]) / cloud.b).astype(int)
        idx = np.clip(idx, 0, counts - 1)
        flat = np.ravel_multi_index((idx[:, 0], idx[:, 1], idx[:, 2]), counts)
        sums = np.zeros(P, dtype=complex)
        np.add.at(sums, flat, full.u)
        occupancy = np.bincount(flat, minlength=P)
        mask = occupancy > 0
        avg = np.where(mask, sums / np.maximum(occupancy, 1), 0.0)
        deviation = float(np.max(np.abs(u[mask] - avg[mask]) / np.abs(avg[mask])))
    return CubeReduction(centers=centers, u=u, deviation_vs_full=deviation)


@dataclass
class EffectiveMediumField:
    grid: np.ndarray
    u: np.ndarray
    n2: np.ndarray
    _medium: Medium
    _wave: IncidentWave
    _cell_volume: float

    def evaluate_at(self, x) -> np.ndarray:
        """Post-evaluate u(x) = u0(x) - c int g(x, y) h N u dy off the grid."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        m, w = self._medium, self._wave
        dens = np.asarray(m.h(self.grid)) * np.asarray(m.N(self.grid)) * self.u
        g = _coupling_block(x, self.grid, w.k)
        return w(x) - m.c * self._cell_volume * (g @ dens)


def effective_medium_solve(medium: Medium, wave: IncidentWave, grid_n: int,
                           dense_limit: int = 17) -> EffectiveMediumField:
    """Nystrom solve of the continuum equation on a grid_n^3 cell grid.

    The weakly singular self-cell uses the equivalent-ball value
    R_eq^2/2 + i k V_cell/(4 pi) with R_eq the same-volume ball radius.
    Grids above ``dense_limit``^3 fall back to the Neumann series with a
    divergence guard (the dense matrix would not fit desk memory).
    """
    if grid_n < 1 or grid_n**3 > 32**3:
        raise ValueError("grid_n^3 must stay within desk scale (<= 32^3)")
    lo, hi = medium.box
    sides = (hi - lo) / grid_n
    cell_volume = float(np.prod(sides))
    axes = [lo[i] + sides[i] * (np.arange(grid_n) + 0.5) for i in range(3)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=-1)

    u0 = wave(grid)
    hN = np.asarray(medium.h(grid)) * np.asarray(medium.N(grid))
    r_eq = (3.0 * cell_volume / (4.0 * np.pi)) ** (1.0 / 3.0)
    self_weight = r_eq**2 / 2.0 + 1j * wave.k * cell_volume / (4.0 * np.pi)

    n = len(grid)
    if grid_n <= dense_limit:
        A = _greens_matrix(grid, wave.k) * cell_volume
        A[np.diag_indices(n)] = self_weight
        A = np.eye(n) + medium.c * A * hN[None, :]
        u = np.linalg.solve(A, u0)
        if not np.all(np.isfinite(u)):
            raise ScatteringSolveError("effective-medium system came out singular")
    else:
        def matvec(v):
            dens = hN * v
            out = self_weight * dens
            for s in range(0, n, 2048):
                e = min(s + 2048, n)
                out[s:e] += (_coupling_block(grid[s:e], grid, wave.k) * cell_volume) @ dens
            return medium.c * out

        u = u0.copy()
        prev = np.inf
        for _ in range(200):
            nxt = u0 - matvec(u)
            step = np.max(np.abs(nxt - u))
            if step > prev * 1.5:
                raise ScatteringSolveError("Neumann series diverges; use a dense grid size")
            if step < 1e-12:
                u = nxt
                break
            prev = step
            u = nxt

    return EffectiveMediumField(grid=grid, u=u, n2=refraction(medium, grid),
                                _medium=medium, _wave=wave, _cell_volume=cell_volume)
