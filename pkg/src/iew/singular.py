"""Singular machinery on the unit circle and the real line.

Circle computations run in Fourier-mode space, where the Cauchy operator
S acts exactly: S z^n = z^n for n >= 0 and S z^n = -z^n for n < 0, so
S^2 = I holds to rounding and no principal-value quadrature is needed.
Nonlinear steps (products, quotients, log, exp) are evaluated on an
oversampled grid and truncated back to a band limit; Holder-class data is
modelled by band-limited functions.

The Riemann problem Phi+ = G Phi- + g is solved by the canonical
factorization X+ = exp(Gamma+), X- = z^{-kappa} exp(Gamma-) with Gamma
the Cauchy integral of log[s^{-kappa} G(s)], taken literally in that
placement of the index deflation.  Solutions are normalized to be bounded
at infinity: for kappa >= 0 a free polynomial of degree kappa (kappa + 1
parameters) remains, kappa = -1 is unique, and kappa < -1 requires the
-kappa-1 moment conditions int_L g/X+ s^{k-1} ds = 0.

The dominant equation a*u + b*S*u = f reduces to the Riemann problem with
G = (a-b)/(a+b), g = f/(a+b) and u = Phi+ - Phi-.  An equation with an
additional compact part K(t,s) is handled by composing this solver with
the second-kind machinery (invert the dominant part, then solve the
resulting Fredholm equation); see the README recipe.

Line problems: full-line convolution equations are solved by FFT symbol
division; the half-line (Wiener-Hopf) equation by factorizing
1 - Ktilde(xi) through the half-line split of its logarithm, the line
analogue of the circle factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class IllPosedIndexError(RuntimeError):
    """A symbol passes too close to zero for a stable winding number."""


class GridRefinementError(RuntimeError):
    """Argument increments stayed too large after dyadic refinement."""


class SingularSymbolError(RuntimeError):
    """The convolution symbol vanishes on the frequency grid."""


class NonzeroIndexError(RuntimeError):
    """Wiener-Hopf equation with nonzero index is not uniquely solvable."""

    def __init__(self, kappa: int):
        super().__init__(f"index nonzero (kappa={kappa:+d}); equation not uniquely solvable")
        self.kappa = kappa


# ---------------------------------------------------------------------------
# Band-limited functions on the unit circle
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CircleFunction:
    """Band-limited function on the unit circle stored by Fourier modes.

    ``coeffs[k]`` is the coefficient of z^{k - nmax}, k = 0..2*nmax.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if len(c) % 2 == 0:
            raise ValueError("coeffs must have odd length 2*nmax + 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def nmax(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def coeff(self, k: int) -> complex:
        """Coefficient of z^k (zero outside the band)."""
        idx = k + self.nmax
        if idx < 0 or idx >= len(self.coeffs):
            return 0.0
        return complex(self.coeffs[idx])

    @classmethod
    def from_modes(cls, modes: dict, nmax: int | None = None) -> "CircleFunction":
        if nmax is None:
            nmax = max((abs(k) for k in modes), default=0)
        c = np.zeros(2 * nmax + 1, dtype=complex)
        for k, v in modes.items():
            c[k + nmax] = v
        return cls(c)

    @classmethod
    def constant(cls, value) -> "CircleFunction":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def from_samples(cls, samples) -> "CircleFunction":
        """Inverse of ``to_samples``; exact when the data is band-limited."""
        samples = np.asarray(samples, dtype=complex)
        n = len(samples)
        if n % 2 != 0:
            raise ValueError("need an even number of equispaced samples")
        F = np.fft.fft(samples) / n
        nmax = n // 2 - 1
        c = np.zeros(2 * nmax + 1, dtype=complex)
        for k in range(-nmax, nmax + 1):
            c[k + nmax] = F[k % n]
        return cls(c)

    def to_samples(self, n: int | None = None) -> np.ndarray:
        """Values at the circle-rule angles theta_j = 2 pi j / n."""
        if n is None:
            n = 2 * (self.nmax + 1)
        if n < 2 * self.nmax + 2:
            raise ValueError(f"need n >= {2 * self.nmax + 2} samples for band {self.nmax}")
        F = np.zeros(n, dtype=complex)
        for k in range(-self.nmax, self.nmax + 1):
            F[k % n] += self.coeffs[k + self.nmax]
        return np.fft.ifft(F) * n

    def pad_to(self, nmax: int) -> "CircleFunction":
        if nmax < self.nmax:
            raise ValueError("pad_to cannot shrink the band; use truncate")
        c = np.zeros(2 * nmax + 1, dtype=complex)
        c[nmax - self.nmax: nmax + self.nmax + 1] = self.coeffs
        return CircleFunction(c)

    def truncate(self, nmax: int) -> "CircleFunction":
        if nmax >= self.nmax:
            return self
        lo = self.nmax - nmax
        return CircleFunction(self.coeffs[lo: lo + 2 * nmax + 1].copy())

    def trim(self, rel_tol: float = 1e-14) -> "CircleFunction":
        """Drop trailing modes below ``rel_tol`` of the largest coefficient."""
        mag = np.abs(self.coeffs)
        scale = float(mag.max())
        if scale == 0.0:
            return CircleFunction.constant(0.0)
        keep = np.nonzero(mag > rel_tol * scale)[0]
        band = int(max(abs(int(keep.min()) - self.nmax), abs(int(keep.max()) - self.nmax)))
        return self.truncate(band)

    def shift(self, m: int) -> "CircleFunction":
        """Multiply by z^m (shift every mode up by m)."""
        nmax = self.nmax + abs(m)
        c = np.zeros(2 * nmax + 1, dtype=complex)
        c[m + abs(m): m + abs(m) + len(self.coeffs)] = self.coeffs
        return CircleFunction(c)

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.to_samples(_fine_n(self.nmax)))))

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _as_cf(other)
        nmax = max(self.nmax, other.nmax)
        return CircleFunction(self.pad_to(nmax).coeffs + other.pad_to(nmax).coeffs)

    def __sub__(self, other):
        other = _as_cf(other)
        nmax = max(self.nmax, other.nmax)
        return CircleFunction(self.pad_to(nmax).coeffs - other.pad_to(nmax).coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return CircleFunction(self.coeffs * other)
        other = _as_cf(other)
        nmax = self.nmax + other.nmax
        n = _even(2 * nmax + 2)
        prod = self.to_samples(n) * other.to_samples(n)
        return CircleFunction.from_samples(prod).truncate(nmax).trim()

    __rmul__ = __mul__

    def __neg__(self):
        return CircleFunction(-self.coeffs)


def _as_cf(x) -> CircleFunction:
    if isinstance(x, CircleFunction):
        return x
    return CircleFunction.constant(x)


def _even(n: int) -> int:
    return n if n % 2 == 0 else n + 1


def _fine_n(nmax: int, oversample: int = 4, floor: int = 256) -> int:
    n = 1
    while n < max(oversample * (2 * nmax + 2), floor):
        n *= 2
    return n


def circle_div(u: CircleFunction, v: CircleFunction, nmax: int | None = None) -> CircleFunction:
    """Sample-wise quotient truncated to a band (inexact for generic v)."""
    if nmax is None:
        nmax = max(u.nmax, v.nmax)
    n = _fine_n(max(u.nmax, v.nmax, nmax))
    vals = u.to_samples(n) / v.to_samples(n)
    return CircleFunction.from_samples(vals).truncate(min(nmax, n // 2 - 1)).trim()


def circle_exp(u: CircleFunction) -> CircleFunction:
    n = _fine_n(u.nmax)
    return CircleFunction.from_samples(np.exp(u.to_samples(n))).trim()


# ---------------------------------------------------------------------------
# Cauchy operator and Plemelj limits (exact in mode space)
# ---------------------------------------------------------------------------
def cauchy_apply(u: CircleFunction) -> CircleFunction:
    """S u = (1/(i pi)) p.v. int_L u(s)/(s - t) ds, mode-exact on the circle."""
    k = np.arange(-u.nmax, u.nmax + 1)
    return CircleFunction(np.where(k >= 0, 1.0, -1.0) * u.coeffs)


def plemelj_limits(u: CircleFunction):
    """Boundary values of the Cauchy integral of u from inside/outside.

    Phi+ keeps the nonnegative modes of u, Phi- is minus the negative
    ones, so Phi+ - Phi- = u and Phi+ + Phi- = S u identically.
    """
    k = np.arange(-u.nmax, u.nmax + 1)
    plus = CircleFunction(np.where(k >= 0, u.coeffs, 0.0))
    minus = CircleFunction(np.where(k < 0, -u.coeffs, 0.0))
    return plus, minus


def _winding_from_values(values: np.ndarray) -> tuple[float, float]:
    ratios = values[np.arange(1, len(values) + 1) % len(values)] / values
    inc = np.angle(ratios)
    return float(np.sum(inc) / (2.0 * np.pi)), float(np.max(np.abs(inc)))


def winding_number(G: CircleFunction, min_abs: float = 1e-8,
                   max_n: int = 1 << 20) -> int:
    """Winding of G around 0 by summed argument increments.

    The grid is refined dyadically until every increment is below pi/2;
    a symbol dipping under ``min_abs`` raises ``IllPosedIndexError``.
    """
    n = _fine_n(G.nmax)
    while True:
        v = G.to_samples(n)
        if np.min(np.abs(v)) < min_abs:
            raise IllPosedIndexError(f"symbol passes within {min_abs} of zero")
        total, max_inc = _winding_from_values(v)
        if max_inc < np.pi / 2:
            k = int(round(total))
            if abs(total - k) > 0.05:
                raise GridRefinementError(f"winding {total} did not converge to an integer")
            return k
        if n >= max_n:
            raise GridRefinementError("argument increments stayed >= pi/2 after refinement")
        n *= 2


def index(a: CircleFunction, b: CircleFunction, max_n: int = 1 << 20) -> int:
    """Noether index: winding number of (a - b)/(a + b).

    Argument increments >= pi/2 between adjacent nodes trigger dyadic
    refinement (a and b are band-limited, so finer samples are exact).
    """
    n = _fine_n(max(a.nmax, b.nmax))
    while True:
        av, bv = a.to_samples(n), b.to_samples(n)
        if min(np.min(np.abs(av - bv)), np.min(np.abs(av + bv))) < 1e-8:
            raise IllPosedIndexError("a(t) +- b(t) vanishes on the grid; index undefined")
        total, max_inc = _winding_from_values((av - bv) / (av + bv))
        if max_inc < np.pi / 2:
            k = int(round(total))
            if abs(total - k) > 0.05:
                raise GridRefinementError(f"winding {total} did not converge to an integer")
            return k
        if n >= max_n:
            raise GridRefinementError("argument increments stayed >= pi/2 after refinement")
        n *= 2


# ---------------------------------------------------------------------------
# Riemann problem (Theorem-7 machinery)
# ---------------------------------------------------------------------------
@dataclass
class RiemannProblem:
    G: CircleFunction
    g: CircleFunction
    kappa: int = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        v = self.G.to_samples(_fine_n(self.G.nmax))
        if np.min(np.abs(v)) <= 1e-8:
            raise IllPosedIndexError("G must be nowhere zero on the circle")
        if self.kappa is None:
            self.kappa = winding_number(self.G)


@dataclass
class RiemannSolution:
    """Canonical factors, boundary values, and the solvability report.

    For kappa >= 0 the general solution adds X * P with P any polynomial
    of degree ``free_poly_degree`` (kappa + 1 free parameters); call
    ``family_member`` to realize one.  For kappa < -1 the moment residuals
    of the orthogonality conditions are listed; the solution fields are
    populated only when they all vanish.
    """

    kappa: int
    X_plus: CircleFunction
    X_minus: CircleFunction
    Gamma: CircleFunction
    psi_plus: CircleFunction
    psi_minus: CircleFunction
    phi_plus: CircleFunction | None
    phi_minus: CircleFunction | None
    free_poly_degree: int | None
    solvability_conditions: np.ndarray
    solvable: bool

    def family_member(self, poly_coeffs) -> tuple[CircleFunction, CircleFunction]:
        """Boundary values with P(z) = sum_m poly_coeffs[m] z^m added."""
        if self.free_poly_degree is None:
            raise ValueError("no free polynomial for kappa < 0")
        if len(poly_coeffs) > self.free_poly_degree + 1:
            raise ValueError(f"polynomial degree exceeds kappa={self.kappa}")
        P = CircleFunction.from_modes({m: c for m, c in enumerate(poly_coeffs)},
                                      nmax=max(self.free_poly_degree, 1))
        return self.X_plus * (self.psi_plus + P), self.X_minus * (self.psi_minus + P)


def _continuous_log_samples(values: np.ndarray) -> np.ndarray:
    """log of nonvanishing samples with a continuously tracked argument."""
    ratios = values[np.arange(1, len(values) + 1) % len(values)] / values
    inc = np.angle(ratios)
    if np.max(np.abs(inc)) >= np.pi / 2:
        raise GridRefinementError("branch tracking failed; refine the grid")
    phase = np.angle(values[0]) + np.concatenate([[0.0], np.cumsum(inc[:-1])])
    return np.log(np.abs(values)) + 1j * phase


def solve_riemann(p: RiemannProblem, solvability_tol: float = 1e-8) -> RiemannSolution:
    """Solve Phi+ = G Phi- + g with the canonical-function factorization."""
    kappa = p.kappa
    G0 = p.G.shift(-kappa)              # winding-free symbol z^{-kappa} G(z)

    n = _fine_n(G0.nmax)
    log_samples = None
    while log_samples is None:
        try:
            log_samples = _continuous_log_samples(G0.to_samples(n))
        except GridRefinementError:
            n *= 2
            if n > (1 << 20):
                raise
    gamma = CircleFunction.from_samples(log_samples).trim()
    gamma_plus, gamma_minus = plemelj_limits(gamma)
    X_plus = circle_exp(gamma_plus)
    X_minus = circle_exp(gamma_minus).shift(-kappa)

    psi = circle_div(p.g, X_plus, nmax=p.g.nmax + X_plus.nmax)
    psi_plus, psi_minus = plemelj_limits(psi)

    conditions = np.array([2j * np.pi * psi.coeff(-k) for k in range(1, -kappa)]) \
        if kappa < -1 else np.zeros(0, dtype=complex)
    solvable = bool(np.all(np.abs(conditions) <= solvability_tol))

    if solvable:
        phi_plus = X_plus * psi_plus
        phi_minus = X_minus * psi_minus
    else:
        phi_plus = phi_minus = None

    return RiemannSolution(
        kappa=kappa, X_plus=X_plus, X_minus=X_minus, Gamma=gamma,
        psi_plus=psi_plus, psi_minus=psi_minus,
        phi_plus=phi_plus, phi_minus=phi_minus,
        free_poly_degree=kappa if kappa >= 0 else None,
        solvability_conditions=np.abs(conditions), solvable=solvable,
    )


@dataclass
class DominantSolution:
    u: CircleFunction
    riemann: RiemannSolution
    residual: float
    free_params: int
    solvable: bool


def solve_dominant(a: CircleFunction, b: CircleFunction, f: CircleFunction,
                   tol: float = 1e-8) -> DominantSolution:
    """Solve the dominant singular equation a*u + b*S*u = f.

    Reduction to the Riemann problem with G = (a-b)/(a+b), g = f/(a+b)
    and u = Phi+ - Phi-.  The returned representative is the one whose
    Cauchy transform vanishes at infinity, so it satisfies the equation
    itself; for kappa > 0 another ``free_params = kappa`` homogeneous
    solutions exist (polynomials of degree < kappa through the family).
    """
    nmax = max(a.nmax, b.nmax, f.nmax)
    n = _fine_n(nmax)
    av, bv = a.to_samples(n), b.to_samples(n)
    if min(np.min(np.abs(av - bv)), np.min(np.abs(av + bv))) < 1e-8:
        raise IllPosedIndexError("a(t) +- b(t) vanishes; dominant equation ill posed")

    band = n // 2 - 1
    G = circle_div(a - b, a + b, nmax=band)
    g = circle_div(f, a + b, nmax=band)
    sol = solve_riemann(RiemannProblem(G=G, g=g))
    if not sol.solvable:
        return DominantSolution(u=None, riemann=sol, residual=np.inf,
                                free_params=0, solvable=False)

    phi_plus, phi_minus = sol.phi_plus, sol.phi_minus
    # Cauchy representability: Phi- may carry no modes >= 0 (kappa = -1
    # leaves a constant at infinity exactly when the moment m_0 != 0)
    stray = np.array([phi_minus.coeff(k) for k in range(0, max(1, -sol.kappa))])
    representable = bool(np.all(np.abs(stray) <= tol * max(1.0, f.norm_inf())))

    u = phi_plus - phi_minus
    ns = _fine_n(u.nmax)
    res = (a.to_samples(ns) * u.to_samples(ns)
           + b.to_samples(ns) * cauchy_apply(u).to_samples(ns) - f.to_samples(ns))
    residual = float(np.max(np.abs(res)))
    return DominantSolution(u=u, riemann=sol, residual=residual,
                            free_params=max(sol.kappa, 0),
                            solvable=representable)


# ---------------------------------------------------------------------------
# Full-line convolution equations
# ---------------------------------------------------------------------------
def _centered_fft(samples: np.ndarray, dt: float, n_pad: int) -> np.ndarray:
    """DFT approximation of the transform int u(t) e^{-i xi t} dt.

    ``samples`` sit on the centered grid t_j = (j - n/2) dt and are
    zero-padded symmetrically to n_pad before the FFT.
    """
    n = len(samples)
    padded = np.zeros(n_pad, dtype=complex)
    lo = n_pad // 2 - n // 2
    padded[lo: lo + n] = samples
    return dt * np.fft.fft(np.fft.ifftshift(padded))


def _centered_ifft(spectrum: np.ndarray, dt: float, n: int) -> np.ndarray:
    """Inverse of ``_centered_fft``; returns the n central samples."""
    n_pad = len(spectrum)
    vals = np.fft.fftshift(np.fft.ifft(spectrum)) / dt
    lo = n_pad // 2 - n // 2
    return vals[lo: lo + n]


def solve_fullline_convolution(kernel_samples, f_samples, dt: float, lam: complex,
                               pad_factor: int = 4, decay_tol: float = 1e-10):
    """Solve lam*u(t) - int K(t-s) u(s) ds = f(t) on the whole line by FFT.

    Both sample arrays live on the same centered uniform grid.  They must
    have decayed at the grid ends (periodization control); the padded
    frequency grid must keep lam - Ktilde away from zero.
    """
    K = np.asarray(kernel_samples, dtype=complex)
    f = np.asarray(f_samples, dtype=complex)
    if len(K) != len(f) or len(K) % 2:
        raise ValueError("kernel and rhs need equal even lengths")
    for name, arr in (("kernel", K), ("rhs", f)):
        scale = np.max(np.abs(arr))
        if scale > 0 and max(abs(arr[0]), abs(arr[-1])) > decay_tol * scale:
            raise ValueError(f"{name} has not decayed to {decay_tol} at the grid ends")

    n_pad = pad_factor * len(K)
    K_hat = _centered_fft(K, dt, n_pad)
    symbol = lam - K_hat
    if np.min(np.abs(symbol)) < 1e-12 * max(abs(lam), np.max(np.abs(K_hat)), 1.0):
        raise SingularSymbolError("lam - Ktilde(xi) vanishes on the frequency grid")
    u_hat = _centered_fft(f, dt, n_pad) / symbol
    return _centered_ifft(u_hat, dt, len(K))


# ---------------------------------------------------------------------------
# Wiener-Hopf equations on the half line
# ---------------------------------------------------------------------------
@dataclass
class WienerHopfProblem:
    """u(t) - int_0^inf K(t-s) u(s) ds = f(t) on t >= 0.

    ``kernel_samples`` live on the symmetric centered grid of step dt
    covering [-T, T); ``f_samples`` on [0, T).  The symbol 1 - Ktilde and
    the index kappa are computed on a 4x padded frequency grid.
    """

    kernel_samples: np.ndarray
    f_samples: np.ndarray
    dt: float
    pad_factor: int = 4
    xi: np.ndarray = field(init=False)
    symbol: np.ndarray = field(init=False)
    kappa: int = field(init=False)

    def __post_init__(self):
        K = np.asarray(self.kernel_samples, dtype=complex)
        if len(K) % 2 or len(self.f_samples) != len(K) // 2:
            raise ValueError("need even kernel length and f on the nonnegative half")
        n_pad = self.pad_factor * len(K)
        K_hat = _centered_fft(K, self.dt, n_pad)
        symbol = 1.0 - K_hat
        if np.min(np.abs(symbol)) <= 1e-8:
            raise IllPosedIndexError("1 - Ktilde(xi) passes within 1e-8 of zero")
        symbol_sorted = np.fft.fftshift(symbol)
        phase = np.unwrap(np.angle(symbol_sorted))
        kappa_f = -(phase[-1] - phase[0]) / (2.0 * np.pi)
        kappa = int(round(kappa_f))
        if abs(kappa_f - kappa) > 0.05:
            raise GridRefinementError(f"index {kappa_f} is not close to an integer")
        self.xi = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n_pad, self.dt))
        self.symbol = symbol            # fft ordering
        self.kappa = kappa

    @property
    def t_half(self) -> np.ndarray:
        return self.dt * np.arange(len(self.f_samples))


def wiener_hopf_problem(kernel_fn: "callable", f_fn: "callable", T: float = 32.0,
                        dt: float = 1.0 / 2048.0, pad_factor: int = 4) -> WienerHopfProblem:
    """Sample a kernel on [-T, T) and a right-hand side on [0, T)."""
    n = int(round(2.0 * T / dt))
    if n % 2:
        n += 1
    t = (np.arange(n) - n // 2) * dt
    return WienerHopfProblem(
        kernel_samples=np.asarray(kernel_fn(t), dtype=complex),
        f_samples=np.asarray(f_fn(t[n // 2:]), dtype=complex),
        dt=dt, pad_factor=pad_factor,
    )


@dataclass
class WienerHopfSolution:
    t: np.ndarray
    u: np.ndarray
    xi: np.ndarray
    k_plus: np.ndarray      # analytic and zero-free in the upper half plane
    k_minus: np.ndarray     # analytic and zero-free in the lower half plane
    kappa: int


def factorize_symbol(p: WienerHopfProblem):
    """Split 1 - Ktilde = Kplus * Kminus by halving the log over t-support.

    The inverse transform ell(t) of the log symbol is split at t = 0.  A
    bare cut would leave a step of height ell(0) whose 1/xi transform tail
    aliases near the Nyquist frequency, so the decaying reference
    ell(0) e^{-|t|} is split analytically (transforms 1/(1 -+ i xi)) and
    only the stepless remainder goes through the DFT.
    """
    symbol_sorted = np.fft.fftshift(p.symbol)
    phase = np.unwrap(np.angle(symbol_sorted))
    log_sorted = np.log(np.abs(symbol_sorted)) + 1j * phase
    L = np.fft.ifftshift(log_sorted)

    n_pad = len(L)
    ell = np.fft.ifft(L) / p.dt             # samples of ell at t = m dt (mod grid)
    m = np.arange(n_pad)
    t = np.where(m < n_pad // 2, m, m - n_pad) * p.dt
    s0 = ell[0]
    rho = ell - s0 * np.exp(-np.abs(t))     # rho(0) = 0: no step after the cut

    plus_part = np.zeros_like(rho)          # support t < 0  -> upper factor
    minus_part = np.zeros_like(rho)         # support t > 0  -> lower factor
    minus_part[1: n_pad // 2] = rho[1: n_pad // 2]
    plus_part[n_pad // 2 + 1:] = rho[n_pad // 2 + 1:]
    plus_part[n_pad // 2] = minus_part[n_pad // 2] = 0.5 * rho[n_pad // 2]

    xi = 2.0 * np.pi * np.fft.fftfreq(n_pad, p.dt)
    log_kp = p.dt * np.fft.fft(plus_part) + s0 / (1.0 - 1j * xi)
    log_km = p.dt * np.fft.fft(minus_part) + s0 / (1.0 + 1j * xi)
    return np.exp(log_kp), np.exp(log_km)   # fft ordering


def solve_wiener_hopf(p: WienerHopfProblem) -> WienerHopfSolution:
    """Factorize and solve; raises ``NonzeroIndexError`` unless kappa = 0.

    All transforms are cyclic DFTs on the padded grid (exact round trips,
    no spectral truncation).  One-sided transforms carry the trapezoid
    endpoint correction -dt v(0)/2 so the jump at t = 0 costs O(dt^2),
    and the t = 0 sample of the returned solution (a two-sided midpoint
    on the grid) is replaced by one-sided quadratic extrapolation.
    """
    if p.kappa != 0:
        raise NonzeroIndexError(p.kappa)
    k_plus, k_minus = factorize_symbol(p)

    n = len(p.kernel_samples)
    n_pad = p.pad_factor * n
    f = np.asarray(p.f_samples, dtype=complex)

    # transform of f extended by zero to t < 0; f[0] is a one-sided value
    arr = np.zeros(n_pad, dtype=complex)
    arr[: len(f)] = f
    f_hat_plus = p.dt * np.fft.fft(arr) - p.dt * f[0] / 2.0

    w = np.fft.ifft(f_hat_plus / k_plus) / p.dt      # fft t-order: index 0 is t = 0
    w0_minus = 3.0 * w[-1] - 3.0 * w[-2] + w[-3]     # left limit at the t = 0 jump
    w_arr = np.zeros(n_pad, dtype=complex)
    w_arr[: n_pad // 2] = w[: n_pad // 2]
    w_hat_plus = p.dt * np.fft.fft(w_arr) - p.dt * w0_minus / 2.0

    u_full = np.fft.ifft(w_hat_plus / k_minus) / p.dt
    u = u_full[: n // 2].copy()
    u[0] = 3.0 * u[1] - 3.0 * u[2] + u[3]

    return WienerHopfSolution(
        t=p.t_half, u=u, xi=p.xi,
        k_plus=np.fft.fftshift(k_plus), k_minus=np.fft.fftshift(k_minus),
        kappa=p.kappa,
    )
