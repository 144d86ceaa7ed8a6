"""Problem Hamiltonians, coupling operators, and filter functions.

The search Hamiltonian is diagonal with a degenerate excited manifold; the
coupling operator fixes the transition regime (random ETH-style, long-range
projector, short-range single bit flips, or the all-to-all graph Laplacian);
the filter function weights transitions by energy difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from dqsearch import linops

DEFAULT_GAP = 1.0
# Frequency window that the realizable filter must cover: the Grover spectrum
# plus margin.
DEFAULT_M_OMEGA = DEFAULT_GAP + 0.5
# Default erf window constants (steepness, upper shift, lower shift).
ERF_WINDOW_PARAMS = (4.0, 4.8, 3.2)
# Quadrature step for the numerical inverse Fourier transform of gamma_hat.
KERNEL_QUADRATURE_STEP = 1e-3


@dataclass(frozen=True)
class GroverHamiltonian:
    """Diagonal unstructured-search Hamiltonian: -gap on marked indices."""

    n: int
    marked: frozenset[int]
    gap: float = DEFAULT_GAP

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def energies(self) -> np.ndarray:
        lam = np.zeros(self.dim)
        lam[sorted(self.marked)] = -self.gap
        return lam

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.energies)

    @property
    def ground_index(self) -> int:
        if len(self.marked) != 1:
            raise ValueError("ground_index is defined for a single marked element")
        return next(iter(self.marked))


def grover_hamiltonian(n: int, marked, gap: float = DEFAULT_GAP) -> GroverHamiltonian:
    marked = frozenset(int(m) for m in marked)
    dim = 2**n
    if not marked or len(marked) >= dim:
        raise ValueError("marked set must be nonempty and a strict subset")
    if any(m < 0 or m >= dim for m in marked):
        raise ValueError("marked index out of range")
    if gap <= 0:
        raise ValueError("gap must be positive")
    return GroverHamiltonian(n, marked, gap)


REGIMES = ("eth", "projector", "bitflip", "laplacian")


@dataclass(frozen=True)
class CouplingSpec:
    """Coupling operator A with regime metadata and scale eta."""

    regime: str
    eta: float
    n: int
    matrix: np.ndarray
    seed: int | None = None

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def norm(self) -> float:
        return linops.spectral_norm(self.matrix)


def sample_gue(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with complex normal off-diagonals of unit total
    variance and real standard-normal diagonal."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    a = (z + z.conj().T) / np.sqrt(2)
    np.fill_diagonal(a, rng.standard_normal(dim))
    return a


def _bitflip_sum(n: int) -> np.ndarray:
    dim = 2**n
    a = np.zeros((dim, dim))
    for i in range(dim):
        for b in range(n):
            a[i ^ (1 << b), i] = 1.0
    return a


def coupling(
    regime: str,
    n: int,
    eta: float = 1.0,
    seed: int | None = None,
    ground: int = 0,
) -> CouplingSpec:
    """Realize the coupling operator for one transition regime.

    eth: eta * (GUE-style Hermitian), reproducible from `seed` (required).
    projector: eta * J_N (all-one matrix), norm eta*N.
    bitflip: eta * sum_i X_i, norm eta*n.
    laplacian: eta * (M - D)/||M - D|| of the all-to-all graph, norm eta.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    dim = 2**n
    if regime == "eth":
        if seed is None:
            raise ValueError("eth coupling requires a seed")
        a = eta * sample_gue(dim, np.random.default_rng(seed))
    elif regime == "projector":
        a = eta * np.ones((dim, dim))
    elif regime == "bitflip":
        a = eta * _bitflip_sum(n)
    elif regime == "laplacian":
        # complete-graph Laplacian, normalized; equals |s><s| - I.  The
        # absorbing vertex at `ground` is enforced by the filter, which
        # forbids transitions out of the marked state.
        m_minus_d = np.ones((dim, dim)) - dim * np.eye(dim)
        a = eta * m_minus_d / linops.spectral_norm(m_minus_d)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return CouplingSpec(regime, eta, n, a, seed)


@dataclass(frozen=True)
class EthMomentReport:
    samples: int
    sup_row_second_moment: float
    sup_col_second_moment: float
    fourth_moment_sum: float
    fourth_moment_stderr: float
    mean_norm: float
    inferred_k: float
    passed: bool


def check_eth_moments(spec: CouplingSpec, samples: int, confidence_z: float = 3.0) -> EthMomentReport:
    """Empirical second/fourth moment bounds for the ETH ensemble.

    Infers the smallest constant K consistent with sup_i sum_j E|A_ij|^2 <=
    K^2 N, the column analogue, and sum_ij E|A_ij|^4 <= K^4 N^2 (with a
    `confidence_z` standard-error cushion on the fourth moment), then passes
    iff the mean spectral norm obeys the implied E||A|| <= 4 K sqrt(N).
    """
    if spec.regime != "eth":
        raise ValueError("moment check applies to the eth regime")
    if samples < 30:
        raise ValueError("need at least 30 samples for a meaningful estimate")
    dim = spec.dim
    rng = np.random.default_rng(spec.seed)
    second = np.zeros((dim, dim))
    fourth = np.zeros((dim, dim))
    fourth_sq = np.zeros((dim, dim))
    norms = np.zeros(samples)
    for k in range(samples):
        a = spec.eta * sample_gue(dim, rng)
        a2 = np.abs(a) ** 2
        second += a2
        fourth += a2**2
        fourth_sq += a2**4
        norms[k] = linops.spectral_norm(a)
    second /= samples
    fourth /= samples
    fourth_sq /= samples
    sup_row = float(second.sum(axis=1).max())
    sup_col = float(second.sum(axis=0).max())
    total4 = float(fourth.sum())
    var4 = float(np.maximum(fourth_sq - fourth**2, 0.0).sum())
    stderr4 = float(np.sqrt(var4 / samples))
    k_inferred = max(
        np.sqrt(sup_row / dim),
        np.sqrt(sup_col / dim),
        (max(total4 - confidence_z * stderr4, 0.0) / dim**2) ** 0.25,
    )
    mean_norm = float(norms.mean())
    passed = mean_norm <= 4.0 * k_inferred * np.sqrt(dim) if k_inferred > 0 else mean_norm == 0.0
    return EthMomentReport(
        samples,
        sup_row,
        sup_col,
        total4,
        stderr4,
        mean_norm,
        float(k_inferred),
        passed,
    )


FILTER_KINDS = ("ideal_step", "ideal_step_with_zero", "erf_window", "custom_table")


@dataclass(frozen=True)
class FilterFunction:
    """Spectral weight gamma_hat(omega) in [0, 1] plus kernel metadata.

    `omega_window` is the interval the numerical inverse Fourier transform
    integrates over; it must cover the filter's support.
    """

    kind: str
    params: tuple = ()
    m_omega: float = DEFAULT_M_OMEGA
    table: tuple = field(default=(), repr=False)

    def __call__(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        if self.kind == "ideal_step":
            out = np.where(omega < 0.0, 1.0, 0.0)
        elif self.kind == "ideal_step_with_zero":
            out = np.where(omega <= 0.0, 1.0, 0.0)
        elif self.kind == "erf_window":
            a, b, c = self.params
            out = 0.5 * (erf(a * omega + b) - erf(a * omega + c))
        elif self.kind == "custom_table":
            xs, ys = self.table
            out = np.interp(omega, xs, ys, left=0.0, right=0.0)
        else:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        return out if out.ndim else float(out)

    @property
    def omega_window(self) -> tuple[float, float]:
        return (-self.m_omega - 2.0, 2.0)

    @property
    def is_sharp(self) -> bool:
        return self.kind in ("ideal_step", "ideal_step_with_zero")

    def derivative_sup(self, order: int, grid_points: int = 20001) -> float:
        """sup over the window of |d^order gamma_hat / d omega^order|.

        For the erf window this uses the exact Hermite-polynomial form of
        Gaussian derivatives; other kinds fall back to finite differences.
        """
        lo, hi = self.omega_window
        xs = np.linspace(lo, hi, grid_points)
        if self.kind == "erf_window":
            a, b, c = self.params
            herm = np.polynomial.hermite.Hermite.basis(order - 1)
            deriv = lambda shift: (
                a**order
                * (2 / np.sqrt(np.pi))
                * (-1) ** (order - 1)
                * herm(a * xs + shift)
                * np.exp(-((a * xs + shift) ** 2))
            )
            return float(np.abs(0.5 * (deriv(b) - deriv(c))).max())
        ys = self(xs)
        h = xs[1] - xs[0]
        for _ in range(order):
            ys = np.gradient(ys, h)
        return float(np.abs(ys).max())


def filter_function(kind: str, params=None, m_omega: float = DEFAULT_M_OMEGA, table=None) -> FilterFunction:
    if kind not in FILTER_KINDS:
        raise ValueError(f"unknown filter kind {kind!r}")
    if kind == "erf_window":
        params = tuple(params) if params is not None else ERF_WINDOW_PARAMS
        if len(params) != 3:
            raise ValueError("erf_window takes (steepness, upper, lower) constants")
    elif kind == "custom_table":
        if table is None:
            raise ValueError("custom_table requires (omegas, values)")
        xs, ys = (np.asarray(t, dtype=float) for t in table)
        return FilterFunction(kind, (), m_omega, (tuple(xs), tuple(ys)))
    else:
        params = ()
    return FilterFunction(kind, params or (), m_omega)


def kernel(
    filt: FilterFunction,
    m_s: float,
    mu: float,
    quadrature_step: float = KERNEL_QUADRATURE_STEP,
) -> np.ndarray:
    """Sampled time-domain kernel gamma(l mu) for l = -M_mu .. M_mu.

    gamma(s) = (1/2pi) Int gamma_hat(omega) exp(-i omega s) d omega, computed
    by trapezoidal quadrature over the filter's omega window.  The printed
    closed form of the erf-window kernel is not used (its Gaussian factor is
    growing, an apparent sign typo); the quadrature is validated against a
    rederived closed form in the test suite.
    """
    if m_s <= 0 or mu <= 0:
        raise ValueError("m_s and mu must be positive")
    lo, hi = filt.omega_window
    if mu > np.pi / max(abs(lo), abs(hi)):
        raise ValueError(
            f"grid spacing mu={mu:.3g} too coarse to resolve the filter support "
            f"[{lo:.3g}, {hi:.3g}]"
        )
    m_mu = int(np.ceil(m_s / mu))
    s = mu * np.arange(-m_mu, m_mu + 1)
    count = int(round((hi - lo) / quadrature_step)) + 1
    omegas = np.linspace(lo, hi, count)
    weights = np.full(count, (hi - lo) / (count - 1))
    weights[0] *= 0.5
    weights[-1] *= 0.5
    gh = filt(omegas) * weights
    out = np.empty(s.size, dtype=complex)
    chunk = 512  # bound the phase-matrix footprint
    for start in range(0, s.size, chunk):
        block = s[start : start + chunk]
        out[start : start + chunk] = np.exp(-1j * np.outer(block, omegas)) @ gh
    return out / (2.0 * np.pi)
