"""Jump-operator pipeline.

From (H, A, gamma_hat) to the exact jump operator, its Hermitian dilation,
the truncated/discretized time-integral form, the Trotterized step unitary,
and the time-step/cost selectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dqsearch import linops, model

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)

UNITARITY_TOL = 1e-10


def _hamiltonian_parts(h) -> tuple[np.ndarray, np.ndarray | None]:
    """(energies, eigenbasis or None if already diagonal)."""
    if isinstance(h, model.GroverHamiltonian):
        return h.energies, None
    h = np.asarray(h, dtype=complex)
    off = h - np.diag(np.diag(h))
    if np.abs(off).max() <= 1e-14 * max(linops.spectral_norm(h), 1.0):
        return np.diag(h).real, None
    lam, basis = np.linalg.eigh(h)
    return lam, basis


def _coupling_matrix(a) -> np.ndarray:
    return a.matrix if isinstance(a, model.CouplingSpec) else np.asarray(a, dtype=complex)


@dataclass(frozen=True)
class JumpOperator:
    """L[i, j] = gamma_hat(lambda_i - lambda_j) A[i, j] in the energy basis."""

    matrix: np.ndarray
    energies: np.ndarray
    basis_tag: str = "energy-eigenbasis"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        return linops.spectral_norm(self.matrix)


def build_jump(h, a, filt: model.FilterFunction) -> JumpOperator:
    """Entrywise filtered coupling operator in the energy eigenbasis.

    For a diagonal H the computational order is kept, so exact zeros of the
    sharp filters stay exact (in particular L |g> = 0 for the ideal step on
    the search Hamiltonian).
    """
    a_mat = _coupling_matrix(a)
    lam, basis = _hamiltonian_parts(h)
    if a_mat.shape[0] != lam.size:
        raise ValueError("Hamiltonian and coupling dimensions differ")
    if basis is not None:
        a_mat = basis.conj().T @ a_mat @ basis
    weights = filt(np.subtract.outer(lam, lam))
    return JumpOperator(weights * a_mat, np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class DilatedOperator:
    """Hermitian 2N x 2N block dilation [[0, L^dag], [L, 0]].

    The ancilla is the leading tensor factor, initialized to |0>_a, so
    L~ (|0>_a (x) |psi>) = |1>_a (x) L |psi>.
    """

    matrix: np.ndarray

    @property
    def system_dim(self) -> int:
        return self.matrix.shape[0] // 2


def dilate(jump) -> DilatedOperator:
    L = jump.matrix if isinstance(jump, JumpOperator) else np.asarray(jump, dtype=complex)
    n = L.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = L.conj().T
    out[n:, :n] = L
    return DilatedOperator(out)


def select_discretization(
    gap: float,
    m_omega: float,
    a_norm: float,
    h_norm: float,
    eps_s: float,
    z_const: float,
    c_const: float,
) -> tuple[float, float]:
    """Truncation half-width M_s and grid spacing mu for a target accuracy.

    All asymptotic constants are fixed to 1; downstream callers verify
    ||L - L_s|| <= eps_s a posteriori at desk scale.
    """
    if eps_s <= 0:
        raise ValueError("eps_s must be positive")
    if min(gap, m_omega, a_norm) <= 0 or h_norm < 0:
        raise ValueError("scales must be positive")
    if z_const <= 1:
        raise ValueError("the smoothness order Z must exceed 1")
    budget = c_const * m_omega * a_norm / (gap * eps_s)
    m_s = (1.0 / gap) * budget ** (1.0 / (z_const - 1.0))
    mu = 1.0 / (h_norm + m_omega + math.log(budget))
    return m_s, mu


@dataclass(frozen=True)
class DiscretizedJump:
    """Truncated, discretized integral form L_s = sum_l gamma(l mu) A(l mu) mu."""

    offsets: np.ndarray  # l = -M_mu .. M_mu
    weights: np.ndarray  # gamma(l mu) * mu
    energies: np.ndarray
    coupling: np.ndarray  # A in the energy basis
    m_s: float
    mu: float
    matrix: np.ndarray = field(repr=False, default=None)

    @property
    def m_mu(self) -> int:
        return int(self.offsets.max())

    @property
    def dim(self) -> int:
        return self.coupling.shape[0]

    def heisenberg_coupling(self, s: float) -> np.ndarray:
        """A(s) = exp(iHs) A exp(-iHs) by diagonal phase conjugation."""
        phase = np.exp(1j * self.energies * s)
        return (phase[:, None] * self.coupling) * phase.conj()[None, :]


def discretize_jump(
    h,
    a,
    filt: model.FilterFunction,
    m_s: float,
    mu: float,
    kernel_values: np.ndarray | None = None,
) -> DiscretizedJump:
    """Assemble the discrete jump operator on the grid {l mu : |l mu| <= M_s}.

    A precomputed kernel table may be passed; its length must match the grid.
    """
    a_mat = _coupling_matrix(a)
    lam, basis = _hamiltonian_parts(h)
    if basis is not None:
        a_mat = basis.conj().T @ a_mat @ basis
    m_mu = int(np.ceil(m_s / mu))
    offsets = np.arange(-m_mu, m_mu + 1)
    if kernel_values is None:
        kernel_values = model.kernel(filt, m_s, mu)
    kernel_values = np.asarray(kernel_values, dtype=complex)
    if kernel_values.size != offsets.size:
        raise ValueError(
            f"kernel grid has {kernel_values.size} points, expected {offsets.size}"
        )
    weights = kernel_values * mu
    dim = a_mat.shape[0]
    ls = np.zeros((dim, dim), dtype=complex)
    for off, w in zip(offsets, weights):
        s = off * mu
        phase = np.exp(1j * lam * s)
        ls += w * ((phase[:, None] * a_mat) * phase.conj()[None, :])
    return DiscretizedJump(offsets, weights, np.asarray(lam, float), a_mat, m_s, mu, ls)


def _suzuki_stages(p: int) -> list[tuple[float, bool]]:
    """(coefficient, reversed?) sweeps whose product is the order-p formula."""
    if p == 1:
        return [(1.0, False)]
    if p == 2:
        return [(0.5, False), (0.5, True)]
    if p == 4:
        u = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
        pattern = [u, u, 1.0 - 4.0 * u, u, u]
        stages: list[tuple[float, bool]] = []
        for x in pattern:
            stages.extend([(0.5 * x, False), (0.5 * x, True)])
        return stages
    raise ValueError("supported Trotter orders are p in {1, 2, 4}")


def suzuki_stage_count(p: int) -> int:
    """Number of stages of the even-order Suzuki formula, 2 * 5^(p/2 - 1)."""
    if p % 2 or p < 2:
        raise ValueError("stage count is defined for even p")
    return 2 * 5 ** (p // 2 - 1)


def _term_factors(dj: DiscretizedJump, theta: float) -> list[np.ndarray]:
    """exp(-i theta H~_l) for every grid term, each assembled exactly.

    H~_l = sigma~_l (x) A(l mu) with sigma~_l = mu (Re gamma sigma_x +
    Im gamma sigma_y); both factors are Hermitian with known spectra, so the
    exponential is taken in the product eigenbasis.
    """
    evals_a, evecs_a = np.linalg.eigh(dj.coupling)
    out = []
    for off, w in zip(dj.offsets, dj.weights):
        g = w  # = gamma(l mu) * mu
        r = abs(g)
        if r == 0.0:
            out.append(np.eye(2 * dj.dim, dtype=complex))
            continue
        sig = (g.real * PAULI_X + g.imag * PAULI_Y) / r
        evals_s = np.array([r, -r])
        evecs_s = np.linalg.eigh(sig)[1][:, ::-1]  # columns for +1, -1
        s = off * dj.mu
        phase = np.exp(1j * dj.energies * s)
        ua = phase[:, None] * evecs_a
        u = np.kron(evecs_s, ua)
        core = np.exp(-1j * theta * np.outer(evals_s, evals_a)).ravel()
        out.append((u * core) @ u.conj().T)
    return out


def trotter_step(dj: DiscretizedJump, tau: float, p: int, r: int = 1) -> np.ndarray:
    """Order-p Suzuki product unitary approximating exp(-i L~_s sqrt(tau)).

    The substep product is assembled once, snapped to its polar unitary
    factor (the product of thousands of exact factor exponentials drifts
    from unitarity at the roundoff scale, which powering would amplify),
    and raised to the r-th power; each factor is exp(-i b H~_l sqrt(tau)/r).
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if r < 1:
        raise ValueError("r must be at least 1")
    stages = _suzuki_stages(p)
    dim = 2 * dj.dim
    if tau == 0.0:
        return np.eye(dim, dtype=complex)
    step = math.sqrt(tau) / r
    factor_cache: dict[float, list[np.ndarray]] = {}
    substep = np.eye(dim, dtype=complex)
    for b, reverse in stages:
        if b not in factor_cache:
            factor_cache[b] = _term_factors(dj, b * step)
        factors = factor_cache[b]
        order = range(len(factors) - 1, -1, -1) if reverse else range(len(factors))
        stage = np.eye(dim, dtype=complex)
        for idx in order:
            stage = factors[idx] @ stage
        substep = stage @ substep
    u, _, vh = np.linalg.svd(substep)
    w = np.linalg.matrix_power(u @ vh, r)
    defect = np.abs(w.conj().T @ w - np.eye(dim)).max()
    if defect > UNITARITY_TOL:
        raise RuntimeError(f"assembled step is not unitary: defect {defect:.3e}")
    return w


def channel_from_unitary(w: np.ndarray, rho) -> linops.DensityMatrix:
    """Tr_a( W (|0><0|_a (x) rho) W^dag ) for an ancilla-leading unitary."""
    w = np.asarray(w, dtype=complex)
    dim = w.shape[0] // 2
    defect = np.abs(w.conj().T @ w - np.eye(2 * dim)).max()
    if defect > 1e-8:
        raise ValueError(f"W is not unitary: defect {defect:.3e}")
    rho_m = rho.matrix if isinstance(rho, linops.DensityMatrix) else np.asarray(rho, dtype=complex)
    k0 = w[:dim, :dim]
    k1 = w[dim:, :dim]
    out = k0 @ rho_m @ k0.conj().T + k1 @ rho_m @ k1.conj().T
    return linops.DensityMatrix(out)


@dataclass(frozen=True)
class CostReport:
    tau: float
    n_steps: int
    t_hamiltonian: float
    active_branch: str
    n_controlled_a: float | None = None


def cost_model(
    l_norm: float | None,
    a_norm: float,
    total_time: float,
    eps: float,
    p: int,
    mode: str = "lindblad",
    mu: float | None = None,
) -> CostReport:
    """Time step, iteration count and total Hamiltonian simulation time.

    lindblad mode tracks the LME: tau = min(||L||^-4 T^-1 eps,
    ||A||^(-2-4/p) T^(-2/p) eps^(2/p)).  discrete mode only prepares the
    ground state and drops the first branch.  All implied constants are 1;
    T_H = T/tau, and the controlled-coupling gate count is T_H/mu when a
    grid spacing is supplied.
    """
    if p <= 0 or p % 2:
        raise ValueError("p must be a positive even Trotter order")
    if min(a_norm, total_time, eps) <= 0:
        raise ValueError("norms, time and accuracy must be positive")
    trotter_branch = a_norm ** (-2.0 - 4.0 / p) * total_time ** (-2.0 / p) * eps ** (2.0 / p)
    if mode == "lindblad":
        if l_norm is None or l_norm <= 0:
            raise ValueError("lindblad mode requires ||L|| > 0")
        lme_branch = eps / (l_norm**4 * total_time)
        tau = min(lme_branch, trotter_branch)
        branch = "lme" if lme_branch <= trotter_branch else "trotter"
    elif mode == "discrete":
        tau = trotter_branch
        branch = "trotter"
    else:
        raise ValueError("mode must be 'lindblad' or 'discrete'")
    n_steps = math.ceil(total_time / tau)
    t_h = total_time / tau
    n_a = t_h / mu if mu else None
    return CostReport(tau, n_steps, t_h, branch, n_a)
