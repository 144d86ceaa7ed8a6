"""Discrete-time engines.

Single-ancilla channel iteration, its closed form for the long-range
coupling, exact step-count inversion, the single-trace (one final trace-out)
analysis, and the classical discrete random walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dqsearch import jump as jump_mod
from dqsearch import linops

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class ChannelRun:
    """One discrete-time experiment: sigma -> Tr_a(e^{-i L~ sqrt(tau)} ...).

    mode 'multi_trace' traces out after every step; 'single_trace' performs a
    single step of duration sqrt(tau) (n_steps forced to 1).  engine
    'trotterized' replaces the exact exponential by a Suzuki product and
    needs (discretized_jump, p, r).
    """

    tau: float
    n_steps: int
    mode: str = "multi_trace"
    engine: str = "exact_exponential"
    trotter_p: int = 2
    trotter_r: int = 1

    def __post_init__(self):
        if self.mode not in ("multi_trace", "single_trace"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.engine not in ("exact_exponential", "trotterized"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.mode == "single_trace" and self.n_steps != 1:
            raise ValueError("single_trace runs have exactly one step")
        if self.tau <= 0 or self.n_steps < 0:
            raise ValueError("need tau > 0 and n_steps >= 0")

    @property
    def total_time(self) -> float:
        return self.n_steps * math.sqrt(self.tau)


def step_unitary(l_tilde, tau: float) -> np.ndarray:
    """exp(-i L~ sqrt(tau)) via the dilation's eigendecomposition."""
    m = l_tilde.matrix if isinstance(l_tilde, jump_mod.DilatedOperator) else np.asarray(l_tilde)
    if np.abs(m - m.conj().T).max() > HERMITICITY_TOL * max(1.0, float(np.abs(m).max())):
        raise ValueError("dilated jump operator must be Hermitian")
    lam, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * lam * math.sqrt(tau))) @ v.conj().T


def channel_step(sigma, l_tilde, tau: float) -> linops.DensityMatrix:
    """One ancilla-reset step: Tr_a(e^{-i L~ sqrt(tau)} |0><0| (x) sigma h.c.)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return jump_mod.channel_from_unitary(step_unitary(l_tilde, tau), sigma)


def iterate_channel(
    run: ChannelRun,
    l_tilde,
    sigma0,
    ground: int = 0,
    discretized_jump=None,
) -> "Trajectory":
    """sigma_m for m = 0..n_steps with the ground overlap per step."""
    from dqsearch.continuous import Trajectory  # shared record type

    sigma = sigma0.matrix if isinstance(sigma0, linops.DensityMatrix) else np.asarray(sigma0, dtype=complex)
    dim = sigma.shape[0]
    if dim > 2**linops.MAX_QUBITS_CHANNEL:
        raise ValueError(
            f"dense channel iteration is capped at n <= {linops.MAX_QUBITS_CHANNEL} qubits"
        )
    if run.engine == "trotterized":
        if discretized_jump is None:
            raise ValueError("trotterized engine needs the discretized jump terms")
        w = jump_mod.trotter_step(discretized_jump, run.tau, run.trotter_p, run.trotter_r)
    else:
        w = step_unitary(l_tilde, run.tau)
    overlaps = [float(sigma[ground, ground].real)]
    states = [linops.DensityMatrix(sigma.copy())]
    for _ in range(run.n_steps):
        sigma = jump_mod.channel_from_unitary(w, sigma).matrix
        overlaps.append(float(sigma[ground, ground].real))
        states.append(linops.DensityMatrix(sigma.copy()))
    times = math.sqrt(run.tau) * np.arange(run.n_steps + 1)
    return Trajectory(
        times=times,
        series={"ground_overlap": np.array(overlaps)},
        meta={
            "engine": run.engine,
            "mode": run.mode,
            "tau": run.tau,
            "ground": ground,
        },
        states=states,
    )


@dataclass(frozen=True)
class ClosedFormParams:
    """Parameters of the long-range closed-form iteration.

    zeta = eta sqrt(N-1) sqrt(tau) is the per-step rotation angle; n_tilde =
    sqrt((N-1)/N) the weight of the excited uniform component.
    """

    n_dim: int
    eta: float
    tau: float
    ground: int = 0

    @property
    def n_tilde(self) -> float:
        return math.sqrt((self.n_dim - 1) / self.n_dim)

    @property
    def zeta(self) -> float:
        return self.eta * math.sqrt(self.n_dim - 1) * math.sqrt(self.tau)


def _uniform_vectors(p: ClosedFormParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = p.n_dim
    s = np.full(n, 1.0 / math.sqrt(n))
    st = np.full(n, 1.0 / math.sqrt(n - 1))
    st[p.ground] = 0.0
    g = np.zeros(n)
    g[p.ground] = 1.0
    return s, st, g


def multitrace_closed_form(p: ClosedFormParams, m: int) -> linops.DensityMatrix:
    """State after m ancilla-reset steps from the uniform superposition.

    Four-term expression in the span of |s>, |s~>, |g>; the truncated
    geometric series degenerates to m when cos(zeta) = 1.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    s, st, g = _uniform_vectors(p)
    c = math.cos(p.zeta)
    nt = p.n_tilde
    if abs(c - 1.0) < 1e-15:
        series = float(m)
    else:
        series = (1.0 - c**m) / (1.0 - c)
    rho = np.outer(s, s).astype(complex)
    rho += nt * (c - 1.0) * series * (np.outer(st, s) + np.outer(s, st))
    rho += nt**2 * (1.0 - 2.0 * c**m + c ** (2 * m)) * np.outer(st, st)
    rho += nt**2 * (1.0 - c ** (2 * m)) * np.outer(g, g)
    return linops.DensityMatrix(rho)


def multitrace_overlap(p: ClosedFormParams, m: int) -> float:
    """Ground overlap 1/N + (N-1)/N (1 - cos^(2m) zeta)."""
    n = p.n_dim
    return 1.0 / n + (n - 1) / n * (1.0 - math.cos(p.zeta) ** (2 * m))


@dataclass(frozen=True)
class StepCountReport:
    n_steps: int
    total_time: float
    laurent_total_time: float
    laurent_n_steps: float


def multitrace_required_steps(
    eps_prime: float, n_dim: int, eta: float, tau: float
) -> StepCountReport:
    """Smallest N with overlap >= 1 - eps' by exact inversion of the closed
    form, plus the Laurent-series estimate log(1/eps') (N^2/((N-1) sqrt(tau))
    - sqrt(tau)/6) for comparison."""
    if not 0.0 < eps_prime < 1.0:
        raise ValueError("eps_prime must lie in (0, 1)")
    p = ClosedFormParams(n_dim, eta, tau)
    c2 = math.cos(p.zeta) ** 2
    target = eps_prime * n_dim / (n_dim - 1)  # cos^(2N) zeta <= target
    if target >= 1.0:
        n_steps = 0
    elif c2 == 0.0:
        n_steps = 1
    elif c2 == 1.0:
        raise ValueError("cos(zeta) = 1: overlap never grows, target unreachable")
    else:
        n_steps = math.ceil(math.log(target) / math.log(c2))
        while multitrace_overlap(p, n_steps) < 1.0 - eps_prime:  # guard roundoff
            n_steps += 1
    sqrt_tau = math.sqrt(tau)
    laurent_t = math.log(1.0 / eps_prime) * (
        n_dim**2 / ((n_dim - 1) * sqrt_tau) - sqrt_tau / 6.0
    )
    return StepCountReport(n_steps, n_steps * sqrt_tau, laurent_t, laurent_t / sqrt_tau)


def singletrace_overlap(n_dim: int, eta: float, total_time: float) -> float:
    """mu_g(1, T) = 1/N + (N-1)/N sin^2(eta sqrt(N-1) T)."""
    if total_time < 0:
        raise ValueError("T must be nonnegative")
    return 1.0 / n_dim + (n_dim - 1) / n_dim * math.sin(
        eta * math.sqrt(n_dim - 1) * total_time
    ) ** 2


def singletrace_optimal_time(n_dim: int, eta: float) -> float:
    """T = (pi/2) / (eta sqrt(N-1)), where the overlap first reaches 1."""
    return 0.5 * math.pi / (eta * math.sqrt(n_dim - 1))


@dataclass(frozen=True)
class SingleTraceCost:
    r: int
    sqrt_tau: float
    t_hamiltonian: float


def singletrace_cost(n_dim: int, eps: float, p: int, a_norm: float = 1.0) -> SingleTraceCost:
    """Substep count r and T_H for the single-trace run at the optimal time.

    r = ceil((N_steps sqrt(tau) ||A||)^(1 + 1/(p+1)) eps^(-1/(p+1))) with one
    step of duration sqrt(tau) = (pi/2) N / sqrt(N-1) (the eta = 1/N, ||A|| =
    1 normalization).  Each substep spends a size-independent (polylog)
    amount of problem-Hamiltonian time on its evolution sandwiches, so T_H =
    r up to that constant; this keeps the overall cost at sqrt(N)^(1+o(1)),
    which the alternative bookkeeping sqrt(tau)*r would break.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if p <= 0 or p % 2:
        raise ValueError("p must be a positive even Trotter order")
    sqrt_tau = singletrace_optimal_time(n_dim, 1.0 / n_dim)
    r = math.ceil((sqrt_tau * a_norm) ** (1.0 + 1.0 / (p + 1)) * eps ** (-1.0 / (p + 1)))
    return SingleTraceCost(r, sqrt_tau, float(r))


def absorbing_walk_matrix(n_dim: int, ground: int = 0) -> np.ndarray:
    """Row-stochastic all-to-all walk with an absorbing marked vertex."""
    p = np.full((n_dim, n_dim), 1.0 / (n_dim - 1))
    np.fill_diagonal(p, 0.0)
    p[ground, :] = 0.0
    p[ground, ground] = 1.0
    return p


def classical_walk(p: np.ndarray, mu0: np.ndarray, steps: int, ground: int = 0) -> "Trajectory":
    """mu_t = mu_0 P^t for a row-stochastic transition matrix."""
    from dqsearch.continuous import Trajectory

    p = np.asarray(p, dtype=float)
    mu = np.asarray(mu0, dtype=float).copy()
    if np.any(p < -1e-15):
        raise ValueError("transition matrix entries must be nonnegative")
    if np.abs(p.sum(axis=1) - 1.0).max() > 1e-12:
        raise ValueError("transition matrix rows must sum to 1")
    if abs(mu.sum() - 1.0) > 1e-12 or np.any(mu < -1e-15):
        raise ValueError("mu0 must be a probability vector")
    overlaps = [float(mu[ground])]
    dists = [mu.copy()]
    for _ in range(steps):
        mu = mu @ p
        overlaps.append(float(mu[ground]))
        dists.append(mu.copy())
    return Trajectory(
        times=np.arange(steps + 1, dtype=float),
        series={
            "ground_overlap": np.array(overlaps),
            "distribution": np.stack(dists),
        },
        meta={"engine": "classical_walk", "ground": ground},
    )
