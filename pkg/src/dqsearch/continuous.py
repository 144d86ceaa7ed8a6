"""Continuous-time engines and symmetry-reduced ODE systems.

Full Lindblad propagation (LME), its diagonal truncation (DLME), the
classical Pauli master equation (PME), per-regime reduced ODE systems that
scale far beyond the dense caps, the ETH ensemble-mean dynamics with its
Monte-Carlo counterpart, and the one-qubit imperfect-filter steady-state
study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.integrate
import scipy.linalg

from dqsearch import jump as jump_mod
from dqsearch import linops, model

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
EXPM_DIM_CAP = 200  # reduced systems use a direct exponential below this
DEFAULT_RESAMPLE_DT = 1.0 / 128.0


@dataclass(frozen=True)
class Trajectory:
    """Time series of labeled observables with run metadata."""

    times: np.ndarray
    series: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)
    states: list | None = field(default=None, repr=False)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.series[key]


def _propagate_linear(generator: np.ndarray, v0: np.ndarray, t_grid: np.ndarray):
    """v(t_k) = exp(G t_k) v0 for ascending t_grid, caching repeated steps."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a nonempty 1-d array")
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending")
    if t_grid[0] < 0:
        raise ValueError("times must be nonnegative")
    out = np.empty((t_grid.size, v0.size), dtype=complex)
    cache: dict[float, np.ndarray] = {}
    prev = 0.0
    current = v0.astype(complex)
    for k, t in enumerate(t_grid):
        dt = t - prev
        if dt > 0:
            key = round(float(dt), 15)
            if key not in cache:
                cache[key] = scipy.linalg.expm(generator * dt)
            current = cache[key] @ current
            prev = t
        out[k] = current
    return out


def evolve_lme(
    h: model.GroverHamiltonian,
    coupling: model.CouplingSpec,
    filt: model.FilterFunction,
    rho0,
    t_grid,
    include_hamiltonian: bool = False,
    store_states: bool = False,
    target=None,
) -> Trajectory:
    """Exact dense propagation of the (purely dissipative) LME on a grid."""
    if h.n > linops.MAX_QUBITS_EIGENSOLVE:
        raise ValueError(
            f"dense LME propagation is capped at n <= {linops.MAX_QUBITS_EIGENSOLVE}; "
            "use the reduced ODE systems for larger systems"
        )
    jump = jump_mod.build_jump(h, coupling, filt)
    liou = linops.build_liouvillian(h.matrix, [jump.matrix], include_hamiltonian)
    rho0_m = rho0.matrix if isinstance(rho0, linops.DensityMatrix) else np.asarray(rho0, dtype=complex)
    g = h.ground_index
    vs = _propagate_linear(liou.matrix, linops.vec(rho0_m), np.asarray(t_grid, float))
    overlaps = np.empty(vs.shape[0])
    dists = np.empty(vs.shape[0]) if target is not None else None
    states = [] if store_states else None
    target_m = None if target is None else (
        target.matrix if isinstance(target, linops.DensityMatrix) else np.asarray(target)
    )
    for k in range(vs.shape[0]):
        rho = linops.unvec(vs[k])
        overlaps[k] = rho[g, g].real
        if dists is not None:
            dists[k] = linops.trace_norm(rho - target_m)
        if states is not None:
            states.append(linops.DensityMatrix(rho))
    series = {
        "ground_overlap": overlaps,
        "excited_population": 1.0 - overlaps,
    }
    if dists is not None:
        series["trace_distance_to_target"] = dists
    return Trajectory(
        times=np.asarray(t_grid, float),
        series=series,
        meta={
            "engine": "lme",
            "regime": coupling.regime,
            "n": h.n,
            "eta": coupling.eta,
            "filter": filt.kind,
            "include_hamiltonian": include_hamiltonian,
        },
        states=states,
    )


def dlme_generator(
    h: model.GroverHamiltonian, coupling: model.CouplingSpec, filt: model.FilterFunction
) -> np.ndarray:
    """Population rate matrix of the diagonal LME.

    dp_i/dt = sum_j gamma_hat(l_i - l_j)^2 |A_ij|^2 p_j - (outflow) p_i;
    columns sum to zero by construction.
    """
    lam = h.energies
    rates = np.asarray(filt(np.subtract.outer(lam, lam))) ** 2 * np.abs(coupling.matrix) ** 2
    return rates - np.diag(rates.sum(axis=0))


def evolve_dlme(
    h: model.GroverHamiltonian,
    coupling: model.CouplingSpec,
    filt: model.FilterFunction,
    p0,
    t_grid,
) -> Trajectory:
    """Integrate the diagonal (populations-only) master equation."""
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 < 0):
        raise ValueError("initial populations must be nonnegative")
    if abs(p0.sum() - 1.0) > 1e-10:
        raise ValueError("initial populations must sum to 1")
    gen = dlme_generator(h, coupling, filt)
    vs = _propagate_linear(gen, p0, np.asarray(t_grid, float)).real
    drift = np.abs(vs.sum(axis=1) - 1.0).max()
    if drift > 1e-9:
        raise RuntimeError(f"probability drift {drift:.3e} exceeds tolerance")
    g = h.ground_index
    return Trajectory(
        times=np.asarray(t_grid, float),
        series={"ground_overlap": vs[:, g], "distribution": vs},
        meta={"engine": "dlme", "regime": coupling.regime, "n": h.n, "eta": coupling.eta},
    )


def pme_generator(regime: str, n: int, eta: float | None = None, ground: int = 0) -> np.ndarray:
    """Classical rate matrix for one transition regime.

    projector: all-to-all hops at rate 1/N with the marked vertex absorbing
    (the renormalized long-range rates).  bitflip: nearest-neighbor hypercube
    hops at rate eta with the marked vertex absorbing.
    """
    dim = 2**n
    gen = np.zeros((dim, dim))
    if regime == "projector":
        rate = 1.0 / dim
        for j in range(dim):
            if j == ground:
                continue
            for i in range(dim):
                if i != j:
                    gen[i, j] = rate
            gen[j, j] = -(dim - 1) * rate
    elif regime == "bitflip":
        if eta is None:
            raise ValueError("bitflip PME needs the hop rate eta")
        for j in range(dim):
            if j == ground:
                continue
            for b in range(n):
                gen[j ^ (1 << b), j] = eta
            gen[j, j] = -n * eta
    else:
        raise ValueError(f"no PME construction for regime {regime!r}")
    return gen


def evolve_pme(rate_matrix: np.ndarray, p0, t_grid, ground: int = 0) -> Trajectory:
    """Continuous-time classical walk under a probability-conserving generator."""
    rate_matrix = np.asarray(rate_matrix, dtype=float)
    scale = max(np.abs(rate_matrix).max(), 1e-300)
    col = np.abs(rate_matrix.sum(axis=0)).max()
    if col > 1e-12 * scale * rate_matrix.shape[0]:
        raise ValueError(f"columns must sum to zero (defect {col:.3e})")
    off = rate_matrix - np.diag(np.diag(rate_matrix))
    if off.min() < -1e-14 * scale:
        raise ValueError("off-diagonal rates must be nonnegative")
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 < -1e-15) or abs(p0.sum() - 1.0) > 1e-10:
        raise ValueError("p0 must be a probability vector")
    vs = _propagate_linear(rate_matrix, p0, np.asarray(t_grid, float)).real
    return Trajectory(
        times=np.asarray(t_grid, float),
        series={"ground_overlap": vs[:, ground], "distribution": vs},
        meta={"engine": "pme", "ground": ground},
    )


def hamming_subspaces(n: int, ground: int = 0) -> list[list[int]]:
    """Basis indices grouped by Hamming distance to the marked string."""
    return [
        [i for i in range(2**n) if bin(i ^ ground).count("1") == a] for a in range(n + 1)
    ]


@dataclass(frozen=True)
class ReducedOdeSystem:
    """Labeled linear system dz/dt = coeff @ z with named initial states."""

    labels: list[str]
    coeff: np.ndarray
    init: dict[str, np.ndarray]
    regime: str
    n: int
    eta: float

    @property
    def dim(self) -> int:
        return self.coeff.shape[0]

    def initial(self, name_or_vector) -> np.ndarray:
        if isinstance(name_or_vector, str):
            try:
                return self.init[name_or_vector]
            except KeyError:
                raise KeyError(
                    f"unknown initial state {name_or_vector!r}; have {sorted(self.init)}"
                ) from None
        v = np.asarray(name_or_vector, dtype=float)
        if v.size != self.dim:
            raise ValueError("initial vector has wrong dimension")
        return v

    def trajectory(self, t_grid, init="uniform", method: str | None = None) -> Trajectory:
        z0 = self.initial(init)
        t_grid = np.asarray(t_grid, dtype=float)
        if method is None:
            method = "expm" if self.dim < EXPM_DIM_CAP else "rk45"
        if method == "expm" or t_grid[-1] == 0.0:
            zs = _propagate_linear(self.coeff, z0, t_grid).real
        elif method == "rk45":
            sol = scipy.integrate.solve_ivp(
                lambda _, z: self.coeff @ z,
                (0.0, float(t_grid[-1])),
                z0,
                t_eval=t_grid,
                method="RK45",
                rtol=ODE_RTOL,
                atol=ODE_ATOL,
            )
            if not sol.success:
                raise RuntimeError(f"ODE integration failed: {sol.message}")
            zs = sol.y.T
        else:
            raise ValueError("method must be 'expm' or 'rk45'")
        series = {label: zs[:, k] for k, label in enumerate(self.labels)}
        series["ground_overlap"] = zs[:, self._ground_column()]
        return Trajectory(
            times=t_grid,
            series=series,
            meta={"engine": f"reduced_{self.regime}", "n": self.n, "eta": self.eta},
        )

    def _ground_column(self) -> int:
        for cand in ("z_g", "z[0,0]", "z[0]"):
            if cand in self.labels:
                return self.labels.index(cand)
        raise ValueError("no ground-population variable in this system")


def _shortrange_lme_system(n: int, eta: float) -> ReducedOdeSystem:
    """Even-parity Hamming-block variables z[a, a'] of the bit-flip LME.

    Coefficients follow the Kronecker-guarded generator of the symmetric
    sector; the two column-index typos of the printed form (alpha vs alpha'
    in the z[a, a'+2] and z[a, a'-2] coefficients) are corrected, which the
    test suite pins against a brute-force projection of the full Liouvillian.
    """
    pairs = [(a, ap) for a in range(n + 1) for ap in range(n + 1) if (a - ap) % 2 == 0]
    index = {v: k for k, v in enumerate(pairs)}
    dim = len(pairs)
    coeff = np.zeros((dim, dim))
    e2 = eta * eta

    def add(v, w, value):
        a, ap = w
        if 0 <= a <= n and 0 <= ap <= n:
            coeff[index[v], index[w]] += value

    for v in pairs:
        a, ap = v
        add(v, (a + 1, ap + 1), e2 * (a + 1) * (ap + 1))
        if a != 1:
            add(v, (a - 1, ap + 1), e2 * (n - a + 1) * (ap + 1))
        if ap != 1:
            add(v, (a + 1, ap - 1), e2 * (a + 1) * (n - ap + 1))
        if a != 1 and ap != 1:
            add(v, (a - 1, ap - 1), e2 * (n - a + 1) * (n - ap + 1))
        if a - 2 != 0:
            add(v, (a - 2, ap), -0.5 * e2 * (n - a + 1) * (n - a + 2))
        if a != 0:
            add(v, (a, ap), -e2 * (0.5 * n + a * (n - a)))
            add(v, (a + 2, ap), -0.5 * e2 * (a + 1) * (a + 2))
        if ap - 2 != 0:
            add(v, (a, ap - 2), -0.5 * e2 * (n - ap + 1) * (n - ap + 2))
        if ap != 0:
            add(v, (a, ap), -e2 * (0.5 * n + ap * (n - ap)))
            add(v, (a, ap + 2), -0.5 * e2 * (ap + 1) * (ap + 2))
    uniform = np.array([comb(n, a) * comb(n, ap) / 2**n for a, ap in pairs])
    labels = [f"z[{a},{ap}]" for a, ap in pairs]
    return ReducedOdeSystem(labels, coeff, {"uniform": uniform}, "shortrange_lme", n, eta)


def _shortrange_pme_system(n: int, eta: float) -> ReducedOdeSystem:
    """Hamming-level populations z[a] of the classical bit-flip walk."""
    dim = n + 1
    coeff = np.zeros((dim, dim))
    coeff[0, 1] = eta
    for a in range(1, n + 1):
        coeff[a, a] = -eta * n
        if a + 1 <= n:
            coeff[a, a + 1] = eta * (a + 1)
        if a - 1 >= 1:
            coeff[a, a - 1] = eta * (n - a + 1)
    uniform = np.array([comb(n, a) / 2**n for a in range(dim)])
    labels = [f"z[{a}]" for a in range(dim)]
    return ReducedOdeSystem(labels, coeff, {"uniform": uniform}, "shortrange_pme", n, eta)


def reduced_system(regime: str, n: int, eta: float) -> ReducedOdeSystem:
    """Closed low-dimensional ODE system for one regime.

    projector: (z_g, z_e) with dz_g/dt = eta^2 z_e, dz_e/dt = -(N-1) eta^2
    z_e.  eth_mean: ensemble-mean (z_g, z_e_diag) with rate eta^2.
    shortrange_lme / shortrange_pme: Hamming-sector systems of dimension
    (n^2+2n+2)/2 (even n) resp. n+1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    dim = 2**n
    if regime == "projector":
        e2 = eta * eta
        coeff = np.array([[0.0, e2], [0.0, -(dim - 1) * e2]])
        init = {"uniform": np.array([1.0 / dim, (dim - 1) ** 2 / dim])}
        return ReducedOdeSystem(["z_g", "z_e"], coeff, init, regime, n, eta)
    if regime == "eth_mean":
        e2 = eta * eta
        coeff = np.array([[0.0, e2], [0.0, -e2]])
        init = {"uniform": np.array([1.0 / dim, (dim - 1) / dim])}
        return ReducedOdeSystem(["z_g", "z_e_diag"], coeff, init, regime, n, eta)
    if regime == "shortrange_lme":
        return _shortrange_lme_system(n, eta)
    if regime == "shortrange_pme":
        return _shortrange_pme_system(n, eta)
    raise ValueError(f"unknown reduced regime {regime!r}")


def reduced_mixing_rate(system: ReducedOdeSystem, zero_tol: float | None = None) -> float:
    """Largest real part among the decaying eigenvalues of the coefficient
    matrix; the mixing time is 1/|result|.

    The default threshold separating true kernel directions from slow decay
    is 1e-12 of the spectral scale: the mixing rates of interest shrink like
    1/N = 2^-n, so a looser cut would silently discard them already around
    n = 20 (double-precision eigensolves resolve the split up to n ~ 36).
    """
    lam = np.linalg.eigvals(system.coeff)
    scale = max(np.abs(lam).max(), 1e-300)
    tol = zero_tol if zero_tol is not None else 1e-12 * scale
    decaying = lam[np.abs(lam.real) >= tol]
    if decaying.size == 0:
        raise ValueError("all eigenvalues are numerically zero")
    return float(decaying.real.max())


def eth_mean_overlap(n: int, eta: float, t) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble-mean (z_g, z_e_diag) at time t from the uniform start.

    E z_g(t) = z_e(0)(1 - e^(-eta^2 t)) + z_g(0) with z_g(0) = 1/N.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    dim = 2**n
    zg0 = 1.0 / dim
    ze0 = (dim - 1) / dim
    decay = np.exp(-eta * eta * t)
    return ze0 * (1.0 - decay) + zg0, ze0 * decay


def _rank1_dissipative_step(rho, w_hat, c, ground, dt):
    """Exact e^(L_L dt) for the rank-1 jump L = sqrt(c) |g><w_hat|.

    Batched over the leading axis of rho; w_hat has matching batch shape and
    unit norm, c is the per-sample rate ||w||^2.
    """
    u = np.einsum("kij,kj->ki", rho, w_hat)
    x = np.real(np.einsum("kj,kj->k", w_hat.conj(), u))
    e1 = np.exp(-0.5 * c * dt)
    e2 = e1 * e1
    p_rho = w_hat[:, :, None] * u.conj()[:, None, :]
    rho_p = u[:, :, None] * w_hat.conj()[:, None, :]
    proj = w_hat[:, :, None] * w_hat.conj()[:, None, :]
    out = (
        rho
        - (1.0 - e1)[:, None, None] * (p_rho + rho_p)
        + (((1.0 - e1) ** 2) * x)[:, None, None] * proj
    )
    out[:, ground, ground] += (1.0 - e2) * x
    return out


def eth_monte_carlo(
    n: int,
    eta: float,
    samples: int,
    t_grid,
    seed: int,
    resample_dt: float = DEFAULT_RESAMPLE_DT,
    ground: int = 0,
    chunk: int = 64,
) -> Trajectory:
    """Monte-Carlo mean ground overlap under periodically refreshed couplings.

    Each sample propagates the full LME exactly, redrawing the Hermitian
    random coupling every `resample_dt` (a single fixed coupling provably
    saturates far from the ground state, so refreshing is part of the
    protocol).  With the sharp filter each segment's jump operator is rank
    one and its dissipative propagator is applied in closed form; sample k
    draws from a generator seeded with (seed, k), so results do not depend
    on chunking.  Bands are +-3 standard errors.
    """
    if samples < 30:
        raise ValueError("need at least 30 samples")
    if n > 6:
        raise ValueError("Monte-Carlo cap is n <= 6; use eth_mean_overlap beyond")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing and start at 0")
    dim = 2**n
    horizon = float(t_grid[-1])
    n_seg = int(np.ceil(horizon / resample_dt - 1e-12))
    edges = np.minimum(resample_dt * np.arange(n_seg + 1), horizon)
    acc = np.zeros((samples, t_grid.size))
    s = np.full(dim, 1.0 / np.sqrt(dim))
    rho_init = np.outer(s, s).astype(complex)
    for start in range(0, samples, chunk):
        size = min(chunk, samples - start)
        rngs = [np.random.default_rng([seed, start + k]) for k in range(size)]
        rho = np.broadcast_to(rho_init, (size, dim, dim)).copy()
        acc[start : start + size, 0] = rho[:, ground, ground].real
        next_grid = 1
        for si in range(n_seg):
            t0, t1 = edges[si], edges[si + 1]
            if t1 <= t0:
                continue
            a_batch = np.stack([model.sample_gue(dim, r) for r in rngs])
            w = eta * a_batch[:, ground, :].conj()
            w[:, ground] = 0.0
            c = np.einsum("kj,kj->k", w.conj(), w).real
            safe = np.where(c > 0, c, 1.0)
            w_hat = w / np.sqrt(safe)[:, None]
            tcur = t0
            while next_grid < t_grid.size and t_grid[next_grid] <= t1 + 1e-12:
                rho = _rank1_dissipative_step(rho, w_hat, c, ground, t_grid[next_grid] - tcur)
                tcur = t_grid[next_grid]
                acc[start : start + size, next_grid] = rho[:, ground, ground].real
                next_grid += 1
            if t1 > tcur:
                rho = _rank1_dissipative_step(rho, w_hat, c, ground, t1 - tcur)
    mean = acc.mean(axis=0)
    stderr = acc.std(axis=0, ddof=1) / math.sqrt(samples)
    return Trajectory(
        times=t_grid,
        series={
            "ground_overlap": mean,
            "stderr": stderr,
            "band_lower": mean - 3.0 * stderr,
            "band_upper": mean + 3.0 * stderr,
        },
        meta={
            "engine": "eth_monte_carlo",
            "n": n,
            "eta": eta,
            "samples": samples,
            "seed": seed,
            "resample_dt": resample_dt,
        },
    )


@dataclass(frozen=True)
class CoherenceSplit:
    times: np.ndarray
    z_e_diag: np.ndarray
    z_e_offdiag: np.ndarray
    ode_residual: float


def coherence_split_projector(
    times, states, eta: float, ground: int = 0
) -> CoherenceSplit:
    """Split the excited block into diagonal and coherence sums and verify
    d z_e^D/dt = -eta^2 (z_e^D + z_e^O) by central finite differences."""
    times = np.asarray(times, dtype=float)
    zd = np.empty(times.size)
    zo = np.empty(times.size)
    for k, st in enumerate(states):
        rho = st.matrix if isinstance(st, linops.DensityMatrix) else np.asarray(st)
        diag = np.delete(np.diag(rho).real, ground)
        zd[k] = diag.sum()
        block = np.delete(np.delete(rho, ground, axis=0), ground, axis=1)
        zo[k] = (block.sum() - np.trace(block)).real
    residual = 0.0
    if times.size >= 3:
        dzd = np.gradient(zd, times)
        inner = slice(1, -1)
        residual = float(
            np.abs(dzd[inner] + eta * eta * (zd[inner] + zo[inner])).max()
        )
    return CoherenceSplit(times, zd, zo, residual)


@dataclass(frozen=True)
class ImperfectFilterReport:
    """Steady state of the one-qubit imperfect-filter model.

    `excited_population` is the diagonal deviation from the ground state;
    the previously reported second-order expansion predicts eps^2/17 + phi^2
    for it without the Hamiltonian, while a direct perturbative solve of the
    stated model gives eps^2 + phi^2 (and eps^2/5 + phi^2 with the
    Hamiltonian on); both are carried on the report.
    """

    stationary_state: linops.DensityMatrix
    excited_population: float
    z_deviation: float
    offdiag_magnitude: float
    include_hamiltonian: bool
    reported_second_order: float
    derived_second_order: float


def imperfect_filter_study(eps: float, phi: float, include_hamiltonian: bool) -> ImperfectFilterReport:
    """Numerically exact stationary state of the perturbed one-qubit model.

    Energy basis (ground, excited) for H = -|g><g|; the jump operator
    [[eps, 1], [phi, eps]] encodes filter leakage as weak upward/diagonal
    transitions.
    """
    if abs(eps) > 0.1 or abs(phi) > 0.1:
        raise ValueError("perturbations must satisfy |eps|, |phi| <= 0.1")
    ljump = np.array([[eps, 1.0], [phi, eps]], dtype=complex)
    h = np.diag([-1.0, 0.0]).astype(complex)
    liou = linops.build_liouvillian(h, [ljump], include_hamiltonian)
    lam, vecs = np.linalg.eig(liou.matrix)
    rho = linops.unvec(vecs[:, np.argmin(np.abs(lam))])
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    excited = float(rho[1, 1].real)
    reported = eps * eps / 17.0 + phi * phi
    derived = (eps * eps / 5.0 if include_hamiltonian else eps * eps) + phi * phi
    return ImperfectFilterReport(
        stationary_state=linops.DensityMatrix(rho, "energy-eigenbasis"),
        excited_population=excited,
        z_deviation=2.0 * excited,
        offdiag_magnitude=float(abs(rho[0, 1])),
        include_hamiltonian=include_hamiltonian,
        reported_second_order=reported,
        derived_second_order=derived,
    )
