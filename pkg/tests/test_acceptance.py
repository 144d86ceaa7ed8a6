"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
PASS/FAIL lines as they are produced (they are also shown in captured output
on failure).  Criterion 10's second and third clauses assert previously
reported values for the one-qubit steady state; a direct solve of the stated
model contradicts them, so those two assertions fail honestly -- see notes
in the repository's decision log and the docstrings below.
"""

import math
import os

import numpy as np
import pytest

from dqsearch import baselines, cli, continuous, discrete, jump, linops, model

IDEAL = model.filter_function("ideal_step")
IDEAL0 = model.filter_function("ideal_step_with_zero")
ERF = model.filter_function("erf_window")

EXTENDED = os.environ.get("DQSEARCH_EXTENDED", "") == "1"


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"acceptance {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}")


def ground_projector(dim):
    p = np.zeros((dim, dim), dtype=complex)
    p[0, 0] = 1.0
    return p


def projector_apply(n, eta):
    h = model.grover_hamiltonian(n, {0})
    jop = jump.build_jump(h, model.coupling("projector", n, eta), IDEAL)
    return lambda rho, L=jop.matrix: linops.apply_dissipator(L, rho)


def test_criterion_01_projector_mixing_rate_exact():
    """Full-Liouvillian projector mixing rate equals -(N-1)/N^2 to 1e-9.

    The rate governing the ground population is extracted from the exact
    invariant subspace of the full generator; the raw spectral gap sits on a
    coherence branch at exactly half that value, which is asserted alongside
    (dense eigendecomposition for n <= 4).
    """
    worst = 0.0
    for n in range(2, 8):
        dim = 2**n
        eta = 1.0 / dim
        expected = -(dim - 1) / dim**2
        rate = linops.observable_relaxation_rate(
            projector_apply(n, eta),
            linops.DensityMatrix.uniform_superposition(n).matrix,
            ground_projector(dim),
        )
        rel = abs(rate.real - expected) / abs(expected)
        worst = max(worst, rel)
        if n <= 4:
            h = model.grover_hamiltonian(n, {0})
            jop = jump.build_jump(h, model.coupling("projector", n, eta), IDEAL)
            rep = linops.mixing_rate(linops.build_liouvillian(h.matrix, [jop.matrix]))
            # population rate is in the spectrum; plain alpha* is half of it
            assert np.abs(rep.eigenvalues - expected).min() < 1e-12
            assert abs(rep.alpha_star.real - expected / 2.0) < 1e-12
    ok = worst <= 1e-9
    report("01 projector mixing rate", ok, f"max relative error {worst:.2e} over n=2..7")
    assert ok


def test_criterion_02_closed_form_equals_channel():
    """Closed-form iteration matches the ancilla-reset channel to 1e-10."""
    rng = np.random.default_rng(20240812)
    worst = 0.0
    for n in (2, 3, 4):
        dim = 2**n
        eta = 1.0 / dim
        h = model.grover_hamiltonian(n, {0})
        jop = jump.build_jump(h, model.coupling("projector", n, eta), IDEAL)
        lt = jump.dilate(jop.matrix)
        for tau in rng.uniform(0.02, 4.0, size=50):
            params = discrete.ClosedFormParams(dim, eta, float(tau))
            sigma = linops.DensityMatrix.uniform_superposition(n)
            for m in range(1, 21):
                sigma = discrete.channel_step(sigma, lt, float(tau))
                closed = discrete.multitrace_closed_form(params, m)
                worst = max(worst, linops.trace_norm(sigma.matrix - closed.matrix))
    ok = worst <= 1e-10
    report("02 closed form vs channel", ok, f"max trace-norm gap {worst:.2e}")
    assert ok


def test_criterion_03_eth_mean_dynamics():
    """500-sample Monte-Carlo mean tracks the ensemble closed form."""
    n, eta = 3, 1.0 / math.sqrt(8.0)
    ts = np.linspace(0.0, 3.0 / eta**2, 20)
    traj = continuous.eth_monte_carlo(
        n, eta, samples=500, t_grid=ts, seed=2024, resample_dt=1.0 / 256.0
    )
    zg, _ = continuous.eth_mean_overlap(n, eta, ts)
    gap = np.abs(traj["ground_overlap"] - zg)[1:]
    band = 3.0 * traj["stderr"][1:]
    inside = np.all(gap <= band)
    decay = 1.0 - traj["ground_overlap"]
    mask = decay > 2e-2
    rate = -np.polyfit(ts[mask], np.log(decay[mask]), 1)[0]
    rate_ok = abs(rate - eta**2) / eta**2 <= 0.05
    ok = bool(inside and rate_ok)
    report(
        "03 ETH mean dynamics",
        ok,
        f"max gap/band {np.max(gap / band):.2f}, fitted rate {rate:.5f} vs {eta**2:.5f}",
    )
    assert ok


def test_criterion_04_reduced_vs_full_oracle():
    """Reduced ODE systems match full-space integration to 1e-8 (n <= 5)."""
    worst = {}
    # long-range projector, n = 5
    n = 5
    dim = 2**n
    eta = 1.0 / dim
    sys_ = continuous.reduced_system("projector", n, eta)
    t_mix = 1.0 / abs(continuous.reduced_mixing_rate(sys_))
    ts = np.linspace(0.0, 3.0 * t_mix, 7)
    h = model.grover_hamiltonian(n, {0})
    full = continuous.evolve_lme(
        h,
        model.coupling("projector", n, eta),
        IDEAL,
        linops.DensityMatrix.uniform_superposition(n),
        ts,
        store_states=True,
    )
    red = sys_.trajectory(ts)
    gap_g = np.abs(full["ground_overlap"] - red["z_g"]).max()
    gap_e = max(
        abs(st.matrix[1:, 1:].sum().real - red["z_e"][k])
        for k, st in enumerate(full.states)
    )
    worst["projector"] = max(gap_g, gap_e)
    # short-range LME, n = 5
    eta = 1.0 / n
    sys_ = continuous.reduced_system("shortrange_lme", n, eta)
    t_mix = 1.0 / abs(continuous.reduced_mixing_rate(sys_))
    ts = np.linspace(0.0, 3.0 * t_mix, 7)
    full = continuous.evolve_lme(
        h,
        model.coupling("bitflip", n, eta),
        IDEAL0,
        linops.DensityMatrix.uniform_superposition(n),
        ts,
        store_states=True,
    )
    red = sys_.trajectory(ts)
    spaces = continuous.hamming_subspaces(n)
    gap = 0.0
    for k, st in enumerate(full.states):
        for label in sys_.labels:
            a, ap = (int(x) for x in label[2:-1].split(","))
            block = st.matrix[np.ix_(spaces[a], spaces[ap])].sum().real
            gap = max(gap, abs(block - red[label][k]))
    worst["shortrange_lme"] = gap
    # short-range PME, n = 5
    gen = continuous.pme_generator("bitflip", n, eta)
    traj = continuous.evolve_pme(gen, np.full(dim, 1.0 / dim), ts)
    sys_p = continuous.reduced_system("shortrange_pme", n, eta)
    red_p = sys_p.trajectory(ts)
    gap = 0.0
    for k in range(ts.size):
        for a, idx in enumerate(spaces):
            gap = max(gap, abs(traj["distribution"][k][idx].sum() - red_p[f"z[{a}]"][k]))
    worst["shortrange_pme"] = gap
    # ETH: the ensemble-mean generator reduces to the closed-form mean (the
    # Monte-Carlo-vs-closed-form trajectory check is criterion 03)
    n_eth, dim_eth, eta_eth = 3, 8, 1.0 / math.sqrt(8.0)
    h_eth = model.grover_hamiltonian(n_eth, {0})
    rng = np.random.default_rng(77)
    samples = 600
    acc = np.zeros((dim_eth**2, dim_eth**2), dtype=complex)
    acc2 = np.zeros((dim_eth**2, dim_eth**2))
    for _ in range(samples):
        a = eta_eth * model.sample_gue(dim_eth, rng)
        jop = jump.build_jump(h_eth, model.CouplingSpec("eth", eta_eth, n_eth, a, 0), IDEAL)
        liou = linops.build_liouvillian(h_eth.matrix, [jop.matrix]).matrix
        acc += liou
        acc2 += np.abs(liou) ** 2
    mean = acc / samples
    stderr = np.sqrt(np.maximum(acc2 / samples - np.abs(mean) ** 2, 0.0) / samples)
    expected = np.zeros_like(mean)
    for j in range(1, dim_eth):
        ljump = np.zeros((dim_eth, dim_eth))
        ljump[0, j] = 1.0
        expected += eta_eth**2 * linops.liouvillian_matrix(None, [ljump], False)
    eth_ok = bool(np.all(np.abs(mean - expected) <= 3.0 * stderr + 1e-12))
    ok = max(worst.values()) <= 1e-8 and eth_ok
    report(
        "04 reduced vs full oracle",
        ok,
        ", ".join(f"{k}={v:.2e}" for k, v in worst.items()) + f", eth mean generator ok={eth_ok}",
    )
    assert ok


TABLE1_BANDS = {
    "eth_mean": (1.0, 0.1),
    "projector_lme": (1.0, 0.05),
    "projector_dlme": (2.0, 0.1),
    "projector_pme": (1.0, 0.05),
    "shortrange_lme": (1.0, 0.1),
    "shortrange_pme": (1.0, 0.1),
    "multitrace": (1.0, 0.05),
    "singletrace": (0.5, 0.05),
}


def test_criterion_05_table1_exponents():
    """Fitted log-log mixing-time exponents match the summary table."""
    cfg = cli.default_config("table1_summary")
    windows = {}
    if EXTENDED:
        # deeper short-range sweep; n ~ 36 is the double-precision limit for
        # separating the 2^-n relaxation rate from the kernel
        windows = {"shortrange_lme": (26, 36), "shortrange_pme": (26, 36)}
    results = {}
    ok = True
    for series, (target, tol) in TABLE1_BANDS.items():
        slope = cli.table1_slope(series, cfg, windows.get(series))
        results[series] = slope
        ok = ok and abs(slope - target) <= tol
    report(
        "05 Table-1 exponents",
        ok,
        ", ".join(f"{k}={v:.3f}" for k, v in results.items()),
    )
    assert ok


def test_criterion_06_trotter_error_slope():
    """Trace-norm Trotter error scales as tau^(p/2+1) at p = 2."""
    taus = np.logspace(math.log10(0.08), math.log10(0.08) + 1.5, 12)
    pairs, _ = cli.trotter_error_sweep(3, 2, 1, taus)
    slope = float(
        np.polyfit(np.log([t for t, _ in pairs]), np.log([e for _, e in pairs]), 1)[0]
    )
    ok = abs(slope - 2.0) <= 0.2
    report("06 Trotter error slope", ok, f"fitted slope {slope:.3f} over 1.5 decades")
    assert ok


def test_criterion_07_scale_invariance():
    """||A||^2 T_mix is eta-independent; the balanced jump has unit norm."""
    worst = 0.0
    for n in range(2, 6):
        dim = 2**n
        values = []
        for mult in (1.0, 2.0, 4.0):
            eta = mult / dim
            rate = linops.observable_relaxation_rate(
                projector_apply(n, eta),
                linops.DensityMatrix.uniform_superposition(n).matrix,
                ground_projector(dim),
            )
            values.append((eta * dim) ** 2 / abs(rate.real))
        worst = max(worst, (max(values) - min(values)) / min(values))
        # the Liouvillian scales exactly quadratically with eta
        h = model.grover_hamiltonian(n, {0})
        l1 = jump.build_jump(h, model.coupling("projector", n, 1.0 / dim), IDEAL).matrix
        l2 = jump.build_jump(h, model.coupling("projector", n, 2.0 / dim), IDEAL).matrix
        m1 = linops.liouvillian_matrix(None, [l1], False)
        m2 = linops.liouvillian_matrix(None, [l2], False)
        assert np.abs(m2 - 4.0 * m1).max() < 1e-14
    h = model.grover_hamiltonian(3, {0})
    eta = 1.0 / math.sqrt((8 - 1) * 1)
    jop = jump.build_jump(h, model.coupling("projector", 3, eta), IDEAL)
    norm_gap = abs(jop.norm - 1.0)
    ok = worst <= 1e-9 and norm_gap <= 1e-12
    report(
        "07 scale invariance",
        ok,
        f"invariant spread {worst:.2e}, | ||L|| - 1 | = {norm_gap:.2e}",
    )
    assert ok


def test_criterion_08_fixed_point_contractivity_cptp():
    """Ground-state invariance, trace-distance contractivity, CPTP checks."""
    rng = np.random.default_rng(11)
    n = 3
    dim = 2**n
    h = model.grover_hamiltonian(n, {0})
    regimes = {
        "projector": (model.coupling("projector", n, 1.0 / dim), IDEAL),
        "bitflip": (model.coupling("bitflip", n, 1.0 / n), IDEAL0),
        "eth": (model.coupling("eth", n, 1.0 / math.sqrt(dim), seed=5), IDEAL),
        "laplacian": (model.coupling("laplacian", n, 1.0), IDEAL),
    }
    worst_fix = 0.0
    worst_contract = 0.0
    worst_cptp = 0.0
    for coup, filt in regimes.values():
        jop = jump.build_jump(h, coup, filt)
        liou = linops.build_liouvillian(h.matrix, [jop.matrix])
        rho_g = linops.DensityMatrix.basis_state(dim, 0)
        t_scale = 1.0 / abs(
            linops.observable_relaxation_rate(
                lambda rho, L=jop.matrix: linops.apply_dissipator(L, rho),
                linops.DensityMatrix.uniform_superposition(n).matrix,
                ground_projector(dim),
            ).real
        )
        for t in (0.3 * t_scale, 2.0 * t_scale):
            out = linops.evolve_exact(liou, rho_g, t)
            worst_fix = max(worst_fix, linops.trace_norm(out.matrix - rho_g.matrix))
        states = [linops.random_density_matrix(dim, rng) for _ in range(100)]
        import scipy.linalg

        prop = scipy.linalg.expm(liou.matrix * t_scale)
        evolved = [linops.unvec(prop @ linops.vec(s.matrix)) for s in states]
        for k in range(0, 100, 2):
            before = linops.trace_norm(states[k].matrix - states[k + 1].matrix)
            after = linops.trace_norm(evolved[k] - evolved[k + 1])
            worst_contract = max(worst_contract, after - before)
        lt = jump.dilate(jop.matrix)
        w = discrete.step_unitary(lt, 1.0)
        k0, k1 = w[:dim, :dim], w[dim:, :dim]
        chan = linops.Superoperator(np.kron(k0.conj(), k0) + np.kron(k1.conj(), k1), "channel")
        tp, cp = linops.channel_cptp_defects(chan)
        worst_cptp = max(worst_cptp, tp, cp)
    ok = worst_fix <= 1e-10 and worst_contract <= 1e-9 and worst_cptp <= 1e-9
    report(
        "08 fixed point / contractivity / CPTP",
        ok,
        f"fix {worst_fix:.2e}, contract excess {worst_contract:.2e}, cptp {worst_cptp:.2e}",
    )
    assert ok


def test_criterion_09_single_trace_speedup():
    """Analytic unit overlap at T = (pi/2)/(eta sqrt(N-1)); the Trotterized
    single-trace run at n = 6 lands within eps of the exact channel."""
    worst = 0.0
    for n_dim in (4, 16, 64, 256):
        eta = 1.0 / n_dim
        t_opt = discrete.singletrace_optimal_time(n_dim, eta)
        worst = max(worst, abs(discrete.singletrace_overlap(n_dim, eta, t_opt) - 1.0))
    analytic_ok = worst <= 1e-12
    # end-to-end at n = 6, p = 2, eps = 1e-2
    n, eps, p = 6, 1e-2, 2
    dim = 2**n
    h = model.grover_hamiltonian(n, {0})
    coup = model.coupling("projector", n, 1.0 / dim)
    c_const = ERF.derivative_sup(4)
    m_s, mu = jump.select_discretization(
        h.gap, ERF.m_omega, coup.norm, linops.spectral_norm(h.matrix), 1e-3, 4.0, c_const
    )
    dj = jump.discretize_jump(h, coup, ERF, m_s, mu)
    # optimal time for the window-filtered jump: the downward weight is
    # gamma_hat(-1) < 1, so the rotation takes 1/gamma_hat(-1) longer
    t_run = discrete.singletrace_optimal_time(n_dim := dim, 1.0 / dim) / float(ERF(-1.0))
    r = math.ceil((t_run * coup.norm) ** (1.0 + 1.0 / (p + 1)) * eps ** (-1.0 / (p + 1)))
    tau = t_run * t_run
    rho0 = linops.DensityMatrix.uniform_superposition(n)
    exact = discrete.channel_step(rho0, jump.dilate(dj.matrix), tau)
    w = jump.trotter_step(dj, tau, p, r)
    chi = jump.channel_from_unitary(w, rho0)
    mu_exact = exact.matrix[0, 0].real
    mu_trotter = chi.matrix[0, 0].real
    gap = abs(mu_trotter - mu_exact)
    ok = analytic_ok and gap <= eps and mu_exact >= 0.99
    report(
        "09 single-trace speedup",
        ok,
        f"analytic overlap defect {worst:.2e}; end-to-end n=6 r={r}: "
        f"exact {mu_exact:.4f}, trotter {mu_trotter:.4f}, gap {gap:.2e}",
    )
    assert ok


def test_criterion_10a_imperfect_filter_unperturbed():
    """eps = phi = 0 recovers the pure marked state exactly."""
    worst = 0.0
    for with_h in (False, True):
        rep = continuous.imperfect_filter_study(0.0, 0.0, with_h)
        worst = max(worst, float(np.abs(rep.stationary_state.matrix - np.diag([1.0, 0.0])).max()))
    ok = worst <= 1e-12
    report("10a one-qubit unperturbed steady state", ok, f"max deviation {worst:.2e}")
    assert ok


def test_criterion_10b_imperfect_filter_reported_expansion():
    """No-Hamiltonian deviation vs the reported expansion eps^2/17 + phi^2.

    A direct null-space solve of the stated model gives eps^2 + phi^2 (the
    reported 1/17 coefficient belongs to no steady state of these equations:
    the no-Hamiltonian generator is real, yet the quoted state is complex),
    so this assertion fails by up to a factor 17.  Recorded as an honest
    red; the measured values and the rederived expansion are in the report
    line and in `imperfect_filter_study`.
    """
    worst_rel = 0.0
    detail = []
    for eps, phi in ((0.02, 0.0), (0.02, 0.02), (0.01, 0.02)):
        rep = continuous.imperfect_filter_study(eps, phi, False)
        rel = abs(rep.excited_population - rep.reported_second_order) / rep.reported_second_order
        worst_rel = max(worst_rel, rel)
        detail.append(
            f"(eps={eps},phi={phi}): measured {rep.excited_population:.3e}, "
            f"reported {rep.reported_second_order:.3e}, rederived {rep.derived_second_order:.3e}"
        )
    ok = worst_rel <= 0.20
    report("10b one-qubit reported expansion", ok, "; ".join(detail))
    assert ok, (
        "no-Hamiltonian steady state does not match the reported second-order "
        f"expansion (worst relative gap {worst_rel:.2f}); the direct solve gives "
        "eps^2 + phi^2 -- see decision log"
    )


def test_criterion_10c_imperfect_filter_hamiltonian_reduction():
    """Turning on the Hamiltonian should cut the diagonal deviation 10x.

    The measured reduction is exactly 5x at phi = 0 (rotation rate 1 against
    coherence damping 1/2 gives 1 + 4 = 5) and smaller once phi > 0, whose
    population leak the Hamiltonian cannot touch; >= 10x is not attainable
    for the stated model.  Honest red, same decision-log entry as 10b.
    """
    worst_ratio = math.inf
    detail = []
    for eps, phi in ((0.02, 0.0), (0.02, 0.02)):
        off = continuous.imperfect_filter_study(eps, phi, False).excited_population
        on = continuous.imperfect_filter_study(eps, phi, True).excited_population
        ratio = off / on
        worst_ratio = min(worst_ratio, ratio)
        detail.append(f"(eps={eps},phi={phi}): reduction {ratio:.2f}x")
    ok = worst_ratio >= 10.0
    report("10c one-qubit Hamiltonian reduction", ok, "; ".join(detail))
    assert ok, (
        f"including the Hamiltonian reduces the diagonal deviation by at most "
        f"{worst_ratio:.2f}x, not 10x -- see decision log"
    )


def test_criterion_11_greedy_census():
    """Hamming-ladder greedy solves every start; the flat landscape defeats
    it beyond distance one."""
    ladder_ok = True
    flat_ok = True
    for n in range(2, 11):
        ground = 0b101 % (2**n)
        ladder = baselines.hamming_ladder_energy(n, ground)
        flat = baselines.flat_grover_energy(n, ground)
        for start in range(2**n):
            dist = bin(start ^ ground).count("1")
            run = baselines.greedy_search(n, ladder, start)
            ladder_ok = ladder_ok and run.found and len(run.flips) == dist
            frun = baselines.greedy_search(n, flat, start)
            if dist >= 2:
                flat_ok = flat_ok and not frun.found
            else:
                flat_ok = flat_ok and frun.found
    ok = ladder_ok and flat_ok
    report(
        "11 greedy census",
        ok,
        f"ladder flips == distance for all starts n<=10: {ladder_ok}; "
        f"flat landscape stalls at distance >= 2: {flat_ok}",
    )
    assert ok
