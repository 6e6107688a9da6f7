"""End-to-end acceptance checks, one test per release criterion.

Every test exercises a full slice of the library at its published
tolerance and prints the measured figures, so a verbose run doubles as a
numerical report.  Reference values are always produced by independent
routes: closed forms evaluated inline, finite differences, midpoint
Riemann sums, or the discrete dynamic-programming search, never by the
code path under test.
"""

from __future__ import annotations

import math
import time

import numpy as np

from infotherm import (
    RAW,
    AdaptationParams,
    BudgetProblem,
    ConstitutiveScaling,
    InferenceState,
    NoiseModel,
    PiecewiseLinearStimulus,
    ProcessPath,
    SamplingDynamics,
    SamplingSpec,
    cycle_balance,
    cycle_closure_check,
    cyclic_information,
    dp_oracle,
    efficiency,
    entropy,
    first_law_residual,
    fixed_points,
    global_efficiency_bound,
    greens_information,
    information_gain,
    loglog_slope,
    make_rectangle_cycle,
    mmse,
    model_triples,
    optimal_info_gain,
    partials,
    random_cycle,
    random_monotone_path,
    random_stimulus_loop,
    resample,
    sampling_work,
    second_law_check,
    simulate_driven_cycle,
    solve_optimal,
    sqrt_law_triples,
    theta,
    validate_entropy_formula,
    validate_variance_scaling,
)

WORKED_PARAMS = AdaptationParams(k=2.0, beta=1.0, p=2.0, delta_i=1.0, a=1.0)

TRAPEZOID = PiecewiseLinearStimulus.from_breakpoints(
    [[0.0, 1.0], [2.5, 4.0], [5.0, 4.0], [7.5, 1.0]])


def random_noise(rng, lo=0.05, hi=3.0):
    return NoiseModel(rng.uniform(lo, hi), RAW)


def local_entropy(m, s, sr2):
    """Plain ndarray re-derivation of the state entropy, test-side."""
    return 0.5 * np.log(s / m + sr2)


def local_theta(m, s, sr2):
    """Plain ndarray re-derivation of the susceptibility, test-side."""
    return 2.0 * (s + m * sr2)


def midpoint_theta_dh(cycle, sr2, n_steps):
    """Riemann-Stieltjes sum of Theta dH on a node-aligned resampling."""
    fine = resample(cycle, n_steps)
    h = local_entropy(fine.m, fine.sigma2, sr2)
    th = local_theta(fine.m, fine.sigma2, sr2)
    return float(np.sum(0.5 * (th[1:] + th[:-1]) * np.diff(h)))


def shoelace_area(loop):
    x, y = loop.mu, loop.m
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


# --------------------------------------------------------------------------

def test_criterion_01_state_functions_close_on_random_cycles():
    rng = np.random.default_rng(2026)
    t0 = time.perf_counter()
    worst = 0.0
    n_big_work = 0
    for _ in range(1000):
        cycle = random_cycle(rng)
        closure = cycle_closure_check(cycle, random_noise(rng))
        worst = max(worst, abs(closure.dh), abs(closure.dsigma2),
                    abs(closure.dtheta))
        if abs(sampling_work(cycle)) > 0.1:
            n_big_work += 1
    elapsed = time.perf_counter() - t0
    print(f"criterion 1: worst loop defect {worst:.3e}, "
          f"{n_big_work}/1000 cycles with |work| > 0.1, {elapsed:.2f} s")
    assert worst < 1e-9
    assert n_big_work >= 1
    assert elapsed < 10.0


def test_criterion_02_first_law_convergence_and_cycle_identity():
    # second-order convergence of the discrete balance on single segments
    rng = np.random.default_rng(7)
    ratios = []
    for _ in range(100):
        m = np.sort(rng.uniform(0.5, 50.0, 2))
        s = rng.uniform(0.1, 20.0, 2)
        noise = random_noise(rng, 0.05, 2.0)
        segment = ProcessPath(m, s)
        coarse = first_law_residual(segment, noise, 64)
        fine = first_law_residual(segment, noise, 128)
        ratios.append(coarse / fine)
    lo, hi = min(ratios), max(ratios)
    assert 3.5 <= lo and hi <= 4.5

    # around any cycle the relaxation term balances the work exactly;
    # the left side comes from a test-local midpoint sum over Theta and H
    # with one Richardson step, the right side from the work quadrature
    rng = np.random.default_rng(7)
    cycles = [make_rectangle_cycle(1.0, math.e ** 2, 1.0, 3.0)]
    noises = [1.0]
    for _ in range(100):
        cycles.append(random_cycle(rng))
        noises.append(rng.uniform(0.05, 3.0))

    # anchor the local formulas to the package state functions first
    probe, sr2 = cycles[1], noises[1]
    for m, s in zip(probe.m, probe.sigma2):
        nz = NoiseModel(sr2, RAW)
        assert abs(local_entropy(m, s, sr2) - entropy(InferenceState(m, s), nz)) < 1e-12
        assert abs(local_theta(m, s, sr2) - theta(InferenceState(m, s), nz)) < 1e-12

    t0 = time.perf_counter()
    worst_gap = 0.0
    for cycle, sr2 in zip(cycles, noises):
        n = (cycle.n_nodes - 1) * 4096
        a1 = midpoint_theta_dh(cycle, sr2, n)
        a2 = midpoint_theta_dh(cycle, sr2, 2 * n)
        left = (4.0 * a2 - a1) / 3.0
        worst_gap = max(worst_gap, abs(left + sampling_work(cycle)))
    elapsed = time.perf_counter() - t0
    print(f"criterion 2: halving ratios in [{lo:.3f}, {hi:.3f}], "
          f"worst cycle identity gap {worst_gap:.3e}, {elapsed:.2f} s")
    assert worst_gap < 1e-8


def test_criterion_03_rectangle_cycle_work_closed_form():
    # (sigma_hi - sigma_lo) * log(m_hi / m_lo) = 2 * 2 = 4 on this box
    cw = make_rectangle_cycle(1.0, math.e ** 2, 1.0, 3.0, clockwise=True)
    ccw = make_rectangle_cycle(1.0, math.e ** 2, 1.0, 3.0)
    w_cw = sampling_work(cw)
    w_ccw = sampling_work(ccw)
    print(f"criterion 3: clockwise work {w_cw:.12f}, reversed {w_ccw:.12f}")
    assert abs(w_cw - 4.0) < 1e-9
    assert abs(w_ccw + 4.0) < 1e-9


def test_criterion_04_optimal_trajectory_and_budget_search():
    t0 = time.perf_counter()
    problem = BudgetProblem(1.0, 4.0, 1.0, NoiseModel(1.0, RAW))

    traj = solve_optimal(problem)
    grid = np.linspace(1.0, 4.0, 2001)
    traj_dev = float(np.max(np.abs(traj.sigma2(grid)
                                   - (2.0 * np.sqrt(grid) - grid))))
    best = optimal_info_gain(problem)
    gain_gap = abs(best - (math.log(2.0) - 0.5))

    solution = dp_oracle(problem, 64, 64, 64)
    dp_gap = abs(solution.gain - best)

    # no admissible profile spending the same budget may do better
    rng = np.random.default_rng(43)
    excess = -math.inf
    for _ in range(100):
        m = np.concatenate(([1.0], np.sort(rng.uniform(1.0, 4.0, 5)), [4.0]))
        s = rng.uniform(0.1, 5.0, m.size)
        s = s * (problem.work / sampling_work(ProcessPath(m, s)))
        path = ProcessPath(m, s)
        assert abs(sampling_work(path) - problem.work) < 1e-12
        excess = max(excess, information_gain(path, problem.noise) - best)
    elapsed = time.perf_counter() - t0
    print(f"criterion 4: trajectory dev {traj_dev:.3e}, gain gap "
          f"{gain_gap:.3e}, dp gap {dp_gap:.3e}, best rival excess "
          f"{excess:.3e}, {elapsed:.2f} s")
    assert traj_dev < 1e-9
    assert gain_gap < 1e-9
    assert dp_gap < 5e-3
    assert excess <= 1e-9
    assert elapsed < 60.0


def test_criterion_05_monotone_paths_respect_the_capacity_bound():
    rng = np.random.default_rng(19)
    bound = math.log(2.0)
    top = -math.inf
    for _ in range(1000):
        path = random_monotone_path(rng, 1.0, 4.0)
        noise = NoiseModel(rng.uniform(0.0, 3.0), RAW)
        top = max(top, information_gain(path, noise))
    print(f"criterion 5: largest gain {top:.6f} against bound {bound:.6f}")
    assert top <= bound + 1e-9


def test_criterion_06_cyclic_information_is_nonnegative():
    rng = np.random.default_rng(23)
    t0 = time.perf_counter()
    low = math.inf
    for _ in range(500):
        loop = random_stimulus_loop(rng)
        scaling = ConstitutiveScaling(rng.uniform(0.1, 4.0),
                                      rng.uniform(0.0, 3.0))
        low = min(low, cyclic_information(loop, scaling, random_noise(rng)))

    # area route against line route on convex loops
    rng = np.random.default_rng(29)
    worst_rel = 0.0
    for k in range(40):
        kind = "rectangle" if k % 2 == 0 else "ellipse"
        loop = random_stimulus_loop(rng, kind=kind)
        scaling = ConstitutiveScaling(rng.uniform(0.1, 4.0),
                                      rng.uniform(0.2, 3.0))
        noise = random_noise(rng)
        line = cyclic_information(loop, scaling, noise)
        area = greens_information(loop, scaling, noise)
        assert abs(line) > 1e-12
        worst_rel = max(worst_rel, abs(area - line) / abs(line))

    # without readout noise the integrand is exact and every loop closes
    rng = np.random.default_rng(31)
    silent = NoiseModel(0.0, RAW)
    worst_zero = 0.0
    for _ in range(50):
        loop = random_stimulus_loop(rng)
        scaling = ConstitutiveScaling(rng.uniform(0.1, 4.0),
                                      rng.uniform(0.0, 3.0))
        worst_zero = max(worst_zero,
                         abs(cyclic_information(loop, scaling, silent)))
    elapsed = time.perf_counter() - t0
    print(f"criterion 6: lowest cyclic info {low:.3e}, worst area/line gap "
          f"{worst_rel:.3e}, worst noiseless loop {worst_zero:.3e}, "
          f"{elapsed:.2f} s")
    assert low >= -1e-9
    assert worst_rel < 1e-4
    assert worst_zero < 1e-9


def test_criterion_07_driven_loops_shrink_toward_quasistatic():
    scaling = ConstitutiveScaling(1.0, 2.0)
    noise = NoiseModel(1.0, RAW)
    t0 = time.perf_counter()
    infos, areas = [], []
    for rate in (1.0, 10.0, 100.0):
        loop = simulate_driven_cycle(TRAPEZOID, SamplingDynamics(rate),
                                     scaling, t_end=30.0, dt=1e-3)
        verdict = second_law_check(loop, scaling, noise)
        assert verdict.orientation == 1
        assert verdict.holds
        infos.append(verdict.cyclic_info)
        areas.append(shoelace_area(loop))
    elapsed = time.perf_counter() - t0
    print(f"criterion 7: cyclic info {[f'{v:.5f}' for v in infos]}, "
          f"areas {[f'{a:.4f}' for a in areas]}, {elapsed:.2f} s")
    assert all(v >= 0.0 for v in infos)
    assert all(a > 0.0 for a in areas)
    assert areas[0] > areas[1] > areas[2]


def test_criterion_08_adaptation_inequality_and_worked_point():
    rng = np.random.default_rng(37)
    t0 = time.perf_counter()
    n_ok = 0
    n_draws = 10_000
    for _ in range(n_draws):
        params = AdaptationParams(k=rng.uniform(0.2, 5.0),
                                  beta=rng.uniform(0.05, 5.0),
                                  p=rng.uniform(0.1, 4.0),
                                  delta_i=rng.uniform(0.05, 5.0),
                                  a=1.0)
        fp = fixed_points(rng.uniform(0.01, 30.0), params)
        geometric = math.sqrt(fp.pr * fp.sr)
        arithmetic = 0.5 * (fp.pr + fp.sr)
        if geometric <= fp.ss + 1e-12 and fp.ss <= arithmetic + 1e-12:
            n_ok += 1
    elapsed = time.perf_counter() - t0

    # worked point: every rate is (k/2) log1p of a signal-to-floor ratio,
    # and with k=2, beta=1, p=2, delta_i=1, i=3 those ratios evaluate by
    # hand to 1, 16, 4 and 1/4
    fp = fixed_points(3.0, WORKED_PARAMS)
    balance = cycle_balance(3.0, WORKED_PARAMS)
    refs = {
        "sr": (fp.sr, math.log(2.0), 0.6931),
        "pr": (fp.pr, math.log(17.0), 2.8332),
        "ss": (fp.ss, math.log(5.0), 1.6094),
        "tr": (fp.tr, math.log(1.25), 0.2231),
        "balance": (balance, math.log(2.125), 0.7538),
    }
    for got, rederived, quoted in refs.values():
        assert abs(got - rederived) < 1e-12
        assert abs(got - quoted) < 1e-4
    print(f"criterion 8: {n_ok}/{n_draws} draws inside both bounds, "
          f"worked point balance {balance:.6f}, {elapsed:.2f} s")
    assert n_ok == n_draws
    assert balance >= 0.0


def test_criterion_09_log_log_slopes_sit_near_one_half():
    exact = loglog_slope(sqrt_law_triples(0.7, np.linspace(1.0, 4.0, 8)))
    assert abs(exact.slope - 0.5) < 1e-10
    assert abs(exact.r - 1.0) < 1e-12

    model = loglog_slope(model_triples(WORKED_PARAMS,
                                       np.geomspace(0.05, 1.0, 12)))
    print(f"criterion 9: exact corpus slope {exact.slope:.12f} "
          f"(r = {exact.r:.12f}), model corpus slope {model.slope:.4f}")
    assert 0.4 <= model.slope <= 0.6


def test_criterion_10_monte_carlo_entropy_validation():
    t0 = time.perf_counter()
    gauss = validate_entropy_formula(
        SamplingSpec(family="gaussian", mu=0.0, sigma2=2.0, m=100,
                     sigma_r2=0.5, trials=10_000, seed=5))
    assert gauss.passed
    assert abs(gauss.gap) <= 0.02

    poisson = validate_entropy_formula(
        SamplingSpec(family="poisson", mu=10.0, m=400, sigma_r2=0.5,
                     trials=10_000, seed=5), tol=0.03)
    assert poisson.passed
    assert abs(poisson.gap) <= 0.03

    ratios = []
    for pts in (validate_variance_scaling("gaussian", 0.0, [50, 100, 200],
                                          trials=10_000, seed=7, sigma2=2.0),
                validate_variance_scaling("poisson", 10.0, [50, 100, 200],
                                          trials=10_000, seed=7)):
        ratios.extend(pt.ratio for pt in pts)
    elapsed = time.perf_counter() - t0
    print(f"criterion 10: gaussian gap {gauss.gap:.4f}, poisson gap "
          f"{poisson.gap:.4f}, scaling ratios "
          f"{[f'{r:.3f}' for r in ratios]}, {elapsed:.2f} s")
    assert all(0.9 <= r <= 1.1 for r in ratios)
    assert elapsed < 120.0


def test_criterion_11_partials_match_finite_differences():
    rng = np.random.default_rng(53)
    worst = 0.0
    for _ in range(300):
        m = math.exp(rng.uniform(0.0, math.log(1e3)))
        s = math.exp(rng.uniform(math.log(0.1), math.log(1e3)))
        sr2 = math.exp(rng.uniform(math.log(1e-2), math.log(10.0)))
        noise = NoiseModel(sr2, RAW)
        p = partials(InferenceState(m, s), noise)

        def h(mm, ss):
            return entropy(InferenceState(mm, ss), noise)

        hm = 1e-4 * m
        hs = min(1e-4 * (s + m * sr2), 0.5 * s)
        fd_ds = (h(m, s + hs) - h(m, s - hs)) / (2.0 * hs)
        fd_dm = (h(m + hm, s) - h(m - hm, s)) / (2.0 * hm)
        # the two constant-entropy slopes follow from the implicit
        # function identity, so they stay purely finite-difference
        fd_sm = -fd_dm / fd_ds
        fd_tm = 2.0 * (fd_sm + sr2)
        pairs = ((p.dh_dsigma2, fd_ds), (p.dh_dm, fd_dm),
                 (p.dsigma2_dm, fd_sm), (p.dtheta_dm, fd_tm))
        for got, ref in pairs:
            worst = max(worst, abs(got - ref) / abs(ref))
        assert p.dsigma2_dtheta == 0.5
    print(f"criterion 11: worst relative derivative error {worst:.3e}")
    assert worst < 1e-6


def test_criterion_12_efficiency_range_and_global_bound():
    rng = np.random.default_rng(47)
    for _ in range(300):
        m = math.exp(rng.uniform(0.0, math.log(1e4)))
        s = math.exp(rng.uniform(math.log(1e-3), math.log(1e3)))
        noise = random_noise(rng, 0.01, 10.0)
        eta = efficiency(InferenceState(m, s), noise)
        assert 0.0 < eta < 1.0
        assert abs(mmse(InferenceState(m, s), noise) - eta * s / m) <= 1e-12
        assert efficiency(InferenceState(m, 0.0), noise) == 1.0
        assert mmse(InferenceState(m, 0.0), noise) == 0.0

    # cycles returning along the zero-variance floor keep the work form
    # one-signed, and their information-per-work never beats the bound
    rng = np.random.default_rng(41)
    worst_slack = math.inf
    for _ in range(100):
        m_lo = rng.uniform(0.5, 50.0)
        m_hi = m_lo * rng.uniform(1.2, 20.0)
        s_hi = rng.uniform(0.5, 50.0)
        cycle = make_rectangle_cycle(m_lo, m_hi, 0.0, s_hi,
                                     clockwise=bool(rng.integers(2)))
        noise = random_noise(rng)
        report = global_efficiency_bound(cycle, noise)
        assert report.sign_definite
        assert report.holds
        assert report.ratio <= report.bound + 1e-12
        floor = 2.0 * report.m_star * noise.sigma_r2
        assert abs(report.bound - 1.0 / floor) < 1e-15 * report.bound
        worst_slack = min(worst_slack, report.bound - report.ratio)
    print(f"criterion 12: efficiency range clean, worst bound slack "
          f"{worst_slack:.4e}")
    assert worst_slack > 0.0
