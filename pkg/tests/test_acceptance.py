"""Acceptance suite: every contract the library must honor, at desk scale.

Each test prints one `ACCEPTANCE nn [pass|FAIL]` line (visible with -s)
and asserts the stated tolerance.  Scenario constants are pinned here;
nothing is calibrated at run time.
"""

import numpy as np
import pytest

from kinetic_hydro import (
    BoundaryData,
    InitialData,
    RunConfig,
    SourceModel,
    SpatialGrid,
    VelocityGrid,
    burgers,
    linear,
    picard_solve,
    project_equilibrium,
    project_equilibrium_field,
    solve,
    solve_riemann,
    zeroth_moment,
)
from kinetic_hydro.diagnostics import (
    ManufacturedOracle,
    RiemannOracle,
    TestFunctionFamily,
    bv_and_lipschitz_monitor,
    contraction_ledger,
    equilibrium_distance,
    hydrodynamic_limit_sweep,
    kinetic_entropy_residual,
    kruzhkov_k_grid,
    macro_entropy_residual,
    max_principle_entry,
    support_and_speed_monitor,
)
from kinetic_hydro.reference_solver import MacroBoundary, solve_macro


def _line(num: int, ok: bool, text: str) -> None:
    print(f"ACCEPTANCE {num:02d} [{'pass' if ok else 'FAIL'}] {text}")


def riemann_config(wl, wr, x0=0.25, n_x=200, n_v=64, eps=1e-4, t_end=0.3,
                   cfl=0.95, store_g=False, snapshots=32):
    spatial = SpatialGrid(n_x)
    velocity = VelocityGrid(-1.0625, 1.0625, n_v)
    return RunConfig(
        spatial=spatial, velocity=velocity, flux=burgers(), epsilon=eps,
        t_end=t_end, boundary=BoundaryData.equilibrium(velocity, wl, wr),
        initial=InitialData.from_macro(lambda x: np.where(x < x0, wl, wr)),
        cfl=cfl, store_g=store_g, n_snapshots=snapshots)


@pytest.fixture(scope="module")
def shock_run():
    return solve(riemann_config(1.0, 0.0, store_g=True))


@pytest.fixture(scope="module")
def rarefaction_run():
    return solve(riemann_config(0.0, 1.0, store_g=True))


# ------------------------------------------------------------ criterion 1


def test_01_moment_identities():
    grid = VelocityGrid(-2.0, 2.0, 64)
    rng = np.random.default_rng(20240811)
    us = rng.uniform(grid.v_min, grid.v_max, 1000)
    tol = lambda *vals: 4 * np.spacing(max(1.0, *[abs(v) for v in vals]))

    moment_ok = all(
        abs(zeroth_moment(project_equilibrium(u, grid).values, grid) - u) <= tol(u)
        for u in us)

    pairs = rng.uniform(grid.v_min, grid.v_max, (1000, 2))
    l1_ok = True
    for u1, u2 in pairs:
        a = project_equilibrium(u1, grid).values
        b = project_equilibrium(u2, grid).values
        got = np.sum(np.abs(a - b)) * grid.dv
        l1_ok &= abs(got - abs(u1 - u2)) <= tol(u1, u2)

    ok = moment_ok and l1_ok
    _line(1, ok, "moment and L1 signature identities within 4 ulp (1000 samples)")
    assert ok


# ------------------------------------------------------------ criterion 2


def test_02_discrete_l1_contraction():
    rng = np.random.default_rng(7)
    worst = -np.inf
    all_ok = True
    n_pairs_per_eps = 10
    for eps in (1e-1, 1e-3):
        for _ in range(n_pairs_per_eps):
            runs = []
            jitter = rng.uniform(-0.05, 0.04)
            for pert_boundary in (False, True):
                cfg = riemann_config(1.0, 0.0, n_x=100, n_v=32, eps=eps,
                                     t_end=0.3, snapshots=8)
                base = cfg.initial.build(cfg.spatial, cfg.velocity)
                mask = rng.random(base.shape) < 0.2
                delta = np.where(mask, rng.uniform(-0.03, 0.03, base.shape), 0.0)
                delta[:, :2] = delta[:, -2:] = 0.0     # keep support interior
                vg = cfg.velocity
                cfg.initial = InitialData.from_kinetic(
                    base + delta, (vg.v_min + 2 * vg.dv, vg.v_max - 2 * vg.dv), 1.1)
                if pert_boundary:
                    cfg.boundary = BoundaryData.equilibrium(vg, 1.0 + jitter, 0.0)
                runs.append(solve(cfg))
            entry = contraction_ledger(runs[0], runs[1])
            worst = max(worst, entry.value / entry.tolerance * 1e-10)
            all_ok &= entry.passed
    _line(2, all_ok, f"L1 contraction ledger on 20 perturbation pairs "
                     f"(worst LHS-RHS = {worst:.2e} x scale <= 1e-10 x scale)")
    assert all_ok


# ------------------------------------------------------------ criterion 3


def test_03_max_principle_and_support():
    run = solve(riemann_config(1.0, 0.0, t_end=0.4))
    entries = [max_principle_entry(run)] + support_and_speed_monitor(run)
    ok = all(e.passed for e in entries)
    detail = ", ".join(f"{e.name}={e.value:g}" for e in entries)
    _line(3, ok, f"sup|g| <= max(data, 1) and support monitors with 1-cell "
                 f"guard on the shock tube ({detail})")
    assert ok, detail


# ------------------------------------------------------------ criterion 4


def test_04_hydrodynamic_limit_linear():
    spatial = SpatialGrid(400)
    velocity = VelocityGrid(-0.75, 0.75, 32)

    def w0(x):
        r = (x - 0.3) / 0.15
        return 0.5 * np.where(np.abs(r) < 1.0, (1 - np.minimum(r * r, 1)) ** 2, 0.0)

    cfg = RunConfig(spatial=spatial, velocity=velocity, flux=linear(1.0),
                    epsilon=1e-3, t_end=0.25, boundary=BoundaryData.zero(),
                    initial=InitialData.from_macro(w0), cfl=0.9)
    tv = 2 * 0.5
    floor = 5.0 * spatial.dx * tv
    oracle = ManufacturedOracle(lambda x, t: w0(x - 1.0 * t))
    res = hydrodynamic_limit_sweep(cfg, [1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
                                   oracle, floor=floor)
    errs = [r.l1_error for r in res.rows]
    at_floor = all(e <= floor for e in errs)
    decreasing_to_floor = all(
        errs[i + 1] < errs[i] or (errs[i] <= floor and errs[i + 1] <= floor)
        for i in range(len(errs) - 1))
    ok = res.all_passed and at_floor and decreasing_to_floor
    _line(4, ok, f"linear-flux sweep monotone to floor "
                 f"(errors {errs[0]:.2e}..{errs[-1]:.2e}, floor {floor:.2e})")
    assert ok


# ------------------------------------------------------------ criterion 5


def test_05_hydrodynamic_limit_burgers():
    eps_list = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    ok = True
    details = []
    for wl, wr, tag in ((1.0, 0.0, "shock"), (0.0, 1.0, "rarefaction")):
        cfg = riemann_config(wl, wr, n_x=400, t_end=0.25, snapshots=32)
        floor = 5.0 * cfg.spatial.dx * abs(wl - wr)
        res = hydrodynamic_limit_sweep(cfg, eps_list, RiemannOracle(wl, wr, 0.25),
                                       floor=floor, keep_runs=True)
        ok &= res.all_passed
        run = res.runs[1e-3]
        exact = solve_riemann(cfg.flux, wl, wr).sample(cfg.spatial.centers,
                                                       0.25, 0.25)
        final_err = float(np.sum(np.abs(run.w_history[-1] - exact)) * cfg.spatial.dx)
        budget = 3.0 * cfg.spatial.dx * abs(wl - wr)
        ok &= final_err <= budget
        details.append(f"{tag}: final {final_err:.2e} <= {budget:.2e}")
    _line(5, ok, "burgers sweeps monotone to floor; converged run matches the "
                 "exact solution (" + "; ".join(details) + ")")
    assert ok


# ------------------------------------------------------------ criterion 6


def test_06_equilibrium_distance_slope():
    spatial = SpatialGrid(200)
    velocity = VelocityGrid(-0.75, 0.75, 48)

    def w0(x):
        r = (x - 0.5) / 0.3
        return 0.3 + 0.2 * np.where(np.abs(r) < 1.0, (1 - np.minimum(r * r, 1)) ** 2, 0.0)

    eps_list = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    dists = []
    # dt must resolve the smallest relaxation time, or the splitting floor
    # (one transport substep) masks the O(eps) law; cfl = 0.03 puts
    # dt ~ 2e-4 <= eps_min / 5
    for eps in eps_list:
        cfg = RunConfig(spatial=spatial, velocity=velocity, flux=burgers(),
                        epsilon=eps, t_end=0.25, cfl=0.03,
                        boundary=BoundaryData.equilibrium(velocity, 0.3, 0.3),
                        initial=InitialData.from_macro(w0), store_g=True)
        dists.append(float(np.max(equilibrium_distance(solve(cfg)))))
    slope = float(np.polyfit(np.log(eps_list), np.log(dists), 1)[0])
    ok = 0.8 <= slope <= 1.2
    _line(6, ok, f"equilibrium distance scales like eps (log-log slope "
                 f"{slope:.3f} in [0.8, 1.2])")
    assert ok, dists


# ------------------------------------------------------------ criterion 7


def test_07_entropy_inequalities(shock_run, rarefaction_run):
    ok = True
    worst = -np.inf
    for run, rng_lo, rng_hi in ((shock_run, 0.0, 1.0), (rarefaction_run, 0.0, 1.0)):
        fam = TestFunctionFamily(run.config.t_end)
        members = fam.default_members()
        ks, sent_lo, sent_hi = kruzhkov_k_grid(rng_lo, rng_hi, run.velocity)
        scale = max(1.0, float(np.max(run.sup_g)))
        for psi in members:
            for k in ks:
                r = kinetic_entropy_residual(run, float(k), psi)
                ok &= r.excess <= r.tol_q
                worst = max(worst, r.excess / r.tol_q)
            for k, sgn in ((sent_lo, +1), (sent_hi, -1)):
                r = kinetic_entropy_residual(run, k, psi, sentinel_sign=sgn)
                ok &= abs(r.sign_defect) <= 1e-10 * scale
                ok &= r.residual <= r.tol_q

        # macroscopic definition residual on the kinetic-moment field
        cfg = run.config
        wr = float(cfg.boundary.g1(run.velocity.centers, 0.0).sum()
                   * run.velocity.dv)
        from kinetic_hydro.diagnostics import _tol_q
        for psi in (members[1], members[3], members[4]):
            for k in np.linspace(0.1, 0.9, 5):
                res = macro_entropy_residual(
                    run.times, run.w_history, cfg.spatial, cfg.velocity,
                    cfg.flux, float(k), psi, g0=cfg.boundary.g0,
                    w1_trace=lambda t: wr)
                ok &= res <= _tol_q(run, psi, scale + 1.0)
    _line(7, ok, f"kinetic + macroscopic entropy residuals within tol_q "
                 f"(worst kinetic excess/tol_q = {worst:.2e}); sentinel "
                 f"telescoping <= 1e-10 x scale")
    assert ok


# ------------------------------------------------------------ criterion 8


def _manufactured_forced_setup(n_x=200, n_v=64, eps=1e-3):
    a_amp, c = 0.2, 0.6

    def w_star(x, t):
        return 1.0 + a_amp * np.sin(2 * np.pi * (x - c * t))

    def rho(x, t):
        ph = 2 * np.pi * (x - c * t)
        w = w_star(x, t)
        return (-2 * np.pi * c * a_amp * np.cos(ph)
                + w * 2 * np.pi * a_amp * np.cos(ph)) / w

    spatial = SpatialGrid(n_x)
    velocity = VelocityGrid(-1.75, 1.75, n_v)
    rho_sup = 2 * np.pi * a_amp * (1.2 + c) / 0.8
    source = SourceModel(
        S=lambda x, t, v: rho(x, t) * v,
        dSdv=lambda x, t, v: rho(x, t) * np.ones_like(v),
        sup_S=rho_sup * 1.75, sup_dSdv=rho_sup)
    boundary = BoundaryData(
        g0=lambda v, t: project_equilibrium_field(np.asarray(w_star(0.0, t)), velocity),
        g1=lambda v, t: project_equilibrium_field(np.asarray(w_star(1.0, t)), velocity),
        support0=(0.0, 1.0 + a_amp), support1=(0.0, 1.0 + a_amp),
        sup0=1.0, sup1=1.0)
    cfg = RunConfig(spatial=spatial, velocity=velocity, flux=burgers(),
                    epsilon=eps, t_end=0.3, boundary=boundary,
                    initial=InitialData.from_macro(lambda x: w_star(x, 0.0)),
                    source=source, cfl=0.9)
    return cfg, w_star, rho


def test_08_source_model():
    cfg, w_star, rho = _manufactured_forced_setup()
    run = solve(cfg)

    mb = MacroBoundary(w0_trace=lambda t: float(w_star(0.0, t)),
                       w1_trace=lambda t: float(w_star(1.0, t)))
    ref = solve_macro(w_star(cfg.spatial.centers, 0.0), cfg.flux, mb,
                      cfg.spatial, np.array([cfg.t_end]),
                      source_macro=lambda x, t, w: rho(x, t) * w,
                      speed_bound=2.0)
    err = float(np.sum(np.abs(run.w_history[-1] - ref[0])) * cfg.spatial.dx)
    budget = 5.0 * (cfg.spatial.dx + cfg.epsilon)
    agree_ok = err <= budget

    # forced contraction ledger with the amplification factor
    cfg_b, _, _ = _manufactured_forced_setup()
    base = cfg_b.initial.build(cfg_b.spatial, cfg_b.velocity)
    rng = np.random.default_rng(3)
    delta = np.where(rng.random(base.shape) < 0.2,
                     rng.uniform(-0.03, 0.03, base.shape), 0.0)
    delta[:, :6] = delta[:, -6:] = 0.0
    vg = cfg_b.velocity
    cfg_b.initial = InitialData.from_kinetic(
        base + delta, (vg.v_min + 6 * vg.dv, vg.v_max - 6 * vg.dv), 1.1)
    run_b = solve(cfg_b)
    entry = contraction_ledger(run, run_b)
    ledger_ok = entry.passed and entry.name == "l1-contraction-forced"

    ok = agree_ok and ledger_ok
    _line(8, ok, f"forced model: moments agree with source-split reference "
                 f"({err:.2e} <= {budget:.2e}); amplified contraction ledger "
                 f"(LHS-RHS = {entry.value:.2e})")
    assert ok


# ------------------------------------------------------------ criterion 9


def test_09_picard_mode():
    spatial = SpatialGrid(60)
    velocity = VelocityGrid(-1.5, 1.5, 24)
    cfg = RunConfig(spatial=spatial, velocity=velocity, flux=burgers(),
                    epsilon=5e-2, t_end=0.2, mode="picard",
                    boundary=BoundaryData.equilibrium(velocity, 1.0, 0.2),
                    initial=InitialData.from_macro(
                        lambda x: np.where(x < 0.4, 1.0, 0.2)))
    tol = 1e-10
    res = picard_solve(cfg, n_iter=60, tol=tol)
    h = res.residual_history
    decreasing = all(h[i + 1] < h[i] for i in range(len(h) - 1))
    geometric = all(r <= 0.9 for r in res.contraction_ratios[2:])

    # agreement with the splitting trajectory
    from kinetic_hydro.kinetic_solver import KineticState, step, zeroth_moment_field
    split_cfg = RunConfig(**{**cfg.__dict__, "mode": "splitting"})
    dt, n_steps = split_cfg.pick_dt()
    state = KineticState(split_cfg.initial.build(spatial, velocity), 0.0)
    traj = np.empty((n_steps + 1, spatial.n_cells))
    traj[0] = zeroth_moment_field(state.g, velocity)
    speeds = split_cfg.speeds()
    for n in range(n_steps):
        state, _ = step(state, dt, split_cfg, speeds=speeds)
        traj[n + 1] = zeroth_moment_field(state.g, velocity)
    dist = float(np.sum(np.abs(res.w_trajectory - traj)) * spatial.dx * dt)
    close = dist <= 2 * tol

    ok = decreasing and geometric and close
    _line(9, ok, f"picard iterations contract geometrically "
                 f"(ratios {['%.2f' % r for r in res.contraction_ratios[:5]]}), "
                 f"final within {dist:.1e} <= 2 tol of the splitting solution")
    assert ok


# ------------------------------------------------------------ criterion 10


def test_10_bv_and_time_lipschitz(shock_run):
    entries = bv_and_lipschitz_monitor(shock_run)
    by_name = {e.name: e for e in entries}
    ok = all(e.passed for e in entries)
    _line(10, ok, f"interior BV {by_name['bv-interior-window'].value:.3f} <= "
                  f"budget {by_name['bv-interior-window'].bound:.3f}; "
                  f"time-Lipschitz rate {by_name['time-lipschitz-window'].value:.3f}"
                  f" <= {by_name['time-lipschitz-window'].bound:.3f}")
    assert ok
