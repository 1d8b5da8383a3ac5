"""The eight verification experiments behind the CLI.

Each experiment draws its unset parameters from conservative defaults, runs
the relevant identity checks at desk scale, and returns a VerificationReport.
Randomness (parameter draws, test functions) is seeded and the seed recorded,
so re-running a config reproduces every residual bit-for-bit.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .chamber import ChamberPoint, SpectralParameter, chamber_gap, weyl_vector
from .errors import ConfigError
from .hyperg import (
    ExtendedEvaluator,
    FreeClosedFormN2,
    dominant_asymptotics_scaled,
    l2_residual,
)
from .model import (
    PhysicalParams,
    apply_Hr,
    difference_eq_residual,
    h1_squared,
    kernel_identity_residual,
    psi_eval,
    schrodinger_apply,
    truncation_radius,
)
from .quadrature import build_grid, commutator_norm, integral_equation_residual, nystrom_matrix
from .reports import CheckResult, ExperimentConfig, Stopwatch, VerificationReport
from .special import cosh_fourier_gamma

_DEFAULT_U = {
    1: [0.4],
    2: [0.8, -0.8],
    3: [0.9, 0.0, -0.9],
}

_DEFAULT_T = {
    1: [[0.0], [1.5], [-2.0]],
    2: [[-2.5, 2.5], [-3.0, 3.0], [-1.5, 3.5]],
    3: [[-4.0, 0.0, 4.0], [-4.5, -0.5, 4.5], [-3.5, 0.5, 4.25]],
}


def _finish(cfg, checks, diagnostics, sw) -> VerificationReport:
    return VerificationReport(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        checks=checks,
        diagnostics=diagnostics,
        wall_time_ms=sw.elapsed_ms,
        seed=cfg.seed,
        exploratory=cfg.exploratory,
    )


def _default_u(cfg) -> np.ndarray:
    if cfg.u is not None:
        return np.asarray(cfg.u, dtype=float)
    return np.asarray(_DEFAULT_U[cfg.n], dtype=float)


# --- fourier-gamma ---------------------------------------------------------

def run_fourier_gamma(cfg: ExperimentConfig) -> VerificationReport:
    """Gamma-product formula vs adaptive quadrature of its Fourier integral."""
    tol = cfg.tol if cfg.tol is not None else 1e-9
    if cfg.lam is not None or cfg.xi is not None:
        pairs = [(cfg.xi if cfg.xi is not None else 0.0,
                  cfg.lam if cfg.lam is not None else 2.0)]
    else:
        pairs = [(v, lam) for lam in (1.0, 1.5, 2.0, 3.5) for v in (0.0, 0.7, 2.0)]
    checks = []
    values = {}
    with Stopwatch() as sw:
        for v, lam in pairs:
            formula = cosh_fourier_gamma(v, lam)
            # 2 cosh(w/2) = e^{w/2}(1 + e^{-w}) for w >= 0, stable at large w
            integral, quad_err = quad(
                lambda w: math.cos(v * w)
                * math.exp(-lam * (0.5 * w + math.log1p(math.exp(-w)))),
                0.0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=400,
            )
            integral *= 2.0
            name = f"fg_lam{lam:g}_v{v:g}"
            checks.append(CheckResult.judged(name, abs(formula - integral) / abs(formula), tol))
            values[name] = {"formula": formula, "quadrature": integral, "quad_err": quad_err}
    return _finish(cfg, checks, {"values": values}, sw)


# --- diff-eq ---------------------------------------------------------------

def run_diff_eq(cfg: ExperimentConfig) -> VerificationReport:
    """Eigenvalue difference equation across random parameter draws."""
    tol = cfg.tol if cfg.tol is not None else 1e-10
    lams = [cfg.lam] if cfg.lam is not None else [1.0, 1.7, 3.0]
    n_draws = 50
    rng = np.random.default_rng(cfg.seed)
    with Stopwatch() as sw:
        worst = {lam: 0.0 for lam in lams}
        for k in range(n_draws):
            lam = lams[k % len(lams)]
            u = _draw_regular_u(rng, cfg.n)
            xi = cfg.xi if cfg.xi is not None else float(rng.uniform(-1.0, 1.0))
            r = difference_eq_residual(xi, SpectralParameter(u, lam))
            worst[lam] = max(worst[lam], r)
        checks = [
            CheckResult.judged(f"diffeq_lam{lam:g}", worst[lam], tol) for lam in lams
        ]
    return _finish(cfg, checks, {"n_draws": n_draws}, sw)


def _draw_regular_u(rng, n, lo=-2.0, hi=2.0, min_gap=0.15):
    while True:
        u = rng.uniform(lo, hi, size=n)
        if n == 1 or np.min(np.diff(np.sort(u))) > min_gap:
            return u


# --- int-eq ----------------------------------------------------------------

def _inteq_defaults(cfg):
    lam = cfg.lam if cfg.lam is not None else 1.0
    if cfg.tol is not None:
        tol = cfg.tol
    elif cfg.n == 3:
        tol = 1e-3
    elif cfg.n == 2 and lam != 1.0:
        tol = 1e-4
    else:
        tol = 1e-6
    return lam, tol


def _inteq_grid_defaults(cfg, radius, spread):
    """Panel counts sized to the box so the oscillation stays resolved:
    target panel widths of about 4.2 (order 10) / 2.1 (order 6)."""
    width = 2.0 * radius + spread
    if cfg.n == 3:
        order = cfg.order if cfg.order is not None else 6
        panels = cfg.panels if cfg.panels is not None else max(5, math.ceil(width / 2.1))
    else:
        order = cfg.order if cfg.order is not None else 10
        panels = cfg.panels if cfg.panels is not None else max(8, math.ceil(width / 4.2))
    return panels, order


def run_int_eq(cfg: ExperimentConfig) -> VerificationReport:
    """Quadrature check of the eigenfunction integral equation."""
    lam, tol = _inteq_defaults(cfg)
    u = _default_u(cfg)
    sp = SpectralParameter(u, lam)
    xis = [cfg.xi] if cfg.xi is not None else [0.0, 0.3, 1.0]
    t_points = [ChamberPoint(t) for t in _DEFAULT_T[cfg.n]]
    wall_guard = cfg.wall_guard if cfg.wall_guard is not None else 0.05
    if sp.n == 2 and lam == 1.0:
        evaluator = FreeClosedFormN2(sp)
        wall_guard = 1e-9  # closed form is wall-safe; only exact zeros are excluded
    else:
        kw = {}
        if cfg.max_degree is not None:
            kw["max_degree"] = cfg.max_degree
        evaluator = ExtendedEvaluator(sp, wall_guard=wall_guard, **kw)
    radius = cfg.radius if cfg.radius is not None else truncation_radius(lam, cfg.n, 0.05 * tol)
    spread = float(np.ptp(_DEFAULT_T[cfg.n][0]))
    panels, order = _inteq_grid_defaults(cfg, radius, spread)

    checks = []
    diagnostics = {"radius": radius, "panels": panels, "order": order,
                   "evaluator": type(evaluator).__name__, "judged": not cfg.exploratory}
    f_cache = {}
    with Stopwatch() as sw:
        for ti, t in enumerate(t_points):
            grid = build_grid(t, radius, panels, order, wall_guard)
            for xi in xis:
                res = integral_equation_residual(
                    xi, sp, t, grid, tol, evaluator=evaluator,
                    threads=cfg.threads, cache=f_cache,
                )
                name = f"inteq_t{ti}_xi{xi:g}"
                if cfg.exploratory:
                    checks.append(CheckResult(name, res.residual))
                else:
                    checks.append(CheckResult.judged(name, res.residual, tol))
                diagnostics[name] = res.diagnostics
        # refinement: the first (t, xi) combination under panel doubling
        t0, xi0 = t_points[0], xis[0]
        grid0 = build_grid(t0, radius, panels, order, wall_guard)
        grid1 = build_grid(t0, radius, 2 * panels, order, wall_guard)
        r0 = integral_equation_residual(xi0, sp, t0, grid0, tol, evaluator=evaluator,
                                        threads=cfg.threads, cache=f_cache).residual
        r1 = integral_equation_residual(xi0, sp, t0, grid1, tol, evaluator=evaluator,
                                        threads=cfg.threads, cache=f_cache).residual
        ratio = r1 / r0 if r0 > 0 else 0.0
        # deep below tolerance both residuals sit on the truncation/series floor,
        # where the ratio is noise; the check passes there by the floor escape
        refined_ok = (ratio <= 1.0) or (r1 <= 0.1 * tol)
        diagnostics["refinement"] = {"residual_base": r0, "residual_doubled": r1}
        if cfg.exploratory:
            checks.append(CheckResult("refinement_ratio", ratio))
        else:
            checks.append(CheckResult("refinement_ratio", ratio, 1.0, refined_ok))
    return _finish(cfg, checks, diagnostics, sw)


# --- kernel-id -------------------------------------------------------------

def run_kernel_id(cfg: ExperimentConfig) -> VerificationReport:
    """Kernel identities (H_r(x) - H_r(-y)) Q = 0 on random samples."""
    if cfg.n < 2:
        raise ConfigError("kernel-id needs N >= 2")
    lam = cfg.lam if cfg.lam is not None else 2.0
    h = cfg.h if cfg.h is not None else 1e-3
    tol_r1 = cfg.tol if cfg.tol is not None else 1e-8
    tol_r2 = cfg.tol if cfg.tol is not None else 1e-6
    rng = np.random.default_rng(cfg.seed)
    n_draws = 10
    with Stopwatch() as sw:
        worst = {1: 0.0, 2: 0.0}
        for _ in range(n_draws):
            t = _draw_chamber_point(rng, cfg.n)
            s = _draw_chamber_point(rng, cfg.n)
            xi = cfg.xi if cfg.xi is not None else float(rng.uniform(-1.0, 1.0))
            for r in (1, 2):
                worst[r] = max(worst[r], kernel_identity_residual(r, xi, lam, t, s, h))
        checks = [
            CheckResult.judged("kernel_id_r1", worst[1], tol_r1),
            CheckResult.judged("kernel_id_r2", worst[2], tol_r2),
        ]
    return _finish(cfg, checks, {"n_draws": n_draws, "h": h}, sw)


def _draw_chamber_point(rng, n, box=3.0, min_gap=0.35):
    while True:
        x = np.sort(rng.uniform(-box, box, size=n))
        if n == 1 or np.min(np.diff(x)) > min_gap:
            return ChamberPoint(x)


# --- commutator ------------------------------------------------------------

def run_commutator(cfg: ExperimentConfig) -> VerificationReport:
    """Discrete Hermiticity and commutativity of the kernel family."""
    lam = cfg.lam if cfg.lam is not None else 1.5
    xi = cfg.xi if cfg.xi is not None else 0.4
    xi2 = cfg.xi2 if cfg.xi2 is not None else 1.1
    tol = cfg.tol if cfg.tol is not None else 1e-4
    panels = cfg.panels if cfg.panels is not None else 4
    order = cfg.order if cfg.order is not None else 8
    radius = cfg.radius if cfg.radius is not None else 10.0
    center = np.zeros(cfg.n)
    with Stopwatch() as sw:
        grid = build_grid(center, radius, panels, order, wall_guard=1e-9)
        a = nystrom_matrix(xi, lam, grid)
        b = nystrom_matrix(xi2, lam, grid)
        comm_base = commutator_norm(a, b)
        grid2 = build_grid(center, radius, 2 * panels, order, wall_guard=1e-9)
        a2 = nystrom_matrix(xi, lam, grid2)
        b2 = nystrom_matrix(xi2, lam, grid2)
        comm_fine = commutator_norm(a2, b2)
        improvement = comm_base / comm_fine if comm_fine > 0 else np.inf
        checks = [
            CheckResult.judged("hermiticity_defect_A", a.hermiticity_defect, 1e-14),
            CheckResult.judged("hermiticity_defect_B", b.hermiticity_defect, 1e-14),
            CheckResult.judged("commutator_base", comm_base, tol),
            CheckResult.judged("commutator_refined_ratio", comm_fine / comm_base, 0.25),
        ]
        diagnostics = {
            "n_nodes_base": grid.n_nodes,
            "n_nodes_refined": grid2.n_nodes,
            "commutator_base": comm_base,
            "commutator_refined": comm_fine,
            "improvement_factor": improvement,
        }
    return _finish(cfg, checks, diagnostics, sw)


# --- l2-eigen --------------------------------------------------------------

def run_l2_eigen(cfg: ExperimentConfig) -> VerificationReport:
    """Finite-difference residual of the gauged second-order eigen-equation."""
    lam = cfg.lam if cfg.lam is not None else 1.5
    u = _default_u(cfg)
    sp = SpectralParameter(u, lam)
    h = cfg.h if cfg.h is not None else 2e-3
    tol = cfg.tol if cfg.tol is not None else 1e-5
    t = ChamberPoint(_DEFAULT_T[cfg.n][0] if cfg.n != 2 else [-1.6, 1.6])
    with Stopwatch() as sw:
        ev = ExtendedEvaluator(sp)
        r_h = l2_residual(sp, t, h, evaluator=ev, check_step=False)
        r_half = l2_residual(sp, t, 0.5 * h, evaluator=ev, check_step=False)
        ratio = r_h / r_half if r_half > 0 else np.inf
        checks = [
            CheckResult.judged("l2_residual", r_h, tol),
            CheckResult.judged("l2_order_ratio_dev", abs(ratio - 4.0), 0.8),
        ]
        diagnostics = {"h": h, "residual_h": r_h, "residual_h_half": r_half, "ratio": ratio}
    return _finish(cfg, checks, diagnostics, sw)


# --- hr-eigen --------------------------------------------------------------

def _gaussian_packet(k, a, width=4.0):
    def f(x):
        return complex(np.exp(1j * float(k @ x) - float((x - a) @ (x - a)) / width))
    return f


def run_hr_eigen(cfg: ExperimentConfig) -> VerificationReport:
    """Calibration of the quantum integrals plus eigenfunction residuals."""
    n = cfg.n
    lam = cfg.lam if cfg.lam is not None else 2.0
    h = cfg.h if cfg.h is not None else 1e-3
    rng = np.random.default_rng(cfg.seed)
    params = PhysicalParams(1.0, 1.0, lam)
    checks = []
    diagnostics = {}
    with Stopwatch() as sw:
        # operator identity H_1^2 - 2 H_2 = -hbar^2 Lap + U on random packets
        worst = 0.0
        for _ in range(20):
            k = rng.uniform(-1.2, 1.2, size=n)
            a = rng.uniform(-0.5, 0.5, size=n)
            x = _draw_chamber_point(rng, n, box=2.0, min_gap=0.5).coords
            f = _gaussian_packet(k, a)
            lhs = h1_squared(f, x, params, h) - 2.0 * apply_Hr(2, f, x, params, h)
            rhs = schrodinger_apply(f, x, params, h)
            worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs)))
        checks.append(CheckResult.judged("calibration_identity", worst, 1e-6))

        # free case (lam = 1): exact plane-wave eigenfunctions
        if n == 2:
            free_params = PhysicalParams(1.0, 1.0, 1.0)
            sp_free = SpectralParameter(np.array([0.8, -0.5]), 1.0)
            ev_free = FreeClosedFormN2(sp_free)
            for r in (1, 2):
                worst = 0.0
                for x in ([-1.2, 1.1], [-2.0, 0.6], [-0.9, 2.3]):
                    worst = max(worst, _eigen_residual(
                        r, sp_free, free_params, np.asarray(x), 5e-4, ev_free))
                checks.append(CheckResult.judged(f"free_eigen_r{r}", worst, 1e-7))

            # interacting case via the series evaluator
            sp_ser = SpectralParameter(np.array([0.8, -0.5]), 2.5)
            ser_params = PhysicalParams(1.0, 1.0, 2.5)
            ev_ser = ExtendedEvaluator(sp_ser)
            for r in (1, 2):
                worst = 0.0
                for x in ([-1.2, 1.3], [-1.8, 1.0]):
                    worst = max(worst, _eigen_residual(
                        r, sp_ser, ser_params, np.asarray(x), h, ev_ser))
                checks.append(CheckResult.judged(f"series_eigen_r{r}", worst, 1e-5))

        if n == 3:
            # r = 3 behind the calibration flag, same -u/2 insertion rule
            sp3 = SpectralParameter(np.array([1.1, 0.2, -0.8]), lam)
            ev3 = ExtendedEvaluator(sp3)
            x3 = np.array([-2.4, 0.1, 2.6])
            res3 = _eigen_residual(3, sp3, params, x3, h, ev3)
            checks.append(CheckResult.judged("h3_eigen", res3, 1e-4))
            diagnostics["h3_note"] = "r=3 via the convention-calibrated -u/2 insertion"
    return _finish(cfg, checks, diagnostics, sw)


def _eigen_residual(r, sp, params, x, h, evaluator):
    """|H_r Psi - S_r(p) Psi| / (|H_r Psi| + |S_r Psi|) at one point."""
    from .chamber import elementary_symmetric

    p = sp.u * params.hbar * params.mu

    def f(y):
        return psi_eval(p, params, y, 1e-12, evaluator=evaluator)

    hr = apply_Hr(r, f, x, params, h, convention_calibrated=True)
    sr = elementary_symmetric(r, p) * f(x)
    denom = abs(hr) + abs(sr)
    return abs(hr - sr) / denom if denom > 0 else 0.0


# --- asymptotics -----------------------------------------------------------

_DEFAULT_RAYS = {
    2: [[-0.6, 0.6], [-0.75, 0.45], [-0.5, 0.7]],
    3: [[-0.8, 0.0, 0.8], [-0.9, -0.1, 0.7], [-0.7, 0.1, 0.9]],
}


def run_asymptotics(cfg: ExperimentConfig) -> VerificationReport:
    """Decay of F - F_as along rays into the chamber.

    Along x(tau) = tau x0 the quantity log|F - F_as| - (rho, x) must decrease
    and be approximately linear in m(x) with slope near 1.
    """
    if cfg.n < 2:
        raise ConfigError("asymptotics needs N >= 2")
    lam = cfg.lam if cfg.lam is not None else 1.5
    u = _default_u(cfg) if cfg.u is not None else {
        2: np.array([1.1, -0.7]), 3: np.array([1.2, 0.1, -0.9])
    }[cfg.n]
    sp = SpectralParameter(u, lam)
    taus = np.linspace(1.8, 4.2, 6)
    checks = []
    diagnostics = {}
    with Stopwatch() as sw:
        ev = ExtendedEvaluator(sp)
        for ri, x0 in enumerate(_DEFAULT_RAYS[cfg.n]):
            x0 = np.asarray(x0, dtype=float)
            X = taus[:, None] * x0[None, :]
            G, _, _ = ev.eval_scaled_many(X, 1e-13 * ev.c_abs_sum)
            G_as = dominant_asymptotics_scaled(ev, X)
            y = np.log(np.abs(G - G_as))
            m = np.array([chamber_gap(row) for row in X])
            slope = np.polyfit(m, y, 1)[0]
            max_increase = float(np.max(np.diff(y)))
            checks.append(CheckResult.judged(f"ray{ri}_monotone_increase", max_increase, 0.0))
            checks.append(CheckResult.judged(f"ray{ri}_slope_dev", abs(slope - 1.0), 0.25))
            diagnostics[f"ray{ri}"] = {
                "x0": x0.tolist(), "m": m.tolist(), "log_gap": y.tolist(), "slope": slope,
            }
    return _finish(cfg, checks, diagnostics, sw)


EXPERIMENTS = {
    "fourier-gamma": run_fourier_gamma,
    "diff-eq": run_diff_eq,
    "int-eq": run_int_eq,
    "kernel-id": run_kernel_id,
    "commutator": run_commutator,
    "l2-eigen": run_l2_eigen,
    "hr-eigen": run_hr_eigen,
    "asymptotics": run_asymptotics,
}


def run(config: ExperimentConfig) -> VerificationReport:
    """Dispatch one validated config to its experiment."""
    config.validate()
    return EXPERIMENTS[config.experiment](config)
