"""Quadrature over the truncated Weyl chamber and discretized operators.

Grids are tensor products of composite Gauss-Legendre panels over the box
[min(center) - R, max(center) + R]^N, filtered to the open chamber.  Every
integrand here is a symmetric function of s whose formula extends smoothly
across the chamber walls (the weight vanishes there to order 2*lam), so with
one shared 1-D rule for all dimensions the chamber-filtered sum equals 1/N!
times the full-box quadrature of the smooth symmetric extension -- the filter
then costs no accuracy and no simplex mapping is needed.  (Offsetting the box
per dimension would cut panels at the walls and degrade the rule to low
algebraic order; the shared interval is what makes filtering exact.)

Nodes inside the wall-guard band (where the series evaluator cannot reach
tolerance) are dropped and their possible contribution is bounded into a
reported error budget instead.

Nystrom matrices use the symmetric sqrt(w) Q sqrt(w) normalization, which
makes discrete Hermiticity exact by construction.
"""

from __future__ import annotations

import itertools
import math
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .chamber import ChamberPoint, SpectralParameter, weyl_vector
from .errors import GridError
from .hyperg import ExtendedEvaluator, FreeClosedFormN2
from .model import eigenvalue_mu

NYSTROM_NODE_GUARD = 4000


@dataclass
class ChamberGrid:
    """Quadrature nodes/weights on a truncated chamber region.

    guard_nodes hold the chamber nodes whose smallest coordinate gap is below
    the wall guard: excluded from quadrature, kept so integral drivers can
    bound what was dropped.
    """

    nodes: np.ndarray          # (M, N) strictly increasing rows
    weights: np.ndarray        # (M,) positive
    center: np.ndarray
    half_width: float
    panels_per_dim: int
    rule_order: int
    wall_guard: float
    guard_nodes: np.ndarray
    guard_weights: np.ndarray
    n_box_nodes: int
    grid_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def to_csv(self, path):
        with open(path, "w") as fh:
            cols = ",".join(f"s{i+1}" for i in range(self.dim))
            fh.write(f"{cols},weight\n")
            for node, w in zip(self.nodes, self.weights):
                fh.write(",".join(f"{v:.17g}" for v in node) + f",{w:.17g}\n")


def _composite_gauss(lo: float, hi: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on [lo, hi]."""
    xg, wg = roots_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * xg)
        weights.append(half * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def build_grid(center, R: float, panels: int, order: int,
               wall_guard: float = 0.05) -> ChamberGrid:
    """Tensor-product Gauss-Legendre grid on [min(c) - R, max(c) + R]^N,
    filtered to the chamber with coordinate gaps above wall_guard.

    All dimensions share the same 1-D composite rule, so the kept strictly
    increasing node tuples (each standing for its N! permuted copies) turn the
    chamber sum into exact full-box quadrature of the symmetric extension.
    """
    c = center.coords if isinstance(center, ChamberPoint) else np.asarray(center, dtype=float).reshape(-1)
    if R <= 0:
        raise GridError(f"need R > 0, got {R}")
    if not 4 <= order <= 16:
        raise GridError(f"rule order {order} outside the supported range 4..16")
    if panels < 1:
        raise GridError(f"need panels >= 1, got {panels}")
    n = c.size
    x1, w1 = _composite_gauss(float(np.min(c)) - R, float(np.max(c)) + R, panels, order)
    m1 = x1.size
    if n == 1:
        nodes = x1.reshape(-1, 1)
        weights = w1.copy()
        guard_nodes = np.empty((0, 1))
        guard_weights = np.empty(0)
    else:
        idx = np.array(list(itertools.combinations(range(m1), n)), dtype=int)
        nodes = x1[idx]
        weights = np.prod(w1[idx], axis=1)
        gaps = np.min(np.diff(nodes, axis=1), axis=1)
        keep = gaps > wall_guard
        guard_nodes = nodes[~keep]
        guard_weights = weights[~keep]
        nodes = nodes[keep]
        weights = weights[keep]
    if nodes.shape[0] == 0:
        raise GridError(
            f"empty grid: box center={c.tolist()}, R={R} misses the chamber"
        )
    return ChamberGrid(
        nodes=nodes,
        weights=weights,
        center=c,
        half_width=float(R),
        panels_per_dim=int(panels),
        rule_order=int(order),
        wall_guard=float(wall_guard),
        guard_nodes=guard_nodes,
        guard_weights=guard_weights,
        n_box_nodes=int(m1**n),
    )


def grid_integrate(grid: ChamberGrid, f) -> float:
    """sum_k w_k f(s_k) for a vectorized callable f on (M, N) node arrays."""
    return float(np.sum(grid.weights * f(grid.nodes)))


def _log_weight_rows(lam: float, S: np.ndarray) -> np.ndarray:
    """log W(lam; s) for each row of S (vectorized); -inf at exact walls."""
    n = S.shape[1]
    total = np.zeros(S.shape[0])
    for i in range(n):
        for j in range(i + 1, n):
            d = np.abs(np.sinh(0.5 * (S[:, i] - S[:, j])))
            with np.errstate(divide="ignore"):
                total += 2.0 * np.log(2.0 * d)
    return lam * total


def _log_kernel_rows(lam: float, t: np.ndarray, S: np.ndarray) -> np.ndarray:
    """log K(lam; t, s) for fixed t against each row of S."""
    total = np.zeros(S.shape[0])
    for i in range(t.size):
        for j in range(S.shape[1]):
            total += np.log(2.0 * np.cosh(0.5 * (t[i] - S[:, j])))
    return -lam * total


@dataclass
class IntEqResult:
    """Outcome of one integral-equation check at a single (xi, t)."""

    residual: float
    lhs: complex
    rhs: complex
    diagnostics: dict


def _eval_chunked(evaluator, S, tol, threads):
    """Best-effort batched F evaluation, optionally across a thread pool.

    Chunks are fixed-size and reduced in a fixed order, so results are
    independent of the scheduling (bit-for-bit reproducible).
    """
    if threads <= 1 or S.shape[0] < 4096:
        G, tails, deg = evaluator.eval_scaled_many(S, tol, best_effort=True)
        return G, tails, deg
    chunks = np.array_split(np.arange(S.shape[0]), threads * 4)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda idx: evaluator.eval_scaled_many(S[idx], tol, best_effort=True),
            chunks,
        ))
    G = np.concatenate([p[0] for p in parts])
    tails = np.concatenate([p[1] for p in parts])
    deg = max(p[2] for p in parts)
    return G, tails, deg


def integral_equation_residual(xi: float, sp: SpectralParameter, t,
                               grid: ChamberGrid, tol: float, *,
                               evaluator=None, threads: int = 1,
                               cache: dict = None) -> IntEqResult:
    """Check sum_k w_k I_xi(u, lam; t, s_k) against mu_xi(u, lam) F(u, lam; t).

    Everything is accumulated at the scale e^{(rho, t)} so the exponentially
    small common factor cancels; the reported lhs/rhs are the unscaled values.
    The diagnostics carry the quadrature's own error budget: the summed
    series-tail contribution of the kept nodes and a bound on the dropped
    wall-guard band (weight zero of order 2*lam times a polynomial growth
    envelope for F).
    """
    tc = t.coords if isinstance(t, ChamberPoint) else np.asarray(t, dtype=float).reshape(-1)
    if evaluator is not None:
        ev = evaluator
    elif sp.n == 2 and sp.lam == 1.0:
        ev = FreeClosedFormN2(sp)
    else:
        ev = ExtendedEvaluator(sp)
    lam = sp.lam
    rho = weyl_vector(sp.n, lam)
    rho_t = float(rho @ tc)

    S = grid.nodes
    # node tolerance: what each node's F-tail may contribute to the relative
    # residual, before the (large) W K suppression; best-effort beyond it
    node_tol = 0.1 * tol * ev.c_abs_sum
    # F(s) does not depend on xi: reuse grid evaluations across xi values
    key = (grid.grid_id, id(ev))
    if cache is not None and key in cache:
        G, tails, degree_used = cache[key]
    else:
        G, tails, degree_used = _eval_chunked(ev, S, node_tol, threads)
        if cache is not None:
            cache[key] = (G, tails, degree_used)

    log_env = _log_kernel_rows(lam, tc, S) + _log_weight_rows(lam, S) + (S @ rho) - rho_t
    phase = xi * (np.sum(tc) - np.sum(S, axis=1))
    env = np.exp(log_env)
    lhs_scaled = complex(np.sum(grid.weights * env * np.exp(1j * phase) * G))
    tail_budget = float(np.sum(grid.weights * env * tails))

    g_t, t_tail, _ = ev.eval_scaled_many(tc.reshape(1, -1), node_tol)
    mu = eigenvalue_mu(xi, sp)
    rhs_scaled = mu * complex(g_t[0])

    guard_budget = 0.0
    if grid.guard_nodes.shape[0]:
        Sg = grid.guard_nodes
        log_g = _log_kernel_rows(lam, tc, Sg) + _log_weight_rows(lam, Sg) + (Sg @ rho) - rho_t
        poly = np.ones(Sg.shape[0])
        for i in range(sp.n):
            for j in range(i + 1, sp.n):
                poly *= 1.0 + (Sg[:, j] - Sg[:, i])
        guard_budget = float(ev.c_abs_sum * np.sum(grid.guard_weights * np.exp(log_g) * poly))

    denom = abs(rhs_scaled)
    residual = abs(lhs_scaled - rhs_scaled) / denom
    scale = math.exp(rho_t)
    return IntEqResult(
        residual=float(residual),
        lhs=lhs_scaled * scale,
        rhs=rhs_scaled * scale,
        diagnostics={
            "n_nodes": int(grid.n_nodes),
            "n_guard_nodes": int(grid.guard_nodes.shape[0]),
            "degree_used": int(degree_used),
            "series_tail_budget_rel": tail_budget / denom,
            "guard_band_budget_rel": guard_budget / denom,
            "rhs_tail_rel": float(t_tail[0]) * mu / denom,
            "mu_xi": mu,
            "evaluator": type(ev).__name__,
        },
    )


@dataclass
class NystromMatrix:
    """Symmetrically weighted discretization sqrt(w_j) Q(t_j, t_k) sqrt(w_k)."""

    entries: np.ndarray
    grid_id: str
    xi: float

    @property
    def hermiticity_defect(self) -> float:
        h = self.entries - self.entries.conj().T
        denom = np.linalg.norm(self.entries)
        return float(np.linalg.norm(h) / denom) if denom > 0 else 0.0

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("row,col,re,im\n")
            for j, k in itertools.product(range(self.entries.shape[0]), repeat=2):
                v = self.entries[j, k]
                fh.write(f"{j},{k},{v.real:.17g},{v.imag:.17g}\n")


def nystrom_matrix(xi: float, lam: float, grid: ChamberGrid, *,
                   max_nodes: int = NYSTROM_NODE_GUARD) -> NystromMatrix:
    """Discretize the kernel family on the grid; Hermitian by construction
    (the strict lower triangle is the conjugate copy of the upper)."""
    m = grid.n_nodes
    if m > max_nodes:
        raise GridError(
            f"{m} nodes exceed the Nystrom memory guard ({max_nodes}); "
            "coarsen the grid or raise max_nodes"
        )
    S = grid.nodes
    half_logw = 0.5 * _log_weight_rows(lam, S)
    logmod = half_logw[:, None] + half_logw[None, :]
    for a in range(grid.dim):
        for b in range(grid.dim):
            logmod -= lam * np.log(2.0 * np.cosh(0.5 * np.abs(S[:, a, None] - S[None, :, b])))
    sums = np.sum(S, axis=1)
    phase = xi * (sums[:, None] - sums[None, :])
    sw = np.sqrt(grid.weights)
    entries = (sw[:, None] * sw[None, :]) * np.exp(logmod) * np.exp(1j * phase)
    iu = np.triu_indices(m, k=1)
    entries[(iu[1], iu[0])] = np.conj(entries[iu])
    return NystromMatrix(entries=entries, grid_id=grid.grid_id, xi=float(xi))


def commutator_norm(a: NystromMatrix, b: NystromMatrix) -> float:
    """|| AB - BA ||_F / (||A||_F ||B||_F); the matrices must share a grid."""
    if a.grid_id != b.grid_id:
        raise GridError("commutator of Nystrom matrices from different grids")
    ab = a.entries @ b.entries
    ba = b.entries @ a.entries
    na = np.linalg.norm(a.entries)
    nb = np.linalg.norm(b.entries)
    return float(np.linalg.norm(ab - ba) / (na * nb))
