"""Chamber series and the extended hypergeometric function.

The joint eigenfunctions' analytic core is an exponential series on the Weyl
chamber,

    phi(xi + rho, lam; x) = e^{(xi+rho, x)} sum_{chi} Delta_chi(xi, lam) e^{(chi, x)},

summed over the positive root lattice, with Delta_0 = 1 and the remaining
coefficients fixed by the second-order eigenvalue equation: substituting the
series into

    L2 = Lap + lam sum_{i<j} coth((x_i - x_j)/2) (d_i - d_j),
    L2 phi = ((xi, xi) - (rho, rho)) phi,

and matching exponentials yields the recursion

    ((chi,chi) + 2(chi,xi)) Delta_chi
        = 2 lam sum_{alpha>0} sum_{n>=1, chi-n.alpha in lattice}
              (alpha, xi + rho + chi - n.alpha) Delta_{chi-n.alpha}.

(The rank-one reduction pins all conventions: at N = 2, lam = 1 the recursion
gives Delta_m = 1 for all m, which resums to sin(v s/2)/(v sinh(s/2)) -- the
free case.  A coth coefficient of 2*lam instead of lam would break this, and
is rejected by the regression tests.)

The full function is the permutation sum weighted by the c-function,

    F(u, lam; x) = sum_{sigma in S_N} c(-i sigma u, lam) phi(i sigma u + rho, lam; x),

evaluated with a shared degree cutoff chosen adaptively so the summed tail
estimate is below tolerance.  Deep in the chamber the natural magnitude scale
is e^{(rho, x)} (a large negative exponent), so batch evaluation returns the
scaled value G = F / e^{(rho, x)} alongside the scale to keep everything
representable; single-point wrappers recombine.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chamber import (
    REGULARITY_TOL,
    ChamberPoint,
    LatticeWeight,
    SpectralParameter,
    chamber_gap,
    enumerate_weights,
    positive_roots,
    weyl_vector,
)
from .errors import (
    ConvergenceGuardError,
    DivergenceAlarmError,
    ResonantParameterError,
    ToleranceError,
)
from .special import harish_chandra_c

DEFAULT_MAX_DEGREE = 64
DEFAULT_START_DEGREE = 8
DEFAULT_WALL_GUARD = 0.05
RESONANCE_TOL = 1e-10

# chunk node batches so the term matrix stays below ~8e6 entries
_CHUNK_ENTRIES = 8_000_000


@dataclass
class EvalDiagnostics:
    """Convergence bookkeeping for one series evaluation."""

    degree_used: int
    last_term_magnitude: float
    tail_estimate: float
    wall_gap: float


class HCSeriesTable:
    """Coefficients Delta_chi(xi, lam) up to a degree cutoff.

    Stored as flat arrays in graded order for fast batched evaluation;
    `coeffs` exposes the LatticeWeight -> complex mapping.
    """

    def __init__(self, xi, lam, max_degree, weights, embed, delta, min_denominator):
        self.xi = np.asarray(xi, dtype=complex).reshape(-1)
        self.lam = float(lam)
        self.max_degree = int(max_degree)
        self.weights = weights
        self.embed = embed          # (K, N) float
        self.delta = delta          # (K,) complex
        self.min_denominator = float(min_denominator)
        self.n = self.xi.size
        degrees = np.array([w.degree for w in weights], dtype=int)
        self.degrees = degrees
        # graded order => contiguous degree blocks
        self.degree_slices = [
            slice(*np.searchsorted(degrees, [d, d + 1])) for d in range(max_degree + 1)
        ]

    @property
    def coeffs(self) -> dict:
        return {w: complex(d) for w, d in zip(self.weights, self.delta)}

    def to_csv(self, path):
        """Dump (degree, m_1..m_{N-1}, Re Delta, Im Delta) rows for debugging."""
        with open(path, "w") as fh:
            mcols = ",".join(f"m{i+1}" for i in range(self.n - 1))
            fh.write(f"degree,{mcols},re_delta,im_delta\n" if mcols else "degree,re_delta,im_delta\n")
            for w, d in zip(self.weights, self.delta):
                ms = ",".join(str(v) for v in w.m)
                row = f"{w.degree},{ms},{d.real:.17g},{d.imag:.17g}" if ms else f"{w.degree},{d.real:.17g},{d.imag:.17g}"
                fh.write(row + "\n")


def hc_coefficients(xi, lam: float, max_degree: int, *,
                    resonance_tol: float = RESONANCE_TOL) -> HCSeriesTable:
    """Build the coefficient table for exponent shift xi via the recursion.

    For purely imaginary regular xi every denominator satisfies
    |(chi,chi) + 2(chi,xi)| >= (chi,chi) > 0; anything below resonance_tol
    raises ResonantParameterError naming the offending weight.
    """
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    n = xi.size
    if lam <= 0:
        raise ValueError(f"need lam > 0, got {lam}")
    rho = weyl_vector(n, lam)
    weights = enumerate_weights(n, max_degree)
    index = {w.m: k for k, w in enumerate(weights)}
    embed = np.array([w.embed() for w in weights])
    delta = np.zeros(len(weights), dtype=complex)
    delta[0] = 1.0
    min_denom = np.inf

    roots = positive_roots(n)
    root_data = []
    for r in roots:
        r_m = np.asarray(r.m, dtype=int)
        r_e = r.embed()
        root_data.append((r_m, r_e, complex(r_e @ (xi + rho)), embed @ r_e))

    chi_sq = np.einsum("kn,kn->k", embed, embed)
    chi_xi = embed @ xi

    for k, w in enumerate(weights):
        if w.degree == 0:
            continue
        denom = chi_sq[k] + 2.0 * chi_xi[k]
        if abs(denom) < resonance_tol:
            raise ResonantParameterError(
                f"resonant spectral parameter: denominator {denom} at weight {w.m}",
                weight=w, denominator=complex(denom),
            )
        min_denom = min(min_denom, abs(denom))
        m = np.asarray(w.m, dtype=int)
        total = 0.0 + 0.0j
        for r_m, _r_e, base, re_dot in root_data:
            mm = m - r_m
            while np.all(mm >= 0):
                k2 = index[tuple(int(v) for v in mm)]
                total += (base + re_dot[k2]) * delta[k2]
                mm = mm - r_m
        delta[k] = 2.0 * lam * total / denom

    if not np.isfinite(min_denom):
        min_denom = np.inf if len(weights) == 1 else min_denom
    return HCSeriesTable(xi, lam, max_degree, weights, embed, delta, min_denom)


def _wall_gaps(X: np.ndarray) -> np.ndarray:
    """m(x) per row; -inf in rank one."""
    if X.shape[1] < 2:
        return np.full(X.shape[0], -np.inf)
    return np.max(X[:, :-1] - X[:, 1:], axis=1)


def hc_series_eval(table: HCSeriesTable, x, *, divergence_window: int = 5):
    """Evaluate phi(xi + rho, lam; x) = e^{(xi+rho,x)} sum Delta_chi e^{(chi,x)}.

    Returns (value, EvalDiagnostics).  The tail estimate is the geometric
    majorant last_block / (1 - e^{m(x)}).  Raises DivergenceAlarmError if the
    degree blocks grow over `divergence_window` consecutive degrees.
    """
    coords = x.coords if isinstance(x, ChamberPoint) else np.asarray(x, dtype=float)
    m = chamber_gap(coords)
    if m >= 0:
        raise ConvergenceGuardError(f"point not in the open chamber: m(x) = {m}")
    rho = weyl_vector(table.n, table.lam)
    total = 0.0 + 0.0j
    last_l1 = 0.0
    grow = 0
    prev_l1 = None
    for d in range(table.max_degree + 1):
        sl = table.degree_slices[d]
        terms = np.exp(coords @ table.embed[sl].T) * table.delta[sl]
        total += complex(np.sum(terms))
        last_l1 = float(np.sum(np.abs(terms)))
        if prev_l1 is not None:
            grow = grow + 1 if last_l1 > prev_l1 else 0
            if grow >= divergence_window:
                raise DivergenceAlarmError(
                    f"series blocks grew for {divergence_window} consecutive degrees "
                    f"at degree {d} (m(x) = {m:.3f})"
                )
        prev_l1 = last_l1
    geo = 1.0 / (1.0 - math.exp(m)) if np.isfinite(m) else 1.0
    tail = 0.0 if table.n == 1 else last_l1 * geo
    prefactor = np.exp(complex((table.xi + rho) @ coords))
    return prefactor * total, EvalDiagnostics(
        degree_used=table.max_degree,
        last_term_magnitude=last_l1,
        tail_estimate=abs(prefactor) * tail,
        wall_gap=float(m),
    )


class ExtendedEvaluator:
    """Permutation-sum evaluator of the extended hypergeometric function.

    Tables are built once per spectral parameter (immutable afterwards and
    safe to share); evaluations at distinct points are pure.  Batch calls
    return G = F / e^{(rho, x)} together with absolute tail estimates on G.
    """

    def __init__(self, sp: SpectralParameter, *,
                 max_degree: int = DEFAULT_MAX_DEGREE,
                 start_degree: int = DEFAULT_START_DEGREE,
                 wall_guard: float = DEFAULT_WALL_GUARD,
                 regularity_tol: float = REGULARITY_TOL):
        sp.require_regular(regularity_tol)
        self.sp = sp
        self.lam = sp.lam
        self.n = sp.n
        self.max_degree = int(max_degree)
        self.start_degree = int(start_degree)
        self.wall_guard = float(wall_guard)
        self.rho = weyl_vector(sp.n, sp.lam)
        self.perms = list(itertools.permutations(range(sp.n)))
        self.sigma_u = [sp.u[list(p)] for p in self.perms]
        self.c_values = np.array(
            [harish_chandra_c(-1j * su, sp.lam, regularity_tol=regularity_tol)
             for su in self.sigma_u]
        )
        self.c_abs = np.abs(self.c_values)
        self.c_abs_sum = float(np.sum(self.c_abs))
        self._tables = None

    @property
    def tables(self):
        if self._tables is None:
            self._tables = [
                hc_coefficients(1j * su, self.lam, self.max_degree)
                for su in self.sigma_u
            ]
        return self._tables

    def _checkpoints(self):
        d = self.start_degree
        pts = []
        while d < self.max_degree:
            pts.append(d)
            d *= 2
        pts.append(self.max_degree)
        return pts

    def _scan_chunk(self, X, tol):
        """Accumulate degree blocks for one node chunk.

        The cutoff is shared at each adaptive checkpoint: nodes whose tail
        estimate is already below tolerance freeze there, the rest continue
        to the next (doubled) checkpoint.  Deep nodes therefore stop at the
        first checkpoint while near-wall nodes run to the degree cap.
        """
        tables = self.tables
        M = X.shape[0]
        m_gap = _wall_gaps(X)
        geo = np.ones(M) if self.n == 1 else 1.0 / (1.0 - np.exp(m_gap))
        S = [np.zeros(M, dtype=complex) for _ in self.perms]
        tails = np.zeros(M)
        degree_used = 0
        active = np.arange(M)
        seg_start = 0
        for cp in self._checkpoints():
            Xa = X[active]
            block_l1 = np.zeros(active.size)
            prev_l1 = np.zeros(active.size)
            for d in range(seg_start, cp + 1):
                prev_l1, block_l1 = block_l1, np.zeros(active.size)
                for s_sig, cab, tab in zip(S, self.c_abs, tables):
                    sl = tab.degree_slices[d]
                    T = np.exp(Xa @ tab.embed[sl].T)
                    s_sig[active] += T @ tab.delta[sl]
                    block_l1 += cab * (T @ np.abs(tab.delta[sl]))
            degree_used = cp
            if self.n == 1:
                break
            tails[active] = np.maximum(block_l1, prev_l1 * np.exp(m_gap[active])) * geo[active]
            if tol is not None:
                active = active[tails[active] > tol]
            if tol is not None and active.size == 0:
                break
            seg_start = cp + 1
        G = np.zeros(M, dtype=complex)
        for s_sig, c, su in zip(S, self.c_values, self.sigma_u):
            G += c * np.exp(1j * (X @ su)) * s_sig
        return G, tails, degree_used, m_gap

    def eval_scaled_many(self, X, tol, *, best_effort: bool = False):
        """Evaluate G = F / e^{(rho, x)} at the rows of X (each in the chamber).

        Returns (G, tails, degree_used) with per-node absolute tail estimates
        on G.  In strict mode a node above the wall guard or an unreachable
        tolerance raises; with best_effort=True values are returned with
        honest tails for the caller's error budget.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        m_gap = _wall_gaps(X)
        if not best_effort and np.any(m_gap > -self.wall_guard):
            worst = float(np.max(m_gap))
            raise ConvergenceGuardError(
                f"evaluation point too close to a chamber wall: m(x) = {worst} "
                f"> -{self.wall_guard}"
            )
        chunk = max(1, _CHUNK_ENTRIES // max(1, len(self.tables[0].weights)))
        Gs, tails = [], []
        degree_used = 0
        for lo in range(0, X.shape[0], chunk):
            G, tl, dg, _ = self._scan_chunk(X[lo:lo + chunk], tol)
            Gs.append(G)
            tails.append(tl)
            degree_used = max(degree_used, dg)
        G = np.concatenate(Gs)
        tl = np.concatenate(tails)
        if not best_effort and tol is not None and np.max(tl) > tol:
            k = int(np.argmax(tl))
            raise ToleranceError(
                f"tail estimate {tl[k]:.3e} > tol {tol:.3e} at degree "
                f"{self.max_degree} (node gap m = {m_gap[k]:.3f})",
                best=G[k], tail=float(tl[k]), degree=self.max_degree,
            )
        return G, tl, degree_used

    def eval(self, t, tol):
        """Full value F(u, lam; t) with diagnostics (single point)."""
        coords = t.coords if isinstance(t, ChamberPoint) else np.asarray(t, dtype=float)
        X = coords.reshape(1, -1)
        G, tails, degree_used = self.eval_scaled_many(X, tol)
        scale = math.exp(float(self.rho @ coords))
        m = float(_wall_gaps(X)[0])
        diag = EvalDiagnostics(
            degree_used=degree_used,
            last_term_magnitude=float(tails[0]) * (1.0 - math.exp(m) if np.isfinite(m) else 1.0),
            tail_estimate=float(tails[0]) * scale,
            wall_gap=m,
        )
        return complex(G[0]) * scale, diag

    def log_scale(self, X) -> np.ndarray:
        """(rho, x) per row: log of the scale factor relating G to F."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.rho


def extended_hypergeom(sp: SpectralParameter, t, tol: float, **kwargs):
    """One-shot evaluation of F(u, lam; t); see ExtendedEvaluator for batches.

    The tolerance bounds the summed tail estimate of the scaled value
    F / e^{(rho, t)}, i.e. it is a tolerance relative to the natural
    magnitude scale of the function deep in the chamber.
    """
    return ExtendedEvaluator(sp, **kwargs).eval(t, tol)


def dominant_asymptotics_scaled(sp_or_ev, X) -> np.ndarray:
    """G_as = sum_sigma c(-i sigma u) e^{i(sigma u, x)} (the leading exponentials
    of F scaled by e^{(rho, x)}); exact finite sum over S_N."""
    ev = sp_or_ev if isinstance(sp_or_ev, ExtendedEvaluator) else ExtendedEvaluator(sp_or_ev)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    G = np.zeros(X.shape[0], dtype=complex)
    for c, su in zip(ev.c_values, ev.sigma_u):
        G += c * np.exp(1j * (X @ su))
    return G


def dominant_asymptotics(sp: SpectralParameter, x) -> complex:
    """F_as(u, lam; x) = sum_sigma c(-i sigma u, lam) e^{(i sigma u + rho, x)}."""
    coords = x.coords if isinstance(x, ChamberPoint) else np.asarray(x, dtype=float)
    ev = ExtendedEvaluator(sp)
    G = dominant_asymptotics_scaled(ev, coords.reshape(1, -1))
    return complex(G[0]) * math.exp(float(ev.rho @ coords))


class FreeClosedFormN2:
    """Exact N=2, lam=1 evaluator: F = e^{i(u1+u2)(t1+t2)/2} sin(v s/2)/(v sinh(s/2)).

    Presents the same scaled-batch interface as ExtendedEvaluator so the
    quadrature layer can swap it in; tails are identically zero.
    """

    wall_guard = 0.0

    def __init__(self, sp: SpectralParameter):
        if sp.n != 2 or sp.lam != 1.0:
            raise ValueError("closed form requires N = 2 and lam = 1")
        sp.require_regular()
        self.sp = sp
        self.lam = sp.lam
        self.n = 2
        self.rho = weyl_vector(2, 1.0)
        self.c_abs_sum = 2.0 / abs(sp.u[0] - sp.u[1])

    def _core(self, s: np.ndarray) -> np.ndarray:
        v = self.sp.u[0] - self.sp.u[1]
        out = np.empty_like(s)
        tiny = np.abs(s) < 1e-8
        out[~tiny] = np.sin(0.5 * v * s[~tiny]) / (v * np.sinh(0.5 * s[~tiny]))
        out[tiny] = 1.0 - (v * v + 1.0) * s[tiny] ** 2 / 24.0
        return out

    def eval_scaled_many(self, X, tol=None, *, best_effort: bool = False):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        s = X[:, 1] - X[:, 0]
        com = 0.5 * float(np.sum(self.sp.u)) * np.sum(X, axis=1)
        G = np.exp(1j * com) * self._core(s) * np.exp(0.5 * s)
        return G, np.zeros(X.shape[0]), 0

    def eval(self, t, tol=None):
        coords = t.coords if isinstance(t, ChamberPoint) else np.asarray(t, dtype=float)
        G, _, _ = self.eval_scaled_many(coords.reshape(1, -1))
        scale = math.exp(float(self.rho @ coords))
        m = float(chamber_gap(coords))
        return complex(G[0]) * scale, EvalDiagnostics(0, 0.0, 0.0, m)

    def log_scale(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.rho


def a1_oracle(v: float, lam: float, s: float, *,
              tol: float = 1e-13, max_terms: int = 20000) -> float:
    """Rank-one oracle: the even solution f(0)=1, f'(0)=0 of

        f'' + lam coth(s/2) f' + ((v^2 + lam^2)/4) f = 0,

    computed as a power series in z = sinh(s/2)^2 with the recurrence

        c_{k+1} = -((k + lam/2)^2 + v^2/4) / ((k+1)(k + lam + 1/2)) c_k

    obtained by substituting f = sum c_k z^k into the equation.  Independent
    of the chamber-series machinery; converges for |sinh(s/2)| < 1.  At
    lam = 1 the closed form sin(v s/2)/(v sinh(s/2)) is used for any s.
    """
    if lam <= 0:
        raise ValueError(f"need lam > 0, got {lam}")
    s = float(s)
    if lam == 1.0:
        half = 0.5 * s
        if abs(s) < 1e-8:
            return 1.0 - (v * v + 1.0) * s * s / 24.0
        if v == 0.0:
            return half / math.sinh(half)
        return math.sin(v * half) / (v * math.sinh(half))
    if s == 0.0:
        return 1.0
    z = math.sinh(0.5 * s) ** 2
    if z >= 1.0:
        raise ConvergenceGuardError(
            f"|s| = {abs(s):.4f} outside the series guard |sinh(s/2)| < 1 "
            f"(z = {z:.4f}); only lam = 1 has a closed form there"
        )
    total = 1.0
    c = 1.0
    zk = 1.0
    for k in range(max_terms):
        c *= -((k + 0.5 * lam) ** 2 + 0.25 * v * v) / ((k + 1.0) * (k + lam + 0.5))
        zk *= z
        term = c * zk
        total += term
        if abs(term) * z / (1.0 - z) < tol * max(1.0, abs(total)):
            return total
    raise ToleranceError(
        f"rank-one series did not reach tol={tol:g} within {max_terms} terms "
        f"(z = {z:.6f})", best=total, tail=abs(term) * z / (1.0 - z),
    )


def l2_eigenvalue(sp: SpectralParameter) -> float:
    """Eigenvalue of the gauged second-order operator: -(u,u) - (rho,rho)."""
    rho = weyl_vector(sp.n, sp.lam)
    return float(-(sp.u @ sp.u) - rho @ rho)


def l2_residual(sp: SpectralParameter, t: ChamberPoint, h: float, *,
                evaluator=None, eval_tol_factor: float = 1e-12,
                check_step: bool = True) -> float:
    """Relative residual of the second-order eigen-equation on F under
    2nd-order central differences with step h.

    L2 = Lap + lam sum_{i<j} coth((t_i - t_j)/2)(d_i - d_j), eigenvalue
    -(u,u) - (rho,rho).  With check_step=True a Richardson consistency check
    re-evaluates at h/2 and warns when the residual ratio is far from 4.
    """
    ev = evaluator or ExtendedEvaluator(sp)
    res = _l2_residual_once(sp, t, h, ev, eval_tol_factor)
    if check_step:
        res_half = _l2_residual_once(sp, t, 0.5 * h, ev, eval_tol_factor)
        ratio = res / res_half if res_half > 0 else np.inf
        if not 2.0 < ratio < 8.0:
            warnings.warn(
                f"finite-difference step h={h:g} outside the O(h^2) regime: "
                f"residual ratio under halving = {ratio:.2f} (expected ~4); "
                "step too large or too small",
                stacklevel=2,
            )
    return res


def _l2_residual_once(sp, t, h, ev, eval_tol_factor):
    coords = t.coords if isinstance(t, ChamberPoint) else np.asarray(t, dtype=float)
    n = coords.size
    pts = [coords]
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        pts.append(coords + e)
        pts.append(coords - e)
    X = np.array(pts)
    gtol = eval_tol_factor * ev.c_abs_sum
    G, _, _ = ev.eval_scaled_many(X, gtol)
    # F relative to the center scale: stable, and exact up to the common factor
    rel = np.exp(ev.log_scale(X) - float(ev.rho @ coords))
    F = G * rel
    f0 = F[0]
    lap = 0.0 + 0.0j
    first = np.zeros(n, dtype=complex)
    for i in range(n):
        fp, fm = F[1 + 2 * i], F[2 + 2 * i]
        lap += (fp - 2.0 * f0 + fm) / h**2
        first[i] = (fp - fm) / (2.0 * h)
    drift = 0.0 + 0.0j
    for i in range(n):
        for j in range(i + 1, n):
            drift += (1.0 / math.tanh(0.5 * (coords[i] - coords[j]))) * (first[i] - first[j])
    l2f = lap + sp.lam * drift
    return float(abs(l2f - l2_eigenvalue(sp) * f0) / abs(f0))
