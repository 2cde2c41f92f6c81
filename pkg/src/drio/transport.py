"""Entropic balanced/unbalanced transport between weighted point clouds.

Implements the primal value via damped log-domain fixed-point iterations on the
dual potentials (damping tau/(tau+eps); 1 in balanced mode), the debiased
divergence, exact position gradients through the converged plan, and a
brute-force primal minimizer used as an independent oracle in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

BALANCED = math.inf

EPSILON_FLOOR = 1e-4
ADAPTIVE_FALLBACK = 1e-2


class SinkhornConvergenceError(RuntimeError):
    """Raised when a fixed-point solve hits max_iter before reaching tolerance."""


@dataclass(frozen=True)
class PointCloud:
    """Weighted finite set of (D, T) atoms representing an empirical measure."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.ascontiguousarray(np.stack(self.atoms) if isinstance(self.atoms, (list, tuple))
                                     else self.atoms, dtype=np.float64)
        if atoms.ndim == 2:  # single (D, T) atom
            atoms = atoms[None]
        if atoms.ndim != 3 or atoms.shape[0] < 1:
            raise ValueError(f"atoms must be (n, D, T) with n >= 1, got shape {atoms.shape}")
        if not np.isfinite(atoms).all():
            raise ValueError("atoms must be finite")
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if weights.shape != (atoms.shape[0],):
            raise ValueError(f"weights shape {weights.shape} does not match {atoms.shape[0]} atoms")
        if (weights < 0).any() or not (weights > 0).any():
            raise ValueError("weights must be nonnegative with at least one positive entry")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, atoms) -> "PointCloud":
        atoms = np.stack(atoms) if isinstance(atoms, (list, tuple)) else np.asarray(atoms)
        if atoms.ndim == 2:
            atoms = atoms[None]
        n = atoms.shape[0]
        return cls(atoms=atoms, weights=np.full(n, 1.0 / n))

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """(n, D*T) row-major flattening (feature-major then time, the file layout)."""
        return self.atoms.reshape(self.n_atoms, -1)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class SinkhornParams:
    epsilon: float = 0.05
    tau: float = 10.0  # BALANCED (math.inf) enforces exact marginals
    max_iter: int = 500
    tol: float = 1e-6
    epsilon_mode: str = "fixed"  # "fixed" | "adaptive"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive (use transport.BALANCED for balanced mode)")
        if self.max_iter < 1 or not self.tol > 0:
            raise ValueError("max_iter must be >= 1 and tol > 0")
        if self.epsilon_mode not in ("fixed", "adaptive"):
            raise ValueError(f"epsilon_mode must be 'fixed' or 'adaptive', got {self.epsilon_mode!r}")

    @property
    def is_balanced(self) -> bool:
        return math.isinf(self.tau)


@dataclass(frozen=True)
class DualPotentials:
    f: np.ndarray
    g: np.ndarray
    converged: bool
    iterations: int


@dataclass(frozen=True)
class TransportPlan:
    plan: np.ndarray
    first_marginal: np.ndarray
    second_marginal: np.ndarray


@dataclass(frozen=True)
class TransportResult:
    value: float
    potentials: DualPotentials
    plan: TransportPlan


def ground_cost(x: np.ndarray, z: np.ndarray) -> float:
    """Squared Frobenius distance between two (D, T) trajectories."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {z.shape}")
    return float(np.sum((x - z) ** 2))


def pairwise_cost(a_flat: np.ndarray, b_flat: np.ndarray) -> np.ndarray:
    """All-pairs squared Euclidean distances between flattened atoms."""
    diff = a_flat[:, None, :] - b_flat[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def adaptive_epsilon(batch: PointCloud) -> float:
    """0.05 times the median nonzero pairwise squared distance, floored at 1e-4."""
    if batch.n_atoms < 2:
        raise ValueError("adaptive epsilon needs at least 2 atoms")
    c = pairwise_cost(batch.flat, batch.flat)
    upper = c[np.triu_indices(batch.n_atoms, k=1)]
    nonzero = upper[upper > 0]
    if nonzero.size == 0:
        return ADAPTIVE_FALLBACK
    return max(0.05 * float(np.median(nonzero)), EPSILON_FLOOR)


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    amax = np.max(a, axis=axis, keepdims=True)
    amax = np.where(np.isfinite(amax), amax, 0.0)
    return np.log(np.exp(a - amax).sum(axis=axis)) + np.squeeze(amax, axis=axis)


def _log_weights(w: np.ndarray) -> np.ndarray:
    out = np.full(w.shape, -np.inf)
    pos = w > 0
    out[pos] = np.log(w[pos])
    return out


def _generalized_kl(p: np.ndarray, q: np.ndarray) -> float:
    """sum p*log(p/q) - p + q with the 0*log(0) = 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    pos = p > 0
    if (q[pos] == 0).any():
        return math.inf
    terms = np.zeros_like(p)
    terms[pos] = p[pos] * (np.log(p[pos]) - np.log(q[pos]))
    return float(terms.sum() - p.sum() + q.sum())


def primal_objective(plan: np.ndarray, cost: np.ndarray, a: np.ndarray, b: np.ndarray,
                     params: SinkhornParams) -> float:
    """Transport cost + eps*KL(plan | a x b) [+ tau*(KL(rows|a) + KL(cols|b))]."""
    value = float((cost * plan).sum())
    value += params.epsilon * _generalized_kl(plan, np.outer(a, b))
    if not params.is_balanced:
        value += params.tau * (_generalized_kl(plan.sum(axis=1), a)
                               + _generalized_kl(plan.sum(axis=0), b))
    return value


def solve_transport(mu: PointCloud, nu: PointCloud, params: SinkhornParams) -> TransportResult:
    """Entropic (un)balanced transport value with dual potentials and plan.

    The value is the primal objective evaluated at the plan reconstructed from
    the final potentials (second-order accurate near convergence). A solve that
    hits max_iter is returned with converged=False; gradient consumers refuse it.
    """
    cost = pairwise_cost(mu.flat, nu.flat)
    if not np.isfinite(cost).all():
        raise ValueError("non-finite cost matrix entries")
    if params.is_balanced and abs(mu.mass - nu.mass) > 1e-12 * max(mu.mass, nu.mass, 1.0):
        raise ValueError(
            f"balanced mode requires equal masses, got {mu.mass} vs {nu.mass}"
        )
    a, b = mu.weights, nu.weights
    eps = params.epsilon
    lam = 1.0 if params.is_balanced else params.tau / (params.tau + eps)
    loga, logb = _log_weights(a), _log_weights(b)

    f = np.zeros(mu.n_atoms)
    g = np.zeros(nu.n_atoms)
    converged = False
    it = 0
    for it in range(1, params.max_iter + 1):
        f_new = -lam * eps * _lse((g[None, :] - cost) / eps + logb[None, :], axis=1)
        g_new = -lam * eps * _lse((f_new[:, None] - cost) / eps + loga[:, None], axis=0)
        delta = max(np.abs(f_new - f).max(), np.abs(g_new - g).max())
        f, g = f_new, g_new
        if delta < params.tol * eps:
            converged = True
            break

    plan = np.exp((f[:, None] + g[None, :] - cost) / eps + loga[:, None] + logb[None, :])
    value = primal_objective(plan, cost, a, b, params)
    return TransportResult(
        value=value,
        potentials=DualPotentials(f=f, g=g, converged=converged, iterations=it),
        plan=TransportPlan(plan=plan, first_marginal=plan.sum(axis=1),
                           second_marginal=plan.sum(axis=0)),
    )


def sinkhorn_divergence(mu: PointCloud, nu: PointCloud, params: SinkhornParams) -> float:
    """Debiased divergence W(mu,nu) - (W(mu,mu) + W(nu,nu)) / 2."""
    w_xy = solve_transport(mu, nu, params).value
    w_xx = solve_transport(mu, mu, params).value
    w_yy = solve_transport(nu, nu, params).value
    return w_xy - 0.5 * (w_xx + w_yy)


def _require_converged(res: TransportResult, what: str) -> TransportResult:
    if not res.potentials.converged:
        raise SinkhornConvergenceError(
            f"{what} did not converge within {res.potentials.iterations} iterations"
        )
    return res


def _position_grad_cross(plan: np.ndarray, own_flat: np.ndarray, other_flat: np.ndarray,
                         side: str) -> np.ndarray:
    """d/d(own atoms) of the transport cost term through a fixed plan (envelope)."""
    if side == "first":
        row = plan.sum(axis=1)
        return 2.0 * (row[:, None] * own_flat - plan @ other_flat)
    col = plan.sum(axis=0)
    return 2.0 * (col[:, None] * own_flat - plan.T @ other_flat)


def _position_grad_self(plan_self: np.ndarray, flat: np.ndarray) -> np.ndarray:
    sym = plan_self + plan_self.T
    return 2.0 * (sym.sum(axis=1)[:, None] * flat - sym @ flat)


def divergence_value_and_grad(mu: PointCloud, nu: PointCloud, params: SinkhornParams,
                              side: str = "first",
                              cached_other_self: float | None = None):
    """Debiased divergence and its exact gradient w.r.t. one cloud's atom positions.

    The gradient is the envelope gradient through the converged plans (marginal
    weights fixed), including the debiasing self-term of the differentiated side.
    `cached_other_self` optionally supplies the other side's W(self, self) value,
    which does not depend on the differentiated positions.
    """
    if side not in ("first", "second"):
        raise ValueError(f"side must be 'first' or 'second', got {side!r}")
    res_xy = _require_converged(solve_transport(mu, nu, params), "cross transport")
    own = mu if side == "first" else nu
    other = nu if side == "first" else mu
    res_own = _require_converged(solve_transport(own, own, params), "self transport")
    if cached_other_self is None:
        w_other = _require_converged(solve_transport(other, other, params), "self transport").value
    else:
        w_other = cached_other_self
    value = res_xy.value - 0.5 * (res_own.value + w_other)

    grad_flat = (_position_grad_cross(res_xy.plan.plan, own.flat, other.flat, side)
                 - 0.5 * _position_grad_self(res_own.plan.plan, own.flat))
    return value, grad_flat.reshape(own.atoms.shape)


def grad_positions(mu: PointCloud, nu: PointCloud, params: SinkhornParams,
                   side: str = "first") -> np.ndarray:
    """Exact gradient of sinkhorn_divergence w.r.t. the selected cloud's atoms."""
    _, grad = divergence_value_and_grad(mu, nu, params, side=side)
    return grad


# ---------------------------------------------------------------------------
# Brute-force primal oracle (independent of the fixed-point path)
# ---------------------------------------------------------------------------

_ORACLE_MAX_ENTRIES = 9


def _oracle_objective(plan, cost, a, b, params):
    if (plan < 0).any():
        return math.inf
    return primal_objective(plan, cost, a, b, params)


def _oracle_gradient(plan, cost, a, b, params):
    ab = np.outer(a, b)
    safe = np.maximum(plan, 1e-300)
    grad = cost + params.epsilon * np.log(safe / np.maximum(ab, 1e-300))
    if not params.is_balanced:
        rows = np.maximum(plan.sum(axis=1), 1e-300)
        cols = np.maximum(plan.sum(axis=0), 1e-300)
        grad = grad + params.tau * (np.log(rows / np.maximum(a, 1e-300))[:, None]
                                    + np.log(cols / np.maximum(b, 1e-300))[None, :])
    return grad


def _oracle_hessian(plan, params):
    """Hessian over the flattened plan: eps*diag(1/pi) plus, in unbalanced mode,
    tau/row-sum and tau/col-sum blocks from the marginal KL terms."""
    n, m = plan.shape
    safe = np.maximum(plan, 1e-300).ravel()
    hess = np.diag(params.epsilon / safe)
    if not params.is_balanced:
        rows = np.maximum(plan.sum(axis=1), 1e-300)
        cols = np.maximum(plan.sum(axis=0), 1e-300)
        for i in range(n):
            sl = slice(i * m, (i + 1) * m)
            hess[sl, sl] += params.tau / rows[i]
        for j in range(m):
            idx = np.arange(j, n * m, m)
            hess[np.ix_(idx, idx)] += params.tau / cols[j]
    return hess


def _constraint_matrix(n: int, m: int) -> np.ndarray:
    """Row-sum and column-sum indicator rows over the flattened plan."""
    rows = []
    for i in range(n):
        e = np.zeros((n, m))
        e[i, :] = 1.0
        rows.append(e.ravel())
    for j in range(m):
        e = np.zeros((n, m))
        e[:, j] = 1.0
        rows.append(e.ravel())
    return np.stack(rows)


def _northwest_corner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Greedy feasible transport plan for marginals (a, b) of equal mass."""
    plan = np.zeros((a.size, b.size))
    rem_a = a.astype(np.float64).copy()
    rem_b = b.astype(np.float64).copy()
    i = j = 0
    while i < a.size and j < b.size:
        moved = min(rem_a[i], rem_b[j])
        plan[i, j] = moved
        rem_a[i] -= moved
        rem_b[j] -= moved
        if rem_a[i] <= rem_b[j]:
            i += 1
        else:
            j += 1
    return plan


def _constrained_direction(grad, hess, free, amat, residual):
    """Descent direction over the free coordinates; with amat the step solves the
    equality-constrained KKT system (keeping A x = marginals exact)."""
    nm = grad.size
    direction = np.zeros(nm)
    if amat is not None:
        af = amat[:, free]
        k = amat.shape[0]
        kkt = np.zeros((free.size + k, free.size + k))
        kkt[:free.size, :free.size] = hess[np.ix_(free, free)]
        kkt[:free.size, free.size:] = af.T
        kkt[free.size:, :free.size] = af
        rhs = np.concatenate([-grad[free], residual])
        direction[free] = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:free.size]
    else:
        hess_free = hess[np.ix_(free, free)]
        ridge = 1e-13 * (1.0 + float(np.trace(hess_free)) / free.size)
        direction[free] = np.linalg.solve(hess_free + ridge * np.eye(free.size), -grad[free])
    return direction


def _pinned_direction(x, grad, hess, clamped, floor, amat, residual):
    """Direction with an inner pin loop: coordinates sitting at the floor that the
    direction would push further down are clamped and the system re-solved, so the
    fraction-to-boundary rule cannot throttle the step to zero."""
    work = clamped.copy()
    at_floor = x <= 1.5 * floor
    for _ in range(x.size):
        free = np.flatnonzero(~work)
        if free.size == 0:
            return None, work
        direction = _constrained_direction(grad, hess, free, amat, residual)
        bad = (~work) & at_floor & (direction < 0)
        if not bad.any():
            return direction, work
        work |= bad
    return None, work


def _line_search(x, fx, direction, floor, cost, a, b, params):
    headroom = np.maximum(x - floor, 0.0)
    negative = direction < 0
    if negative.any():
        limit = float(np.min(headroom[negative] / -direction[negative]))
        step = min(1.0, 0.995 * limit)
    else:
        step = 1.0
    n, m = cost.shape
    for _ in range(60):
        if step <= 0.0:
            return None
        cand = x + step * direction
        fc = _oracle_objective(cand.reshape(n, m), cost, a, b, params)
        if fc < fx:
            return cand, fc
        step *= 0.5
    return None


def _newton_primal(start, cost, a, b, params, max_iter=400):
    """Active-set damped Newton over the plan matrix.

    Entries driven to a tiny floor are clamped out of the system (their value
    contribution is O(floor) but their curvature eps/pi would otherwise make the
    Newton system numerically singular). Balanced mode takes equality-constrained
    KKT steps so both marginals stay exact. When the Newton step stalls, a
    steepest feasible-descent step (identity metric) is tried before giving up;
    the objective is convex, so any such accepted step is global progress.
    """
    n, m = cost.shape
    nm = n * m
    balanced = params.is_balanced
    floor = 1e-9 if balanced else 1e-12
    amat = _constraint_matrix(n, m) if balanced else None
    marginals = np.concatenate([a, b]) if balanced else None
    identity = np.eye(nm)
    x = np.maximum(start.ravel().copy(), floor)
    fx = _oracle_objective(x.reshape(n, m), cost, a, b, params)
    stall = 0
    clamped = np.zeros(nm, dtype=bool)
    for _ in range(max_iter):
        grad = _oracle_gradient(x.reshape(n, m), cost, a, b, params).ravel()
        clamped &= grad > 0  # release entries that now want to grow
        clamped |= (x <= 1.5 * floor) & (grad > 0)
        residual = (marginals - amat @ x) if balanced else None
        hess = _oracle_hessian(x.reshape(n, m), params)

        accepted = None
        direction, _ = _pinned_direction(x, grad, hess, clamped, floor, amat, residual)
        if direction is not None:
            accepted = _line_search(x, fx, direction, floor, cost, a, b, params)
        if accepted is None:
            # fall back to steepest feasible descent with the same pin loop
            direction, _ = _pinned_direction(x, grad, identity, clamped, floor, amat, residual)
            if direction is not None:
                accepted = _line_search(x, fx, direction, floor, cost, a, b, params)

        if accepted is None:
            break
        improvement = fx - accepted[1]
        x, fx = accepted
        if improvement < 1e-14 * (1.0 + abs(fx)):
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
    return fx


def brute_force_primal(mu: PointCloud, nu: PointCloud, params: SinkhornParams) -> float:
    """Minimize the transport primal directly over the plan matrix.

    Multi-restart damped Newton descent with the marginal constraints handled
    exactly in balanced mode (the problem is convex, so restarts only guard
    against implementation bugs). Limited to n*m <= 9 entries.
    """
    n, m = mu.n_atoms, nu.n_atoms
    if n * m > _ORACLE_MAX_ENTRIES:
        raise ValueError(f"brute-force oracle limited to n*m <= {_ORACLE_MAX_ENTRIES}")
    cost = pairwise_cost(mu.flat, nu.flat)
    a, b = mu.weights, nu.weights
    best = math.inf
    if params.is_balanced:
        if abs(mu.mass - nu.mass) > 1e-12 * max(mu.mass, nu.mass, 1.0):
            raise ValueError("balanced mode requires equal masses")
        product = np.outer(a, b) / nu.mass  # feasible, strictly positive interior
        corner = _northwest_corner(a, b)
        starts = [product, 0.5 * product + 0.5 * corner, 0.9 * product + 0.1 * corner]
    else:
        product = np.outer(a, b)
        gibbs = product * np.exp(-(cost - cost.min()) / params.epsilon)
        gibbs *= product.sum() / max(gibbs.sum(), 1e-300)
        starts = [product, 0.5 * product, gibbs]
    for start in starts:
        best = min(best, _newton_primal(start, cost, a, b, params))
    return best


def assignment_cost(mu: PointCloud, nu: PointCloud) -> float:
    """Exact unregularized transport cost between uniform clouds of equal size
    (the optimum sits on an assignment by Birkhoff's theorem)."""
    if mu.n_atoms != nu.n_atoms:
        raise ValueError("assignment cost requires equally sized clouds")
    cost = pairwise_cost(mu.flat, nu.flat)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum()) / mu.n_atoms
