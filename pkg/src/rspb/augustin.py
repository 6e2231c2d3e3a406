"""Augustin means, information, and constraint-aware capacity.

The Augustin mean of order rho for an input distribution P is the unique
output law minimizing the conditional Renyi divergence; it is computed here
as the fixed point of the tilted-channel mixture map, started from the
order-one mean (which dominates every candidate). Orders above one are
rejected: the sphere-packing machinery only needs (0, 1], and the fixed
point map is only trusted there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AlphabetMismatchError,
    ComputationError,
    FeasibilityError,
    InvalidOrderError,
    NonConvergenceError,
)
from .measures import DiscreteChannel, FiniteDist, renyi_divergence

DEFAULT_FP_TOL = 1e-12
DEFAULT_FP_MAX_ITER = 20000
ALT_IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class AugustinSolution:
    """Converged fixed point: mean, information, and iteration diagnostics."""

    mean: FiniteDist
    information: float
    iterations: int
    residual: float
    alt_identity_residual: float


def _check_inputs(rho: float, p: FiniteDist, channel: DiscreteChannel):
    if not 0 < rho <= 1:
        raise InvalidOrderError(f"order must lie in (0, 1], got {rho}")
    if p.alphabet_size != channel.input_size:
        raise AlphabetMismatchError("input distribution does not match channel inputs")


def _solve_grid(rhos, weights, lw, w_rows, tol, max_iter, q0=None):
    """Iterate q <- sum_x p(x) tilt_rho(W(x), q) for a whole grid of orders.

    The map contracts like (1 - rho), which is hopeless to iterate plainly
    for tiny orders, so once the per-order step ratio stabilizes we take a
    geometric-series extrapolation jump and let a few plain steps re-certify
    the tolerance. Returns (Q, steps, iterations) with one row per order.
    """
    rhos = np.asarray(rhos, dtype=float)
    q1 = weights @ w_rows
    n_orders = rhos.size
    Q = np.tile(q1, (n_orders, 1)) if q0 is None else np.array(q0, dtype=float)
    steps = np.zeros(n_orders)
    iters = np.zeros(n_orders, dtype=int)
    prev_step = np.full(n_orders, np.nan)
    prev_ratio = np.full(n_orders, np.nan)
    active = rhos < 1.0
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Qa = Q[idx]
        with np.errstate(divide="ignore"):
            lq = np.log(Qa)
        logits = rhos[idx, None, None] * lw[None, :, :] + (
            1.0 - rhos[idx, None, None]
        ) * lq[:, None, :]
        peak = logits.max(axis=2, keepdims=True)
        tilts = np.exp(logits - peak)
        tilts /= tilts.sum(axis=2, keepdims=True)
        Qn = np.einsum("s,asy->ay", weights, tilts)
        delta = Qn - Qa
        step = 0.5 * np.abs(delta).sum(axis=1)
        iters[idx] += 1
        steps[idx] = step
        done = step <= tol
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = step / prev_step[idx]
        stable = (
            ~done
            & np.isfinite(ratio)
            & np.isfinite(prev_ratio[idx])
            & (ratio < 1.0)
            & (np.abs(ratio - prev_ratio[idx]) < 0.02 * ratio)
        )
        if stable.any():
            boost = np.zeros_like(step)
            boost[stable] = ratio[stable] / (1.0 - ratio[stable])
            Qn = Qn + delta * boost[:, None]
            np.clip(Qn, 0.0, None, out=Qn)
            Qn /= Qn.sum(axis=1, keepdims=True)
            ratio = np.where(stable, np.nan, ratio)
            step = np.where(stable, np.nan, step)
        Q[idx] = Qn
        prev_step[idx] = step
        prev_ratio[idx] = ratio
        sub = np.flatnonzero(active)[done]
        active[sub] = False
    return Q, steps, iters


def _row_divergences(rho: float, lw: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D_rho(W(x) || q) for every prepared log-row, vectorized.

    Assumes q dominates every row (true for mixtures over the rows). The
    power sum is evaluated through expm1/log1p so that precision does not
    degrade like eps/(1-rho) near order one; rows with huge exponents fall
    back to the max-shifted log-sum-exp.
    """
    with np.errstate(divide="ignore"):
        lq = np.log(q)
    w = np.exp(lw)
    joint = w > 0
    if rho == 1.0:
        with np.errstate(invalid="ignore"):
            terms = np.where(joint, w * (lw - lq), 0.0)
        return terms.sum(axis=1)
    with np.errstate(invalid="ignore"):
        args = np.where(joint, (rho - 1.0) * (lw - lq), 0.0)
    out = np.full(lw.shape[0], np.nan)
    safe = args.max(axis=1) < 500.0
    if safe.any():
        s1 = np.einsum("xy,xy->x", w[safe], np.expm1(args[safe]))
        with np.errstate(divide="ignore"):
            out[safe] = np.log1p(s1) / (rho - 1.0)
    hard = ~safe | ~(out > -np.inf)
    if hard.any():
        logits = rho * lw[hard] + (1.0 - rho) * lq[None, :]
        peak = logits.max(axis=1, keepdims=True)
        out[hard] = (
            peak[:, 0] + np.log(np.exp(logits - peak).sum(axis=1))
        ) / (rho - 1.0)
    return out


def _tilted_rows(rho: float, lw: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lq = np.log(q)
    logits = rho * lw + (1.0 - rho) * lq
    peak = logits.max(axis=1, keepdims=True)
    t = np.exp(logits - peak)
    t /= t.sum(axis=1, keepdims=True)
    return t


def _kl_rows(t: np.ndarray, ref: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(t > 0, t * (np.log(t) - np.log(ref)), 0.0)
    return terms.sum(axis=1)


def augustin_fixed_point(
    rho: float,
    p: FiniteDist,
    channel: DiscreteChannel,
    tol: float = DEFAULT_FP_TOL,
    max_iter: int = DEFAULT_FP_MAX_ITER,
    q0: np.ndarray | None = None,
) -> AugustinSolution:
    """Solve for the order rho Augustin mean of (p, channel).

    Starts from the order-one mean, stops when the total-variation step falls
    below tol, and cross-checks the converged information value against its
    tilted-channel KL decomposition before returning. Order one returns the
    plain mixture directly.
    """
    _check_inputs(rho, p, channel)
    sup = p.support
    weights = p.masses[sup]
    w_rows = channel.row_matrix()[sup]
    with np.errstate(divide="ignore"):
        lw = np.log(w_rows)
    if rho == 1.0:
        q = weights @ w_rows
        info = float(weights @ _row_divergences(1.0, lw, q))
        return AugustinSolution(FiniteDist(q), info, 0, 0.0, 0.0)
    start = None if q0 is None else np.asarray(q0, dtype=float)[None, :]
    Q, steps, iters = _solve_grid([rho], weights, lw, w_rows, tol, max_iter, start)
    q = Q[0]
    if steps[0] > tol:
        raise NonConvergenceError(
            f"fixed point did not converge in {max_iter} iterations", float(steps[0])
        )
    info = float(weights @ _row_divergences(rho, lw, q))
    t = _tilted_rows(rho, lw, q)
    d1_tw = float(weights @ _kl_rows(t, w_rows))
    d1_tq = float(weights @ _kl_rows(t, q[None, :]))
    alt = abs(info - (rho / (1.0 - rho) * d1_tw + d1_tq))
    # The rho/(1-rho) factor amplifies rounding in d1_tw, so the gate widens
    # by exactly that unavoidable factor; it stays at 1e-9 for rho <= 0.9999.
    gate = max(ALT_IDENTITY_TOL, 64 * np.finfo(float).eps * rho / (1.0 - rho))
    if alt > gate:
        raise ComputationError(
            f"tilted-channel identity residual {alt:.3e} exceeds {gate:.3e}"
        )
    return AugustinSolution(FiniteDist(q), info, int(iters[0]), float(steps[0]), alt)


def augustin_information_grid(
    rhos,
    p: FiniteDist,
    channel: DiscreteChannel,
    tol: float = DEFAULT_FP_TOL,
    max_iter: int = 500_000,
) -> np.ndarray:
    """Augustin information at every order of a grid, solved jointly."""
    rhos = np.asarray(rhos, dtype=float)
    for r in rhos:
        _check_inputs(float(r), p, channel)
    sup = p.support
    weights = p.masses[sup]
    w_rows = channel.row_matrix()[sup]
    with np.errstate(divide="ignore"):
        lw = np.log(w_rows)
    Q, steps, _ = _solve_grid(rhos, weights, lw, w_rows, tol, max_iter)
    bad = steps > tol
    if bad.any():
        raise NonConvergenceError(
            f"{int(bad.sum())} grid orders did not converge", float(steps[bad].max())
        )
    out = np.empty(rhos.size)
    for i, r in enumerate(rhos):
        out[i] = float(weights @ _row_divergences(float(r), lw, Q[i]))
    return out


def augustin_info_derivative(rho: float, p: FiniteDist, channel: DiscreteChannel) -> float:
    """Order-derivative of the Augustin information at rho."""
    _check_inputs(rho, p, channel)
    sol = augustin_fixed_point(rho, p, channel)
    sup = p.support
    weights = p.masses[sup]
    w_rows = channel.row_matrix()[sup]
    with np.errstate(divide="ignore"):
        lw = np.log(w_rows)
    q = sol.mean.masses
    if rho == 1.0:
        with np.errstate(divide="ignore"):
            lq = np.log(q)
        total = 0.0
        for wx, weight in zip(w_rows, weights):
            m = wx > 0
            lr = np.log(wx[m]) - lq[m]
            mean = float(wx[m] @ lr)
            total += 0.5 * weight * float(wx[m] @ (lr - mean) ** 2)
        return total
    t = _tilted_rows(rho, lw, q)
    return float(weights @ _kl_rows(t, w_rows)) / (rho - 1.0) ** 2


def haroutunian_rate(rho: float, p: FiniteDist, channel: DiscreteChannel) -> float:
    """KL divergence of the tilted channel from the Augustin mean, p-averaged.

    Non-decreasing in the order; its inverse supplies the parametric order
    for the sphere-packing exponent.
    """
    _check_inputs(rho, p, channel)
    sol = augustin_fixed_point(rho, p, channel)
    return tilted_kl_pair(rho, p, channel, sol.mean.masses)[0]


def tilted_kl_pair(
    rho: float, p: FiniteDist, channel: DiscreteChannel, q: np.ndarray
) -> tuple:
    """(D_1(tilt || q | p), D_1(tilt || W | p)) at a prepared mean q."""
    sup = p.support
    weights = p.masses[sup]
    w_rows = channel.row_matrix()[sup]
    with np.errstate(divide="ignore"):
        lw = np.log(w_rows)
    if rho == 1.0:
        t = w_rows
    else:
        t = _tilted_rows(rho, lw, q)
    return (
        float(weights @ _kl_rows(t, q[None, :])),
        float(weights @ _kl_rows(t, w_rows)),
    )


# ---------------------------------------------------------------------------
# constraint sets and capacity


@dataclass(frozen=True)
class ConstraintSet:
    """Input constraint: all inputs, one distribution, a cost cap, or a list."""

    kind: str
    dist: FiniteDist | None = None
    costs: np.ndarray | None = None
    budget: float | None = None
    dists: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("all", "single", "cost", "list"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind == "cost":
            costs = np.asarray(self.costs, dtype=float)
            object.__setattr__(self, "costs", costs)
            if self.budget is None or self.budget < costs.min():
                raise FeasibilityError(
                    "cost budget below the cheapest input; constraint set empty"
                )

    @staticmethod
    def all_inputs() -> "ConstraintSet":
        return ConstraintSet(kind="all")

    @staticmethod
    def single(p: FiniteDist) -> "ConstraintSet":
        return ConstraintSet(kind="single", dist=p)

    @staticmethod
    def cost(costs, budget: float) -> "ConstraintSet":
        return ConstraintSet(kind="cost", costs=np.asarray(costs, dtype=float), budget=budget)

    @staticmethod
    def explicit(dists) -> "ConstraintSet":
        return ConstraintSet(kind="list", dists=tuple(dists))


def read_constraint(path) -> ConstraintSet:
    """Load {"kind": "all"} or {"kind": "cost", "costs": [...], "budget": x}."""
    data = json.loads(Path(path).read_text())
    kind = data.get("kind")
    if kind == "all":
        return ConstraintSet.all_inputs()
    if kind == "cost":
        return ConstraintSet.cost(data["costs"], float(data["budget"]))
    raise ValueError(f"{path}: unsupported constraint kind {kind!r}")


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    center: FiniteDist
    optimizer: FiniteDist
    certificate_gap: float
    certified: bool


def _ba_search(rho, channel, tol, max_iter, lam=0.0, costs=None, p0=None):
    """Coordinate-ascent with multiplicative updates on the input simplex.

    The exponent of the update is the per-input divergence to the current
    mean (shifted by a cost penalty when lam > 0); the step is halved when
    the objective decreases. Returns the best iterate seen.
    """
    n_in = channel.input_size
    p = np.full(n_in, 1.0 / n_in) if p0 is None else np.array(p0, dtype=float)
    rows = channel.row_matrix()
    with np.errstate(divide="ignore"):
        lw = np.log(rows)
    q_warm = None
    step = 1.0
    best = None
    for _ in range(max_iter):
        sol = augustin_fixed_point(rho, FiniteDist(p), channel, q0=q_warm)
        q = sol.mean.masses
        q_warm = q
        d = _row_divergences(rho, lw, q)
        info = float(p @ np.where(p > 0, d, 0.0))
        score = info - (0.0 if lam == 0.0 else lam * float(p @ costs))
        d_eff = d if lam == 0.0 else d - lam * costs
        finite = np.isfinite(d_eff)
        if not finite.all():
            d_eff = np.where(finite, d_eff, d_eff[finite].max() + 50.0)
        gap = float(d_eff.max() - (info if lam == 0.0 else score))
        if best is None or score > best[0]:
            best = (score, p.copy(), q.copy(), d.copy(), info, gap)
        elif score < best[0] - 1e-14:
            step = max(step * 0.5, 1e-2)
        if gap <= 0.1 * tol:
            break
        logits = step * (d_eff - d_eff.max())
        p = p * np.exp(logits)
        p = np.clip(p, 1e-300, None)
        p /= p.sum()
    _, p, q, d, info, gap = best
    return p, q, d, info, gap


def augustin_capacity(
    rho: float,
    channel: DiscreteChannel,
    constraint: ConstraintSet | None = None,
    tol: float = 1e-8,
    max_iter: int = 4000,
) -> CapacityResult:
    """Maximize the Augustin information over a constraint set.

    For the unconstrained set the returned certificate gap is
    max_x D_rho(W(x) || center) - capacity, which brackets the true capacity
    from above; a gap within tol certifies the value. Cost constraints use
    the analogous Lagrangian certificate, single distributions degenerate to
    the fixed point, and explicit lists are enumerated exactly.
    """
    if constraint is None:
        constraint = ConstraintSet.all_inputs()
    if constraint.kind == "single":
        sol = augustin_fixed_point(rho, constraint.dist, channel)
        return CapacityResult(sol.information, sol.mean, constraint.dist, 0.0, True)
    if constraint.kind == "list":
        best = None
        for cand in constraint.dists:
            sol = augustin_fixed_point(rho, cand, channel)
            if best is None or sol.information > best[0]:
                best = (sol.information, sol.mean, cand)
        return CapacityResult(best[0], best[1], best[2], 0.0, True)
    if constraint.kind == "all":
        p, q, _, info, gap = _ba_search(rho, channel, tol, max_iter)
        return CapacityResult(info, FiniteDist(q), FiniteDist(p), gap, gap <= tol)

    # cost constraint: try the unconstrained optimum, then sweep the
    # Lagrange multiplier until the budget binds.
    costs = constraint.costs
    budget = constraint.budget
    if costs.size != channel.input_size:
        raise AlphabetMismatchError("cost vector length does not match channel inputs")
    p, q, d, info, gap = _ba_search(rho, channel, tol, max_iter)
    if float(p @ costs) <= budget + 1e-12:
        return CapacityResult(info, FiniteDist(q), FiniteDist(p), gap, gap <= tol)
    lam_lo, lam_hi = 0.0, 1.0
    while True:
        p, q, d, info, _ = _ba_search(rho, channel, tol, max_iter, lam=lam_hi, costs=costs)
        if float(p @ costs) <= budget:
            break
        lam_lo = lam_hi
        lam_hi *= 2.0
        if lam_hi > 1e9:
            raise ComputationError("cost multiplier search diverged")
    for _ in range(60):
        lam = 0.5 * (lam_lo + lam_hi)
        p, q, d, info, _ = _ba_search(rho, channel, tol, max_iter, lam=lam, costs=costs)
        if float(p @ costs) <= budget:
            lam_hi = lam
        else:
            lam_lo = lam
    p, q, d, info, _ = _ba_search(rho, channel, tol, max_iter, lam=lam_hi, costs=costs)
    gap = float(np.max(d - lam_hi * costs) + lam_hi * budget - info)
    feasible = float(p @ costs) <= budget + 1e-9
    return CapacityResult(
        info, FiniteDist(q), FiniteDist(p), gap, feasible and gap <= tol
    )
