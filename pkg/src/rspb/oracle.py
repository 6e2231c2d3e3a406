"""Independent verification machinery.

Everything in this module exists to check the main code paths by a different
route: exact Neyman-Pearson trade-offs by enumeration, Monte Carlo
estimation with reproducible Philox streams, central finite differences,
an exhaustively evaluated third-moment inequality, and a brute-force
exponent that computes the Augustin information by direct minimization
rather than the fixed-point iteration (deliberately sharing no code with
the spe module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize

from .errors import PreconditionError
from .gaussian import AwgnParams, gaussian_closed_forms, theta_of_rho
from .measures import DiscreteChannel, FiniteDist, product_log_ratio

# ---------------------------------------------------------------------------
# exact Neyman-Pearson trade-off


@dataclass(frozen=True)
class NpCurve:
    """Deterministic-test trade-off curve, sorted by increasing type I."""

    type_i: np.ndarray
    type_ii: np.ndarray

    def type_ii_at(self, budget: float) -> float:
        """Optimal type II among deterministic tests with type I <= budget."""
        idx = int(np.searchsorted(self.type_i, budget, side="right")) - 1
        if idx < 0:
            raise PreconditionError(f"no test meets type-I budget {budget}")
        return float(self.type_ii[idx])


def exact_np_tradeoff(w_seq, q_seq, budget: int = 2_000_000) -> NpCurve:
    """Enumerate the optimal deterministic trade-off for a product pair.

    Components are collapsed to the law of the log-likelihood-ratio sum
    (merging equal atoms, which reduces i.i.d. binary pairs to the count
    statistic) and atoms are accepted in decreasing ratio order. The curve
    starts at the test accepting only the Q-null set and ends at type II
    zero.
    """
    atoms = product_log_ratio(w_seq, q_seq, budget=budget)
    order = np.argsort(-atoms.values, kind="stable")
    pw = atoms.w_mass[order]
    pq = atoms.q_mass[order]
    ti = np.concatenate(([0.0], np.cumsum(pq)))
    tii = np.concatenate(([1.0 - atoms.w_plus_inf], 1.0 - atoms.w_plus_inf - np.cumsum(pw)))
    if atoms.q_minus_inf > 0:
        ti = np.concatenate((ti, [ti[-1] + atoms.q_minus_inf]))
        tii = np.concatenate((tii, [tii[-1]]))
    ti = np.clip(ti, 0.0, 1.0)
    tii = np.clip(tii, 0.0, 1.0)
    tii = np.minimum.accumulate(tii)
    return NpCurve(type_i=ti, type_ii=tii)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class DiscreteProduct:
    """Independent product of finite distributions; samples symbol indices."""

    dists: tuple

    def sample(self, rng: np.random.Generator, trials: int) -> np.ndarray:
        cols = [
            rng.choice(d.alphabet_size, size=trials, p=d.masses) for d in self.dists
        ]
        return np.stack(cols, axis=1)


@dataclass(frozen=True)
class GaussianProduct:
    """Independent Gaussians with per-component means and a common variance."""

    means: np.ndarray
    variance: float

    def sample(self, rng: np.random.Generator, trials: int) -> np.ndarray:
        means = np.asarray(self.means, dtype=float)
        return rng.normal(means, math.sqrt(self.variance), size=(trials, means.size))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width_95: float
    trials: int
    seed: int


_SHARD = 1 << 16


def mc_error_probability(
    rule,
    distribution,
    trials: int,
    seed: int,
    error_side: str = "miss",
) -> McEstimate:
    """Estimate an error probability of a decision rule by Monte Carlo.

    rule is a callable mapping a (trials, n) sample block to a boolean accept
    mask; 'miss' counts rejections (sampling under the hypothesis the rule
    should accept), 'false_alarm' counts acceptances. Sampling uses Philox
    streams: the seed feeds a SeedSequence that is spawned once per fixed-size
    shard, so the estimate is bit-reproducible and shards are independent.
    """
    if trials < 10_000:
        raise PreconditionError("need at least 1e4 trials")
    if error_side not in ("miss", "false_alarm"):
        raise ValueError(f"unknown error side {error_side!r}")
    n_shards = (trials + _SHARD - 1) // _SHARD
    children = np.random.SeedSequence(seed).spawn(n_shards)
    errors = 0
    done = 0
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        block = min(_SHARD, trials - done)
        samples = distribution.sample(rng, block)
        accept = np.asarray(rule(samples), dtype=bool)
        hits = int((~accept).sum()) if error_side == "miss" else int(accept.sum())
        errors += hits
        done += block
    mean = errors / trials
    return McEstimate(
        mean=mean,
        half_width_95=1.96 * math.sqrt(mean * (1.0 - mean) / trials),
        trials=trials,
        seed=seed,
    )


def discrete_llr_rule(w_seq, q_seq, threshold: float):
    """Accept iff the sampled log-likelihood-ratio sum reaches the threshold."""
    tables = []
    for w, q in zip(w_seq, q_seq):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.log(w.masses) - np.log(q.masses)
        t[(w.masses > 0) & (q.masses == 0)] = np.inf
        t[(w.masses == 0) & (q.masses > 0)] = -np.inf
        t[(w.masses == 0) & (q.masses == 0)] = -np.inf
        tables.append(t)
    tables = np.stack(tables)

    def rule(samples: np.ndarray) -> np.ndarray:
        per_comp = np.take_along_axis(tables, samples.T, axis=1).T
        with np.errstate(invalid="ignore"):
            total = per_comp.sum(axis=1)
        return np.where(np.isnan(total), False, total >= threshold)

    return rule


def gaussian_llr_rule(xs, params: AwgnParams, theta: float, threshold: float):
    """Gaussian analogue: accept iff sum_i ln(dW(x_i)/dN(0, theta)) >= threshold."""
    xs = np.asarray(xs, dtype=float)
    const = 0.5 * xs.size * math.log(theta / params.sigma2)

    def rule(samples: np.ndarray) -> np.ndarray:
        total = (
            -((samples - xs) ** 2).sum(axis=1) / (2.0 * params.sigma2)
            + (samples**2).sum(axis=1) / (2.0 * theta)
            + const
        )
        return total >= threshold

    return rule


# ---------------------------------------------------------------------------
# finite differences and moment checks


def fd_derivative_check(func, x: float, step: float) -> float:
    """Central difference (f(x+step) - f(x-step)) / (2 step)."""
    if step <= 0:
        raise PreconditionError("step must be positive")
    return (func(x + step) - func(x - step)) / (2.0 * step)


def third_moment_inequality_check(probs, x1, x2, x3) -> tuple:
    """Exactly test E|X1+X2+X3|^3 <= 9 (E|X1|^3 + E|X2|^3 + E|X3|^3).

    The triple lives on a common finite space described by atom
    probabilities and per-variable values; expectations are exact sums.
    Returns (lhs, rhs, holds).
    """
    p = np.asarray(probs, dtype=float)
    x1, x2, x3 = (np.asarray(v, dtype=float) for v in (x1, x2, x3))
    lhs = float(p @ np.abs(x1 + x2 + x3) ** 3)
    rhs = 9.0 * float(p @ (np.abs(x1) ** 3 + np.abs(x2) ** 3 + np.abs(x3) ** 3))
    return lhs, rhs, lhs <= rhs * (1.0 + 1e-12) + 1e-12


def independent_triple(v1, p1, v2, p2, v3, p3) -> tuple:
    """Build the product space of three independent finite-valued variables."""
    v1, v2, v3 = (np.asarray(v, dtype=float) for v in (v1, v2, v3))
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    probs = (p1[:, None, None] * p2[None, :, None] * p3[None, None, :]).ravel()
    a = np.broadcast_to(v1[:, None, None], (v1.size, v2.size, v3.size)).ravel()
    b = np.broadcast_to(v2[None, :, None], (v1.size, v2.size, v3.size)).ravel()
    c = np.broadcast_to(v3[None, None, :], (v1.size, v2.size, v3.size)).ravel()
    return probs, a, b, c


# ---------------------------------------------------------------------------
# brute-force exponent (independent twin of the spe module)


def _info_binary_grid(rhos: np.ndarray, weights, w_rows, q_grid: int = 4000):
    """min_q of the weighted divergence for binary outputs, by dense search.

    A parabolic touch-up through the best grid point and its neighbors
    removes the O(grid step squared) bias of the raw scan.
    """
    qs = np.arange(1, q_grid) / q_grid
    lq1 = np.log(qs)
    lq0 = np.log1p(-qs)
    out = np.empty(rhos.size)
    chunk = 256
    for start in range(0, rhos.size, chunk):
        r = rhos[start : start + chunk][:, None]
        acc = 0.0
        for wx, weight in zip(w_rows, weights):
            terms = np.zeros((r.size, qs.size))
            if wx[0] > 0:
                terms += np.exp(r * math.log(wx[0]) + (1.0 - r) * lq0[None, :])
            if wx[1] > 0:
                terms += np.exp(r * math.log(wx[1]) + (1.0 - r) * lq1[None, :])
            acc = acc + weight * np.log(terms) / (r - 1.0)
        idx = acc.argmin(axis=1)
        rows = np.arange(acc.shape[0])
        best = acc[rows, idx]
        interior = (idx > 0) & (idx < qs.size - 1)
        left = acc[rows[interior], idx[interior] - 1]
        right = acc[rows[interior], idx[interior] + 1]
        mid = best[interior]
        curv = left - 2.0 * mid + right
        ok = curv > 0
        refined = mid.copy()
        refined[ok] = mid[ok] - (left[ok] - right[ok]) ** 2 / (8.0 * curv[ok])
        best[interior] = refined
        out[start : start + chunk] = best
    return out


def _info_softmax(rho: float, weights, w_rows, z0: np.ndarray) -> tuple:
    """min_q by L-BFGS-B over a softmax chart, warm-started at z0."""

    def objective(z):
        z = z - z.max()
        q = np.exp(z)
        q /= q.sum()
        with np.errstate(divide="ignore"):
            lq = np.log(q)
        total = 0.0
        grad_q = np.zeros_like(q)
        for wx, weight in zip(w_rows, weights):
            m = wx > 0
            logits = rho * np.log(wx[m]) + (1.0 - rho) * lq[m]
            peak = logits.max()
            s = np.exp(logits - peak).sum()
            total += weight * (peak + math.log(s)) / (rho - 1.0)
            contrib = np.exp(logits - peak) / s
            grad_q[m] += weight * contrib * (1.0 - rho) / (rho - 1.0) / q[m]
        grad_z = q * (grad_q - float(grad_q @ q))
        return total, grad_z

    res = minimize(objective, z0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 200, "ftol": 1e-14, "gtol": 1e-12})
    return float(res.fun), res.x


def brute_spe(
    p: FiniteDist, channel: DiscreteChannel, rate: float, grid_size: int = 8192
) -> float:
    """Dense-grid supremum of (1-rho)/rho (I_rho - rate), computed from scratch.

    The Augustin information at each grid order is obtained by direct
    minimization over the output simplex (dense line search for binary
    outputs, warm-started quasi-Newton otherwise), never by the fixed-point
    iteration, so agreement with the parametric solve is an independent
    check. The grid {i/grid_size} is nested under doubling.
    """
    rhos = np.arange(1, grid_size) / grid_size
    sup = p.support
    weights = p.masses[sup]
    w_rows = channel.row_matrix()[sup]
    if channel.output_size == 2:
        info = _info_binary_grid(rhos, weights, w_rows)
    else:
        info = np.empty(rhos.size)
        z = np.log(weights @ w_rows + 1e-300)
        for i, r in enumerate(rhos):
            info[i], z = _info_softmax(float(r), weights, w_rows, z)
    vals = (1.0 - rhos) / rhos * (info - rate)
    return float(max(vals.max(), 0.0))


# ---------------------------------------------------------------------------
# Gaussian moments by quadrature


def awgn_exact_tilted_moments(rho: float, x: float, params: AwgnParams) -> tuple:
    """Exact (a2, a3) of the Gaussian log ratio under the tilted law.

    The second moment has a closed form used by the main path; the third
    absolute moment is integrated adaptively here so tests can confirm the
    closed-form upper bound actually dominates it.
    """
    theta = theta_of_rho(rho, params)
    _, mu_t, v_t = gaussian_closed_forms(rho, x, theta, params)
    sigma2 = params.sigma2

    def log_ratio(y):
        return (
            -((y - x) ** 2) / (2.0 * sigma2)
            + y**2 / (2.0 * theta)
            + 0.5 * math.log(theta / sigma2)
        )

    mean = (
        -(v_t + (mu_t - x) ** 2) / (2.0 * sigma2)
        + (v_t + mu_t**2) / (2.0 * theta)
        + 0.5 * math.log(theta / sigma2)
    )
    scale = math.sqrt(v_t)

    def density(y):
        return math.exp(-((y - mu_t) ** 2) / (2.0 * v_t)) / (scale * math.sqrt(2 * math.pi))

    a2 = quad(lambda y: (log_ratio(y) - mean) ** 2 * density(y),
              mu_t - 12 * scale, mu_t + 12 * scale, limit=200)[0]
    a3 = quad(lambda y: abs(log_ratio(y) - mean) ** 3 * density(y),
              mu_t - 12 * scale, mu_t + 12 * scale, limit=200)[0]
    return float(a2), float(a3)


def gaussian_kl(mean_a: float, var_a: float, mean_b: float, var_b: float) -> float:
    """KL divergence between univariate Gaussians, in nats."""
    return 0.5 * (
        var_a / var_b + (mean_a - mean_b) ** 2 / var_b - 1.0 + math.log(var_b / var_a)
    )
