"""Sequential minimal optimization for the soft-margin SVM dual.

Maximizes W(a) = sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij subject to
0 <= a_i <= C and sum(a_i y_i) = 0, two variables at a time (Platt's
working-pair heuristics made fully deterministic). Errors are computed
on demand from the precomputed Gram matrix instead of an incrementally
updated cache, so no rounding drift accumulates and very small KKT
tolerances stay reachable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTargets

_SNAP = 1e-8  # alphas closer than this to a bound are snapped onto it


@dataclass
class TrainerConfig:
    tolerance: float = 1e-3
    epsilon: float = 1e-12
    max_iterations: int = 1_000_000
    calibrate: bool = False

    def __post_init__(self):
        if self.tolerance <= 0 or self.epsilon <= 0:
            raise ValueError("tolerance and epsilon must be positive")


@dataclass
class SmoSolution:
    alphas: np.ndarray
    bias: float
    iterations: int
    hit_iteration_cap: bool
    objective: float


def dual_objective(gram: np.ndarray, y: np.ndarray, alphas: np.ndarray) -> float:
    beta = alphas * y
    return float(alphas.sum() - 0.5 * beta @ gram @ beta)


class _Solver:
    def __init__(self, gram, y, C, tolerance, epsilon, max_iterations):
        self.gram = gram
        self.y = y
        self.C = float(C)
        self.tol = tolerance
        self.eps = epsilon
        self.cap = max_iterations
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.beta = np.zeros(self.n)  # alpha * y, kept in sync
        self.b = 0.0
        self.steps = 0
        self.hit_cap = False

    def error(self, i: int) -> float:
        return float(self.beta @ self.gram[:, i]) + self.b - self.y[i]

    def errors_at(self, idx: np.ndarray) -> np.ndarray:
        return self.gram[:, idx].T @ self.beta + self.b - self.y[idx]

    def take_step(self, i1: int, i2: int, e2: float) -> bool:
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1 = self.error(i1)
        s = y1 * y2
        if s < 0:
            lo, hi = max(0.0, a2 - a1), min(self.C, self.C + a2 - a1)
        else:
            lo, hi = max(0.0, a2 + a1 - self.C), min(self.C, a2 + a1)
        if lo >= hi:
            return False
        k11 = self.gram[i1, i1]
        k12 = self.gram[i1, i2]
        k22 = self.gram[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = a2 + y2 * (e1 - e2) / eta
            a2_new = min(max(a2_new, lo), hi)
        else:
            # flat or concave-up direction: move to the better boundary
            f1 = y1 * (e1 - self.b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 - self.b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - lo)
            h1 = a1 + s * (a2 - hi)
            obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12
            obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12
            if obj_lo < obj_hi - self.eps:
                a2_new = lo
            elif obj_lo > obj_hi + self.eps:
                a2_new = hi
            else:
                return False
        if a2_new < _SNAP:
            a2_new = 0.0
        elif a2_new > self.C - _SNAP:
            a2_new = self.C
        if abs(a2_new - a2) < self.eps * (a2_new + a2 + self.eps):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        if a1_new < _SNAP:
            a1_new = 0.0
        elif a1_new > self.C - _SNAP:
            a1_new = self.C
        d1, d2 = a1_new - a1, a2_new - a2
        b1 = self.b - e1 - y1 * d1 * k11 - y2 * d2 * k12
        b2 = self.b - e2 - y1 * d1 * k12 - y2 * d2 * k22
        if 0.0 < a1_new < self.C:
            self.b = b1
        elif 0.0 < a2_new < self.C:
            self.b = b2
        else:
            self.b = 0.5 * (b1 + b2)
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        self.beta[i1], self.beta[i2] = a1_new * y1, a2_new * y2
        self.steps += 1
        return True

    def examine(self, i2: int) -> int:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        e2 = self.error(i2)
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return 0
        non_bound = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if len(non_bound) > 1:
            errs = self.errors_at(non_bound)
            i1 = int(non_bound[int(np.argmax(np.abs(errs - e2)))])
            if self.take_step(i1, i2, e2):
                return 1
        # deterministic fallbacks: non-bound points, then the whole set,
        # each walked cyclically from the position after i2
        for pool in (non_bound.tolist(), list(range(self.n))):
            if not pool:
                continue
            start = 0
            for pos, idx in enumerate(pool):
                if idx > i2:
                    start = pos
                    break
            for off in range(len(pool)):
                i1 = pool[(start + off) % len(pool)]
                if self.take_step(i1, i2, e2):
                    return 1
        return 0

    def solve(self) -> SmoSolution:
        examine_all = True
        changed = 0
        while changed > 0 or examine_all:
            changed = 0
            if examine_all:
                targets = range(self.n)
            else:
                targets = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C)).tolist()
            for i in targets:
                changed += self.examine(i)
                if self.steps >= self.cap:
                    self.hit_cap = True
                    break
            if self.hit_cap:
                break
            if examine_all:
                examine_all = False
            elif changed == 0:
                examine_all = True
        bias = self._final_bias()
        return SmoSolution(
            alphas=self.alpha.copy(),
            bias=bias,
            iterations=self.steps,
            hit_iteration_cap=self.hit_cap,
            objective=dual_objective(self.gram, self.y, self.alpha),
        )

    def _final_bias(self) -> float:
        g = self.gram @ self.beta
        interior = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if len(interior):
            return float(np.mean(self.y[interior] - g[interior]))
        # all multipliers at a bound: the feasible interval for b comes
        # from y*(g+b) >= 1 at alpha=0 and y*(g+b) <= 1 at alpha=C
        lower, upper = [], []
        for i in range(self.n):
            bound_val = self.y[i] - g[i]
            at_zero = self.alpha[i] == 0.0
            positive = self.y[i] > 0
            if (at_zero and positive) or (not at_zero and not positive):
                lower.append(bound_val)
            else:
                upper.append(bound_val)
        lo = max(lower) if lower else min(upper)
        hi = min(upper) if upper else max(lower)
        return float(0.5 * (lo + hi))


def smo_solve(
    gram: np.ndarray,
    y: np.ndarray,
    C: float,
    tolerance: float = 1e-3,
    epsilon: float = 1e-12,
    max_iterations: int = 1_000_000,
) -> SmoSolution:
    gram = np.asarray(gram, dtype=float)
    y = np.asarray(y, dtype=float)
    return _Solver(gram, y, C, tolerance, epsilon, max_iterations).solve()


def fit_sigmoid_scaling(decisions: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Fit P(class=+1 | f) = 1 / (1 + exp(A*f + B)) by regularized maximum
    likelihood with smoothed targets (N+ + 1)/(N+ + 2) and 1/(N- + 2).

    Newton iteration with backtracking; for constant decision values the
    fit degenerates to the smoothed class prior: A = 0,
    B = log((N- + 1)/(N+ + 1)).
    """
    decisions = np.asarray(decisions, dtype=float)
    y = np.asarray(y, dtype=float)
    prior1 = int((y > 0).sum())
    prior0 = int((y <= 0).sum())
    if prior1 == 0 or prior0 == 0:
        raise DegenerateTargets("sigmoid fit needs both classes present")
    if np.ptp(decisions) < 1e-12:
        return 0.0, float(np.log((prior0 + 1.0) / (prior1 + 1.0)))

    hi_t = (prior1 + 1.0) / (prior1 + 2.0)
    lo_t = 1.0 / (prior0 + 2.0)
    t = np.where(y > 0, hi_t, lo_t)

    def negloglik(a: float, b: float) -> float:
        z = a * decisions + b
        # stable: t*z + log(1 + exp(-z)) for z >= 0, (t-1)*z + log(1+exp(z)) else
        pos = z >= 0
        val = np.empty_like(z)
        val[pos] = t[pos] * z[pos] + np.log1p(np.exp(-z[pos]))
        val[~pos] = (t[~pos] - 1.0) * z[~pos] + np.log1p(np.exp(z[~pos]))
        return float(val.sum())

    A, B = 0.0, float(np.log((prior0 + 1.0) / (prior1 + 1.0)))
    fval = negloglik(A, B)
    sigma_reg = 1e-12
    for _ in range(100):
        z = A * decisions + B
        p = np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)), 1.0 / (1.0 + np.exp(z)))
        d1 = t - p
        d2 = p * (1.0 - p)
        g_a = float((decisions * d1).sum())
        g_b = float(d1.sum())
        if abs(g_a) < 1e-10 and abs(g_b) < 1e-10:
            break
        h11 = float((decisions * decisions * d2).sum()) + sigma_reg
        h22 = float(d2.sum()) + sigma_reg
        h12 = float((decisions * d2).sum())
        det = h11 * h22 - h12 * h12
        dA = -(h22 * g_a - h12 * g_b) / det
        dB = -(h11 * g_b - h12 * g_a) / det
        step = 1.0
        g_dot_d = g_a * dA + g_b * dB
        while step >= 1e-10:
            new_f = negloglik(A + step * dA, B + step * dB)
            if new_f < fval + 1e-4 * step * g_dot_d:
                A, B, fval = A + step * dA, B + step * dB, new_f
                break
            step /= 2.0
        else:
            break
    return float(A), float(B)
