"""Closed form vs numerical witness table for the structural-imbalance theory."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import theory

# Reported example values for (p, q, beta) = (0.5, 0.1, 10).
REFERENCE_M = np.array([[0.333, 0.196], [0.067, 0.980]])
REFERENCE_LAMBDA2 = 0.313
BETA_GRID = (1, 2, 5, 10, 50)
TAU_GRID = (1, 1.5, 3.4, 10)


@dataclass
class Check:
    quantity: str
    closed_form: float
    empirical: float
    passed: bool

    @property
    def rel_error(self):
        if self.closed_form == 0:
            return abs(self.empirical)
        return abs(self.empirical - self.closed_form) / abs(self.closed_form)


def _rel(a, b):
    return abs(a - b) / abs(b)


def spectral_checks(p=0.5, q=0.1, beta=10.0, compare_reference=True):
    m = theory.propagation_matrix(p, q, beta)
    lam2 = theory.second_eigenvalue(m)
    out = []
    if compare_reference:
        for (i, j), ref in np.ndenumerate(REFERENCE_M):
            out.append(Check(f"M[{i},{j}]", ref, m[i, j], round(m[i, j], 3) == ref))
        out.append(Check("lambda2", REFERENCE_LAMBDA2, lam2, abs(lam2 - REFERENCE_LAMBDA2) <= 1e-3))
    lam1 = theory.dominant_eigenvalue(m)
    out.append(Check("lambda1", 1.0, lam1, abs(lam1 - 1.0) <= 1e-3))
    shifted = m - lam2 * np.eye(2)
    char = shifted[0, 0] * shifted[1, 1] - shifted[0, 1] * shifted[1, 0]
    out.append(Check("det(M-lambda2 I)", 0.0, char, abs(char) < 1e-10))
    return out


def decay_checks(p=0.5, q=0.1, beta=10.0, sigma_max=1.0):
    m = theory.propagation_matrix(p, q, beta)
    rate = sigma_max * theory.second_eigenvalue(m)
    curve = theory.centroid_decay_curve(m, sigma_max, [1.0, 0.0], 12)
    fitted = theory.fit_geometric_rate(curve, 5, 12)
    out = [Check("decay_rate", rate, fitted, _rel(fitted, rate) <= 0.02)]
    if (p, q, beta, sigma_max) == (0.5, 0.1, 10.0, 1.0):
        out.append(Check("decay_rate_reported", REFERENCE_LAMBDA2, fitted,
                         _rel(fitted, REFERENCE_LAMBDA2) <= 0.02))
    return out


def path_weight_checks(max_len=20):
    worst, worst_at = 0.0, None
    for b in BETA_GRID:
        for t in TAU_GRID:
            for L in range(max_len + 1):
                e = _rel(theory.path_weight_factor(b, t, L), theory.path_weight_binomial(b, t, L))
                if e >= worst:
                    worst, worst_at = e, (b, t, L)
    b, t, L = worst_at
    closed = theory.path_weight_factor(b, t, L)
    return [Check(f"path_weight(beta={b},tau={t},L={L})", closed,
                  theory.path_weight_binomial(b, t, L), worst < 1e-12)]


def gradient_checks(betas=(2, 5, 10), trials=50, rng_seed=0):
    out = []
    for b in betas:
        est = theory.monte_carlo_gradient_ratio(b, trials=trials, rng_seed=rng_seed)
        ref = theory.gradient_ratio(b)
        out.append(Check(f"gradient_ratio(beta={b})", ref, est, _rel(est, ref) <= 0.10))
    return out


def tree_checks(branching=(2, 3), r_max=5):
    out = []
    bases = []
    for b in branching:
        entries = theory.jacobian_decay_check(b, r_max)
        base = theory.fit_geometric_rate(entries, 0, len(entries) - 1)
        monotone = bool(np.all(np.diff(entries) < 0))
        bases.append(base)
        out.append(Check(f"tree_decay_base(b={b})", 1.0 / b, base, monotone and base <= 1.0 / b))
    shrinking = all(x > y for x, y in zip(bases, bases[1:]))
    out.append(Check("tree_base_decreases_with_b", 1.0, float(shrinking), shrinking))
    return out


def run_all(p=0.5, q=0.1, beta=10.0, sigma_max=1.0, monte_carlo=True):
    ref = (p, q, beta) == (0.5, 0.1, 10.0)
    checks = spectral_checks(p, q, beta, compare_reference=ref)
    checks += decay_checks(p, q, beta, sigma_max)
    checks += path_weight_checks()
    checks += tree_checks()
    if monte_carlo:
        checks += gradient_checks()
    return checks


def to_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "closed_form", "empirical", "rel_error", "passed"])
    for c in checks:
        w.writerow([c.quantity, repr(float(c.closed_form)), repr(float(c.empirical)),
                    f"{c.rel_error:.3e}", int(c.passed)])
    return buf.getvalue()
