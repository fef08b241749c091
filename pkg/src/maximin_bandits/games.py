"""Exact maximin coverage games with primal and dual certificates.

The central quantity is the value of the zero-sum game

    max_{p in simplex(arms)}  min_{f}  (B p)_f

for a payoff matrix B (rows indexed by functions).  With B the alpha-optimal
indicator matrix of a function class this value is the best worst-case
probability that a single draw from p lands on an alpha-optimal arm, written
``gamma`` throughout.

The program is solved by a self-contained dense-tableau simplex with Bland's
anti-cycling rule; no external LP solver is involved.  The solve returns both
players' optimal mixtures, so every value ships with a machine-checkable
primal/dual certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np

from .core import ArmDistribution, FunctionClass, gap_matrix

__all__ = [
    "MaximinSolution",
    "GammaCertificate",
    "solve_maximin",
    "gamma",
    "verify_certificate",
]

_PIVOT_TOL = 1e-11


@dataclass(frozen=True, eq=False)
class MaximinSolution:
    """Optimal strategies of max_p min_f (B p)_f.

    ``p`` is the maximizing mixture over columns (arms) and ``dual`` the
    minimizing mixture over rows (functions); both are probability vectors.
    """

    value: float
    p: ArmDistribution
    dual: np.ndarray
    iterations: int


def solve_maximin(payoff, tolerance: float = 1e-9) -> MaximinSolution:
    """Solve the matrix game max_p min_rows (B p) exactly.

    The payoff matrix is shifted to be strictly positive, the row player's
    normalized program (max 1'y subject to B' y <= 1, y >= 0) is solved by a
    primal simplex starting from the all-slack basis, and the column player's
    mixture is read off the final objective row.  Bland's rule (lowest
    eligible variable index enters; ratio ties leave by lowest basis index)
    guarantees termination.
    """
    B = np.asarray(payoff, dtype=float)
    if B.ndim != 2 or B.shape[0] < 1 or B.shape[1] < 1:
        raise ValueError("payoff must be a nonempty matrix")
    if not np.all(np.isfinite(B)):
        raise ValueError("payoff entries must be finite")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    n_rows, n_cols = B.shape

    shift = 1.0 - min(0.0, float(B.min()))
    G = B + shift  # entries >= 1, so the shifted game value is positive

    # Tableau over y (row player, one variable per function) plus one slack
    # per arm constraint.  Objective row holds negated reduced costs.
    n_vars = n_rows + n_cols
    tab = np.zeros((n_cols + 1, n_vars + 1))
    tab[:n_cols, :n_rows] = G.T
    tab[:n_cols, n_rows:n_vars] = np.eye(n_cols)
    tab[:n_cols, -1] = 1.0
    tab[n_cols, :n_rows] = -1.0
    basis = list(range(n_rows, n_vars))

    iterations = 0
    max_iterations = 50 * n_vars + 10_000
    while True:
        negative = np.flatnonzero(tab[n_cols, :n_vars] < -_PIVOT_TOL)
        if negative.size == 0:
            break
        enter = int(negative[0])  # Bland: lowest-index improving variable
        col = tab[:n_cols, enter]
        feasible = col > _PIVOT_TOL
        if not feasible.any():
            raise RuntimeError("maximin program unbounded; payoff matrix malformed")
        ratios = np.full(n_cols, inf)
        ratios[feasible] = tab[:n_cols, -1][feasible] / col[feasible]
        best = ratios.min()
        tied = np.flatnonzero(ratios <= best * (1.0 + 1e-12) + 1e-15)
        leave = int(min(tied, key=lambda i: basis[i]))

        pivot = tab[leave, enter]
        tab[leave] /= pivot
        factor = tab[:, enter].copy()
        factor[leave] = 0.0
        tab -= np.outer(factor, tab[leave])
        basis[leave] = enter

        iterations += 1
        if iterations > max_iterations:
            raise RuntimeError("simplex failed to terminate")

    total = float(tab[n_cols, -1])  # sum of optimal y = 1 / shifted value
    if total <= 0:
        raise RuntimeError("degenerate optimum; payoff matrix malformed")
    value = 1.0 / total - shift

    y = np.zeros(n_vars)
    for i, b in enumerate(basis):
        y[b] = tab[i, -1]
    dual = np.clip(y[:n_rows], 0.0, None)
    dual /= dual.sum()

    p_raw = np.clip(tab[n_cols, n_rows:n_vars], 0.0, None)
    p = p_raw / p_raw.sum()

    return MaximinSolution(
        value=value, p=ArmDistribution(p), dual=dual, iterations=iterations
    )


@dataclass(frozen=True, eq=False)
class GammaCertificate:
    """Value of the alpha-optimal coverage game plus verifiable witnesses.

    ``p_star`` guarantees coverage >= value - tolerance against every
    function; ``dual_weights`` is a mixture over functions under which no
    single arm achieves coverage > value + tolerance, pinning the value from
    above.
    """

    value: float
    p_star: ArmDistribution
    worst_function: int
    dual_weights: np.ndarray
    alpha: float
    tolerance: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "p_star": [float(v) for v in self.p_star.probs],
            "worst_function": self.worst_function,
            "dual_weights": [float(v) for v in self.dual_weights],
            "alpha": self.alpha,
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GammaCertificate":
        return cls(
            value=float(doc["value"]),
            p_star=ArmDistribution(np.asarray(doc["p_star"], dtype=float)),
            worst_function=int(doc["worst_function"]),
            dual_weights=np.asarray(doc["dual_weights"], dtype=float),
            alpha=float(doc["alpha"]),
            tolerance=float(doc["tolerance"]),
        )


def gamma(fclass: FunctionClass, alpha: float, tolerance: float = 1e-9) -> GammaCertificate:
    """Maximin probability of hitting an alpha-optimal arm, with certificate.

    Always positive for a finite class: the uniform mixture covers every
    function with probability at least 1/arms.
    """
    B = gap_matrix(fclass, alpha).astype(float)
    sol = solve_maximin(B, tolerance)
    coverage = B @ sol.p.probs
    cert = GammaCertificate(
        value=float(sol.value),
        p_star=sol.p,
        worst_function=int(np.argmin(coverage)),
        dual_weights=sol.dual,
        alpha=float(alpha),
        tolerance=float(tolerance),
    )
    if not verify_certificate(fclass, alpha, cert):
        raise RuntimeError("maximin solver produced an unverifiable certificate")
    return cert


def _as_probs(vec) -> np.ndarray:
    return np.asarray(getattr(vec, "probs", vec), dtype=float)


def verify_certificate(fclass: FunctionClass, alpha: float, cert) -> bool:
    """Independently re-check a coverage certificate.

    Recomputes the indicator matrix and tests (a) both mixtures live on the
    simplex, (b) min_f coverage of p_star >= value - tolerance, and (c) under
    the dual weights no arm attains coverage > value + tolerance.  Together
    (b) and (c) bracket the game value within 2 * tolerance.
    """
    B = gap_matrix(fclass, alpha).astype(float)
    p = _as_probs(cert.p_star)
    lam = _as_probs(cert.dual_weights)
    if p.shape != (fclass.n_arms,) or lam.shape != (fclass.n_functions,):
        return False
    for vec in (p, lam):
        if not np.all(np.isfinite(vec)):
            return False
        if vec.min() < -1e-12 or abs(vec.sum() - 1.0) > 1e-9:
            return False
    if float((B @ p).min()) < cert.value - cert.tolerance:
        return False
    if float((lam @ B).max()) > cert.value + cert.tolerance:
        return False
    return True
