"""Closed-loop stability of the order-m consensus system.

Two independent routes decide stability:

* Hurwitz route: the characteristic polynomial of each m x m companion
  block is s^m + a_m*lam*s^(m-1) + ... + a_1*lam, with lam an eigenvalue
  of the grounded matrix.  Its Hurwitz determinants reduce to explicit
  gain inequalities per order; each inequality is monotone increasing in
  lam, so evaluating at lambda_min decides the whole spectrum.
* Spectral oracle: eigenvalues of the full nm x nm state matrix.

Order-specific conditions (all gains strictly positive, plus):
  m = 3:  (a2*a3/a1) * lam > 1
  m = 4:  (a3*a4/a2) * lam > 1  and  ((a3*a4/a2) - (a1*a4^2/a2^2)) * lam > 1

Systems of order >= 4 with all gains equal are unstable for every graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenFailureError, UnsupportedOrderError
from .graphs import Graph, KappaWeights, LeaderSet
from .linalg import DEFAULT_TOLS, Tolerances, sym_eigenvalues
from .system import GainVector, GroundedSystem, grounded_matrix


@dataclass(frozen=True)
class StabilityCondition:
    name: str
    detail: str
    slack: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inequality": self.detail,
            "slack": self.slack,
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    marginal: bool
    conditions: tuple[StabilityCondition, ...]
    hurwitz: tuple[float, ...]
    lambda_min: float
    margin: float

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "marginal": self.marginal,
            "lambda_min": self.lambda_min,
            "margin": self.margin,
            "hurwitz_determinants": list(self.hurwitz),
            "conditions": [c.to_dict() for c in self.conditions],
        }


@dataclass(frozen=True)
class StateMatrices:
    """Block companion form: x' = A x + B noise, output y = C x."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def hurwitz_determinants(gains: GainVector, lam: float) -> tuple[float, ...]:
    """Leading principal minors of the Hurwitz matrix, evaluated at lam.

    Closed polynomial forms per order; all must be positive for the
    companion block at lam to be Hurwitz.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    a = gains.values
    m = gains.m
    if m == 1:
        return (a[0] * lam,)
    if m == 2:
        a1, a2 = a
        return (a2 * lam, a1 * a2 * lam**2)
    if m == 3:
        a1, a2, a3 = a
        return (
            a3 * lam,
            a2 * a3 * lam**2 - a1 * lam,
            a1 * a2 * a3 * lam**3 - a1**2 * lam**2,
        )
    if m == 4:
        a1, a2, a3, a4 = a
        return (
            a4 * lam,
            a3 * a4 * lam**2 - a2 * lam,
            a2 * a3 * a4 * lam**3 - a1 * a4**2 * lam**3 - a2**2 * lam**2,
            a1 * a2 * a3 * a4 * lam**4 - a1**2 * a4**2 * lam**4 - a1 * a2**2 * lam**3,
        )
    raise UnsupportedOrderError(f"order {m} not supported")


def stability_conditions(
    gains: GainVector, lam: float, tols: Tolerances = DEFAULT_TOLS
) -> list[StabilityCondition]:
    """Order-specific gain inequalities evaluated at a single eigenvalue."""
    a = gains.values
    m = gains.m
    tol = tols.stability_slack
    conditions: list[StabilityCondition] = []

    def add(name: str, lhs: float, rhs: float) -> None:
        slack = lhs - rhs
        conditions.append(
            StabilityCondition(
                name=name,
                detail=f"{name}: {lhs:.12g} > {rhs:g}",
                slack=slack,
                satisfied=slack > tol,
            )
        )

    for j in range(m):
        add(f"a{j + 1} > 0", a[j], 0.0)
    if m == 3:
        add("(a2*a3/a1)*lambda_min > 1", (a[1] * a[2] / a[0]) * lam, 1.0)
    elif m == 4:
        c1 = a[2] * a[3] / a[1]
        c2 = c1 - a[0] * a[3] ** 2 / a[1] ** 2
        add("(a3*a4/a2)*lambda_min > 1", c1 * lam, 1.0)
        add("((a3*a4/a2)-(a1*a4^2/a2^2))*lambda_min > 1", c2 * lam, 1.0)
    return conditions


def report_for(gains: GainVector, lambda_min: float, tols: Tolerances = DEFAULT_TOLS) -> StabilityReport:
    """Stability report for a system whose smallest grounded eigenvalue is known."""
    conditions = tuple(stability_conditions(gains, lambda_min, tols))
    margin = min(c.slack for c in conditions)
    stable = all(c.satisfied for c in conditions)
    marginal = (not stable) and margin >= -tols.spectral_margin
    return StabilityReport(
        stable=stable,
        marginal=marginal,
        conditions=conditions,
        hurwitz=hurwitz_determinants(gains, lambda_min),
        lambda_min=lambda_min,
        margin=margin,
    )


def check_stability(system: GroundedSystem, tols: Tolerances = DEFAULT_TOLS) -> StabilityReport:
    """Decide stability via the gain inequalities at lambda_min.

    All conditions increase with lam, so the smallest grounded eigenvalue
    is the binding case; inequalities are strict with a small slack
    tolerance, and an exactly-boundary system is reported unstable with
    the ``marginal`` flag set.
    """
    return report_for(system.gains, system.lambda_min, tols)


def equal_gain_verdict(m: int, a: float) -> bool:
    """True when the order alone proves instability for equal gains.

    For any m >= 4 and all gains equal, the third Hurwitz determinant is
    never positive, so the system is unstable regardless of the gain
    value or graph.  For m <= 3 this test decides nothing (returns False).
    """
    if m < 1:
        raise UnsupportedOrderError(f"order {m} must be >= 1")
    del a
    return m >= 4


def companion_state_matrix(q: np.ndarray, gains) -> np.ndarray:
    """Full nm x nm state matrix for arbitrary order m >= 1.

    Identity blocks on the superdiagonal; last block row is
    [-a_1 Q, ..., -a_m Q].  Accepts a plain gain sequence so the
    spectral oracle can probe orders beyond the closed-form range.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    gains = tuple(float(g) for g in gains)
    m = len(gains)
    if m < 1:
        raise UnsupportedOrderError("need at least one gain")
    a = np.zeros((n * m, n * m))
    eye = np.eye(n)
    for j in range(m - 1):
        a[j * n : (j + 1) * n, (j + 1) * n : (j + 2) * n] = eye
    for j in range(m):
        a[(m - 1) * n :, j * n : (j + 1) * n] = -gains[j] * q
    return a


def build_state_matrices(system: GroundedSystem) -> StateMatrices:
    n, m = system.n, system.m
    a = companion_state_matrix(system.matrix, system.gains.values)
    b = np.zeros((n * m, n))
    b[(m - 1) * n :, :] = np.eye(n)
    c = np.zeros((n, n * m))
    c[:, :n] = np.eye(n)
    return StateMatrices(a=a, b=b, c=c)


def spectral_stability_oracle(
    a: np.ndarray, tols: Tolerances = DEFAULT_TOLS
) -> tuple[bool, float]:
    """Stability via the eigenvalues of the (nonsymmetric) state matrix.

    Returns (stable, max real part); stable iff the spectrum sits
    strictly left of -spectral_margin.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise EigenFailureError("state matrix has non-finite entries")
    try:
        values = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenFailureError(str(exc)) from exc
    max_real = float(np.max(values.real))
    return max_real < -tols.spectral_margin, max_real


def singleton_lambda_mins(graph: Graph, kappa: KappaWeights) -> list[float]:
    """Smallest grounded eigenvalue for each single-leader choice."""
    out = []
    for v in range(graph.n):
        q = grounded_matrix(graph, kappa, LeaderSet.of([v]))
        out.append(sym_eigenvalues(q).smallest)
    return out


def auto_gains(
    graph: Graph,
    kappa: KappaWeights,
    m: int,
    tols: Tolerances = DEFAULT_TOLS,
) -> GainVector:
    """Pick gains that stabilise every nonempty leader set.

    Base rule: all gains equal to a = ceil(max over single leaders v of
    1 / lambda_min(Q_v)), which makes a * lambda_min exceed 1 for every
    leader set.  When the ceiling lands exactly on the boundary (integer
    1/lambda_min), a is doubled until the order-3 condition clears the
    closed-form margin.  For m = 4 equal gains can never be stable, so
    the recipe is (a, 2a, 2a, 2a) with a doubled until both order-4
    condition slacks exceed 0.5.
    """
    if not 1 <= m <= 4:
        raise UnsupportedOrderError(f"order {m} outside supported range 1..4")
    lam_mins = singleton_lambda_mins(graph, kappa)
    lam_star = min(lam_mins)
    if lam_star <= 0:
        raise ValueError("graph must be connected for the gain rule")
    a = float(math.ceil(max(1.0 / lm for lm in lam_mins)))
    if m <= 2:
        return GainVector((a,) * m)
    if m == 3:
        while a * lam_star - 1.0 <= tols.coherence_margin:
            a *= 2.0
        return GainVector((a, a, a))
    while a * lam_star - 1.0 <= 0.5:
        a *= 2.0
    return GainVector((a, 2.0 * a, 2.0 * a, 2.0 * a))
