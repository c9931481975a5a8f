"""Coherence (steady-state output variance) of stable order-m systems.

Closed forms, per order, as functions of the grounded matrix Q:

  H_1 = 1/(2 a1)    * tr(Q^-1)
  H_2 = 1/(2 a1 a2) * tr(Q^-2)
  H_3 = a3/(2 a1^2) * tr(Q^-1 ((a2 a3 / a1) Q - I)^-1)
  H_4 = 1/(2 a1 a2) * tr(Q^-2 (b1 Q - I) ((b1 - b2) Q - I)^-1)
        with b1 = a3 a4 / a2 and b2 = a1 a4^2 / a2^2

Each is evaluated either on the spectrum of Q (default) or literally on
matrix inverses; a Lyapunov-Gramian oracle provides an independent check.

The selection surrogate is f(S) = 0 for empty S and C - rho * H(S)
otherwise, where rho * H(S) is a plain trace (rho = 2a1, 2a1a2,
2a1^2/a3, 2a1a2 for orders 1..4) and C is twice the worst single-leader
value, so f is nonnegative, nondecreasing, and submodular.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Literal

import numpy as np

from .errors import (
    EmptyLeaderSetError,
    PreconditionViolatedError,
    UnstableSystemError,
    UnsupportedOrderError,
)
from .graphs import Graph, KappaWeights, LeaderSet, laplacian
from .linalg import DEFAULT_TOLS, Tolerances, lyapunov_solve, sym_eigenvalues
from .stability import build_state_matrices, check_stability, report_for
from .system import GainVector, GroundedSystem, grounded_matrix

Method = Literal["closed_eig", "closed_inv", "lyapunov", "simulation"]


@dataclass(frozen=True)
class CoherenceReport:
    m: int
    value: float
    method: Method
    leaders: LeaderSet
    gains: GainVector

    def to_dict(self) -> dict:
        return {
            "order": self.m,
            "value": self.value,
            "method": self.method,
            "leaders": list(self.leaders.sorted_members),
            "gains": list(self.gains.values),
        }


def trace_normalizer(gains: GainVector) -> float:
    """The factor rho with rho * H(S) equal to a bare trace expression."""
    a = gains.values
    if gains.m == 1:
        return 2.0 * a[0]
    if gains.m == 2 or gains.m == 4:
        return 2.0 * a[0] * a[1]
    if gains.m == 3:
        return 2.0 * a[0] ** 2 / a[2]
    raise UnsupportedOrderError(f"order {gains.m} not supported")


def shift_coefficient(gains: GainVector) -> float | None:
    """Coefficient c of the auxiliary factor (c Q - I) used by orders 3 and 4."""
    a = gains.values
    if gains.m == 3:
        return a[1] * a[2] / a[0]
    if gains.m == 4:
        b1, b2 = fourth_order_coefficients(gains)
        return b1 - b2
    return None


def fourth_order_coefficients(gains: GainVector) -> tuple[float, float]:
    a = gains.values
    if gains.m != 4:
        raise UnsupportedOrderError("fourth-order coefficients need m = 4")
    return a[2] * a[3] / a[1], a[0] * a[3] ** 2 / a[1] ** 2


def normalized_eigenvalue_terms(gains: GainVector, lams: Iterable[float]) -> float:
    """Sum of per-eigenvalue terms of rho * H (the normalized coherence)."""
    a = gains.values
    m = gains.m
    total = 0.0
    if m == 1:
        for lam in lams:
            total += 1.0 / lam
    elif m == 2:
        for lam in lams:
            total += 1.0 / lam**2
    elif m == 3:
        c = a[1] * a[2] / a[0]
        for lam in lams:
            total += 1.0 / (lam * (c * lam - 1.0))
    elif m == 4:
        b1, b2 = fourth_order_coefficients(gains)
        for lam in lams:
            total += (b1 * lam - 1.0) / (lam**2 * ((b1 - b2) * lam - 1.0))
    else:
        raise UnsupportedOrderError(f"order {m} not supported")
    return float(total)


def normalized_from_inverses(
    gains: GainVector, inv: np.ndarray, shifted_inv: np.ndarray | None
) -> float:
    """rho * H from the maintained inverses Q^-1 and (c Q - I)^-1.

    Traces of products of symmetric matrices reduce to elementwise sums,
    which is what keeps the incremental greedy at O(n^2) per candidate.
    """
    m = gains.m
    if m == 1:
        return float(np.trace(inv))
    if m == 2:
        return float(np.sum(inv * inv))
    if m == 3:
        assert shifted_inv is not None
        return float(np.sum(inv * shifted_inv))
    if m == 4:
        assert shifted_inv is not None
        _, b2 = fourth_order_coefficients(gains)
        return float(np.sum(inv * inv) + b2 * np.sum(inv * shifted_inv))
    raise UnsupportedOrderError(f"order {m} not supported")


def _require_evaluable(system: GroundedSystem, tols: Tolerances) -> None:
    if not system.leaders.members:
        raise EmptyLeaderSetError("coherence needs a nonempty leader set")
    report = check_stability(system, tols)
    if not report.stable or report.margin < tols.coherence_margin:
        raise UnstableSystemError(
            f"system not stable enough for closed forms (margin {report.margin:.3e})"
        )


def coherence_closed(
    system: GroundedSystem,
    method: Literal["eigen", "inverse"] = "eigen",
    tols: Tolerances = DEFAULT_TOLS,
) -> CoherenceReport:
    """Closed-form coherence on the eigenvalue path or the matrix-inverse path."""
    _require_evaluable(system, tols)
    gains = system.gains
    a = gains.values
    m = gains.m
    if m == 1:
        factor = 1.0 / (2.0 * a[0])
    elif m == 2 or m == 4:
        factor = 1.0 / (2.0 * a[0] * a[1])
    else:
        factor = a[2] / (2.0 * a[0] ** 2)

    if method == "eigen":
        value = factor * normalized_eigenvalue_terms(gains, system.eigenvalues)
        return CoherenceReport(m, float(value), "closed_eig", system.leaders, gains)

    inv = system.inverse
    if m == 1:
        trace = float(np.trace(inv))
    elif m == 2:
        trace = float(np.sum(inv * inv))
    elif m == 3:
        c = shift_coefficient(gains)
        trace = float(np.sum(inv * system.shifted_inverse(c)))
    else:
        b1, b2 = fourth_order_coefficients(gains)
        middle = b1 * system.matrix - np.eye(system.n)
        trace = float(np.trace(inv @ inv @ middle @ system.shifted_inverse(b1 - b2)))
    return CoherenceReport(m, factor * trace, "closed_inv", system.leaders, gains)


def coherence_value(system: GroundedSystem, tols: Tolerances = DEFAULT_TOLS) -> float:
    return coherence_closed(system, "eigen", tols).value


def h4_rearranged(system: GroundedSystem, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Fourth-order coherence in the incremental-greedy form.

    Splitting the rational term per eigenvalue gives
    tr(Q^-2) + b2 * tr(Q^-1 ((b1-b2) Q - I)^-1), scaled by 1/(2 a1 a2);
    identical to the direct form but needs only the two maintained
    inverses.
    """
    if system.gains.m != 4:
        raise UnsupportedOrderError("rearranged form is specific to order 4")
    _require_evaluable(system, tols)
    a = system.gains.values
    b1, b2 = fourth_order_coefficients(system.gains)
    inv = system.inverse
    shifted = system.shifted_inverse(b1 - b2)
    trace = float(np.sum(inv * inv) + b2 * np.sum(inv * shifted))
    return trace / (2.0 * a[0] * a[1])


def coherence_lyapunov_oracle(
    system: GroundedSystem, tols: Tolerances = DEFAULT_TOLS
) -> CoherenceReport:
    """Coherence as tr(C P C^T) with P solving A P + P A^T + B B^T = 0.

    Independent of the closed forms: builds the full state matrices and
    solves the Lyapunov equation directly.  Capped at small state
    dimensions; meant as a validation oracle, not a fast path.
    """
    if not system.leaders.members:
        raise EmptyLeaderSetError("coherence needs a nonempty leader set")
    report = check_stability(system, tols)
    if not report.stable:
        raise UnstableSystemError("Lyapunov Gramian exists only for stable systems")
    mats = build_state_matrices(system)
    gramian = lyapunov_solve(mats.a, mats.b @ mats.b.T, tols)
    value = float(np.trace(mats.c @ gramian @ mats.c.T))
    return CoherenceReport(system.m, value, "lyapunov", system.leaders, system.gains)


@dataclass(frozen=True)
class SystemContext:
    """Fixed (graph, kappa, gains) with cached selection machinery.

    Caches the per-singleton normalized coherences and the surrogate
    offset constant C = 2 * max over single leaders, which every
    set-function evaluation reuses.
    """

    graph: Graph
    kappa: KappaWeights
    gains: GainVector

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.gains.m

    def system(self, leaders) -> GroundedSystem:
        return GroundedSystem.create(self.graph, self.kappa, leaders, self.gains)

    @cached_property
    def _laplacian(self) -> np.ndarray:
        return laplacian(self.graph)

    def grounded(self, leaders) -> np.ndarray:
        # hot path for exhaustive sweeps; reuse the cached Laplacian
        if not isinstance(leaders, LeaderSet):
            leaders = LeaderSet.of(leaders)
        leaders.validate(self.n)
        q = self._laplacian.copy()
        for v in leaders.members:
            q[v, v] += self.kappa.values[v]
        return q

    @cached_property
    def singleton_lambda_mins(self) -> tuple[float, ...]:
        out = []
        for v in range(self.n):
            out.append(sym_eigenvalues(self.grounded([v])).smallest)
        return tuple(out)

    @cached_property
    def binding_report(self):
        """Stability report at the worst single-leader eigenvalue.

        Conditions only improve as leaders are added, so a pass here
        covers every nonempty leader set.
        """
        return report_for(self.gains, min(self.singleton_lambda_mins))

    def ensure_stable(self, tols: Tolerances = DEFAULT_TOLS) -> None:
        report = self.binding_report
        if not report.stable or report.margin < tols.coherence_margin:
            raise UnstableSystemError(
                f"gains do not stabilise every leader set (margin {report.margin:.3e})"
            )

    def normalized_coherence(self, leaders) -> float:
        """rho * H over the given leader set (a bare trace)."""
        if not isinstance(leaders, LeaderSet):
            leaders = LeaderSet.of(leaders)
        if not leaders.members:
            raise EmptyLeaderSetError("normalized coherence needs leaders")
        lams = sym_eigenvalues(self.grounded(leaders)).eigenvalues
        return normalized_eigenvalue_terms(self.gains, lams)

    @cached_property
    def singleton_normalized(self) -> tuple[float, ...]:
        self.ensure_stable()
        return tuple(self.normalized_coherence([v]) for v in range(self.n))

    @cached_property
    def offset(self) -> float:
        """The surrogate constant C: twice the worst single-leader trace."""
        return 2.0 * max(self.singleton_normalized)

    def coherence(self, leaders) -> float:
        return self.normalized_coherence(leaders) / trace_normalizer(self.gains)

    def set_value(self, leaders) -> float:
        """The monotone submodular surrogate f(S); maximizing it minimizes H."""
        if not isinstance(leaders, LeaderSet):
            leaders = LeaderSet.of(leaders)
        if not leaders.members:
            return 0.0
        return self.offset - self.normalized_coherence(leaders)


def set_function_value(context: SystemContext, leaders) -> float:
    return context.set_value(leaders)


@dataclass(frozen=True)
class TraceSetFunction:
    """Generalized surrogate family used by the submodularity checks.

    form="product":       C - tr((b1 Q)^-1 (b2 Q - b3 I)^-1)
                          requires b1, b2 > 0, b3 >= 0, b2 lambda_min > b3.
    form="fourth_order":  C - tr(Q^-2 (b1 Q - I) ((b1 - b2) Q - I)^-1)
                          requires b1 > b2 > 0, (b1 - b2) lambda_min > 1.

    With (b1, b2, b3) = (1, 1, 0) the product form is the order-2
    surrogate; (1, a2 a3/a1, 1) gives order 3; the fourth-order form with
    (a3 a4/a2, a1 a4^2/a2^2) gives order 4.
    """

    graph: Graph
    kappa: KappaWeights
    form: Literal["product", "fourth_order"]
    b1: float
    b2: float
    b3: float = 0.0

    def __post_init__(self) -> None:
        if self.form == "product":
            if self.b1 <= 0 or self.b2 <= 0 or self.b3 < 0:
                raise PreconditionViolatedError(
                    "product form needs b1, b2 > 0 and b3 >= 0"
                )
        elif self.form == "fourth_order":
            if not self.b1 > self.b2 > 0:
                raise PreconditionViolatedError("fourth-order form needs b1 > b2 > 0")
        else:
            raise PreconditionViolatedError(f"unknown form {self.form!r}")

    def _trace(self, leaders) -> float:
        if not isinstance(leaders, LeaderSet):
            leaders = LeaderSet.of(leaders)
        q = grounded_matrix(self.graph, self.kappa, leaders)
        lams = sym_eigenvalues(q).eigenvalues
        lam_min = float(lams[0])
        if self.form == "product":
            if self.b2 * lam_min <= self.b3:
                raise PreconditionViolatedError(
                    f"b2*lambda_min = {self.b2 * lam_min:.6g} must exceed b3 = {self.b3:.6g}"
                )
            return float(sum(1.0 / (self.b1 * lam * (self.b2 * lam - self.b3)) for lam in lams))
        if (self.b1 - self.b2) * lam_min <= 1.0:
            raise PreconditionViolatedError(
                f"(b1-b2)*lambda_min = {(self.b1 - self.b2) * lam_min:.6g} must exceed 1"
            )
        return float(
            sum(
                (self.b1 * lam - 1.0) / (lam**2 * ((self.b1 - self.b2) * lam - 1.0))
                for lam in lams
            )
        )

    @cached_property
    def offset(self) -> float:
        return 2.0 * max(self._trace([v]) for v in range(self.graph.n))

    def value(self, leaders) -> float:
        if not isinstance(leaders, LeaderSet):
            leaders = LeaderSet.of(leaders)
        if not leaders.members:
            return 0.0
        return self.offset - self._trace(leaders)


def generalized_set_function(
    context: SystemContext,
    leaders,
    form: Literal["product", "fourth_order"],
    b1: float,
    b2: float,
    b3: float = 0.0,
) -> float:
    """Evaluate the generalized surrogate on a context's graph and kappa."""
    fn = TraceSetFunction(context.graph, context.kappa, form, b1, b2, b3)
    return fn.value(leaders)
