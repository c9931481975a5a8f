"""Leader selection: incremental greedy, exhaustive search, and bound checks.

The greedy maximizes the surrogate f(S) = C - rho * H(S).  Because f is
nondecreasing and submodular, the greedy value is within a factor
(1 - 1/e) of optimal; equivalently
H(S_greedy) <= C/(rho e) + (1 - 1/e) H(S_opt).

Iteration 1 evaluates every singleton by direct factorization.  Later
iterations keep Q_S^-1 (and, for orders 3-4, the shifted inverse
(c Q_S - I)^-1) up to date with rank-one updates, so each candidate's
marginal costs O(n^2) and the whole run O(k n^3).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coherence import (
    SystemContext,
    normalized_eigenvalue_terms,
    normalized_from_inverses,
    shift_coefficient,
    trace_normalizer,
)
from .errors import CombinatorialCapError, UnstableGainsError
from .linalg import DEFAULT_TOLS, Tolerances, sherman_morrison_update, spd_inverse, sym_eigenvalues


@dataclass(frozen=True)
class SelectionResult:
    m: int
    chosen: tuple[int, ...]
    f_values: tuple[float, ...]
    h_values: tuple[float, ...]
    evaluations: int
    method: str

    def to_dict(self) -> dict:
        return {
            "order": self.m,
            "chosen": list(self.chosen),
            "f_values": list(self.f_values),
            "h_values": list(self.h_values),
            "evaluations": self.evaluations,
            "method": self.method,
        }


@dataclass(frozen=True)
class BoundCertificate:
    f_star: float
    f_greedy: float
    ratio: float
    bound: float
    holds: bool
    coherence_greedy: float
    coherence_bound: float

    def to_dict(self) -> dict:
        return {
            "f_star": self.f_star,
            "f_greedy": self.f_greedy,
            "ratio": self.ratio,
            "bound": self.bound,
            "holds": self.holds,
            "coherence_greedy": self.coherence_greedy,
            "coherence_bound": self.coherence_bound,
        }


def _require_stable_gains(context: SystemContext, tols: Tolerances) -> None:
    report = context.binding_report
    if not report.stable or report.margin < tols.coherence_margin:
        raise UnstableGainsError(
            f"gains are not stable for every singleton leader (margin {report.margin:.3e})"
        )


def _tie_eps(scale: float, tols: Tolerances) -> float:
    """Improvement below this threshold counts as a tie (goes to smaller ids).

    Scaled so that mathematically equal candidates, which differ by a few
    ulps between factorizations, never flip the deterministic pick.
    """
    return tols.greedy_improvement * max(1.0, abs(scale))


def greedy_select(
    context: SystemContext,
    k: int,
    incremental: bool = True,
    tols: Tolerances = DEFAULT_TOLS,
) -> SelectionResult:
    """Greedy leader choice; ties go to the smallest node id.

    Stops early once no candidate improves f by more than the configured
    threshold.  ``incremental=False`` recomputes every candidate from
    scratch and exists as the reference oracle for the rank-one path.
    """
    if k < 1:
        raise ValueError(f"budget k must be >= 1, got {k}")
    _require_stable_gains(context, tols)
    n = context.n
    gains = context.gains
    rho = trace_normalizer(gains)
    c_shift = shift_coefficient(gains)
    kappa = context.kappa.values
    offset = context.offset

    evaluations = n
    singleton = context.singleton_normalized
    best_v = 0
    for v in range(1, n):
        if singleton[v] < singleton[best_v] - _tie_eps(singleton[best_v], tols):
            best_v = v
    chosen = [best_v]
    norm_value = singleton[best_v]
    f_values = [float(offset - norm_value)]
    h_values = [float(norm_value / rho)]

    inv = None
    shifted_inv = None
    if incremental and k > 1:
        q = context.grounded(chosen)
        inv = spd_inverse(q, tols)
        if c_shift is not None:
            shifted_inv = spd_inverse(c_shift * q - np.eye(n), tols)

    members = set(chosen)
    while len(chosen) < min(k, n):
        best = None  # (f, v, trial_inv, trial_shifted)
        for v in range(n):
            if v in members:
                continue
            if incremental:
                trial_inv = sherman_morrison_update(inv, v, kappa[v], tols)
                trial_shifted = (
                    sherman_morrison_update(shifted_inv, v, c_shift * kappa[v], tols)
                    if c_shift is not None
                    else None
                )
                norm = normalized_from_inverses(gains, trial_inv, trial_shifted)
            else:
                trial_inv = trial_shifted = None
                norm = context.normalized_coherence(members | {v})
            evaluations += 1
            f_v = offset - norm
            if best is None or f_v > best[0] + _tie_eps(best[0], tols):
                best = (f_v, v, trial_inv, trial_shifted, norm)
        if best is None or best[0] - f_values[-1] <= tols.greedy_improvement:
            break
        f_v, v, trial_inv, trial_shifted, norm = best
        members.add(v)
        chosen.append(v)
        f_values.append(float(f_v))
        h_values.append(float(norm / rho))
        if incremental:
            inv = trial_inv
            shifted_inv = trial_shifted
    return SelectionResult(
        m=gains.m,
        chosen=tuple(chosen),
        f_values=tuple(f_values),
        h_values=tuple(h_values),
        evaluations=evaluations,
        method="greedy",
    )


def exhaustive_select(
    context: SystemContext,
    k: int,
    tols: Tolerances = DEFAULT_TOLS,
) -> SelectionResult:
    """Exact minimizer of coherence over nonempty leader sets of size <= k.

    Subsets are enumerated smallest size first, lexicographically within a
    size, and only strict improvements replace the incumbent, which fixes
    the tie-break.  Refuses when the subset count exceeds the cap.
    """
    if k < 1:
        raise ValueError(f"budget k must be >= 1, got {k}")
    n = context.n
    k_eff = min(k, n)
    total = sum(math.comb(n, j) for j in range(1, k_eff + 1))
    if total > tols.subset_cap:
        raise CombinatorialCapError(
            f"{total} subsets exceed the cap of {tols.subset_cap}"
        )
    _require_stable_gains(context, tols)
    rho = trace_normalizer(context.gains)
    best_norm = None
    best_subset: tuple[int, ...] | None = None
    evaluations = 0
    for size in range(1, k_eff + 1):
        for subset in itertools.combinations(range(n), size):
            lams = sym_eigenvalues(context.grounded(subset)).eigenvalues
            norm = normalized_eigenvalue_terms(context.gains, lams)
            evaluations += 1
            if best_norm is None or norm < best_norm - _tie_eps(best_norm, tols):
                best_norm = norm
                best_subset = subset
    assert best_subset is not None and best_norm is not None
    return SelectionResult(
        m=context.m,
        chosen=best_subset,
        f_values=(float(context.offset - best_norm),),
        h_values=(float(best_norm / rho),),
        evaluations=evaluations,
        method="exhaustive",
    )


def certify_bound(
    context: SystemContext,
    k: int,
    tols: Tolerances = DEFAULT_TOLS,
) -> BoundCertificate:
    """Compare greedy against the exact optimum and check both guarantees."""
    greedy = greedy_select(context, k, tols=tols)
    optimal = exhaustive_select(context, k, tols=tols)
    f_greedy = float(greedy.f_values[-1])
    f_star = float(optimal.f_values[-1])
    ratio = (f_star - f_greedy) / f_star if f_star > 0 else 0.0
    bound = 1.0 / math.e
    rho = trace_normalizer(context.gains)
    coherence_bound = float(
        context.offset / (rho * math.e) + (1.0 - 1.0 / math.e) * optimal.h_values[-1]
    )
    coherence_greedy = float(greedy.h_values[-1])
    holds = bool(ratio <= bound + 1e-12 and coherence_greedy <= coherence_bound * (1 + 1e-12))
    return BoundCertificate(
        f_star=f_star,
        f_greedy=f_greedy,
        ratio=ratio,
        bound=bound,
        holds=holds,
        coherence_greedy=coherence_greedy,
        coherence_bound=coherence_bound,
    )


@dataclass(frozen=True)
class Violation:
    kind: str
    sets: tuple[tuple[int, ...], ...]
    gap: float


def _mask_bits(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def check_monotone_submodular(
    context: SystemContext | None = None,
    mode: str = "exhaustive",
    samples: int = 200,
    seed: int = 0,
    value_fn=None,
    n: int | None = None,
    slack: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> list[Violation]:
    """Check the surrogate's structure numerically; returns violations found.

    Three families of inequalities, each allowed the configured negative
    slack before counting as a violation:

    * submodularity   f(A) + f(B) >= f(A | B) + f(A & B)
    * monotonicity    A <= B implies f(A) <= f(B)
    * marginal decay  the gain of adding a fixed node never grows with
      the base set

    Exhaustive mode enumerates all subset pairs (n <= 8 required);
    sampled mode draws ``samples`` random instances per family.
    """
    if value_fn is None:
        if context is None:
            raise ValueError("need a context or an explicit value function")
        value_fn = context.set_value
    if n is None:
        if context is None:
            raise ValueError("need a context or an explicit node count")
        n = context.n
    if slack is None:
        slack = tols.submodular_slack

    cache: dict[int, float] = {}

    def value(mask: int) -> float:
        got = cache.get(mask)
        if got is None:
            got = float(value_fn(_mask_bits(mask, n)))
            cache[mask] = got
        return got

    violations: list[Violation] = []

    def record(kind: str, gap: float, *masks: int) -> None:
        violations.append(
            Violation(kind=kind, sets=tuple(_mask_bits(m, n) for m in masks), gap=gap)
        )

    def check_pair(a: int, b: int) -> None:
        gap = value(a) + value(b) - value(a | b) - value(a & b)
        if gap < -slack:
            record("submodularity", gap, a, b)
        if a & b == a and a != b:  # a subset of b
            mono = value(b) - value(a)
            if mono < -slack:
                record("monotonicity", mono, a, b)

    def check_derived(node: int, s1: int, s2: int) -> None:
        bit = 1 << node
        gain1 = value(s1 | bit) - value(s1)
        gain2 = value(s2 | bit) - value(s2)
        if gain1 - gain2 < -slack:
            record("derived_decrease", gain1 - gain2, bit, s1, s2)

    if mode == "exhaustive":
        if n > 8:
            raise CombinatorialCapError(f"exhaustive pair check limited to n <= 8, got {n}")
        full = 1 << n
        for a in range(full):
            for b in range(a, full):
                check_pair(a, b)
        for node in range(n):
            rest = [i for i in range(n) if i != node]
            for picks2 in range(1 << len(rest)):
                s2 = 0
                for j, i in enumerate(rest):
                    if picks2 >> j & 1:
                        s2 |= 1 << i
                sub = picks2
                while True:  # all submasks of picks2, including 0
                    s1 = 0
                    for j, i in enumerate(rest):
                        if sub >> j & 1:
                            s1 |= 1 << i
                    check_derived(node, s1, s2)
                    if sub == 0:
                        break
                    sub = (sub - 1) & picks2
    elif mode == "sampled":
        rng = np.random.Generator(np.random.PCG64(seed))
        full = 1 << n
        for _ in range(samples):
            a = int(rng.integers(0, full))
            b = int(rng.integers(0, full))
            check_pair(a, b)
            check_pair(a, a | b)
            node = int(rng.integers(0, n))
            bit = 1 << node
            s2 = int(rng.integers(0, full)) & ~bit
            s1 = int(rng.integers(0, full)) & s2
            check_derived(node, s1, s2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return violations
