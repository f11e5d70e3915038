"""Closed-form training-FLOPs accounting for mixture-selection methods.

Conventions: a dense model with N parameters costs 6*N FLOPs per trained
token and 2*N per scored (forward-only) token. D_t and D_e are training
and evaluation token counts, m the number of domains, T the number of
reweighting rounds, and delta the relative size of an auxiliary proxy
model where a method trains one.

Each method row carries a closed-form total and a closed-form relative
overhead versus standard training (6*D_t*N). The two columns are checked
against each other; a row whose columns disagree is flagged as
inconsistent rather than silently corrected. Some methods are also
described in circulation with slightly different accounting; those
variants are available as "prose" formulas for side-by-side comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

METHODS = ("standard", "skill_it", "aioli", "dga", "randb")

# Methods whose commonly quoted derivation differs from the table row.
PROSE_VARIANT_METHODS = ("skill_it", "dga", "randb")

CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class CostParams:
    """Inputs to the cost formulas; counts may be floats for convenience."""

    N: float  # model parameters
    D_t: float  # training tokens
    D_e: float  # evaluation tokens
    m: int  # number of domains
    T: int  # number of reweighting rounds
    delta: float = 0.1  # proxy model size relative to N

    def __post_init__(self):
        for name in ("N", "D_t", "D_e"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite")
        if self.m < 1 or self.T < 1:
            raise ValueError("m and T must be >= 1")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must be in (0, 1]")


def total_flops(method: str, params: CostParams) -> float:
    """Total training FLOPs for the method."""
    N, D_t, D_e = params.N, params.D_t, params.D_e
    m, T, d = params.m, params.T, params.delta
    if method == "standard":
        return 6.0 * D_t * N
    if method == "skill_it":
        return 6.0 * (1.0 + m * d) * D_t * N + 2.0 * (T + m) * D_e * N
    if method == "aioli":
        return 6.0 * D_t * N + 2.0 * T * m * D_e * N
    if method == "dga":
        return 6.0 * (1.0 + m * d) * D_t * N + 6.0 * T * d * D_e * N
    if method == "randb":
        return 6.0 * D_t * N + T * float(m) ** 2 * N
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def relative_overhead(method: str, params: CostParams) -> float:
    """Extra cost relative to standard training, as quoted per method."""
    D_t, D_e = params.D_t, params.D_e
    m, T, d = params.m, params.T, params.delta
    if method == "standard":
        return 0.0
    if method == "skill_it":
        return m * d + (T + m) * D_e / (3.0 * D_t)
    if method == "aioli":
        return T * m * D_e / (3.0 * D_t)
    if method == "dga":
        return m * d + T * d * D_e / D_t
    if method == "randb":
        return T * float(m) ** 2 / (6.0 * D_t)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def prose_total_flops(method: str, params: CostParams) -> float:
    """Alternative accounting for methods quoted with a second formula."""
    N, D_t, D_e = params.N, params.D_t, params.D_e
    m, T, d = params.m, params.T, params.delta
    if method == "skill_it":
        return 6.0 * (1.0 + d) * D_t * N + 2.0 * (T + m) * D_e * N
    if method == "dga":
        return 6.0 * (1.0 + d) * D_t * N + 6.0 * T * (D_e + m) * N
    if method == "randb":
        return 6.0 * D_t * N + float(m) ** 2 * N
    raise ValueError(f"no prose variant for {method!r}; have {PROSE_VARIANT_METHODS}")


def columns_consistent(method: str, params: CostParams,
                       rtol: float = CONSISTENCY_RTOL) -> bool:
    """Do the total and overhead columns describe the same extra cost?"""
    base = total_flops("standard", params)
    implied = (total_flops(method, params) - base) / base
    quoted = relative_overhead(method, params)
    return abs(implied - quoted) <= rtol * max(1.0, abs(quoted))


@dataclass(frozen=True)
class MethodCost:
    method: str
    total_flops: float
    relative_overhead: float
    consistent: bool
    prose_total_flops: float | None = None


@dataclass(frozen=True)
class CostReport:
    params: CostParams
    rows: tuple[MethodCost, ...]
    # Gram-based rebalancing beats proxy-gradient alignment on overhead
    # when the domain count stays below sqrt(D_e).
    randb_cheaper_than_dga: bool

    def row(self, method: str) -> MethodCost:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)


def compare(params: CostParams, include_prose: bool = False) -> CostReport:
    """Evaluate every method's cost columns at the given parameters."""
    rows = []
    for method in METHODS:
        prose = None
        if include_prose and method in PROSE_VARIANT_METHODS:
            prose = prose_total_flops(method, params)
        rows.append(
            MethodCost(
                method=method,
                total_flops=total_flops(method, params),
                relative_overhead=relative_overhead(method, params),
                consistent=columns_consistent(method, params),
                prose_total_flops=prose,
            )
        )
    return CostReport(
        params=params,
        rows=tuple(rows),
        randb_cheaper_than_dga=params.m < math.sqrt(params.D_e),
    )
