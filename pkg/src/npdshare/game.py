"""Stage game for repeated security-information sharing.

N firms simultaneously decide whether to disclose (1) or conceal (0) their
security information.  A firm that discloses when x firms disclose in total
earns ``disclose_payoff(x) = gain(x - 1) - loss`` (it benefits from the other
x - 1 disclosures and pays the leakage loss); a firm that conceals while x
firms disclose earns ``conceal_payoff(x) = gain(x)``.  Two gain families are
supported: linear ``gain(z) = z * G`` and concave ``gain(z) = f(z) * G`` with
a tabulated nondecreasing concave ``f`` satisfying ``f(0) = 0``.

The module also classifies the stage game: one-shot dominance of concealing
(A1), efficiency of full disclosure over the all-conceal minmax point (A2),
strictly increasing social welfare in the number of disclosers (A2'), the
minmax profile and value, and the feasible payoff polytope with optional
clipping to individually rational payoffs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import CapacityError, DomainError

# Strict inequalities are classified with this absolute margin; boundary
# (tied) cases count as failures.
STRICT_TOL = 1e-12

# feasible_hull enumerates action profiles; beyond this the vertex lists and
# the qhull computations behind IR clipping stop being practical.
HULL_MAX_FIRMS = 8


@dataclass(frozen=True)
class LinearGain:
    """gain(z) = z * G for a marginal per-disclosure benefit G > 0."""

    G: float

    def __post_init__(self):
        if not np.isfinite(self.G) or self.G <= 0:
            raise DomainError(f"linear gain requires G > 0, got G={self.G}")

    kind = "linear"

    def gain(self, z: int) -> float:
        return z * self.G

    def max_index(self) -> int | None:
        return None


@dataclass(frozen=True)
class ConcaveGain:
    """gain(z) = f(z) * G for a tabulated f over z = 0 .. len(f) - 1.

    f must start at 0 (no disclosures, no benefit), be nondecreasing, and
    have nonincreasing increments.  Violations are reported with the
    offending indices.
    """

    G: float
    f: tuple[float, ...]

    def __post_init__(self):
        if not np.isfinite(self.G) or self.G <= 0:
            raise DomainError(f"concave gain requires G > 0, got G={self.G}")
        f = tuple(float(v) for v in self.f)
        object.__setattr__(self, "f", f)
        if len(f) < 2:
            raise DomainError("concave gain table needs at least two entries")
        if not all(np.isfinite(v) for v in f):
            raise DomainError("concave gain table contains non-finite entries")
        if f[0] != 0.0:
            raise DomainError(
                f"concave gain table must have f(0) = 0 (zero disclosures yield "
                f"zero benefit), got f(0)={f[0]}"
            )
        bad_monotone = [z for z in range(1, len(f)) if f[z] < f[z - 1]]
        if bad_monotone:
            raise DomainError(f"concave gain table decreases at indices {bad_monotone}")
        bad_concave = [
            z
            for z in range(2, len(f))
            if (f[z] - f[z - 1]) > (f[z - 1] - f[z - 2]) + STRICT_TOL
        ]
        if bad_concave:
            raise DomainError(
                f"concave gain table has increasing increments at indices {bad_concave}"
            )

    kind = "concave"

    def gain(self, z: int) -> float:
        if z >= len(self.f):
            raise DomainError(
                f"concave gain table has {len(self.f)} entries; index {z} requested"
            )
        return self.f[z] * self.G

    def max_index(self) -> int | None:
        return len(self.f) - 1


GainFamily = LinearGain | ConcaveGain


@dataclass(frozen=True)
class GameSpec:
    """Parameters of one repeated information-sharing game.

    ``alpha`` and ``epsilon`` are the firms' monitoring accuracies: a
    disclosure is mis-read as concealment with probability epsilon in
    (0, 1/2), a concealment is read as concealment with probability alpha in
    (1/2, 1).  ``monitor_alpha`` / ``monitor_epsilon`` optionally give the
    public monitor its own accuracy pair; by default it matches the firms'.
    """

    n_firms: int
    gain: GainFamily
    loss: float
    alpha: float
    epsilon: float
    delta: float
    monitor_alpha: float | None = None
    monitor_epsilon: float | None = None

    def __post_init__(self):
        if not isinstance(self.n_firms, (int, np.integer)) or self.n_firms < 2:
            raise DomainError(f"n_firms must be an integer >= 2, got {self.n_firms}")
        if not np.isfinite(self.loss) or self.loss <= 0:
            raise DomainError(f"loss must be > 0, got {self.loss}")
        _validate_accuracy("alpha", self.alpha, "epsilon", self.epsilon)
        if self.monitor_alpha is not None or self.monitor_epsilon is not None:
            ma = self.alpha if self.monitor_alpha is None else self.monitor_alpha
            me = self.epsilon if self.monitor_epsilon is None else self.monitor_epsilon
            _validate_accuracy("monitor_alpha", ma, "monitor_epsilon", me)
        if not np.isfinite(self.delta) or not (0 < self.delta < 1):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        mi = self.gain.max_index()
        if mi is not None and mi < self.n_firms - 1:
            raise DomainError(
                f"concave gain table covers z <= {mi}; need z up to n_firms - 1 = "
                f"{self.n_firms - 1}"
            )

    # -- effective monitor accuracies -------------------------------------
    @property
    def m_alpha(self) -> float:
        return self.alpha if self.monitor_alpha is None else self.monitor_alpha

    @property
    def m_epsilon(self) -> float:
        return self.epsilon if self.monitor_epsilon is None else self.monitor_epsilon

    # -- role payoffs ------------------------------------------------------
    def disclose_payoff(self, x: int) -> float:
        """Payoff to a disclosing firm when x firms disclose in total, 1 <= x <= N."""
        if not 1 <= x <= self.n_firms:
            raise DomainError(
                f"disclose_payoff domain is 1 <= x <= {self.n_firms}, got x={x}"
            )
        return self.gain.gain(x - 1) - self.loss

    def conceal_payoff(self, x: int) -> float:
        """Payoff to a concealing firm when x other firms disclose, 0 <= x <= N-1."""
        if not 0 <= x <= self.n_firms - 1:
            raise DomainError(
                f"conceal_payoff domain is 0 <= x <= {self.n_firms - 1}, got x={x}"
            )
        return self.gain.gain(x)

    def max_abs_payoff(self) -> float:
        """max |payoff| over all roles and discloser counts."""
        vals = [abs(self.conceal_payoff(x)) for x in range(self.n_firms)]
        vals += [abs(self.disclose_payoff(x)) for x in range(1, self.n_firms + 1)]
        return max(vals)


def _validate_accuracy(an: str, a: float, en: str, e: float) -> None:
    if not np.isfinite(e) or not (0 < e < 0.5):
        raise DomainError(f"{en} must lie in (0, 1/2), got {e}")
    if not np.isfinite(a) or not (0.5 < a < 1):
        raise DomainError(f"{an} must lie in (1/2, 1), got {a}")


def validate_profile(spec: GameSpec, profile: Iterable[int]) -> np.ndarray:
    r = np.asarray(list(profile), dtype=np.int64)
    if r.shape != (spec.n_firms,):
        raise DomainError(
            f"action profile must have length {spec.n_firms}, got shape {r.shape}"
        )
    if not np.all((r == 0) | (r == 1)):
        raise DomainError(f"action profile entries must be 0 or 1, got {r.tolist()}")
    return r


def all_profiles(n_firms: int):
    """All pure action profiles as tuples (r_1, ..., r_N)."""
    return itertools.product((0, 1), repeat=n_firms)


def profile_payoff(spec: GameSpec, profile: Iterable[int]) -> np.ndarray:
    """Stage payoff vector for a pure action profile."""
    r = validate_profile(spec, profile)
    x = int(r.sum())
    out = np.empty(spec.n_firms)
    for i in range(spec.n_firms):
        out[i] = spec.disclose_payoff(x) if r[i] == 1 else spec.conceal_payoff(x)
    return out


def social_welfare(spec: GameSpec, profile: Iterable[int]) -> float:
    return float(profile_payoff(spec, profile).sum())


# ---------------------------------------------------------------------------
# one-shot classification


@dataclass(frozen=True)
class AssumptionReport:
    a1_holds: bool
    a2_holds: bool
    a2prime_holds: bool
    witnesses: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"a1_concealing_dominant: {str(self.a1_holds).lower()}",
            f"a2_full_disclosure_efficient: {str(self.a2_holds).lower()}",
            f"a2prime_welfare_increasing: {str(self.a2prime_holds).lower()}",
        ]
        for key, vals in sorted(self.witnesses.items()):
            lines.append(f"{key}:")
            for v in vals:
                lines.append(f"  - {v}")
        return "\n".join(lines)


def check_assumptions(spec: GameSpec) -> AssumptionReport:
    """Classify the stage game; strict inequalities use STRICT_TOL margins.

    A1: concealing is a dominant one-shot action, D(x-1) > C(x) for all x.
    A2: full disclosure beats the all-conceal minmax point, C(N) > 0.
    A2': total welfare strictly increases in the number of disclosers
    (implies A2 by telescoping).  Ties count as failures and are reported.
    """
    n = spec.n_firms
    witnesses: dict[str, list] = {}

    a1_bad = []
    for x in range(1, n + 1):
        if not spec.conceal_payoff(x - 1) - spec.disclose_payoff(x) > STRICT_TOL:
            a1_bad.append(x)
    if a1_bad:
        witnesses["a1_failing_x"] = a1_bad

    a2 = spec.disclose_payoff(n) > STRICT_TOL
    if not a2:
        witnesses["a2_full_disclosure_payoff"] = [spec.disclose_payoff(n)]

    welfare = [_welfare_at_count(spec, x) for x in range(n + 1)]
    a2p_bad = [x for x in range(1, n + 1) if not welfare[x] - welfare[x - 1] > STRICT_TOL]
    if a2p_bad:
        witnesses["a2prime_failing_x"] = a2p_bad

    return AssumptionReport(
        a1_holds=not a1_bad,
        a2_holds=bool(a2),
        a2prime_holds=not a2p_bad,
        witnesses=witnesses,
    )


def _welfare_at_count(spec: GameSpec, x: int) -> float:
    n = spec.n_firms
    total = 0.0
    if x > 0:
        total += x * spec.disclose_payoff(x)
    if x < n:
        total += (n - x) * spec.conceal_payoff(x)
    return total


@dataclass(frozen=True)
class MinmaxResult:
    firm: int
    profile: tuple[int, ...]
    value: float


def minmax(spec: GameSpec, firm: int) -> MinmaxResult:
    """Minmax the given firm: everyone else conceals, the firm best-responds.

    Best response value is max(D(0), C(1)); under A1 this is D(0) = 0 and the
    minmax profile is all-conceal.
    """
    if not 0 <= firm < spec.n_firms:
        raise DomainError(f"firm index must lie in [0, {spec.n_firms}), got {firm}")
    value = max(spec.conceal_payoff(0), spec.disclose_payoff(1))
    return MinmaxResult(firm=firm, profile=(0,) * spec.n_firms, value=value)


# ---------------------------------------------------------------------------
# feasible payoff polytope


@dataclass(frozen=True)
class PayoffPolytope:
    """Convex hull of pure-profile payoffs, optionally clipped to the
    individually-rational orthant {v : v_i >= 0}.

    For two firms the vertices are an exact CCW polygon; in higher dimension
    they are an unordered vertex list.  ``degenerate`` flags a hull with
    empty interior (zero area/volume).
    """

    vertices: tuple[tuple[float, ...], ...]
    n_firms: int
    clipped_to_ir: bool
    degenerate: bool

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def contains(self, point, tol: float = 1e-9) -> bool:
        from .geometry import point_in_hull

        return point_in_hull(np.asarray(point, dtype=float), self.as_array(), tol=tol)


def feasible_hull(spec: GameSpec, clip_to_ir: bool = False) -> PayoffPolytope:
    if spec.n_firms > HULL_MAX_FIRMS:
        raise CapacityError(
            f"feasible_hull enumerates 2^N profiles and is capped at "
            f"N <= {HULL_MAX_FIRMS}; got N = {spec.n_firms}"
        )
    if spec.n_firms == 2:
        return _hull_2d(spec, clip_to_ir)
    return _hull_nd(spec, clip_to_ir)


def _payoff_points(spec: GameSpec) -> np.ndarray:
    pts = [profile_payoff(spec, r) for r in all_profiles(spec.n_firms)]
    return np.unique(np.asarray(pts), axis=0)


def _hull_2d(spec: GameSpec, clip_to_ir: bool) -> PayoffPolytope:
    from .geometry import clip_polygon_halfplane_exact, convex_hull_2d_exact

    # Fraction(float) is exact, so the chain and the clip are exact rational
    # arithmetic on whatever binary rationals the payoffs happen to be.
    pts = [
        (Fraction(float(p[0])), Fraction(float(p[1])))
        for p in (profile_payoff(spec, r) for r in all_profiles(2))
    ]
    poly = convex_hull_2d_exact(pts)
    if clip_to_ir:
        # v_1 >= 0 then v_2 >= 0
        poly = clip_polygon_halfplane_exact(poly, (Fraction(1), Fraction(0)), Fraction(0))
        poly = clip_polygon_halfplane_exact(poly, (Fraction(0), Fraction(1)), Fraction(0))
    verts = tuple((float(a), float(b)) for a, b in poly)
    degenerate = len(verts) < 3
    return PayoffPolytope(
        vertices=verts, n_firms=2, clipped_to_ir=clip_to_ir, degenerate=degenerate
    )


def _hull_nd(spec: GameSpec, clip_to_ir: bool) -> PayoffPolytope:
    from .geometry import hull_vertices_nd, clip_hull_to_orthant

    pts = _payoff_points(spec)
    verts = hull_vertices_nd(pts)
    degenerate = np.linalg.matrix_rank(verts - verts[0], tol=1e-9) < spec.n_firms
    if clip_to_ir:
        verts, degenerate = clip_hull_to_orthant(verts)
    return PayoffPolytope(
        vertices=tuple(tuple(float(c) for c in v) for v in verts),
        n_firms=spec.n_firms,
        clipped_to_ir=clip_to_ir,
        degenerate=bool(degenerate),
    )


def extreme_profiles(spec: GameSpec) -> list[tuple[int, ...]]:
    """Pure profiles whose payoff vector is a vertex of the feasible hull.

    Exploits symmetry: whether the payoff of a profile with x disclosers is
    extreme depends only on x, so one membership test per discloser count
    suffices.
    """
    from .geometry import point_in_hull

    n = spec.n_firms
    if n > HULL_MAX_FIRMS:
        raise CapacityError(f"extreme_profiles capped at N <= {HULL_MAX_FIRMS}")
    reps = []
    for x in range(n + 1):
        reps.append(tuple([1] * x + [0] * (n - x)))
    rep_payoffs = [profile_payoff(spec, r) for r in reps]
    all_pts = np.asarray(
        [profile_payoff(spec, r) for r in all_profiles(n)], dtype=float
    )
    extreme_counts = []
    for x, p in enumerate(rep_payoffs):
        others = all_pts[np.any(np.abs(all_pts - p) > 1e-12, axis=1)]
        if others.size == 0 or not point_in_hull(p, others, tol=1e-9):
            extreme_counts.append(x)
    out = []
    for r in all_profiles(n):
        if sum(r) in extreme_counts:
            out.append(r)
    return out
