"""Half-space decomposition of equilibrium continuation payoffs.

A payoff vector v is decomposed on direction lambda by a current action
profile r and a normalized continuation map gamma_bar over public signals:

    v_i = u_i(r) + E[gamma_bar_i(b) | r]            (consistency)
    v_i >= u_i(dev_i) + E[gamma_bar_i(b) | dev_i]    (incentives)
    lambda . gamma_bar(b) <= 0 for every b           (half-space)

Orthogonal enforcement pins lambda . gamma_bar(b) = 0 pointwise, in which
case the supported level is exactly lambda . u(r).  The best supported level
over action profiles, k*(lambda), bounds the equilibrium payoff set: the
attainable set is approximated by intersecting the half-spaces
{v : lambda . v <= k*(lambda)} over many directions.

For profitable deviations the incentive constraints are imposed as
equalities (the construction that yields the two-firm closed form); for
unprofitable deviations equality would punish compliance, so those
constraints are verified as slack inequalities instead, with an LP
feasibility fallback.  Underdetermined systems are resolved by pinning
gamma_bar at the all-ones signal to zero and taking the minimum-norm
solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import CapacityError, DomainError
from .game import GameSpec, STRICT_TOL, all_profiles, profile_payoff, validate_profile
from .geometry import ensure_ccw, halfplane_intersection_2d
from .monitoring import public_profile_distribution_raw

SOLVE_TOL = 1e-9
K_STAR_MAX_FIRMS = 8


def kappa(alpha: float, epsilon: float) -> float:
    """Likelihood-contrast ratio (1-e)/e - (1-a)/a; positive on the domain.

    Satisfies the identity epsilon * alpha * kappa = alpha(1-e) - e(1-a)
    = alpha - epsilon, so punishment magnitudes L/(e a kappa) shrink as the
    monitor sharpens (alpha up, epsilon down).
    """
    if not (0 < epsilon < 0.5):
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not (0.5 < alpha < 1):
        raise DomainError(f"alpha must lie in (1/2, 1), got {alpha}")
    return (1 - epsilon) / epsilon - (1 - alpha) / alpha


def table2_gamma_bar(loss: float, alpha: float, epsilon: float, direction) -> np.ndarray:
    """Closed-form continuation map for two firms at full disclosure.

    Rows are signal indices (b_1 + 2 b_2), columns are firms.  Pinned at
    gamma_bar(1,1) = 0; valid for any direction with both components
    nonzero.  A firm is punished only on signals where it alone looks
    deviant, so the two firms are never punished simultaneously.
    """
    lam = np.asarray(direction, dtype=float)
    if lam.shape != (2,):
        raise DomainError("closed form is for two firms; direction must have length 2")
    if lam[0] == 0.0 or lam[1] == 0.0:
        raise DomainError(
            "closed form requires both direction components nonzero; "
            "use k_star / solve_enforceability for coordinate directions"
        )
    if loss <= 0:
        raise DomainError(f"loss must be > 0, got {loss}")
    scale = loss / (epsilon * alpha * kappa(alpha, epsilon))
    rho = (1 - epsilon) / epsilon
    g = np.zeros((4, 2))
    g[0, 0] = scale * rho * (lam[1] / lam[0] - 1.0)  # b = (0,0)
    g[0, 1] = scale * rho * (lam[0] / lam[1] - 1.0)
    g[1, 0] = scale  # b = (1,0): firm 2 looks deviant
    g[1, 1] = -(lam[0] / lam[1]) * scale
    g[2, 0] = -(lam[1] / lam[0]) * scale  # b = (0,1): firm 1 looks deviant
    g[2, 1] = scale
    return g


# ---------------------------------------------------------------------------
# general solver


@dataclass(frozen=True)
class EnforceabilityResult:
    feasible: bool
    gamma_bar: np.ndarray | None
    k_star: float | None
    orthogonal: bool
    mode: str  # "equality" | "lp_feasibility" | "lp_general"
    action: tuple[int, ...]
    direction: tuple[float, ...]
    target: tuple[float, ...] | None
    binding: tuple[bool, ...] | None
    residual: float | None
    failure_reason: str | None = None


def _profile_context(spec: GameSpec, profile):
    r = validate_profile(spec, profile)
    n = spec.n_firms
    s = 2**n
    pi_eq = public_profile_distribution_raw(r, spec.m_alpha, spec.m_epsilon)
    u_r = profile_payoff(spec, r)
    pi_dev = np.empty((n, s))
    u_dev = np.empty(n)
    for i in range(n):
        d = r.copy()
        d[i] = 1 - d[i]
        pi_dev[i] = public_profile_distribution_raw(d, spec.m_alpha, spec.m_epsilon)
        u_dev[i] = profile_payoff(spec, d)[i]
    return r, n, s, pi_eq, u_r, pi_dev, u_dev


def solve_enforceability(
    spec: GameSpec,
    profile,
    direction,
    orthogonal: bool = True,
    target=None,
    pin_signal: int | None = None,
) -> EnforceabilityResult:
    """Solve for a continuation map enforcing ``profile`` on ``direction``.

    Orthogonal mode imposes lambda . gamma_bar(b) = 0 pointwise and reaches
    the level k* = lambda . u(r) when feasible; ``target`` selects which
    payoff on that hyperplane the consistency equalities hit (default
    u(r)).  General mode relaxes to lambda . gamma_bar(b) <= 0 and
    maximizes the supported level by LP.
    """
    r, n, s, pi_eq, u_r, pi_dev, u_dev = _profile_context(spec, profile)
    lam = np.asarray(direction, dtype=float)
    if lam.shape != (n,):
        raise DomainError(f"direction must have length {n}")
    if not np.any(lam != 0):
        raise DomainError("direction must be nonzero")
    gains = u_dev - u_r
    profitable = gains > STRICT_TOL
    if pin_signal is None:
        pin_signal = s - 1
    if not 0 <= pin_signal < s:
        raise DomainError(f"pin signal index {pin_signal} out of range")

    if orthogonal:
        if target is None:
            v = u_r.copy()
        else:
            v = np.asarray(target, dtype=float)
            if v.shape != (n,):
                raise DomainError(f"target payoff must have length {n}")
        if abs(float(lam @ v) - float(lam @ u_r)) > SOLVE_TOL * max(
            1.0, float(np.abs(lam @ u_r))
        ):
            return _failure(
                r, lam, v, orthogonal,
                "target is off the supporting hyperplane lambda.v = lambda.u(r)",
            )
        res = _solve_equality(n, s, pi_eq, pi_dev, gains, u_r, u_dev, lam, v,
                              pin_signal, profitable)
        if res is not None:
            gamma, residual, binding = res
            return EnforceabilityResult(
                feasible=True, gamma_bar=gamma, k_star=float(lam @ v),
                orthogonal=True, mode="equality", action=tuple(int(a) for a in r),
                direction=tuple(lam), target=tuple(v), binding=binding,
                residual=residual,
            )
        gamma = _solve_orthogonal_lp(n, s, pi_eq, pi_dev, gains, u_r, lam, v)
        if gamma is not None:
            binding = _binding_flags(n, pi_eq, pi_dev, gains, gamma)
            return EnforceabilityResult(
                feasible=True, gamma_bar=gamma, k_star=float(lam @ v),
                orthogonal=True, mode="lp_feasibility",
                action=tuple(int(a) for a in r), direction=tuple(lam),
                target=tuple(v), binding=binding, residual=None,
            )
        return _failure(r, lam, v, orthogonal, "orthogonal enforcement infeasible")

    gamma, value = _solve_general_lp(n, s, pi_eq, pi_dev, gains, u_r, lam)
    if gamma is None:
        return _failure(r, lam, None, orthogonal, "no enforceable continuation map")
    binding = _binding_flags(n, pi_eq, pi_dev, gains, gamma)
    return EnforceabilityResult(
        feasible=True, gamma_bar=gamma, k_star=float(value), orthogonal=False,
        mode="lp_general", action=tuple(int(a) for a in r), direction=tuple(lam),
        target=None, binding=binding, residual=None,
    )


def _failure(r, lam, v, orthogonal, reason) -> EnforceabilityResult:
    return EnforceabilityResult(
        feasible=False, gamma_bar=None, k_star=None, orthogonal=orthogonal,
        mode="equality" if orthogonal else "lp_general",
        action=tuple(int(a) for a in r), direction=tuple(np.asarray(lam, dtype=float)),
        target=None if v is None else tuple(np.asarray(v, dtype=float)),
        binding=None, residual=None, failure_reason=reason,
    )


def _solve_equality(n, s, pi_eq, pi_dev, gains, u_r, u_dev, lam, v, pin, profitable):
    """Pin + minimum-norm solve of the orthogonal equality system.

    Returns (gamma_bar, residual, binding) or None if the system is
    inconsistent or a slack incentive constraint fails at the solution.
    """
    nv = n * s
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for b in range(s):
        row = np.zeros(nv)
        row[np.arange(n) * s + b] = lam
        rows.append(row)
        rhs.append(0.0)
    for i in range(n):
        row = np.zeros(nv)
        row[i * s : (i + 1) * s] = pi_eq
        rows.append(row)
        rhs.append(v[i] - u_r[i])
    for i in range(n):
        if profitable[i]:
            row = np.zeros(nv)
            row[i * s : (i + 1) * s] = pi_dev[i]
            rows.append(row)
            rhs.append(v[i] - u_dev[i])
    for i in range(n):
        row = np.zeros(nv)
        row[i * s + pin] = 1.0
        rows.append(row)
        rhs.append(0.0)
    a = np.asarray(rows)
    b_vec = np.asarray(rhs)
    x, *_ = np.linalg.lstsq(a, b_vec, rcond=None)
    residual = float(np.max(np.abs(a @ x - b_vec)))
    if residual > SOLVE_TOL * max(1.0, float(np.max(np.abs(b_vec)))):
        return None
    gamma = x.reshape(n, s).T  # (signal, firm)
    slacks = _ic_slacks(n, pi_eq, pi_dev, gains, gamma)
    if np.min(slacks) < -SOLVE_TOL:
        return None
    binding = tuple(bool(abs(sl) <= SOLVE_TOL) for sl in slacks)
    return gamma, residual, binding


def _ic_slacks(n, pi_eq, pi_dev, gains, gamma):
    return np.array(
        [float((pi_eq - pi_dev[i]) @ gamma[:, i]) - gains[i] for i in range(n)]
    )


def _binding_flags(n, pi_eq, pi_dev, gains, gamma):
    return tuple(bool(abs(sl) <= SOLVE_TOL) for sl in _ic_slacks(n, pi_eq, pi_dev, gains, gamma))


def _solve_orthogonal_lp(n, s, pi_eq, pi_dev, gains, u_r, lam, v):
    """Feasibility LP: orthogonality + consistency equalities, ICs slack."""
    nv = n * s
    a_eq = []
    b_eq = []
    for b in range(s):
        row = np.zeros(nv)
        row[np.arange(n) * s + b] = lam
        a_eq.append(row)
        b_eq.append(0.0)
    for i in range(n):
        row = np.zeros(nv)
        row[i * s : (i + 1) * s] = pi_eq
        a_eq.append(row)
        b_eq.append(v[i] - u_r[i])
    a_ub = []
    b_ub = []
    for i in range(n):
        row = np.zeros(nv)
        row[i * s : (i + 1) * s] = pi_dev[i] - pi_eq
        a_ub.append(row)
        b_ub.append(-gains[i])
    res = linprog(
        c=np.zeros(nv), A_eq=np.asarray(a_eq), b_eq=np.asarray(b_eq),
        A_ub=np.asarray(a_ub), b_ub=np.asarray(b_ub),
        bounds=[(None, None)] * nv, method="highs",
    )
    if not res.success:
        return None
    return res.x.reshape(n, s).T


def _solve_general_lp(n, s, pi_eq, pi_dev, gains, u_r, lam):
    """max lambda . v subject to incentives and lambda . gamma_bar(b) <= 0."""
    nv = n * s
    c = np.zeros(nv)
    for i in range(n):
        c[i * s : (i + 1) * s] = -lam[i] * pi_eq
    a_ub = []
    b_ub = []
    for i in range(n):
        row = np.zeros(nv)
        row[i * s : (i + 1) * s] = pi_dev[i] - pi_eq
        a_ub.append(row)
        b_ub.append(-gains[i])
    for b in range(s):
        row = np.zeros(nv)
        row[np.arange(n) * s + b] = lam
        a_ub.append(row)
        b_ub.append(0.0)
    res = linprog(
        c=c, A_ub=np.asarray(a_ub), b_ub=np.asarray(b_ub),
        bounds=[(None, None)] * nv, method="highs",
    )
    if not res.success:
        return None, None
    gamma = res.x.reshape(n, s).T
    value = float(lam @ u_r) - float(res.fun)
    return gamma, value


# ---------------------------------------------------------------------------
# best supported level over action profiles


@dataclass(frozen=True)
class KStarResult:
    direction: tuple[float, ...]
    value: float
    best_profile: tuple[int, ...]
    per_profile: dict[tuple[int, ...], float]
    orthogonal_at_best: bool
    best_map: EnforceabilityResult


def k_star(spec: GameSpec, direction) -> KStarResult:
    """Best supported half-space level over all pure action profiles.

    Orthogonal enforcement is attempted first (level = lambda . u(r),
    computed exactly); profiles that cannot be orthogonally enforced fall
    back to the general LP.  Ties within SOLVE_TOL go to the
    lexicographically smallest profile.  The direction is used as given:
    the supported level is positively homogeneous in lambda, so rescaling
    the direction rescales k* but leaves the half-space and the
    continuation-map structure unchanged.
    """
    if spec.n_firms > K_STAR_MAX_FIRMS:
        raise CapacityError(
            f"k_star enumerates 2^N profiles and is capped at N <= {K_STAR_MAX_FIRMS}"
        )
    lam = np.asarray(direction, dtype=float)
    per: dict[tuple[int, ...], float] = {}
    maps: dict[tuple[int, ...], EnforceabilityResult] = {}
    for r in all_profiles(spec.n_firms):
        res = solve_enforceability(spec, r, lam, orthogonal=True)
        if not res.feasible:
            res = solve_enforceability(spec, r, lam, orthogonal=False)
        if res.feasible:
            per[r] = float(res.k_star)
            maps[r] = res
    if not per:
        raise DomainError("no action profile is enforceable in this direction")
    best_value = max(per.values())
    candidates = sorted(r for r, kv in per.items() if kv >= best_value - SOLVE_TOL)
    best = candidates[0]
    return KStarResult(
        direction=tuple(lam),
        value=per[best],
        best_profile=best,
        per_profile=per,
        orthogonal_at_best=maps[best].orthogonal,
        best_map=maps[best],
    )


def k_star_formula_linear_n2(G: float, L: float, direction) -> float:
    """Closed-form k*(lambda) for two firms with linear gains, positive
    quadrant directions: asymmetric profiles win when the direction is
    lopsided enough, full disclosure in between."""
    lam = np.asarray(direction, dtype=float)
    l1, l2 = lam
    if l1 < 0 or l2 < 0:
        raise DomainError("formula covers the positive quadrant only")
    if L * l2 >= G * l1:
        return G * l2 - L * l1
    if L * l1 >= G * l2:
        return G * l1 - L * l2
    return (G - L) * (l1 + l2)


# ---------------------------------------------------------------------------
# payoff-set approximation (two firms)


@dataclass(frozen=True)
class PayoffSetApprox:
    directions: np.ndarray  # (n, N) unit directions
    k_values: np.ndarray  # (n,)
    best_profiles: tuple[tuple[int, ...], ...]
    vertices: np.ndarray | None  # (m, 2) CCW polygon; None when N > 2
    degenerate: bool = False  # empty interior (polygon collapsed or empty)

    def contains(self, point, tol: float = 1e-9) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.directions @ p <= self.k_values + tol))


def _circle_directions(n: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _sphere_directions(n: int, dim: int) -> np.ndarray:
    """Deterministic low-discrepancy directions on the unit sphere."""
    rng = np.random.Generator(np.random.Philox(key=0))
    pts = rng.standard_normal((n, dim))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def ppe_payoff_set(spec: GameSpec, n_directions: int = 360) -> PayoffSetApprox:
    """Intersect supporting half-spaces over uniformly spread directions.

    For two firms the directions sweep the unit circle and the intersection
    polygon is returned; in higher dimension the half-space list is produced
    without vertex enumeration.  Each sampled direction contributes
    {v : lambda . v <= k*(lambda)}; every half-space supports the limit set
    tightly, so the polygon converges to it from outside as directions are
    refined.
    """
    if n_directions < 8:
        raise DomainError(f"need at least 8 directions, got {n_directions}")
    if spec.n_firms == 2:
        dirs = _circle_directions(n_directions)
    else:
        dirs = _sphere_directions(n_directions, spec.n_firms)
    ks = np.empty(n_directions)
    best: list[tuple[int, ...]] = []
    for idx in range(n_directions):
        res = k_star(spec, dirs[idx])
        ks[idx] = res.value
        best.append(res.best_profile)
    if spec.n_firms != 2:
        return PayoffSetApprox(
            directions=dirs, k_values=ks, best_profiles=tuple(best), vertices=None
        )
    bound = 10.0 * (1.0 + float(np.max(np.abs(ks))) + spec.max_abs_payoff())
    poly = halfplane_intersection_2d(dirs, ks, bound=bound, tol=1e-9)
    degenerate = len(poly) < 3
    if not degenerate:
        poly = ensure_ccw(poly)
    return PayoffSetApprox(
        directions=dirs,
        k_values=ks,
        best_profiles=tuple(best),
        vertices=poly,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# decomposition verification and promise support


@dataclass(frozen=True)
class DecompositionCheck:
    holds: bool
    equality_residual: float
    ic_slacks: tuple[float, ...]
    binding: tuple[bool, ...]


def verify_decomposition(
    spec: GameSpec, v, profile, gamma_bar: np.ndarray, delta: float | None = None
) -> DecompositionCheck:
    """Check the discounted decomposition identity and incentive slacks.

    gamma(b) = v + ((1-delta)/delta) gamma_bar(b); the identity
    v = (1-delta) u(r) + delta E[gamma(b) | r] must hold per firm, and each
    unilateral deviation must not gain.  IC slack is measured as the
    distribution-difference form
    (1-delta)(u_i(r) - u_i(dev)) + delta (pi_eq - pi_dev) . gamma_i, which
    does not depend on the promised v and equals (1-delta) times the
    normalized slack; a perturbation of gamma_bar_i(b) by h therefore moves
    the slack by (1-delta) h times the probability gap at b.
    """
    if delta is None:
        delta = spec.delta
    if not (0 < delta < 1):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    r, n, s, pi_eq, u_r, pi_dev, u_dev = _profile_context(spec, profile)
    v = np.asarray(v, dtype=float)
    gamma_bar = np.asarray(gamma_bar, dtype=float)
    if gamma_bar.shape != (s, n):
        raise DomainError(f"gamma_bar must have shape ({s}, {n})")
    scale = (1 - delta) / delta
    gamma = v[None, :] + scale * gamma_bar
    eq_res = 0.0
    slacks = []
    for i in range(n):
        lhs = (1 - delta) * u_r[i] + delta * float(pi_eq @ gamma[:, i])
        eq_res = max(eq_res, abs(v[i] - lhs))
        slacks.append(
            (1 - delta) * (u_r[i] - u_dev[i])
            + delta * float((pi_eq - pi_dev[i]) @ gamma[:, i])
        )
    slacks_arr = np.asarray(slacks)
    holds = eq_res <= SOLVE_TOL and bool(np.min(slacks_arr) >= -SOLVE_TOL)
    return DecompositionCheck(
        holds=holds,
        equality_residual=float(eq_res),
        ic_slacks=tuple(float(x) for x in slacks_arr),
        binding=tuple(bool(abs(x) <= SOLVE_TOL) for x in slacks_arr),
    )


class PromiseDecomposition:
    """Affine family of continuation maps decomposing payoffs near u(r*).

    The orthogonal equality system is linear in the target payoff, so the
    pinned minimum-norm solution is an affine function of the displacement
    d = v - u(r*).  The family is assembled from one base solve plus one
    solve per hyperplane basis vector; displacements off the hyperplane are
    absorbed by a constant shift (allowed in the half-space since
    lambda . d <= 0 there).
    """

    def __init__(self, spec: GameSpec, direction):
        lam = np.asarray(direction, dtype=float)
        ks = k_star(spec, lam)
        self.spec = spec
        self.direction = lam
        self.k_star = ks.value
        self.action = ks.best_profile
        if not ks.orthogonal_at_best:
            raise DomainError(
                "promise decomposition requires an orthogonally enforceable "
                "best profile for the chosen direction"
            )
        base = solve_enforceability(spec, self.action, lam, orthogonal=True)
        if not base.feasible:
            raise DomainError("base decomposition unexpectedly infeasible")
        self.u_r = profile_payoff(spec, self.action)
        self.gamma_base = base.gamma_bar  # (S, N)
        n = spec.n_firms
        lam_unit = lam / np.linalg.norm(lam)
        basis = _hyperplane_basis(lam_unit)
        shifts = []
        for e in basis:
            res = solve_enforceability(
                spec, self.action, lam, orthogonal=True, target=self.u_r + e
            )
            if not res.feasible:
                raise DomainError("displacement decomposition infeasible")
            shifts.append(res.gamma_bar - self.gamma_base)
        # tensor[b, i, :] maps a hyperplane displacement to the gamma_bar shift
        pinv = np.linalg.pinv(np.asarray(basis).T)  # (n-1, n)
        tensor = np.einsum("mbi,mk->bik", np.asarray(shifts), pinv)
        # Fold the hyperplane projection and the rigid perpendicular shift
        # into one matrix per signal: gamma_bar(v) = base + affine[b] @ (v - u).
        proj = np.eye(n) - np.outer(lam_unit, lam_unit)
        self.affine = np.einsum("bik,kl->bil", tensor, proj) + np.outer(
            lam_unit, lam_unit
        )[None, :, :]
        self._lam_unit = lam_unit

    def gamma_bar_for(self, v) -> np.ndarray:
        """Continuation map for promise v; accumulation order is fixed so the
        simulation kernels reproduce it bit for bit."""
        v = np.asarray(v, dtype=float)
        d = v - self.u_r
        gamma = self.gamma_base.copy()
        for k in range(len(d)):
            gamma += self.affine[:, :, k] * d[k]
        return gamma


def _hyperplane_basis(lam_unit: np.ndarray) -> list[np.ndarray]:
    """Orthonormal basis of the hyperplane orthogonal to lam_unit."""
    n = len(lam_unit)
    proj = np.eye(n) - np.outer(lam_unit, lam_unit)
    u, s, _ = np.linalg.svd(proj)
    return [u[:, k] for k in range(n) if s[k] > 0.5]
