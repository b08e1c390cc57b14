"""Repeated-play engine: strategies, episodes, Monte Carlo, promise automaton.

An episode runs the stage game for a finite horizon.  Under public
monitoring the public history is the sequence of realized signal indices;
under private monitoring with communication each period opens with a
simultaneous message round (messages are delivered verbatim and become the
public history), then actions are chosen, stage payoffs accrue, and the
private cross-observation matrix is drawn.  Stage payoff is the ex-ante
u_i(r) of the action profile; the monitor affects continuation behavior,
not the realized flow.

All draws are addressed by (seed, period, slot, replica) counters, so a
trace is reproducible bit for bit and every Monte Carlo replica has an
independent substream by construction.
"""

from __future__ import annotations

import copy
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from ._kernels import backend_name, promise_mc
from .decompose import PromiseDecomposition
from .errors import DiscountTooSmallError, DomainError, ProtocolError
from .game import GameSpec, profile_payoff
from .monitoring import belief_kernel

REGION_TOL = 1e-9
RECOMPUTE_TOL = 1e-12

MODE_PUBLIC = "public"
MODE_PRIVATE = "private"


# ---------------------------------------------------------------------------
# strategies


class Strategy:
    """Per-firm decision rule over histories.

    ``next_action`` receives the public history (signal indices in public
    mode, per-firm message tuples in private mode) and the firm's private
    history (own past cross-observation rows), and returns 0 (conceal) or 1
    (disclose).  Strategies with ``is_public = True`` must ignore the
    private history; the engine's tests fuzz this.

    ``next_message`` implements the truthful-communication default: announce
    the previous period's own signal vector verbatim, and an empty token in
    the first period before anything was observed.  Override it to model
    strategic misreporting.
    """

    is_public = True

    def bind(self, spec: GameSpec, mode: str, firm: int) -> None:
        """Called once at episode start; resets any internal state."""
        self.spec = spec
        self.mode = mode
        self.firm = firm

    def next_action(self, public_history, private_history) -> int:
        raise NotImplementedError

    def next_message(self, own_actions, own_signals, message_history):
        if not own_signals:
            return ()
        last = own_signals[-1]
        return tuple(int(b) for j, b in enumerate(last) if j != self.firm)

    def clone(self) -> "Strategy":
        return copy.deepcopy(self)


class AlwaysDisclose(Strategy):
    def next_action(self, public_history, private_history) -> int:
        return 1


class AlwaysConceal(Strategy):
    def next_action(self, public_history, private_history) -> int:
        return 0


class SignalTrigger(Strategy):
    """Disclose until ``threshold`` cumulative zero bits have been observed
    in the public history, then conceal forever.

    Under imperfect monitoring zero bits occur on path with probability
    1 - (1-epsilon)^N per period, so any finite trigger fires eventually
    even when everyone discloses.  ``threshold=math.inf`` never triggers and
    coincides with AlwaysDisclose.
    """

    def __init__(self, threshold):
        if threshold != math.inf and (
            not isinstance(threshold, (int, np.integer)) or threshold < 1
        ):
            raise DomainError(
                f"trigger threshold must be a positive integer or math.inf, got {threshold}"
            )
        self.threshold = threshold
        self._seen = 0
        self._zeros = 0

    def bind(self, spec, mode, firm):
        super().bind(spec, mode, firm)
        self._seen = 0
        self._zeros = 0

    def _count_zero_bits(self, entry) -> int:
        n = self.spec.n_firms
        if isinstance(entry, (int, np.integer)):
            return n - int(entry).bit_count()
        return sum(1 for msg in entry for b in msg if b == 0)

    def next_action(self, public_history, private_history) -> int:
        while self._seen < len(public_history):
            self._zeros += self._count_zero_bits(public_history[self._seen])
            self._seen += 1
        return 0 if self._zeros >= self.threshold else 1


def baseline_strategies() -> dict:
    """Catalog of the built-in strategy constructors."""
    return {
        "always_disclose": AlwaysDisclose,
        "always_conceal": AlwaysConceal,
        "signal_trigger": SignalTrigger,
    }


def truthful_report_strategy() -> Strategy:
    """Cooperative strategy with the truthful-communication rule.

    Every Strategy inherits truthful reporting by default; this helper names
    the rule for callers that only care about the message protocol.
    """
    return AlwaysDisclose()


class PromiseAutomaton(Strategy):
    """Public strategy that recursively decomposes a promised payoff.

    Construction fixes a direction, finds the best supported level k* and
    its action profile, and builds the affine continuation family.  Each
    period the automaton plays its component of that profile; on observing
    public signal b the promise moves to v + ((1-delta)/delta) gamma_bar(b).
    Orthogonal enforcement keeps lam . v constant, so the promise walks the
    supporting hyperplane.

    If an update leaves the admissible region {lam . v <= k* + tol,
    v_i >= -tol}, the automaton either raises DiscountTooSmallError with a
    replay diagnostic (``on_exit="raise"``) or concedes to all-conceal for
    the rest of the episode (``on_exit="concede"``).

    Share one instance across firms or pass per-firm clones; the promise
    walk is a deterministic function of the public history either way.
    """

    is_public = True

    def __init__(self, spec: GameSpec, v0, direction, delta: float | None = None,
                 on_exit: str = "raise"):
        if on_exit not in ("raise", "concede"):
            raise DomainError(f"on_exit must be 'raise' or 'concede', got {on_exit!r}")
        self.decomp = PromiseDecomposition(spec, direction)
        self.delta = spec.delta if delta is None else float(delta)
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        self.on_exit = on_exit
        v0 = np.asarray(v0, dtype=float)
        if v0.shape != (spec.n_firms,):
            raise DomainError(f"v0 must have length {spec.n_firms}")
        if not self._in_region(v0):
            raise DomainError(
                "v0 lies outside the admissible region "
                f"{{lam.v <= {self.decomp.k_star:.6g}, v_i >= 0}} (tol {REGION_TOL})"
            )
        self.v0 = v0
        self._reset_state()

    def _in_region(self, v) -> bool:
        lam = self.decomp.direction
        level = v[0] * lam[0]
        for k in range(1, len(v)):
            level = level + v[k] * lam[k]
        return bool(level <= self.decomp.k_star + REGION_TOL and np.min(v) >= -REGION_TOL)

    def _reset_state(self) -> None:
        self._v = self.v0.copy()
        self._consumed = 0
        self._signals: list[int] = []
        self._halted = False

    def bind(self, spec, mode, firm):
        if mode != MODE_PUBLIC:
            raise ProtocolError("the promise automaton is a public-monitoring strategy")
        super().bind(spec, mode, firm)
        self._reset_state()

    @property
    def promise(self) -> np.ndarray:
        return self._v.copy()

    @property
    def halted(self) -> bool:
        return self._halted

    def next_action(self, public_history, private_history) -> int:
        self._advance(public_history)
        if self._halted:
            return 0
        return int(self.decomp.action[self.firm])

    def _advance(self, public_history) -> None:
        c = (1.0 - self.delta) / self.delta
        while self._consumed < len(public_history):
            b = int(public_history[self._consumed])
            self._consumed += 1
            if self._halted:
                continue
            self._signals.append(b)
            gamma = self.decomp.gamma_bar_for(self._v)
            v_next = self._v + c * gamma[b]
            if not self._in_region(v_next):
                if self.on_exit == "raise":
                    raise DiscountTooSmallError(
                        period=self._consumed,
                        delta=self.delta,
                        delta_suggested=self._suggest_delta(),
                    )
                self._halted = True
                continue
            self._v = v_next

    def _suggest_delta(self) -> float | None:
        """Smallest delta keeping the replayed signal sequence admissible.

        Bisection over the recorded signals; a diagnostic only, since other
        signal realizations could still escape at the suggested value.
        """
        signals = list(self._signals)

        def stays_inside(d: float) -> bool:
            c = (1.0 - d) / d
            v = self.v0.copy()
            for b in signals:
                v = v + c * self.decomp.gamma_bar_for(v)[b]
                if not self._in_region(v):
                    return False
            return True

        hi = 1.0 - 1e-9
        if not stays_inside(hi):
            return None
        lo = self.delta
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if stays_inside(mid):
                hi = mid
            else:
                lo = mid
        return hi


# ---------------------------------------------------------------------------
# episodes


@dataclass(frozen=True)
class EpisodeTrace:
    mode: str
    delta: float
    seed: int
    replica: int
    u_scale: float  # max |stage payoff| of the generating spec
    actions: np.ndarray  # (T, N) int8
    payoffs: np.ndarray  # (T, N) float
    public_signals: np.ndarray | None  # (T,) int64 in public mode
    private_signals: np.ndarray | None  # (T, N, N) int8, diagonal -1
    messages: tuple | None  # per period: tuple over firms of bit tuples
    promises: np.ndarray | None  # (T, N) promise path when tracked

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    @property
    def n_firms(self) -> int:
        return self.actions.shape[1]

    def discounted_average(self, delta: float | None = None) -> np.ndarray:
        """(1 - delta) sum_t delta^t u(t), the truncated discounted average.

        Accumulated in period order with a running discount product, the
        same scheme the Monte Carlo kernels use, so recomputation from a
        trace reproduces kernel output bit for bit.
        """
        d = self.delta if delta is None else float(delta)
        if not (0.0 < d < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {d}")
        acc = np.zeros(self.n_firms)
        w = 1.0
        for t in range(self.horizon):
            acc += w * self.payoffs[t]
            w = w * d
        return (1.0 - d) * acc

    def truncation_bias_bound(self, delta: float | None = None) -> float:
        """Upper bound on |infinite-horizon average - truncated average|."""
        d = self.delta if delta is None else float(delta)
        return d**self.horizon * self.u_scale


def _validate_action(a, firm: int, period: int) -> int:
    if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
        raise ProtocolError(
            f"firm {firm + 1} emitted a non-integer action {a!r} at period {period}"
        )
    a = int(a)
    if a not in (0, 1):
        raise ProtocolError(
            f"firm {firm + 1} emitted invalid action {a} at period {period}"
        )
    return a


def _validate_message(m, firm: int, period: int, n_firms: int):
    expected = 0 if period == 0 else n_firms - 1
    if not isinstance(m, tuple) or len(m) != expected:
        raise ProtocolError(
            f"firm {firm + 1} emitted an invalid message {m!r} at period {period}: "
            f"expected a tuple of {expected} bits"
        )
    for b in m:
        if not isinstance(b, (int, np.integer)) or int(b) not in (0, 1):
            raise ProtocolError(
                f"firm {firm + 1} emitted a non-bit message entry {b!r} at period {period}"
            )
    return tuple(int(b) for b in m)


def run_episode(
    spec: GameSpec,
    strategies,
    horizon: int,
    seed: int,
    mode: str = MODE_PUBLIC,
    replica: int = 0,
) -> EpisodeTrace:
    """Play the repeated game once and return the full trace.

    Deterministic in (spec, strategies, horizon, seed, mode, replica).  In
    private mode each period opens with the message round; messages become
    the public history that strategies condition on.
    """
    if mode not in (MODE_PUBLIC, MODE_PRIVATE):
        raise DomainError(f"mode must be '{MODE_PUBLIC}' or '{MODE_PRIVATE}', got {mode!r}")
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    if not 0 <= int(seed) < 2**63:
        raise DomainError("seed must lie in [0, 2**63)")
    n = spec.n_firms
    supplied = list(strategies)
    if len(supplied) != n:
        raise DomainError(f"need {n} strategies, got {len(supplied)}")
    # A repeated instance would have its bound firm index overwritten, so
    # clone duplicates; each firm then runs its own copy of the rule.
    strategies = []
    seen: set[int] = set()
    for i, s in enumerate(supplied):
        if id(s) in seen:
            s = s.clone()
        seen.add(id(s))
        s.bind(spec, mode, i)
        strategies.append(s)

    actions = np.zeros((horizon, n), dtype=np.int8)
    payoffs = np.zeros((horizon, n))
    public_signals = np.zeros(horizon, dtype=np.int64) if mode == MODE_PUBLIC else None
    private_signals = (
        np.full((horizon, n, n), -1, dtype=np.int8) if mode == MODE_PRIVATE else None
    )
    messages: list[tuple] = []
    track = hasattr(strategies[0], "promise")
    promises = np.zeros((horizon, n)) if track else None

    public_history: list = []
    own_actions: list[list[int]] = [[] for _ in range(n)]
    own_signals: list[list[np.ndarray]] = [[] for _ in range(n)]
    firm_slots = np.arange(n)

    for t in range(horizon):
        if mode == MODE_PRIVATE:
            round_msgs = tuple(
                _validate_message(
                    strategies[i].next_message(own_actions[i], own_signals[i], messages),
                    i, t, n,
                )
                for i in range(n)
            )
            messages.append(round_msgs)
            public_history.append(round_msgs)

        for i in range(n):
            actions[t, i] = _validate_action(
                strategies[i].next_action(public_history, own_signals[i]), i, t
            )
        if track:
            promises[t] = strategies[0].promise
        payoffs[t] = profile_payoff(spec, actions[t])
        for i in range(n):
            own_actions[i].append(int(actions[t, i]))

        if mode == MODE_PUBLIC:
            p_zero = np.where(actions[t] == 0, spec.m_alpha, spec.m_epsilon)
            u = rng.uniforms(seed, rng.DOMAIN_PUBLIC, t, firm_slots, replica)
            bits = (u >= p_zero).astype(np.int64)
            index = int((bits << firm_slots).sum())
            public_signals[t] = index
            public_history.append(index)
        else:
            pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
            slots = np.array([i * n + j for (i, j) in pairs])
            p_zero = np.array(
                [
                    belief_kernel(int(actions[t, j]), spec.alpha, spec.epsilon)[0]
                    for (_, j) in pairs
                ]
            )
            u = rng.uniforms(seed, rng.DOMAIN_PRIVATE, t, slots, replica)
            bits = (u >= p_zero).astype(np.int8)
            for k, (i, j) in enumerate(pairs):
                private_signals[t, i, j] = bits[k]
            for i in range(n):
                own_signals[i].append(private_signals[t, i].copy())

    return EpisodeTrace(
        mode=mode,
        delta=spec.delta,
        seed=int(seed),
        replica=int(replica),
        u_scale=spec.max_abs_payoff(),
        actions=actions,
        payoffs=payoffs,
        public_signals=public_signals,
        private_signals=private_signals,
        messages=tuple(messages) if mode == MODE_PRIVATE else None,
        promises=promises,
    )


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MonteCarloResult:
    mean: np.ndarray  # (N,) mean discounted average payoff
    stderr: np.ndarray  # (N,) standard error of the mean
    per_replica: np.ndarray  # (R, N)
    replicas: int
    horizon: int
    base_seed: int
    truncation_bias_bound: float
    backend: str
    halt_periods: np.ndarray | None = None  # (R,) int64, -1 = stayed inside

    @property
    def n_halted(self) -> int:
        if self.halt_periods is None:
            return 0
        return int(np.sum(self.halt_periods >= 0))


def _aggregate(per_replica: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = per_replica.mean(axis=0)
    if per_replica.shape[0] > 1:
        stderr = per_replica.std(axis=0, ddof=1) / math.sqrt(per_replica.shape[0])
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def monte_carlo(
    spec: GameSpec,
    strategies,
    replicas: int,
    horizon: int,
    base_seed: int,
    mode: str = MODE_PUBLIC,
) -> MonteCarloResult:
    """Replicate run_episode over independent substreams (replica = counter
    coordinate, so streams never overlap) and aggregate in replica order."""
    if replicas < 1:
        raise DomainError(f"replicas must be >= 1, got {replicas}")
    per = np.zeros((replicas, spec.n_firms))
    for r in range(replicas):
        clones = [s.clone() for s in strategies]
        trace = run_episode(spec, clones, horizon, base_seed, mode=mode, replica=r)
        per[r] = trace.discounted_average()
    mean, stderr = _aggregate(per)
    return MonteCarloResult(
        mean=mean,
        stderr=stderr,
        per_replica=per,
        replicas=replicas,
        horizon=horizon,
        base_seed=int(base_seed),
        truncation_bias_bound=spec.delta**horizon * spec.max_abs_payoff(),
        backend="python",
    )


def monte_carlo_promise(
    spec: GameSpec,
    v0,
    direction,
    replicas: int,
    horizon: int,
    base_seed: int,
    delta: float | None = None,
) -> MonteCarloResult:
    """Vectorized Monte Carlo of the promise automaton (kernel-backed).

    Replica trajectories are bit-identical to running PromiseAutomaton
    through run_episode with the same seed and replica index.  Replicas
    whose promise leaves the admissible region stop accruing payoff from
    the halt period on (all-conceal continuation); their partial discounted
    sums still enter the aggregate.
    """
    if replicas < 1:
        raise DomainError(f"replicas must be >= 1, got {replicas}")
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    d = spec.delta if delta is None else float(delta)
    if not (0.0 < d < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {d}")
    auto = PromiseAutomaton(spec, v0, direction, delta=d, on_exit="concede")
    dec = auto.decomp
    profile = np.asarray(dec.action, dtype=np.int64)
    p_zero = np.where(profile == 0, spec.m_alpha, spec.m_epsilon)
    totals, halts = promise_mc(
        seed=int(base_seed),
        replicas=replicas,
        horizon=horizon,
        delta=d,
        v0=np.asarray(v0, dtype=float),
        u_r=dec.u_r,
        p_zero=p_zero,
        gamma_base=dec.gamma_base,
        affine=dec.affine,
        lam=dec.direction,
        k_star=dec.k_star,
        tol=REGION_TOL,
    )
    per = (1.0 - d) * totals
    mean, stderr = _aggregate(per)
    return MonteCarloResult(
        mean=mean,
        stderr=stderr,
        per_replica=per,
        replicas=replicas,
        horizon=horizon,
        base_seed=int(base_seed),
        truncation_bias_bound=d**horizon * spec.max_abs_payoff(),
        backend=backend_name(),
        halt_periods=halts,
    )


# ---------------------------------------------------------------------------
# trace serialization


def write_trace_csv(trace: EpisodeTrace, path) -> None:
    """Serialize a trace to CSV, one row per period.

    A leading comment line carries the episode metadata; floats are written
    with full precision so the file round-trips exactly.
    """
    n = trace.n_firms
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# mode={trace.mode} delta={trace.delta!r} seed={trace.seed} "
            f"replica={trace.replica} u_scale={trace.u_scale!r} n_firms={n}\n"
        )
        writer = csv.writer(fh, lineterminator="\n")
        header = ["period"]
        header += [f"action_{i + 1}" for i in range(n)]
        if trace.mode == MODE_PUBLIC:
            header.append("signal_index")
        else:
            header += [
                f"b_{i + 1}_{j + 1}" for i in range(n) for j in range(n) if i != j
            ]
            header += [f"message_{i + 1}" for i in range(n)]
        header += [f"payoff_{i + 1}" for i in range(n)]
        if trace.promises is not None:
            header += [f"promise_{i + 1}" for i in range(n)]
        writer.writerow(header)
        for t in range(trace.horizon):
            row = [t] + [int(a) for a in trace.actions[t]]
            if trace.mode == MODE_PUBLIC:
                row.append(int(trace.public_signals[t]))
            else:
                row += [
                    int(trace.private_signals[t, i, j])
                    for i in range(n)
                    for j in range(n)
                    if i != j
                ]
                row += ["".join(str(b) for b in trace.messages[t][i]) for i in range(n)]
            row += [repr(float(x)) for x in trace.payoffs[t]]
            if trace.promises is not None:
                row += [repr(float(x)) for x in trace.promises[t]]
            writer.writerow(row)


def read_trace_csv(path) -> EpisodeTrace:
    """Inverse of write_trace_csv; numeric fields round-trip bit for bit."""
    with open(path, newline="") as fh:
        meta_line = fh.readline()
        if not meta_line.startswith("#"):
            raise DomainError("trace file lacks the metadata comment line")
        meta = dict(item.split("=", 1) for item in meta_line[1:].split())
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    n = int(meta["n_firms"])
    mode = meta["mode"]
    horizon = len(rows)
    col = {name: k for k, name in enumerate(header)}
    actions = np.zeros((horizon, n), dtype=np.int8)
    payoffs = np.zeros((horizon, n))
    public_signals = np.zeros(horizon, dtype=np.int64) if mode == MODE_PUBLIC else None
    private_signals = (
        np.full((horizon, n, n), -1, dtype=np.int8) if mode == MODE_PRIVATE else None
    )
    messages: list[tuple] = []
    track = "promise_1" in col
    promises = np.zeros((horizon, n)) if track else None
    for row in rows:
        t = int(row[col["period"]])
        for i in range(n):
            actions[t, i] = int(row[col[f"action_{i + 1}"]])
            payoffs[t, i] = float(row[col[f"payoff_{i + 1}"]])
            if track:
                promises[t, i] = float(row[col[f"promise_{i + 1}"]])
        if mode == MODE_PUBLIC:
            public_signals[t] = int(row[col["signal_index"]])
        else:
            for i in range(n):
                for j in range(n):
                    if i != j:
                        private_signals[t, i, j] = int(row[col[f"b_{i + 1}_{j + 1}"]])
            messages.append(
                tuple(
                    tuple(int(ch) for ch in row[col[f"message_{i + 1}"]])
                    for i in range(n)
                )
            )
    return EpisodeTrace(
        mode=mode,
        delta=float(meta["delta"]),
        seed=int(meta["seed"]),
        replica=int(meta["replica"]),
        u_scale=float(meta["u_scale"]),
        actions=actions,
        payoffs=payoffs,
        public_signals=public_signals,
        private_signals=private_signals,
        messages=tuple(messages) if mode == MODE_PRIVATE else None,
        promises=promises,
    )
