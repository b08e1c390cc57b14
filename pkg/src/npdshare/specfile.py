"""JSON game-spec files.

A spec file is a JSON object with the fields

    n_firms   integer >= 2
    gain      {"kind": "linear", "G": number} or
              {"kind": "concave", "G": number, "f": [0, ...]}
    L         leakage loss, number > 0
    alpha     concealment read correctly, in (1/2, 1)
    epsilon   disclosure misread, in (0, 1/2)
    delta     discount factor, in (0, 1)

plus optional ``monitor_alpha`` / ``monitor_epsilon`` overrides for the
public monitor and an optional ``seed``.  Numbers must be finite decimals:
NaN and Infinity tokens are rejected.  Errors name the offending field;
syntax errors carry the line and column from the JSON parser.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DomainError
from .game import ConcaveGain, GameSpec, LinearGain

_TOP_FIELDS = {
    "n_firms", "gain", "L", "alpha", "epsilon", "delta",
    "monitor_alpha", "monitor_epsilon", "seed",
}
_GAIN_FIELDS = {"kind", "G", "f"}
MAX_SEED = 2**63 - 1


@dataclass(frozen=True)
class LoadedSpec:
    spec: GameSpec
    seed: int | None
    source: str


def _reject_constant(token: str):
    raise DomainError(f"non-finite number {token!r} is not accepted in spec files")


def _require(obj: dict, name: str, source: str):
    if name not in obj:
        raise DomainError(f"{source}: missing required field '{name}'")
    return obj[name]


def _number(value, name: str, source: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{source}: field '{name}' must be a number, got {value!r}")
    return float(value)


def _integer(value, name: str, source: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f"{source}: field '{name}' must be an integer, got {value!r}")
    return value


def parse_game_spec(text: str, source: str = "<string>") -> LoadedSpec:
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DomainError(
            f"{source}: JSON syntax error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from None
    except DomainError as exc:
        raise DomainError(f"{source}: {exc}") from None
    if not isinstance(obj, dict):
        raise DomainError(f"{source}: top level must be a JSON object")
    unknown = sorted(set(obj) - _TOP_FIELDS)
    if unknown:
        raise DomainError(f"{source}: unknown field(s) {unknown}")

    n_firms = _integer(_require(obj, "n_firms", source), "n_firms", source)
    gain_obj = _require(obj, "gain", source)
    if not isinstance(gain_obj, dict):
        raise DomainError(f"{source}: field 'gain' must be an object")
    unknown = sorted(set(gain_obj) - _GAIN_FIELDS)
    if unknown:
        raise DomainError(f"{source}: unknown field(s) {unknown} in 'gain'")
    kind = _require(gain_obj, "kind", source + ": gain")
    g_value = _number(_require(gain_obj, "G", source + ": gain"), "G", source)
    if kind == "linear":
        if "f" in gain_obj:
            raise DomainError(f"{source}: field 'gain.f' is only valid for kind 'concave'")
        gain = LinearGain(g_value)
    elif kind == "concave":
        f = _require(gain_obj, "f", source + ": gain")
        if not isinstance(f, list) or not f:
            raise DomainError(f"{source}: field 'gain.f' must be a non-empty array")
        table = tuple(
            _number(v, f"gain.f[{k}]", source) for k, v in enumerate(f)
        )
        gain = ConcaveGain(g_value, table)
    else:
        raise DomainError(
            f"{source}: field 'gain.kind' must be 'linear' or 'concave', got {kind!r}"
        )

    kwargs = {}
    for json_name, attr in (
        ("monitor_alpha", "monitor_alpha"),
        ("monitor_epsilon", "monitor_epsilon"),
    ):
        if json_name in obj and obj[json_name] is not None:
            kwargs[attr] = _number(obj[json_name], json_name, source)

    try:
        spec = GameSpec(
            n_firms=n_firms,
            gain=gain,
            loss=_number(_require(obj, "L", source), "L", source),
            alpha=_number(_require(obj, "alpha", source), "alpha", source),
            epsilon=_number(_require(obj, "epsilon", source), "epsilon", source),
            delta=_number(_require(obj, "delta", source), "delta", source),
            **kwargs,
        )
    except DomainError as exc:
        raise DomainError(f"{source}: {exc}") from None

    seed = None
    if "seed" in obj and obj["seed"] is not None:
        seed = _integer(obj["seed"], "seed", source)
        if not 0 <= seed <= MAX_SEED:
            raise DomainError(f"{source}: field 'seed' must lie in [0, 2**63), got {seed}")
    return LoadedSpec(spec=spec, seed=seed, source=source)


def load_game_spec(path) -> LoadedSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DomainError(f"cannot read spec file {path}: {exc.strerror}") from None
    return parse_game_spec(text, source=str(path))
