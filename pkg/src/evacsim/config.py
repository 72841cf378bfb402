"""Scenario and matrix configuration: YAML in, validated objects out.

A scenario file describes one run. An optional `matrix` section adds the
level sets swept by the experiment harness. Anything malformed raises
ConfigError with a message naming the offending key; the CLI turns that
into a nonzero exit.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .des import Constant, Distribution, UniformInteger
from .policy import Policy
from .topology import Topology
from .workload import validate_size_dist

CANONICAL_TOPOLOGY = "canonical"


class ConfigError(ValueError):
    """A config file that cannot be turned into a runnable scenario."""


@dataclass(frozen=True, slots=True)
class ScenarioSpec:
    topology_ref: str
    bandwidth_gbps: float
    clients_per_dc: dict[str, int]
    mean_interarrival_s: float
    size_dist: Distribution
    attack_at_s: float
    window_s: float
    risk_set: frozenset[str]
    policy: Policy | None
    seed: int


@dataclass(frozen=True, slots=True)
class MatrixSpec:
    bandwidths_gbps: tuple[float, ...]
    clients: tuple[int, ...]
    policies: tuple[Policy, ...]
    replications: int


def _require(data: dict, key: str, kind, ctx: str):
    if key not in data:
        raise ConfigError(f"{ctx}: missing required key '{key}'")
    value = data[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{ctx}: key '{key}' must be {kind.__name__}, got {value!r}")
    return value


def parse_size_dist(spec, ctx: str) -> Distribution:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(
            f"{ctx}: item_size must be one of "
            "{{constant_bytes: N}} or {{uniform_int_bytes: [lo, hi]}}"
        )
    (kind, value), = spec.items()
    try:
        if kind == "constant_bytes":
            dist: Distribution = Constant(int(value))
        elif kind == "uniform_int_bytes":
            lo, hi = value
            dist = UniformInteger(int(lo), int(hi))
        else:
            raise ConfigError(f"{ctx}: unknown item_size kind '{kind}'")
        validate_size_dist(dist)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{ctx}: bad item_size: {exc}") from exc
    return dist


def _parse_clients(value, risk_set: frozenset[str], ctx: str) -> dict[str, int]:
    if isinstance(value, int) and not isinstance(value, bool):
        if value < 1:
            raise ConfigError(f"{ctx}: clients_per_dc must be >= 1")
        return {dc: value for dc in sorted(risk_set)}
    if isinstance(value, dict):
        out = {}
        for dc, count in value.items():
            if not isinstance(count, int) or isinstance(count, bool) or count < 1:
                raise ConfigError(f"{ctx}: client count for {dc} must be an integer >= 1")
            out[str(dc)] = count
        if not out:
            raise ConfigError(f"{ctx}: clients_per_dc map is empty")
        return out
    raise ConfigError(f"{ctx}: clients_per_dc must be an integer or a DC->count map")


def load_scenario(data: dict, ctx: str = "scenario") -> ScenarioSpec:
    if not isinstance(data, dict):
        raise ConfigError(f"{ctx}: top level must be a mapping")

    risk = data.get("risk_set")
    if not isinstance(risk, list) or not all(isinstance(x, str) for x in risk):
        raise ConfigError(f"{ctx}: risk_set must be a list of DC labels")
    risk_set = frozenset(risk)

    bandwidth = _require(data, "bandwidth_gbps", float, ctx)
    if bandwidth <= 0:
        raise ConfigError(f"{ctx}: bandwidth_gbps must be > 0")
    mean_ia = _require(data, "mean_interarrival_s", float, ctx)
    if mean_ia <= 0:
        raise ConfigError(f"{ctx}: mean_interarrival_s must be > 0")
    attack_at = _require(data, "attack_at_s", float, ctx)
    window = _require(data, "window_s", float, ctx)
    if attack_at <= 0:
        raise ConfigError(f"{ctx}: attack_at_s must be > 0")
    if not 0 < window <= attack_at:
        raise ConfigError(f"{ctx}: window_s must be in (0, attack_at_s]")

    policy = None
    if "policy" in data and data["policy"] is not None:
        try:
            policy = Policy.parse(str(data["policy"]))
        except ValueError as exc:
            raise ConfigError(f"{ctx}: {exc}") from exc

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"{ctx}: seed must be a non-negative integer")

    if "clients_per_dc" not in data:
        raise ConfigError(f"{ctx}: missing required key 'clients_per_dc'")
    clients = _parse_clients(data["clients_per_dc"], risk_set, ctx)

    return ScenarioSpec(
        topology_ref=str(data.get("topology", CANONICAL_TOPOLOGY)),
        bandwidth_gbps=bandwidth,
        clients_per_dc=clients,
        mean_interarrival_s=mean_ia,
        size_dist=parse_size_dist(
            data.get("item_size", {"constant_bytes": 1_500_000}), ctx
        ),
        attack_at_s=attack_at,
        window_s=window,
        risk_set=risk_set,
        policy=policy,
        seed=seed,
    )


def load_matrix(data: dict, ctx: str = "matrix") -> MatrixSpec:
    if not isinstance(data, dict):
        raise ConfigError(f"{ctx}: matrix section must be a mapping")
    bws = data.get("bandwidths_gbps")
    if not isinstance(bws, list) or not bws:
        raise ConfigError(f"{ctx}: bandwidths_gbps must be a non-empty list")
    try:
        bws_t = tuple(float(b) for b in bws)
    except (TypeError, ValueError):
        raise ConfigError(f"{ctx}: bandwidths_gbps must be numbers") from None
    if any(b <= 0 for b in bws_t):
        raise ConfigError(f"{ctx}: bandwidths must be > 0")

    clients = data.get("clients")
    if not isinstance(clients, list) or not clients:
        raise ConfigError(f"{ctx}: clients must be a non-empty list")
    if not all(isinstance(c, int) and not isinstance(c, bool) and c >= 1 for c in clients):
        raise ConfigError(f"{ctx}: client counts must be integers >= 1")

    policies = data.get("policies", ["sla", "lifo"])
    if not isinstance(policies, list) or not policies:
        raise ConfigError(f"{ctx}: policies must be a non-empty list")
    try:
        pols = tuple(Policy.parse(str(p)) for p in policies)
    except ValueError as exc:
        raise ConfigError(f"{ctx}: {exc}") from exc

    reps = data.get("replications", 6)
    if not isinstance(reps, int) or isinstance(reps, bool) or reps < 1:
        raise ConfigError(f"{ctx}: replications must be an integer >= 1")

    return MatrixSpec(
        bandwidths_gbps=bws_t,
        clients=tuple(clients),
        policies=pols,
        replications=reps,
    )


def load_config(path: str | Path) -> tuple[ScenarioSpec, MatrixSpec | None]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    scenario = load_scenario(data, ctx=str(path))
    matrix = None
    if "matrix" in data:
        matrix = load_matrix(data["matrix"], ctx=f"{path}: matrix")
    return scenario, matrix


def resolve_topology(ref: str, bandwidth_gbps: float, base_dir: Path | None = None) -> Topology:
    """Load the named topology and pin every link to the scenario bandwidth."""
    from .topology import GBPS, canonical_topology

    if ref == CANONICAL_TOPOLOGY:
        topo = canonical_topology()
    else:
        path = Path(ref)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        try:
            topo = Topology.from_file(path)
        except OSError as exc:
            raise ConfigError(f"cannot read topology {ref}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"topology {ref}: {exc}") from exc
    return topo.with_uniform_capacity(bandwidth_gbps * GBPS)


def bundled_config_path(name: str) -> Path:
    """Path of a config file shipped inside the package."""
    resource = importlib.resources.files("evacsim.data") / name
    with importlib.resources.as_file(resource) as p:
        return Path(p)


def scenario_with(spec: ScenarioSpec, **overrides) -> ScenarioSpec:
    return replace(spec, **overrides)
