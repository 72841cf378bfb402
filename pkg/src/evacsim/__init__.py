"""evacsim: priority-driven data evacuation from data centers under attack alert.

A deterministic discrete-event simulator. Clients store data at data
centers; when an attack on a set of DCs is detected, each threatened DC
drains its store to the nearest safe DC over shortest paths, ordered either
by SLA level or LIFO, until the attack destroys whatever remains. An
experiment harness sweeps bandwidth and client-count levels with paired
seeds across policies, and a 2^k factorial module splits the observed
variation among factors.
"""

__version__ = "0.1.0"

from .des import Constant, EventKind, EventLoop, ExponentialMean, UniformInteger, UniformReal
from .engine import Simulation
from .factorial import allocation_of_variation, effects, sign_table
from .metrics import ci95, evacuated_rate, summarize, volume_by_priority
from .policy import Policy, PriorityStore
from .topology import Topology, canonical_topology, nearest_safe_dc, shortest_path
from .workload import assign_sla

__all__ = [
    "__version__",
    "Constant",
    "EventKind",
    "EventLoop",
    "ExponentialMean",
    "UniformInteger",
    "UniformReal",
    "Simulation",
    "sign_table",
    "effects",
    "allocation_of_variation",
    "ci95",
    "evacuated_rate",
    "summarize",
    "volume_by_priority",
    "Policy",
    "PriorityStore",
    "Topology",
    "canonical_topology",
    "nearest_safe_dc",
    "shortest_path",
    "assign_sla",
]
