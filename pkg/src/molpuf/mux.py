"""Dual-rail 2-to-1 multiplexer as a 16-reaction network.

For inputs A, B, select S and output Z (each a dual-rail pair) the gate is

* four reversible bindings ``A_a + B_b <-> R`` (one complex per input pattern),
* eight catalytic select steps ``S_s + R -> S_s + A_a + B_b + Z'_z`` where
  ``z`` is the selected input's value (``a`` for s=0, ``b`` for s=1),
* four transfers ``Z'_z + Z_y -> Z_z`` that pull the output toward ``z``.

Every reaction of one gate shares a single forward rate.  Inputs and select
are regenerated by the select steps, so they can fan out to several gates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crn import Crn, dual_rail
from .kinetics import IntegratorConfig, integrate

LOGIC_HIGH = 100.0  # nM on the asserted rail
REVERSE_RATE = 1e5
PATTERNS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class MuxSpec:
    stage: int
    path: str  # "top" or "bottom"
    rate: float
    reverse_rate: float = REVERSE_RATE

    def __post_init__(self):
        if self.path not in ("top", "bottom"):
            raise ValueError(f"path must be 'top' or 'bottom', got {self.path!r}")
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def suffix(self) -> str:
        return f"@s{self.stage}{self.path[0]}"


Rails = tuple[str, str]


@dataclass(frozen=True)
class MuxPorts:
    """Rail names (logic-0, logic-1) wired to one gate.

    Inputs and select may be shared with other gates; the output rails and
    the private intermediates carry the instance ``suffix``.
    """

    a: Rails
    b: Rails
    s: Rails
    z: Rails
    suffix: str = ""

    @classmethod
    def for_instance(cls, a: Rails, b: Rails, s: Rails, suffix: str, z: str = "Z") -> MuxPorts:
        return cls(a, b, s, dual_rail(z, suffix), suffix)

    @property
    def output(self) -> Rails:
        return self.z

    @property
    def complexes(self) -> tuple[str, ...]:
        return tuple(f"R{j}{self.suffix}" for j in range(1, 5))

    @property
    def transients(self) -> Rails:
        return dual_rail("Z'", self.suffix)

    @property
    def internals(self) -> tuple[str, ...]:
        return self.complexes + self.transients


def synthesize_mux(spec: MuxSpec, ports: MuxPorts, crn: Crn) -> range:
    """Append the gate's 16 reactions to ``crn``; returns their indices.

    Input and select rails are registered on demand; the complexes, the
    transient outputs and the output rails must be new.
    """
    fresh = ports.internals + ports.output
    clash = [n for n in fresh if n in crn]
    if clash:
        raise ValueError(f"internal species already present: {', '.join(clash)}")
    a, b, s = ports.a, ports.b, ports.s
    for name in a + b + s:
        crn.species_named(name, create=True)
    for name in fresh:
        crn.add_species(name)
    r = ports.complexes
    zp = ports.transients
    z = ports.output
    k, kr = spec.rate, spec.reverse_rate

    start = len(crn.reactions)
    for (ia, ib), rj in zip(PATTERNS, r):
        crn.add_reaction([a[ia], b[ib]], [rj], k, kr)
    for sel in (0, 1):
        for (ia, ib), rj in zip(PATTERNS, r):
            out = ia if sel == 0 else ib
            crn.add_reaction([s[sel], rj], [s[sel], a[ia], b[ib], zp[out]], k)
    for val in (0, 1):
        crn.add_reaction([zp[val], z[1 - val]], [z[val]], k)
        crn.add_reaction([zp[val], z[val]], [z[val]], k)
    return range(start, len(crn.reactions))


def initial_output_state(ports: MuxPorts) -> dict[str, float]:
    """Output at logic 0 and every private species empty."""
    z0, z1 = ports.output
    state = {name: 0.0 for name in ports.internals}
    state[z0] = LOGIC_HIGH
    state[z1] = 0.0
    return state


def logic_inputs(signal: str, value: int) -> dict[str, float]:
    lo, hi = dual_rail(signal)
    return {lo: 0.0 if value else LOGIC_HIGH, hi: LOGIC_HIGH if value else 0.0}


class NotSettledError(RuntimeError):
    pass


def single_mux(rate: float = 16.0) -> tuple[Crn, MuxPorts]:
    spec = MuxSpec(1, "top", rate)
    ports = MuxPorts.for_instance(dual_rail("A"), dual_rail("B"), dual_rail("S"), spec.suffix)
    crn = Crn()
    synthesize_mux(spec, ports, crn)
    return crn, ports


def truth_table_eval(a: int, b: int, s: int, rate: float = 16.0,
                     config: IntegratorConfig = IntegratorConfig(),
                     settle: float = 90.0) -> int:
    """Simulate one gate with constant inputs and read the settled output."""
    crn, ports = single_mux(rate)
    init = {**logic_inputs("A", a), **logic_inputs("B", b), **logic_inputs("S", s),
            **initial_output_state(ports)}
    traj = integrate(crn, init, config)
    z0, z1 = (traj.final.concentrations[traj.names.index(n)] for n in ports.output)
    if max(z0, z1) < settle:
        raise NotSettledError(
            f"output not settled after {config.max_horizon}s: Z_0={z0:.3f}, Z_1={z1:.3f}")
    return int(z1 > z0)
