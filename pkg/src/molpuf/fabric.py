"""N-stage molecular MUX PUFs: synthesis, challenges and environmental noise.

Stage ``i`` holds a top and a bottom MUX sharing the select pair
``S_0@s<i>``/``S_1@s<i>``.  The top MUX takes (previous top, previous bottom)
as (A, B) and the bottom MUX takes them swapped, so a 0 challenge bit passes
both signals straight through and a 1 bit crosses them.  Stage 1 reads the
clock pair ``CLK_0``/``CLK_1`` on both inputs of both gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .crn import Crn, dual_rail, parse_crn, serialize_crn
from .kinetics import MassActionSystem, State, compile_crn
from .mux import LOGIC_HIGH, MuxPorts, MuxSpec, initial_output_state, synthesize_mux

REACTIONS_PER_MUX = 16
CLOCK = dual_rail("CLK")
PATHS = ("top", "bottom")

ChallengeLike = Union[str, Sequence[int], np.ndarray]


def as_challenge(c: ChallengeLike, n_stages: int | None = None) -> np.ndarray:
    """Bit vector C_1..C_N from a string like ``"1101"`` or a sequence of bits."""
    if isinstance(c, str):
        bits = np.array([int(ch) for ch in c.strip()], dtype=np.int8)
    else:
        bits = np.asarray(c).astype(np.int8)
    if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
        raise ValueError(f"challenge must be a vector of bits, got {c!r}")
    if n_stages is not None and len(bits) != n_stages:
        raise ValueError(f"challenge has {len(bits)} bits, PUF has {n_stages} stages")
    return bits


def select(stage: int) -> tuple[str, str]:
    return dual_rail("S", f"@s{stage}")


def output(stage: int, path: str) -> tuple[str, str]:
    return dual_rail("Z", f"@s{stage}{path[0]}")


@dataclass(frozen=True)
class EnvironmentCondition:
    condition_id: int
    rate_offsets: np.ndarray  # 2 x N, added to the per-MUX rates


def nominal_condition(n_stages: int) -> EnvironmentCondition:
    return EnvironmentCondition(0, np.zeros((2, n_stages)))


def draw_condition(rates: np.ndarray, sigma_s: float, rng: np.random.Generator,
                   condition_id: int = 0, relative: bool = False) -> EnvironmentCondition:
    """Gaussian offsets N(0, sigma_s^2) per MUX, redrawn where a rate would go nonpositive.

    With ``relative`` the offsets are fractions of each rate instead of
    absolute rate changes.
    """
    rates = np.asarray(rates, dtype=float)
    offsets = rng.normal(0.0, sigma_s, rates.shape)
    while True:
        new = rates * (1 + offsets) if relative else rates + offsets
        bad = new <= 0
        if not bad.any():
            break
        offsets[bad] = rng.normal(0.0, sigma_s, bad.sum())
    if relative:
        offsets = rates * offsets
    return EnvironmentCondition(condition_id, offsets)


def sample_rates(n_stages: int, rng: np.random.Generator, mu: float = 16.0,
                 sigma: float = 1.0) -> np.ndarray:
    """2 x N independent N(mu, sigma^2) rate constants, nonpositive draws redrawn."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rates = rng.normal(mu, sigma, (2, n_stages))
    while (bad := rates <= 0).any():
        if sigma == 0:
            raise ValueError("mu must be positive when sigma is 0")
        rates[bad] = rng.normal(mu, sigma, bad.sum())
    return rates


@dataclass(frozen=True, eq=False)
class PufInstance:
    n_stages: int
    rates: np.ndarray  # 2 x N: row 0 top path, row 1 bottom path
    crn: Crn
    seed: int | None = None
    reverse_rate: float = 1e5
    ports: dict = field(default_factory=dict, repr=False)

    @property
    def top(self) -> tuple[str, str]:
        return output(self.n_stages, "top")

    @property
    def bottom(self) -> tuple[str, str]:
        return output(self.n_stages, "bottom")

    @property
    def n_reactions(self) -> int:
        return len(self.crn.reactions)

    @cached_property
    def system(self) -> MassActionSystem:
        return compile_crn(self.crn)

    def to_text(self) -> str:
        return puf_to_text(self)


def synthesize_puf(n_stages: int, rates, seed: int | None = None,
                   reverse_rate: float = 1e5) -> PufInstance:
    rates = np.array(rates, dtype=float)
    if n_stages < 1:
        raise ValueError("need at least one stage")
    if rates.shape != (2, n_stages):
        raise ValueError(f"rates must have shape (2, {n_stages}), got {rates.shape}")
    if not (rates > 0).all():
        raise ValueError("all rates must be positive")
    rates.setflags(write=False)

    crn = Crn()
    ports = {}
    prev = {"top": CLOCK, "bottom": CLOCK}
    for i in range(1, n_stages + 1):
        cur = {}
        for row, path in enumerate(PATHS):
            spec = MuxSpec(i, path, rates[row, i - 1], reverse_rate)
            a, b = (prev["top"], prev["bottom"]) if path == "top" else (prev["bottom"], prev["top"])
            p = MuxPorts.for_instance(a, b, select(i), spec.suffix)
            synthesize_mux(spec, p, crn)
            ports[(i, path)] = p
            cur[path] = p.output
        prev = cur
    return PufInstance(n_stages, rates, crn, seed, reverse_rate, ports)


def apply_challenge(puf: PufInstance, challenge: ChallengeLike,
                    clock: int = 1) -> State:
    """Initial state for one authentication.

    Selects encode the challenge bits, the clock pair carries ``clock`` and
    every gate output starts at logic 0 with empty intermediates.
    """
    bits = as_challenge(challenge, puf.n_stages)
    x = np.zeros(len(puf.crn.species))
    idx = puf.crn.index
    x[idx(CLOCK[clock])] = LOGIC_HIGH
    for i, bit in enumerate(bits, start=1):
        x[idx(select(i)[bit])] = LOGIC_HIGH
    for p in puf.ports.values():
        for name, val in initial_output_state(p).items():
            x[idx(name)] = val
    return State(x, 0.0)


def perturb(puf: PufInstance, condition: EnvironmentCondition) -> PufInstance:
    """Copy of ``puf`` with each MUX rate shifted by the condition's offset."""
    offsets = np.asarray(condition.rate_offsets, dtype=float)
    if offsets.shape != puf.rates.shape:
        raise ValueError(f"offsets must have shape {puf.rates.shape}")
    if not offsets.any():
        return puf
    new = puf.rates + offsets
    if not (new > 0).all():
        raise ValueError("perturbed rates must stay positive")
    return synthesize_puf(puf.n_stages, new, puf.seed, puf.reverse_rate)


HEADER = "molpuf-puf"


def puf_to_text(puf: PufInstance) -> str:
    header = [f"{HEADER} n_stages={puf.n_stages} reverse_rate={puf.reverse_rate!r}",
              f"seed={puf.seed}",
              "rates_top=" + ",".join(repr(float(r)) for r in puf.rates[0]),
              "rates_bottom=" + ",".join(repr(float(r)) for r in puf.rates[1])]
    return serialize_crn(puf.crn, header)


def puf_from_text(text: str) -> PufInstance:
    """Rebuild an instance from :func:`puf_to_text` output and check the body matches."""
    meta = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            continue
        for tok in line[1:].split():
            key, eq, val = tok.partition("=")
            if eq:
                meta[key] = val
    if "n_stages" not in meta:
        raise ValueError(f"missing '{HEADER}' header")
    n = int(meta["n_stages"])
    rates = np.array([[float(v) for v in meta["rates_top"].split(",")],
                      [float(v) for v in meta["rates_bottom"].split(",")]])
    seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
    puf = synthesize_puf(n, rates, seed, float(meta.get("reverse_rate", 1e5)))
    if parse_crn(text) != puf.crn:
        raise ValueError("reaction list does not match the header's rates")
    return puf
