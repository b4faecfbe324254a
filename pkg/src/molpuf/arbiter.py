"""Software arbiter: one response bit per challenge, L bits per signature."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .fabric import (ChallengeLike, EnvironmentCondition, PufInstance, apply_challenge,
                     as_challenge, perturb)
from .kinetics import IntegrationError, IntegratorConfig, integrate
from .mux import LOGIC_HIGH

# Absolute tolerance of 1e-6 nM (1e-8 of full scale) keeps crossing times
# within a few ns of a 1e-9 nM run at a fraction of the steps.
RACE_INTEGRATOR = IntegratorConfig(rtol=1e-6, atol=1e-6, record_every=0)


@dataclass(frozen=True)
class ArbiterConfig:
    mode: str = "race"  # or "difference"
    threshold: float = 50.0
    horizon: float | None = None  # None: 50 / min(rate) * N seconds
    integrator: IntegratorConfig = RACE_INTEGRATOR
    # relative width of the band treated as an exact tie (answered with 1);
    # absorbs roundoff asymmetry between mathematically identical paths
    tie_rtol: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("race", "difference"):
            raise ValueError(f"mode must be 'race' or 'difference', got {self.mode!r}")
        if not 0 < self.threshold < 100:
            raise ValueError("threshold must lie strictly between 0 and 100 nM")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 <= self.tie_rtol < 1e-3:
            raise ValueError("tie_rtol must lie in [0, 1e-3)")

    def horizon_for(self, puf: PufInstance) -> float:
        if self.horizon is not None:
            return self.horizon
        return 50.0 / float(puf.rates.min()) * puf.n_stages


class HorizonExhaustedError(IntegrationError):
    """Neither final output crossed the threshold within the horizon."""


@dataclass(frozen=True)
class Response:
    bit: int
    t_top: float  # inf when censored by the horizon
    t_bottom: float
    difference: float  # Z^t_1 - Z^b_1 (nM) at the first crossing


def evaluate_response(puf: PufInstance, challenge: ChallengeLike,
                      condition: EnvironmentCondition | None = None,
                      config: ArbiterConfig = ArbiterConfig()) -> Response:
    """Race the clock edge through ``puf`` and decide which output arrived first.

    Race mode answers 1 when the top output's logic-1 rail reaches the
    threshold no later than the bottom one.  Difference mode answers 1 when
    Z^t_1 - Z^b_1 >= 0 at the moment the first of them crosses.  Results
    within ``config.tie_rtol`` of a tie count as ties.
    """
    if condition is not None:
        puf = perturb(puf, condition)
    init = apply_challenge(puf, challenge)
    top, bot = puf.top[1], puf.bottom[1]
    integ = replace(config.integrator, max_horizon=config.horizon_for(puf))
    traj = integrate(puf.system, init, integ,
                     watch=[(top, config.threshold), (bot, config.threshold)], stop="all")
    et, eb = traj.event(top), traj.event(bot)
    if et is None and eb is None:
        final = traj.final
        raise HorizonExhaustedError(
            f"no output reached {config.threshold} nM within {integ.max_horizon:.3g}s",
            final.time, final.concentrations)
    t_top = et.time if et else math.inf
    t_bot = eb.time if eb else math.inf
    first = min(t_top, t_bot)
    diff = traj.value_at(top, first) - traj.value_at(bot, first)
    if config.mode == "race":
        bit = int(t_top <= t_bot or abs(t_top - t_bot) <= config.tie_rtol * first)
    else:
        bit = int(diff >= -config.tie_rtol * LOGIC_HIGH)
    return Response(bit, t_top, t_bot, diff)


class SignatureError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"challenge {index}: {cause}")
        self.index = index
        self.cause = cause


@dataclass
class ResponseSignature:
    bits: np.ndarray
    t_top: np.ndarray = field(repr=False)
    t_bottom: np.ndarray = field(repr=False)
    puf_id: int = 0
    condition_id: int = 0
    challenge_set_id: int = 0

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    def rows(self):
        for i, (b, tt, tb) in enumerate(zip(self.bits, self.t_top, self.t_bottom)):
            yield (self.puf_id, self.condition_id, i, int(b), repr(float(tt)), repr(float(tb)))


SIGNATURE_HEADER = ("puf_id", "condition_id", "challenge_index", "response", "t_top", "t_bottom")


def signatures_to_csv(signatures: Sequence[ResponseSignature], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for h in header:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIGNATURE_HEADER)
    for sig in signatures:
        w.writerows(sig.rows())
    return buf.getvalue()


def generate_signature(puf: PufInstance, challenges: Sequence[ChallengeLike],
                       condition: EnvironmentCondition | None = None,
                       config: ArbiterConfig = ArbiterConfig(),
                       puf_id: int = 0, challenge_set_id: int = 0) -> ResponseSignature:
    """Evaluate every challenge independently, each from a freshly reset state."""
    cid = 0 if condition is None else condition.condition_id
    if condition is not None:
        puf = perturb(puf, condition)
    challenges = [as_challenge(c, puf.n_stages) for c in challenges]
    bits = np.empty(len(challenges), dtype=np.uint8)
    tt = np.empty(len(challenges))
    tb = np.empty(len(challenges))
    for i, c in enumerate(challenges):
        try:
            r = evaluate_response(puf, c, None, config)
        except Exception as e:
            raise SignatureError(i, e) from e
        bits[i], tt[i], tb[i] = r.bit, r.t_top, r.t_bottom
    return ResponseSignature(bits, tt, tb, puf_id, cid, challenge_set_id)
