"""Mass-action ODEs, adaptive stiff integration and threshold-crossing events.

:func:`compile_crn` turns a :class:`~molpuf.crn.Crn` into flat arrays (a
:class:`MassActionSystem`) that the compiled Rodas4 stepper consumes.  The
system is immutable and can be reused across any number of
:func:`integrate` calls with different initial states.

The stepper is a fourth-order Rosenbrock method with an embedded
third-order error estimate, so it copes with the stiffness of fast
reversible binding (reverse rates around 1e5/s) next to slow catalytic
steps.  Species are reordered internally to keep the Jacobian banded.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import reverse_cuthill_mckee

from . import _rodas
from .crn import Crn


class IntegrationError(RuntimeError):
    def __init__(self, message: str, time: float, state: np.ndarray | None = None):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time
        self.state = state


class StepLimitError(IntegrationError):
    pass


class StepUnderflowError(IntegrationError):
    pass


class NoBracketError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-6
    atol: float = 1e-9
    max_horizon: float = 10.0
    max_steps: int = 200_000
    initial_step: float = 0.0  # 0 picks a starting step automatically
    record_every: int = 1  # keep every k-th accepted step; 0 keeps only endpoints

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.max_horizon > 0:
            raise ValueError("max_horizon must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def refined(self, factor: float = 0.5) -> IntegratorConfig:
        """Same configuration with both tolerances scaled by ``factor``."""
        return IntegratorConfig(self.rtol * factor, self.atol * factor, self.max_horizon,
                                self.max_steps, self.initial_step, self.record_every)


@dataclass
class State:
    concentrations: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class Event:
    species: str
    threshold: float
    time: float
    error_estimate: float = 0.0


@dataclass
class Trajectory:
    names: list[str]
    times: np.ndarray
    states: np.ndarray  # (samples, species)
    events: list[Event] = field(default_factory=list)
    n_steps: int = 0
    n_rejected: int = 0
    max_clamp: float = 0.0
    # watched-species values at the ends of each event's bracketing step
    brackets: dict = field(default_factory=dict, repr=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.states[:, self.names.index(name)]

    @property
    def final(self) -> State:
        return State(self.states[-1].copy(), float(self.times[-1]))

    def event(self, species: str) -> Event | None:
        for e in self.events:
            if e.species == species:
                return e
        return None

    def value_at(self, name: str, time: float) -> float:
        """Interpolated value of a watched species inside an event bracket."""
        for (t0, t1, vals) in self.brackets.values():
            if t0 <= time <= t1 and name in vals:
                x0, x1, f0, f1 = vals[name]
                return hermite(t0, t1, x0, x1, f0, f1, time)
        return float(np.interp(time, self.times, self[name]))

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", *self.names])
        for t, row in zip(self.times, self.states):
            w.writerow([repr(float(t)), *(repr(float(x)) for x in row)])
        for e in self.events:
            buf.write(f"# event,{e.species},{e.threshold!r},{e.time!r}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


@dataclass(frozen=True, eq=False)
class MassActionSystem:
    """Array form of a network, in the solver's internal species order.

    ``perm[p]`` is the original species index stored at internal position
    ``p``.  Reversible reactions appear as two irreversible ones.
    """

    names: tuple[str, ...]
    perm: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    k: np.ndarray
    net_ptr: np.ndarray
    net_idx: np.ndarray
    net_coef: np.ndarray
    jac_rxn: np.ndarray
    jac_slot: np.ndarray
    jac_pos: np.ndarray
    jac_coef: np.ndarray
    kl: int
    ku: int

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def to_internal(self, x: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(x[self.perm], dtype=float)

    def to_external(self, y: np.ndarray) -> np.ndarray:
        out = np.empty_like(y)
        out[..., self.perm] = y
        return out

    def rhs(self, x: np.ndarray) -> np.ndarray:
        y = self.to_internal(np.asarray(x, dtype=float))
        out = np.empty_like(y)
        _rodas.rhs(y, self.r1, self.r2, self.k, self.net_ptr, self.net_idx,
                   self.net_coef, np.empty(len(self.k)), out)
        return self.to_external(out)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Dense Jacobian in the original species order (for checks)."""
        y = self.to_internal(np.asarray(x, dtype=float))
        n = self.n
        ldab = 2 * self.kl + self.ku + 1
        ab = np.empty(ldab * n)
        _rodas.neg_jacobian_band(y, self.r1, self.r2, self.k, self.jac_rxn,
                                 self.jac_slot, self.jac_pos, self.jac_coef, ab)
        ab = -ab.reshape(n, ldab)
        kv = self.kl + self.ku
        J = np.zeros((n, n))
        for j in range(n):
            for i in range(max(0, j - self.ku), min(n, j + self.kl + 1)):
                J[i, j] = ab[j, kv + i - j]
        p = self.perm
        out = np.zeros((n, n))
        out[np.ix_(p, p)] = J
        return out


def compile_crn(crn: Crn, reorder: bool = True) -> MassActionSystem:
    n = len(crn.species)
    r1, r2, k, nets = [], [], [], []

    def add(reactants, products, rate):
        ids = [s for s, c in reactants for _ in range(c)]
        r1.append(ids[0] if ids else -1)
        r2.append(ids[1] if len(ids) > 1 else -1)
        k.append(rate)
        net: dict[int, int] = {}
        for s, c in reactants:
            net[s] = net.get(s, 0) - c
        for s, c in products:
            net[s] = net.get(s, 0) + c
        nets.append([(s, c) for s, c in net.items() if c])

    for r in crn.reactions:
        add(r.reactants, r.products, r.forward_rate)
        if r.reversible:
            add(r.products, r.reactants, r.reverse_rate)

    # sparsity of J: d(species i)/d(reactant a)
    pattern = set()
    for a_, b_, net in zip(r1, r2, nets):
        for a in (a_, b_):
            if a >= 0:
                for i, _ in net:
                    pattern.add((i, a))
    if reorder and n > 2 and pattern:
        rows = [i for i, a in pattern] + [a for i, a in pattern]
        cols = [a for i, a in pattern] + [i for i, a in pattern]
        g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        perm = np.asarray(reverse_cuthill_mckee(g, symmetric_mode=True), dtype=np.int64)
    else:
        perm = np.arange(n, dtype=np.int64)
    where = np.empty(n, dtype=np.int64)
    where[perm] = np.arange(n)

    kl = max([where[i] - where[a] for i, a in pattern], default=0)
    ku = max([where[a] - where[i] for i, a in pattern], default=0)
    kl, ku = max(int(kl), 0), max(int(ku), 0)
    kv = kl + ku

    r1i = np.array([where[s] if s >= 0 else -1 for s in r1], dtype=np.int64)
    r2i = np.array([where[s] if s >= 0 else -1 for s in r2], dtype=np.int64)
    net_ptr = np.zeros(len(nets) + 1, dtype=np.int64)
    net_idx, net_coef = [], []
    jac_rxn, jac_slot, jac_pos, jac_coef = [], [], [], []
    for r, net in enumerate(nets):
        net_ptr[r + 1] = net_ptr[r] + len(net)
        for s, c in net:
            net_idx.append(where[s])
            net_coef.append(float(c))
        for slot, a in ((0, r1i[r]), (1, r2i[r])):
            if a < 0:
                continue
            for s, c in net:
                i = where[s]
                jac_rxn.append(r)
                jac_slot.append(slot)
                jac_pos.append(a * (2 * kl + ku + 1) + kv + i - a)
                jac_coef.append(float(c))

    as_i = lambda x: np.asarray(x, dtype=np.int64)
    as_f = lambda x: np.asarray(x, dtype=float)
    return MassActionSystem(
        names=tuple(crn.names), perm=perm, r1=r1i, r2=r2i, k=as_f(k),
        net_ptr=net_ptr, net_idx=as_i(net_idx), net_coef=as_f(net_coef),
        jac_rxn=as_i(jac_rxn), jac_slot=as_i(jac_slot), jac_pos=as_i(jac_pos),
        jac_coef=as_f(jac_coef), kl=kl, ku=ku,
    )


SystemLike = Union[Crn, MassActionSystem]


def _system(crn: SystemLike) -> MassActionSystem:
    return crn if isinstance(crn, MassActionSystem) else compile_crn(crn)


def _vector(system: MassActionSystem, init) -> tuple[np.ndarray, float]:
    if isinstance(init, State):
        x, t = np.asarray(init.concentrations, dtype=float), float(init.time)
    elif isinstance(init, Mapping):
        x, t = np.zeros(system.n), 0.0
        for name, c in init.items():
            x[system.index(name)] = c
    else:
        x, t = np.asarray(init, dtype=float), 0.0
    if x.shape != (system.n,):
        raise ValueError(f"state has shape {x.shape}, network has {system.n} species")
    return x, t


def mass_action_rhs(crn: SystemLike, state) -> np.ndarray:
    """Time derivative of every species concentration under mass action."""
    system = _system(crn)
    x, _ = _vector(system, state)
    return system.rhs(x)


def hermite(t0, t1, x0, x1, f0, f1, t):
    """Cubic Hermite interpolant through (t0, x0, f0) and (t1, x1, f1)."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * x0 + h10 * h * f0 + h01 * x1 + h11 * h * f1


def refine_crossing(t0: float, t1: float, x0: float, x1: float, threshold: float,
                    f0: float | None = None, f1: float | None = None) -> float:
    """Time at which a species crosses ``threshold`` inside one step.

    With slopes ``f0``/``f1`` the cubic Hermite interpolant is used, otherwise
    the straight line between the two samples.
    """
    a, b = x0 - threshold, x1 - threshold
    if a == 0:
        return float(t0)
    if b == 0:
        return float(t1)
    if a * b > 0:
        raise NoBracketError(f"values {x0!r}, {x1!r} do not straddle {threshold!r}")
    if f0 is None or f1 is None:
        return float(t0 + (t1 - t0) * a / (a - b))
    g = lambda t: hermite(t0, t1, x0, x1, f0, f1, t) - threshold
    tol = 1e-3 * min(1e-6, 1e-6 * abs(t1))
    return float(brentq(g, t0, t1, xtol=max(tol, 1e-15), rtol=4 * np.finfo(float).eps))


Watch = Iterable[tuple[str, float]]


def integrate(crn: SystemLike, init, config: IntegratorConfig = IntegratorConfig(),
              watch: Watch = (), stop: str = "all") -> Trajectory:
    """Integrate from ``init`` for ``config.max_horizon`` seconds.

    ``watch`` lists (species, threshold) pairs whose first crossings are
    reported as events.  ``stop`` is ``"all"`` (stop once every watched
    species has crossed), ``"first"`` (stop at the first crossing) or
    ``"never"``.
    """
    system = _system(crn)
    x, t0 = _vector(system, init)
    watch = list(watch)
    for name, thr in watch:
        if not thr > 0:
            raise ValueError(f"threshold for {name} must be positive")
    widx = np.array([system.perm.tolist().index(system.index(s)) for s, _ in watch],
                    dtype=np.int64) if watch else np.zeros(0, dtype=np.int64)
    wthr = np.array([float(v) for _, v in watch])
    stop_mode = {"never": _rodas.STOP_NEVER, "first": _rodas.STOP_FIRST,
                 "all": _rodas.STOP_ALL}[stop]

    (status, t, y, nsteps, nrej, max_clamp, rec_t, rec_y, found, et0, et1,
     ew0, ew1, ef0, ef1, eerr) = _rodas.integrate_core(
        system.to_internal(x), t0, t0 + config.max_horizon, config.rtol, config.atol,
        config.initial_step, config.max_steps,
        system.r1, system.r2, system.k, system.net_ptr, system.net_idx, system.net_coef,
        system.jac_rxn, system.jac_slot, system.jac_pos, system.jac_coef,
        system.kl, system.ku, widx, wthr.reshape(-1) if watch else np.zeros(0),
        stop_mode, config.record_every,
    )
    if status == _rodas.STEP_LIMIT:
        raise StepLimitError(f"step limit {config.max_steps} reached", t, system.to_external(y))
    if status == _rodas.STEP_UNDERFLOW:
        raise StepUnderflowError("step size underflow", t, system.to_external(y))

    traj = Trajectory(list(system.names), rec_t.copy(), system.to_external(rec_y),
                      n_steps=int(nsteps), n_rejected=int(nrej), max_clamp=float(max_clamp))
    events = []
    for w, (name, thr) in enumerate(watch):
        if not found[w]:
            continue
        f0, f1 = ef0[w, w], ef1[w, w]
        tc = refine_crossing(et0[w], et1[w], ew0[w, w], ew1[w, w], thr, f0, f1)
        slope = abs(hermite_slope(et0[w], et1[w], ew0[w, w], ew1[w, w], f0, f1, tc))
        err = eerr[w] / slope if slope > 0 else math.inf
        events.append(Event(name, float(thr), tc, float(err)))
        traj.brackets[name] = (float(et0[w]), float(et1[w]), {
            s: (ew0[w, u], ew1[w, u], ef0[w, u], ef1[w, u]) for u, (s, _) in enumerate(watch)
        })
    traj.events = sorted(events, key=lambda e: e.time)
    return traj


def hermite_slope(t0, t1, x0, x1, f0, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    d00 = 6 * s * s - 6 * s
    d10 = 3 * s * s - 4 * s + 1
    d01 = -d00
    d11 = 3 * s * s - 2 * s
    return (d00 * x0 + d01 * x1) / h + d10 * f0 + d11 * f1


def conservation_laws(crn: Crn) -> np.ndarray:
    """Basis (rows) of linear combinations of species left unchanged by every reaction."""
    from scipy.linalg import null_space

    n = len(crn.species)
    cols = []
    for r in crn.reactions:
        col = np.zeros(n)
        for s, c in r.net().items():
            col[s] = c
        cols.append(col)
    if not cols:
        return np.eye(n)
    return null_space(np.array(cols)).T
