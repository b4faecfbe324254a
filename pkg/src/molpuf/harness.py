"""Seeded batch experiments: reliability, uniqueness, sweeps and traces.

Seeding scheme
--------------
Every random draw comes from ``numpy.random.SeedSequence(seed,
spawn_key=key)`` with a key fixed by *what* is drawn, never by when or
where it is drawn:

* ``(0, N, k)``     rates of PUF ``k`` (N stages)
* ``(1, N)``        the shared challenge set
* ``(2, N, k, j)``  environmental condition ``j`` of PUF ``k``
* ``(3, N)``        delay-model Monte Carlo

Condition ids start at 1.  Unless ``reference_condition = drawn``, condition 1
is the noise-free nominal condition and serves as the enrolment reference.
Outputs therefore depend only on (config, seed), not on the worker count.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import delay_model, metrics
from .arbiter import (ArbiterConfig, ResponseSignature, evaluate_response,
                      generate_signature, signatures_to_csv)
from .fabric import (ChallengeLike, EnvironmentCondition, PufInstance, as_challenge,
                     apply_challenge, draw_condition, perturb, sample_rates, synthesize_puf)
from .kinetics import IntegratorConfig, integrate
from .svg import histogram_plot, trace_plot

STREAM_RATES, STREAM_CHALLENGES, STREAM_CONDITIONS, STREAM_DELAY = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        if line is not None:
            where = f"{path or '<config>'}:{line}: "
        else:
            where = f"{path}: " if path else ""
        super().__init__(where + message)
        self.line = line
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    n_stages: int = 16
    K: int = 50
    L: int = 64
    m: int = 20
    mu: float = 16.0
    sigma: float = 1.0
    sigma_s: float = 0.05
    noise: str = "absolute"  # or "relative": offsets as fractions of each rate
    reference_condition: str = "nominal"  # or "drawn"
    divisor: str = "m-1"  # or "m"
    seed: int = 0
    mode: str = "crn"  # or "delay-model"
    stages: tuple[int, ...] = (8, 16, 32, 64)  # used by sweeps
    arbiter: ArbiterConfig = ArbiterConfig()
    output_dir: str | None = None

    def __post_init__(self):
        for name in ("n_stages", "K", "L", "m"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if any(n < 1 for n in self.stages) or not self.stages:
            raise ConfigError("stages must be a non-empty list of positive integers")
        if self.sigma < 0 or self.sigma_s < 0:
            raise ConfigError("standard deviations must be nonnegative")
        if not self.mu > 0:
            raise ConfigError("mu must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        checks = {"noise": ("absolute", "relative"), "reference_condition": ("nominal", "drawn"),
                  "divisor": ("m-1", "m"), "mode": ("crn", "delay-model")}
        for name, allowed in checks.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}")

    @property
    def integrator(self) -> IntegratorConfig:
        return self.arbiter.integrator

    def with_stages(self, n: int) -> ExperimentConfig:
        return replace(self, n_stages=n)

    def to_dict(self) -> dict:
        """Flat key/value view, the same keys the config file accepts."""
        a, i = self.arbiter, self.arbiter.integrator
        return {
            "n_stages": self.n_stages, "K": self.K, "L": self.L, "m": self.m,
            "mu": self.mu, "sigma": self.sigma, "sigma_s": self.sigma_s, "noise": self.noise,
            "reference_condition": self.reference_condition, "divisor": self.divisor,
            "seed": self.seed, "mode": self.mode, "stages": ",".join(map(str, self.stages)),
            "arbiter_mode": a.mode, "threshold": a.threshold,
            "horizon": "auto" if a.horizon is None else a.horizon,
            "rtol": i.rtol, "atol": i.atol, "max_steps": i.max_steps,
            "output_dir": self.output_dir or "",
        }

    def to_text(self) -> str:
        return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                       for k, v in self.to_dict().items())

    def digest(self) -> str:
        """SHA-256 over every setting that can influence results (not output_dir)."""
        d = self.to_dict()
        d.pop("output_dir")
        canon = "\n".join(f"{k}={v!r}" for k, v in sorted(d.items()))
        return hashlib.sha256(canon.encode()).hexdigest()


_INT = {"n_stages", "K", "L", "m", "seed", "max_steps"}
_FLOAT = {"mu", "sigma", "sigma_s", "threshold", "rtol", "atol"}
_STR = {"noise", "reference_condition", "divisor", "mode", "arbiter_mode", "output_dir"}
KEYS = _INT | _FLOAT | _STR | {"stages", "horizon"}


def _convert(key: str, raw: str):
    if key in _INT:
        return int(raw, 0)
    if key in _FLOAT:
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    if key == "stages":
        return tuple(int(s) for s in raw.replace(" ", "").split(",") if s)
    if key == "horizon":
        return None if raw.lower() in ("auto", "none", "") else float(raw)
    return raw


def build_config(values: dict, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    """Apply flat key/value overrides (already converted) onto ``base``."""
    unknown = set(values) - KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    top = {k: v for k, v in values.items() if k in {f.name for f in fields(ExperimentConfig)}}
    if top.get("output_dir") == "":
        top["output_dir"] = None
    a, i = base.arbiter, base.arbiter.integrator
    try:
        integ = replace(i, rtol=values.get("rtol", i.rtol), atol=values.get("atol", i.atol),
                        max_steps=values.get("max_steps", i.max_steps))
        arb = ArbiterConfig(mode=values.get("arbiter_mode", a.mode),
                            threshold=values.get("threshold", a.threshold),
                            horizon=values.get("horizon", a.horizon), integrator=integ)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return replace(base, arbiter=arb, **top)


def parse_config(text: str, path: str | None = None,
                 base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment)."""
    values = {}
    cfg = base
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not eq or not key:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, path)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        try:
            values[key] = _convert(key, raw)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {raw!r} ({e})", lineno, path) from None
        # validate as we go so errors point at the offending line
        try:
            cfg = build_config(values, base)
        except ValueError as e:
            raise ConfigError(str(e), lineno, path) from None
    return cfg


def load_config(path: str | os.PathLike, base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e.strerror}", None, str(p)) from None
    return parse_config(text, str(p), base)


# ---------------------------------------------------------------- seeding

def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def puf_rates(config: ExperimentConfig, k: int) -> np.ndarray:
    rng = spawn_rng(config.seed, STREAM_RATES, config.n_stages, k)
    return sample_rates(config.n_stages, rng, config.mu, config.sigma)


def challenge_set(config: ExperimentConfig) -> np.ndarray:
    rng = spawn_rng(config.seed, STREAM_CHALLENGES, config.n_stages)
    return rng.integers(0, 2, (config.L, config.n_stages)).astype(np.int8)


def condition(config: ExperimentConfig, k: int, j: int, rates: np.ndarray) -> EnvironmentCondition:
    if j == 1 and config.reference_condition == "nominal" or config.sigma_s == 0:
        return EnvironmentCondition(j, np.zeros_like(rates))
    rng = spawn_rng(config.seed, STREAM_CONDITIONS, config.n_stages, k, j)
    return draw_condition(rates, config.sigma_s, rng, j, config.noise == "relative")


# ---------------------------------------------------------------- tasks

@dataclass(frozen=True)
class SignatureTask:
    puf_id: int
    condition_id: int
    rates: np.ndarray
    offsets: np.ndarray
    challenges: np.ndarray
    arbiter: ArbiterConfig
    spawn_keys: tuple = ()

    def run(self) -> ResponseSignature:
        puf = synthesize_puf(self.rates.shape[1], self.rates)
        cond = EnvironmentCondition(self.condition_id, self.offsets)
        return generate_signature(puf, self.challenges, cond, self.arbiter, self.puf_id)


class TaskError(RuntimeError):
    def __init__(self, task: SignatureTask, cause: Exception):
        idx = getattr(cause, "index", None)
        at = f", challenge {idx}" if idx is not None else ""
        super().__init__(f"PUF {task.puf_id}, condition {task.condition_id}{at}: {cause}")
        self.puf_id, self.condition_id, self.challenge_index = task.puf_id, task.condition_id, idx
        self.cause = cause


class ExperimentError(RuntimeError):
    def __init__(self, failures: list[TaskError], partial: dict):
        super().__init__(f"{len(failures)} task(s) failed; first: {failures[0]}")
        self.failures = failures
        self.partial = partial


def _run(task: SignatureTask):
    try:
        return task.run()
    except Exception as e:  # reported per task, never silently dropped
        return TaskError(task, e)


def run_tasks(tasks: Sequence[SignatureTask], jobs: int = 1) -> list:
    """Results in task order; failures come back as TaskError values."""
    if jobs <= 1 or len(tasks) <= 1:
        return [_run(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run, tasks, chunksize=1))


def plan_tasks(config: ExperimentConfig, reliability: bool, uniqueness: bool) -> list[SignatureTask]:
    """Deduplicated tasks: the uniqueness run of PUF 0 doubles as a reliability condition."""
    ch = challenge_set(config)
    wanted = []
    if uniqueness:
        wanted += [(k, 1) for k in range(config.K)]
    if reliability:
        wanted += [(0, j) for j in range(1, config.m + 1)]
    tasks, seen, rates = [], set(), {}
    for k, j in wanted:
        if (k, j) in seen:
            continue
        seen.add((k, j))
        if k not in rates:
            rates[k] = puf_rates(config, k)
        cond = condition(config, k, j, rates[k])
        keys = ((STREAM_RATES, config.n_stages, k), (STREAM_CHALLENGES, config.n_stages),
                (STREAM_CONDITIONS, config.n_stages, k, j))
        tasks.append(SignatureTask(k, j, rates[k], cond.rate_offsets, ch, config.arbiter, keys))
    return tasks


# ---------------------------------------------------------------- results

@dataclass
class ReliabilityResult:
    n_stages: int
    signatures: list[ResponseSignature]
    intra: np.ndarray
    p_intra: float
    reliability: float
    stats: metrics.VariationStats


@dataclass
class UniquenessResult:
    n_stages: int
    signatures: list[ResponseSignature]
    inter: np.ndarray
    p_inter: float
    uniqueness: float
    stats: metrics.VariationStats
    fit: metrics.GaussianFit


def reliability_from(signatures: Sequence[ResponseSignature], n_stages: int,
                     divisor: str = "m-1") -> ReliabilityResult:
    bits = [s.bits for s in signatures]
    if len(bits) < 2:
        intra = np.zeros(1)
        p = 0.0
    else:
        intra = metrics.intra_distances(bits)
        p = metrics.p_intra(bits, divisor)
    return ReliabilityResult(n_stages, list(signatures), intra, p, metrics.reliability(p),
                             metrics.variation_stats(intra))


def uniqueness_from(signatures: Sequence[ResponseSignature], n_stages: int) -> UniquenessResult:
    bits = [s.bits for s in signatures]
    if len(bits) < 2:
        raise ValueError("uniqueness needs at least two PUFs (K >= 2)")
    inter = metrics.inter_distances(bits)
    p = metrics.p_inter(bits)
    return UniquenessResult(n_stages, list(signatures), inter, p, metrics.uniqueness(p),
                            metrics.variation_stats(inter), metrics.gaussian_fit(inter))


def _delay_signatures(config: ExperimentConfig, reliability: bool, uniqueness: bool):
    """Signatures from the linear delay model with the same ids and noise scale."""
    n = config.n_stages
    rng = spawn_rng(config.seed, STREAM_DELAY, n)
    phi = delay_model.features(challenge_set(config))
    nan = np.full(config.L, np.nan)
    K = config.K if uniqueness else 1
    d = rng.normal(0.0, config.sigma, (K, 2, n))
    base = d[:, 0] - d[:, 1]

    def sig(delta, k, j):
        return ResponseSignature((delta @ phi.T >= 0).astype(np.uint8), nan, nan, k, j)

    uniq = [sig(base[k], k, 1) for k in range(config.K)] if uniqueness else []
    rel = []
    if reliability:
        for j in range(1, config.m + 1):
            if j == 1 and config.reference_condition == "nominal":
                rel.append(sig(base[0], 0, 1))
                continue
            e = rng.normal(0.0, config.sigma_s, (2, n))
            rel.append(sig(base[0] + e[0] - e[1], 0, j))
    return rel, uniq


@dataclass
class RunManifest:
    experiment: str
    config: dict
    config_sha256: str
    seed: int
    seeding: str
    tasks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _header(config: ExperimentConfig, kind: str) -> list[str]:
    return [f"molpuf {kind} seed={config.seed} config_sha256={config.digest()}"]


METRICS_HEADER = "n_stages,metric,max,min,mean,reliability,uniqueness,feasible"


def metrics_rows(rel: ReliabilityResult | None, uniq: UniquenessResult | None) -> list[str]:
    feas = ""
    if rel is not None and uniq is not None:
        feas = str(metrics.feasible(rel.stats, uniq.stats)).lower()
    rows = []
    if rel is not None:
        s = rel.stats
        rows.append(f"{rel.n_stages},intra,{s.max!r},{s.min!r},{s.mean!r},{rel.reliability!r},,{feas}")
    if uniq is not None:
        s = uniq.stats
        rows.append(f"{uniq.n_stages},inter,{s.max!r},{s.min!r},{s.mean!r},,{uniq.uniqueness!r},{feas}")
    return rows


def metrics_csv(config: ExperimentConfig, kind: str, rows: Iterable[str]) -> str:
    return "".join(f"# {h}\n" for h in _header(config, kind)) + METRICS_HEADER + "\n" + \
        "".join(r + "\n" for r in rows)


def _evaluate(config: ExperimentConfig, reliability: bool, uniqueness: bool, jobs: int,
              manifest: RunManifest):
    """Signatures for one stage count, plus failures (empty on success)."""
    if config.mode == "delay-model":
        manifest.tasks.append({"n_stages": config.n_stages,
                               "spawn_key": [STREAM_DELAY, config.n_stages]})
        rel, uniq = _delay_signatures(config, reliability, uniqueness)
        return rel, uniq, []
    tasks = plan_tasks(config, reliability, uniqueness)
    t0 = time.perf_counter()
    out = run_tasks(tasks, jobs)
    manifest.timings[f"simulate_N{config.n_stages}_s"] = round(time.perf_counter() - t0, 3)
    manifest.tasks += [{"n_stages": config.n_stages, "puf_id": t.puf_id,
                        "condition_id": t.condition_id, "spawn_keys": [list(k) for k in t.spawn_keys]}
                       for t in tasks]
    done = {(t.puf_id, t.condition_id): r for t, r in zip(tasks, out)
            if isinstance(r, ResponseSignature)}
    failures = [r for r in out if isinstance(r, TaskError)]
    rel = [done[(0, j)] for j in range(1, config.m + 1) if (0, j) in done] if reliability else []
    uniq = [done[(k, 1)] for k in range(config.K) if (k, 1) in done] if uniqueness else []
    return rel, uniq, failures


SEEDING = ("SeedSequence(seed, spawn_key): (0,N,k) rates of PUF k; (1,N) challenge set; "
           "(2,N,k,j) condition j of PUF k; (3,N) delay model")


class _Writer:
    """Collects artifacts and writes them only after the directory is ready."""

    def __init__(self, out: str | None, manifest: RunManifest):
        self.out = Path(out) if out else None
        self.manifest = manifest
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str):
        if self.out is None:
            return
        (self.out / name).write_text(text)
        self.manifest.artifacts.append(name)

    def finish(self, name: str):
        if self.out is not None:
            (self.out / name).write_text(self.manifest.to_json())


@dataclass
class ExperimentOutcome:
    reliability: dict = field(default_factory=dict)  # n_stages -> ReliabilityResult
    uniqueness: dict = field(default_factory=dict)  # n_stages -> UniquenessResult
    metrics_csv: str = ""
    manifest: RunManifest | None = None


def run_experiment(config: ExperimentConfig, kind: str, stages: Sequence[int] | None = None,
                   jobs: int = 1) -> ExperimentOutcome:
    """Shared driver for ``reliability``, ``uniqueness`` and ``sweep``."""
    rel_on = kind in ("reliability", "sweep")
    uniq_on = kind in ("uniqueness", "sweep")
    if stages is None:
        stages = config.stages if kind == "sweep" else (config.n_stages,)
    manifest = RunManifest(kind, config.to_dict(), config.digest(), config.seed, SEEDING)
    if config.m > 200 or config.K > 200 or config.L > 200:
        manifest.notes.append("larger than the reference 200/200/200 scale")
    writer = _Writer(config.output_dir, manifest)
    outcome = ExperimentOutcome(manifest=manifest)
    rows = []
    t_all = time.perf_counter()
    for n in stages:
        cfg = config.with_stages(n)
        rel_sigs, uniq_sigs, failures = _evaluate(cfg, rel_on, uniq_on, jobs, manifest)
        sigs = uniq_sigs + [s for s in rel_sigs if not (uniq_on and s.puf_id == 0 and s.condition_id == 1)]
        writer.write(f"{kind}_N{n}_signatures.csv",
                     signatures_to_csv(sigs, _header(cfg, f"{kind}-signatures")))
        if failures:
            manifest.notes += [str(f) for f in failures]
            writer.write(f"{kind}_metrics.csv", metrics_csv(config, kind, rows))
            writer.finish(f"{kind}_manifest.json")
            raise ExperimentError(failures, {"reliability": rel_sigs, "uniqueness": uniq_sigs})
        rel = reliability_from(rel_sigs, n, config.divisor) if rel_on else None
        uniq = uniqueness_from(uniq_sigs, n) if uniq_on else None
        if rel is not None:
            outcome.reliability[n] = rel
        if uniq is not None:
            outcome.uniqueness[n] = uniq
            writer.write(f"{kind}_N{n}_histogram.svg", histogram_plot(
                [("inter-chip", uniq.inter)] + ([("intra-chip", rel.intra)] if rel else []),
                fits=[(uniq.fit.mean, uniq.fit.std)],
                title=f"{n}-stage PUF: inter-chip Hamming distance"))
        rows += metrics_rows(rel, uniq)
    outcome.metrics_csv = metrics_csv(config, kind, rows)
    manifest.timings["total_s"] = round(time.perf_counter() - t_all, 3)
    writer.write(f"{kind}_metrics.csv", outcome.metrics_csv)
    writer.finish(f"{kind}_manifest.json")
    return outcome


def run_reliability_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentOutcome:
    return run_experiment(config, "reliability", jobs=jobs)


def run_uniqueness_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentOutcome:
    return run_experiment(config, "uniqueness", jobs=jobs)


def sweep(config: ExperimentConfig, stages: Sequence[int] | None = None, jobs: int = 1) -> ExperimentOutcome:
    return run_experiment(config, "sweep", stages, jobs)


# ---------------------------------------------------------------- traces

@dataclass
class TraceResult:
    bit: int
    t_top: float
    t_bottom: float
    times: np.ndarray
    top: np.ndarray
    bottom: np.ndarray
    csv: str
    svg: str


def emit_traces(puf: PufInstance, challenge: ChallengeLike,
                condition: EnvironmentCondition | None = None,
                config: ArbiterConfig = ArbiterConfig(), out_dir: str | None = None,
                stem: str = "trace") -> TraceResult:
    """Final-stage Z_1 traces of both paths with the threshold and a zoomed inset."""
    if condition is not None:
        puf = perturb(puf, condition)
    bits = as_challenge(challenge, puf.n_stages)
    r = evaluate_response(puf, bits, None, config)
    finite = [t for t in (r.t_top, r.t_bottom) if math.isfinite(t)]
    horizon = 1.5 * max(finite)
    integ = replace(config.integrator, max_horizon=horizon, record_every=1)
    top, bot = puf.top[1], puf.bottom[1]
    traj = integrate(puf.system, apply_challenge(puf, bits), integ, stop="never")
    zt, zb = traj[top], traj[bot]

    buf = io.StringIO()
    buf.write(f"# molpuf trace n_stages={puf.n_stages} challenge={''.join(map(str, bits))} "
              f"response={r.bit} t_top={r.t_top!r} t_bottom={r.t_bottom!r}\n")
    buf.write(f"time,{top},{bot}\n")
    for t, a, b in zip(traj.times, zt, zb):
        buf.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")

    first, last = min(finite), max(finite)
    half = max(4 * (last - first), 0.02 * first, 1e-6)
    svg = trace_plot(traj.times, [(f"{top} (top)", zt), (f"{bot} (bottom)", zb)],
                     threshold=config.threshold, inset=(first - half, first + half),
                     title=f"{puf.n_stages}-stage PUF, challenge {''.join(map(str, bits))}",
                     note=f"R={r.bit}")
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{stem}.csv").write_text(buf.getvalue())
        (d / f"{stem}.svg").write_text(svg)
    return TraceResult(r.bit, r.t_top, r.t_bottom, traj.times, zt, zb, buf.getvalue(), svg)
