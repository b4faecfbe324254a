"""Command-line entry points (``python -m molpuf <command>``).

Exit status is 0 on success, 2 for usage or configuration errors and 1 for
simulation failures.  Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .fabric import puf_from_text, synthesize_puf
from .fixtures import PUBLISHED


class UsageError(ValueError):
    pass


# "8-stage PUF 1" -> "puf8-1"
FIXTURES = {re.sub(r"(\d+)-stage PUF (\d+)", r"puf\1-\2", k): k for k in PUBLISHED}


def _stages(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("stage counts must be positive")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="molpuf", description="Molecular MUX PUF experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--stages", type=_stages, help="stage count, or a comma list for sweep")
        sp.add_argument("--out", help="output directory (or file for synth)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        sp.add_argument("--mode", choices=("crn", "delay-model"))
        return sp

    common(sub.add_parser("synth", help="print the reaction network of a sampled PUF"))
    s = common(sub.add_parser("simulate", help="trace the final outputs for one challenge"))
    s.add_argument("--challenge", help="challenge bits, e.g. 11101010")
    s.add_argument("--puf", help="PUF text file written by synth")
    s.add_argument("--fixture", choices=sorted(FIXTURES), help="use a published fixture PUF")
    for name in ("reliability", "uniqueness", "sweep", "delay-model"):
        common(sub.add_parser(name))
    return p


def _config(args) -> harness.ExperimentConfig:
    cfg = harness.load_config(args.config) if args.config else harness.ExperimentConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.mode is not None:
        over["mode"] = args.mode
    if args.out is not None:
        over["output_dir"] = args.out
    if args.stages is not None:
        over["stages"] = args.stages
        over["n_stages"] = args.stages[0]
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return replace(cfg, **over)


def _synth(cfg, args):
    rates = harness.puf_rates(cfg, 0)
    text = synthesize_puf(cfg.n_stages, rates, cfg.seed).to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _simulate(cfg, args):
    if args.fixture:
        rates, challenge, _ = PUBLISHED[FIXTURES[args.fixture]]
        puf = synthesize_puf(len(challenge), rates)
    elif args.puf:
        puf = puf_from_text(Path(args.puf).read_text())
        challenge = None
    else:
        puf = synthesize_puf(cfg.n_stages, harness.puf_rates(cfg, 0), cfg.seed)
        challenge = None
    if args.challenge:
        challenge = args.challenge
    if challenge is None:
        challenge = harness.challenge_set(harness.ExperimentConfig(
            n_stages=puf.n_stages, L=1, seed=cfg.seed))[0]
    tr = harness.emit_traces(puf, challenge, None, cfg.arbiter, args.out)
    print(json.dumps({"response": tr.bit, "t_top": tr.t_top, "t_bottom": tr.t_bottom}))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "synth":
            _synth(cfg, args)
        elif args.command == "simulate":
            _simulate(cfg, args)
        else:
            kind = args.command
            if kind == "delay-model":
                cfg, kind = replace(cfg, mode="delay-model"), "sweep"
            if kind == "sweep":
                out = harness.sweep(cfg, cfg.stages, args.jobs)
            else:
                out = harness.run_experiment(cfg, kind, jobs=args.jobs)
            if not cfg.output_dir:
                sys.stdout.write(out.metrics_csv)
    except (harness.ConfigError, UsageError, ValueError, OSError) as e:
        _fail(e, 2)
        return 2
    except Exception as e:
        _fail(e, 1)
        return 1
    return 0


def _fail(e: Exception, code: int):
    err = {"error": type(e).__name__, "message": str(e), "exit_code": code}
    line = getattr(e, "line", None)
    if line is not None:
        err["line"] = line
    if isinstance(e, harness.ExperimentError):
        err["failures"] = [{"puf_id": f.puf_id, "condition_id": f.condition_id,
                            "challenge_index": f.challenge_index, "message": str(f)}
                           for f in e.failures]
    print(json.dumps(err), file=sys.stderr)
