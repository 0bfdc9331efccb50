"""Command-line front end.

Every subcommand writes a CSV of samples and a JSON summary. Values come
from flags first, then from an optional ``--config`` file of ``key = value``
lines, then from built-in defaults.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    ExperimentConfig,
    brownian_range_reference,
    edim_pipeline,
    ks_statistic,
    lemma4_diagnostic,
    local_time_experiment,
    run_complexity_experiment,
    run_range_experiment,
    small_instance_suite,
    stable_range_reference,
)
from .hyperspace import HyperSet
from .stable_laws import DomainError

EXIT_USAGE = 2
EXIT_IO = 3

DEFAULTS = {
    "family": None,  # inferred from alpha
    "alpha": 2.0,
    "laziness": 0.5,
    "zero_mass": 0.2,
    "probs": "0.5,0.5",
    "n": None,
    "n_grid": "100000",
    "trials": 1000,
    "epsilons": "0.1",
    "seed": 0,
    "interval": "-0.5:0.5",
    "steps": 100000,
    "threshold": 0.5,
    "kappa": None,
    "instances": 1000,
    "reference_trials": None,
    "out": None,
    "summary": None,
}
_INT_KEYS = {"trials", "seed", "steps", "instances", "n", "kappa", "reference_trials"}
_FLOAT_KEYS = {"alpha", "laziness", "zero_mass", "threshold"}


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    master_seed: int
    config_digest: str
    tool_version: str = __version__
    outputs: list[str] = field(default_factory=list)
    wall_clock: float | None = None


class UsageError(Exception):
    pass


# --- parsing -----------------------------------------------------------------

def read_config_file(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    return value


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in _floats(text))


def _intervals(text: str) -> HyperSet:
    try:
        pairs = [tuple(float(v) for v in part.split(":")) for part in str(text).split(",")]
        if any(len(p) != 2 for p in pairs):
            raise ValueError
    except ValueError as exc:
        raise UsageError(f"intervals are written lo:hi[,lo:hi...], got {text!r}") from exc
    return HyperSet.union_of(pairs)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rwrs", description="Random walk in random scenery laboratory")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name, help_ in [
        ("range", "scaled range samples #V_n / a(n)"),
        ("complexity", "log2 Phi samples and sandwich bounds"),
        ("localtime", "minimal scaled local time over a set"),
        ("edim", "entropy-dimension slope over an n grid"),
        ("reference", "reference range distribution"),
        ("lemma4", "dyadic signature classes and theta-event rates"),
        ("smalltest", "exhaustive checks on small instances"),
    ]:
        s = sub.add_parser(name, help=help_, argument_default=None)
        s.add_argument("--config", help="key = value file; flags override it")
        s.add_argument("--family", choices=["lazy", "pareto"])
        s.add_argument("--alpha")
        s.add_argument("--laziness")
        s.add_argument("--zero-mass", dest="zero_mass")
        s.add_argument("--probs", help="scenery probabilities, comma-separated")
        s.add_argument("--n", help="window length (overrides --n-grid)")
        s.add_argument("--n-grid", dest="n_grid", help="comma-separated window lengths")
        s.add_argument("--trials")
        s.add_argument("--epsilons", "--epsilon", dest="epsilons")
        s.add_argument("--seed")
        s.add_argument("--interval", help="set E as lo:hi[,lo:hi...]")
        s.add_argument("--steps", help="reference walk length")
        s.add_argument("--threshold", help="admissibility threshold")
        s.add_argument("--kappa", help="dyadic order (default: smallest reaching 90%% coverage)")
        s.add_argument("--instances", help="number of random small instances")
        s.add_argument("--reference-trials", dest="reference_trials")
        s.add_argument("--out", help="CSV output path")
        s.add_argument("--summary", help="JSON summary path (default: CSV path with .json)")
    return p


def resolve(args: argparse.Namespace) -> dict:
    values = dict(DEFAULTS)
    if args.config:
        values.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return {k: _coerce(k, v) for k, v in values.items()}


def make_config(sub: str, v: dict) -> ExperimentConfig:
    alpha = v["alpha"]
    if not 1 < alpha <= 2:
        raise DomainError(f"alpha must lie in (1, 2], got {alpha}")
    family = v["family"] or ("lazy" if alpha == 2 else "pareto")
    n_grid = (v["n"],) if v["n"] is not None else _ints(v["n_grid"])
    return ExperimentConfig(
        kind=sub, family=family, laziness=v["laziness"], alpha=alpha, zero_mass=v["zero_mass"],
        probs=_floats(v["probs"]), n_grid=n_grid, trials=v["trials"], epsilons=_floats(v["epsilons"]),
        master_seed=v["seed"],
    )


# --- output ------------------------------------------------------------------

def _extras(sub: str, v: dict) -> dict:
    keys = {
        "range": ["reference_trials"],
        "localtime": ["interval"],
        "reference": ["steps"],
        "lemma4": ["threshold", "kappa"],
        "smalltest": ["instances"],
    }.get(sub, [])
    return {k: v[k] for k in keys}


def digest_of(resolved: dict) -> str:
    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_csv(path: Path, manifest: RunManifest, columns: list[str], rows) -> None:
    lines = [
        f"# tool=rwrs {manifest.tool_version}",
        f"# subcommand={manifest.subcommand}",
        f"# config_digest={manifest.config_digest}",
        f"# seed={manifest.master_seed}",
        "# config=" + json.dumps(manifest.config, sort_keys=True, separators=(",", ":")),
        ",".join(columns),
    ]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv_manifest(path) -> RunManifest:
    """Parse the comment header of a CSV written by this tool."""
    head = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            head[key] = value
    config = json.loads(head["config"])
    return RunManifest(
        subcommand=head["subcommand"],
        config=config,
        master_seed=int(head["seed"]),
        config_digest=head["config_digest"],
        tool_version=head["tool"].split()[-1],
        outputs=[str(path)],
    )


def read_csv_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8") as fh:
        body = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    return body[0].split(","), [ln.split(",") for ln in body[1:] if ln]


def _summary(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=float)
    return {
        "mean": float(v.mean()),
        "median": float(np.median(v)),
        "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "n_samples": int(v.size),
    }


# --- subcommands ------------------------------------------------------------------

def _run_range(cfg, v):
    d = run_range_experiment(cfg)
    out = _summary(d.by_trial)
    if cfg.alpha == 2:
        ref = brownian_range_reference(max(cfg.n_grid[-1], 10_000), v["reference_trials"] or cfg.trials,
                                       cfg.master_seed)
        out["ks_vs_reference"] = ks_statistic(d, ref)
        out["reference"] = "brownian"
    rows = [(t, s) for t, s in enumerate(d.by_trial.tolist())]
    return ["trial", "sample"], rows, out


def _run_complexity(cfg, v):
    run = run_complexity_experiment(cfg)
    rows = []
    for t in range(cfg.trials):
        for eps in cfg.epsilons:
            lp = float(run.log2_phi[eps][t])
            rows.append((t, eps, int(run.range_sizes[t]), lp, lp / run.a_n,
                         max(lp - run.log2_q_upper[eps], 0.0)))
    first = cfg.epsilons[0]
    out = _summary(run.scaled[first].by_trial)
    out["per_epsilon"] = {
        repr(e): dict(_summary(run.scaled[e].by_trial), log2_q_upper=run.log2_q_upper[e]) for e in cfg.epsilons
    }
    out["a_n"] = run.a_n
    return ["trial", "epsilon", "range_size", "log2_phi", "scaled", "sandwich_lo"], rows, out


def _run_localtime(cfg, v):
    d = local_time_experiment(cfg, _intervals(v["interval"]))
    return ["trial", "sample"], [(t, s) for t, s in enumerate(d.by_trial.tolist())], _summary(d.by_trial)


def _run_edim(cfg, v):
    res = edim_pipeline(cfg)
    out = _summary(np.array([p[1] for p in res.points]))
    out["slope"] = res.slope
    out["target"] = 1 / cfg.alpha
    return ["n", "median_log2_phi"], list(res.points), out


def _run_reference(cfg, v):
    steps = v["steps"]
    if cfg.alpha == 2:
        d = brownian_range_reference(steps, cfg.trials, cfg.master_seed)
    else:
        d = stable_range_reference(cfg.alpha, steps, cfg.trials, cfg.master_seed, cfg.zero_mass)
    out = _summary(d.by_trial)
    out["reference"] = d.provenance[0]
    return ["trial", "sample"], [(t, s) for t, s in enumerate(d.by_trial.tolist())], out


def _run_lemma4(cfg, v):
    rep = lemma4_diagnostic(cfg, v["threshold"], kappa=v["kappa"])
    rows = [(i, size, theta, freq) for i, (size, theta, freq) in enumerate(rep.class_frequencies)]
    out = _summary(np.array([r[3] for r in rows]))
    out.update(kappa=rep.kappa, classes=rep.classes, admissible_coverage=rep.admissible_coverage,
               mass_in_good_classes=rep.mass_in_good_classes,
               admissible_mass_in_good_classes=rep.admissible_mass_in_good_classes)
    return ["class", "size", "theta", "frequency"], rows, out


def _run_smalltest(cfg, v):
    res = small_instance_suite(v["instances"], cfg.master_seed)
    rows = [(r.index, r.kind, r.passed) for r in res]
    passed = np.array([r.passed for r in res], dtype=float)
    out = _summary(passed)
    out["failures"] = int((passed == 0).sum())
    return ["instance", "check", "passed"], rows, out


RUNNERS = {
    "range": _run_range,
    "complexity": _run_complexity,
    "localtime": _run_localtime,
    "edim": _run_edim,
    "reference": _run_reference,
    "lemma4": _run_lemma4,
    "smalltest": _run_smalltest,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        v = resolve(args)
        cfg = make_config(args.subcommand, v)
    except OSError as exc:
        print(f"rwrs: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, DomainError, ValueError) as exc:
        print(f"rwrs: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    resolved = dict(cfg.to_dict(), **_extras(args.subcommand, v))
    manifest = RunManifest(args.subcommand, resolved, cfg.master_seed, digest_of(resolved))
    try:
        columns, rows, summary = RUNNERS[args.subcommand](cfg, v)
    except (UsageError, DomainError) as exc:
        print(f"rwrs: {exc}", file=sys.stderr)
        return EXIT_USAGE

    csv_path = Path(v["out"] or f"{args.subcommand}.csv")
    json_path = Path(v["summary"]) if v["summary"] else csv_path.with_suffix(".json")
    manifest.outputs = [str(csv_path), str(json_path)]
    manifest.wall_clock = time.perf_counter() - t0
    summary.update(config_digest=manifest.config_digest, seed=manifest.master_seed,
                   manifest=manifest.__dict__)
    try:
        write_csv(csv_path, manifest, columns, rows)
        json_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n",
                             encoding="utf-8")
    except OSError as exc:
        print(f"rwrs: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.subcommand == "smalltest" and summary["failures"]:
        print(f"rwrs: {summary['failures']} small-instance checks failed", file=sys.stderr)
        return 1
    return 0


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o) if math.isfinite(o) else None
    raise TypeError(type(o).__name__)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
