"""Config-driven command line: build, analyze, mc, harness, family, fixtures.

Every run reads one INI config (plus ``section.key=value`` overrides),
writes its outputs under the configured directory, and finishes with a
manifest recording the config hash, package version, stage timings and
the produced files.  Numeric outputs are deterministic for a fixed config
and seed; only the manifest timings vary between reruns.

Exit codes: 0 success, 1 a checked bound failed or a stage aborted,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__, exact, fixtures, graphs, harness, mc
from .config import ExperimentConfig, load_config
from .errors import BottlewalkError, ConfigError


def _jsonable(obj):
    """Make reports JSON-serializable without losing float precision."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and (obj != obj):  # NaN has no JSON literal
        return None
    return obj


class Run:
    """Output directory, manifest bookkeeping and stage timing for one run."""

    def __init__(self, command: str, cfg: ExperimentConfig, overrides):
        self.cfg = cfg
        self.dir = Path(cfg.directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.manifest = {
            "command": command,
            "config_hash": cfg.hash(),
            "version": __version__,
            "overrides": list(overrides),
            "stages": {},
            "outputs": [],
            "errors": [],
            "partial": False,
        }
        self._stage = None
        self._t0 = 0.0

    def start(self, stage: str):
        self._stage = stage
        self._t0 = time.perf_counter()

    def stop(self):
        if self._stage is not None:
            self.manifest["stages"][self._stage] = time.perf_counter() - self._t0
            self._stage = None

    def fail(self, err: BaseException):
        self.stop()
        stage = self._stage or "run"
        self.manifest["errors"].append(f"[{stage}] {err}")
        self.manifest["partial"] = True

    def path(self, suffix: str) -> Path:
        return self.dir / f"{self.cfg.prefix}-{suffix}"

    def record(self, path: Path) -> Path:
        name = path.name
        if name not in self.manifest["outputs"]:
            self.manifest["outputs"].append(name)
        return path

    def write_json(self, suffix: str, payload: dict) -> Path:
        path = self.path(suffix)
        body = {"config_hash": self.cfg.hash(), **payload}
        with open(path, "w") as fh:
            json.dump(_jsonable(body), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return self.record(path)

    def finish(self) -> None:
        self.stop()
        path = self.path("manifest.json")
        with open(path, "w") as fh:
            json.dump(_jsonable(self.manifest), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _build_graph(cfg: ExperimentConfig) -> graphs.RegionTaggedGraph:
    if cfg.fixture is not None:
        return fixtures.build_fixture(cfg.fixture)
    if cfg.paradigm is None or cfg.params is None:
        raise ConfigError("config selects neither paradigm.fixture nor paradigm.paradigm")
    builder = {
        1: graphs.build_paradigm1,
        2: graphs.build_paradigm2,
        3: graphs.build_paradigm3,
    }[cfg.paradigm]
    return builder(cfg.params)


def _slow_set(g: graphs.RegionTaggedGraph) -> np.ndarray:
    return harness._slow_vertices(g, g.marks)


def cmd_build(run: Run) -> int:
    run.start("build")
    g = _build_graph(run.cfg)
    violations = graphs.validate_regions(g)
    edge_path = run.path("edges.txt")
    graphs.write_edge_list(g, edge_path)
    run.record(edge_path)
    sidecar = run.path("regions.txt")
    graphs.write_region_sidecar(g, sidecar)
    run.record(sidecar)
    run.write_json(
        "build.json",
        {
            "vertices": g.n,
            "edges": int(g.edge_array().shape[0]),
            "tagged": g.marks is not None,
            "violations": violations,
        },
    )
    run.stop()
    return 1 if violations else 0


def cmd_analyze(run: Run) -> int:
    cfg = run.cfg
    run.start("build")
    g = _build_graph(cfg)
    run.stop()

    failed = False
    run.start("exact")
    target = cfg.analysis.epsilon if cfg.analysis.epsilon is not None else 0.25
    profile = exact.profile_to_target(g, target, laziness=cfg.laziness, budget=cfg.exact_budget)
    prof_path = run.path("profile.csv")
    exact.profile_to_csv(profile, prof_path)
    run.record(prof_path)
    summary = {
        "laziness": cfg.laziness,
        "target": target,
        "t_mix": int(profile.mixing_time(target)),
        "horizon": int(profile.d.size - 1),
    }

    if g.marks is not None:
        moments = exact.hitting_moments(g, [g.marks.origin], laziness=cfg.laziness)
        mom_path = run.path("moments.csv")
        exact.moments_to_csv(moments, mom_path)
        run.record(mom_path)

        slow = _slow_set(g)
        report = exact.bottleneck_report(g, slow, laziness=cfg.laziness)
        summary["bottleneck"] = {
            "mass": report.mass,
            "flow_ratio": report.flow_ratio,
        }
        horizon = min(int(profile.d.size - 1), 200)
        restricted = exact.restricted_evolution_check(
            g, slow, horizon, laziness=cfg.laziness, budget=cfg.exact_budget
        )
        res_path = run.path("restricted.csv")
        exact.restricted_to_csv(restricted, res_path)
        run.record(res_path)
        n_viol = int(np.sum(restricted.violations))
        summary["restricted_violations"] = n_viol
        failed = failed or n_viol > 0

    run.write_json("analyze.json", summary)
    run.stop()
    return 1 if failed else 0


def cmd_mc(run: Run) -> int:
    cfg = run.cfg
    run.start("build")
    g = _build_graph(cfg)
    run.stop()
    if g.marks is None:
        raise ConfigError("mc runs need a region-tagged graph (fixture or paradigm)")

    run.start("mc")
    stats = mc.hitting_time_stats(
        g, g.marks.far_start, [g.marks.origin], cfg.laziness, cfg.rng,
        cfg.samples, cap=cfg.step_cap,
    )
    samples_path = run.path("hits.csv")
    mc.dump_samples_csv(samples_path, stats.times, "hitting_time")
    run.record(samples_path)

    law = mc.core_return_law(g, cfg.rng, cfg.samples)
    run.write_json(
        "mc.json",
        {
            "seed": cfg.rng.seed,
            "threads": cfg.rng.threads,
            "samples": cfg.samples,
            "hit_mean": stats.mean,
            "hit_se": stats.se,
            "hit_variance": stats.variance,
            "incomplete": stats.n_incomplete,
            "return_law": {
                "gateway_distance": law.gateway_distance,
                "cdf_at_distance": law.cdf_at_distance,
                "reference_value": law.reference_value,
                "mean_count": law.stats.mean,
            },
        },
    )
    run.stop()
    return 0


def cmd_harness(run: Run) -> int:
    cfg = run.cfg
    run.start("build")
    g = _build_graph(cfg)
    run.stop()
    if g.marks is None:
        raise ConfigError("harness runs need a region-tagged graph")

    run.start("exact")
    hitting = harness.collect_hitting_summary(g, laziness=cfg.laziness, budget=cfg.exact_budget)
    run.stop()
    run.start("mc")
    returns = harness.collect_return_summary(
        g, laziness=cfg.laziness, rng=cfg.rng, n_samples=cfg.samples
    )
    run.stop()

    run.start("harness")
    report = harness.evaluate_regime(g, hitting, returns, cfg.analysis, budget=cfg.exact_budget)
    # outside the admissible-range regime the report has no epsilon; the
    # profile then targets the conventional quarter
    eps = report.epsilon if report.epsilon is not None else 0.25
    t_mix = None
    try:
        profile = exact.profile_to_target(
            g, eps, laziness=cfg.laziness, budget=cfg.exact_budget
        )
        t_mix = int(profile.mixing_time(eps))
        prof_path = run.path("profile.csv")
        exact.profile_to_csv(profile, prof_path)
        run.record(prof_path)
        report = harness.evaluate_regime(
            g, hitting, returns, cfg.analysis, t_mix_exact=t_mix, budget=cfg.exact_budget
        )
    except BottlewalkError as err:
        run.manifest["errors"].append(f"[harness] exact profile skipped: {err}")
        run.manifest["partial"] = True
    run.write_json("regime.json", {"report": report})

    # the lower bound is a hard assertion; the upper side is asymptotic
    # and only recorded (with factor-2 slack) when it looks off
    failed = False
    if t_mix is not None and report.verdict != "none":
        if report.verdict == "direct":
            lo, hi = report.lower_direct, report.upper_direct
        else:
            lo, hi = report.lower_contracted, report.upper_contracted
        if lo is not None and t_mix < lo - 1e-9:
            failed = True
        if hi is not None and t_mix > 2.0 * hi:
            run.manifest["errors"].append(
                f"[harness] t_mix={t_mix} exceeds twice the upper bound {hi:.6g}"
            )
    run.stop()
    return 1 if failed else 0


def cmd_family(run: Run) -> int:
    cfg = run.cfg
    if cfg.paradigm not in (None, 2) or cfg.fixture is not None:
        raise ConfigError("family runs use the built-in scaled paradigm-2 family")
    ks = cfg.family if cfg.family else [2, 3, 4]
    if len(ks) < 2:
        raise ConfigError("a family needs at least two k values")

    run.start("build")
    members, ks = fixtures.cutoff_family(ks)
    run.stop()

    run.start("family")
    diag = harness.cutoff_diagnostic(
        members, ks, laziness=cfg.laziness, epsilon=cfg.analysis.epsilon,
        budget=cfg.exact_budget,
    )
    csv_path = run.path("cutoff.csv")
    harness.cutoff_to_csv(diag, csv_path)
    run.record(csv_path)
    run.write_json("family.json", {"diagnostic": diag})
    run.stop()
    return 1 if any(r < 1.0 for r in diag.ratios) else 0


def cmd_fixtures() -> int:
    for name, description in fixtures.list_fixtures():
        print(f"{name}: {description}")
    return 0


_COMMANDS = {
    "build": cmd_build,
    "analyze": cmd_analyze,
    "mc": cmd_mc,
    "harness": cmd_harness,
    "family": cmd_family,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bottlewalk",
        description="random-walk mixing experiments on bottlenecked graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="INI experiment config")
        p.add_argument(
            "overrides", nargs="*", metavar="section.key=value",
            help="config overrides applied after the file",
        )
    sub.add_parser("fixtures")

    args = parser.parse_args(argv)
    if args.command == "fixtures":
        return cmd_fixtures()

    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    run = Run(args.command, cfg, args.overrides)
    try:
        code = _COMMANDS[args.command](run)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except BottlewalkError as err:
        run.fail(err)
        print(f"error: {run.manifest['errors'][-1]}", file=sys.stderr)
        run.finish()
        return 1
    run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
