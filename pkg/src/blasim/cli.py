"""Command-line front end: ``run`` one config or ``sweep`` a matrix of them.

Exit status is 0 when every verdict passes, 1 on a property failure and 2 on a
usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence

from .adversary import ConfigError, builtin_adversaries
from .sim import ALGORITHMS, RunConfig, RunReport, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CSV_HEADER = ["n", "f", "t", "algorithm", "adversary", "seed", "sub_rounds", "envelopes", "all_pass"]


@dataclass(frozen=True)
class SweepSpec:
    n: tuple
    algorithm: tuple
    adversary: tuple
    seeds: tuple
    f: Optional[int] = None
    t: tuple = ("f",)
    universe_size: Optional[int] = None

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        if not isinstance(d, dict) or not d:
            raise ConfigError("sweep spec is empty")
        known = {"n", "algorithm", "adversary", "seeds", "repetitions", "f", "t", "universe_size"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown sweep fields: {sorted(extra)}")
        if "n" not in d or "algorithm" not in d:
            raise ConfigError("sweep spec needs at least 'n' and 'algorithm'")
        adversary = _as_list(d.get("adversary", "all"))
        if adversary == ["all"]:
            adversary = builtin_adversaries()
        seeds = d.get("seeds", d.get("repetitions", 1))
        seeds = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
        spec = cls(
            n=tuple(int(x) for x in _as_list(d["n"])),
            algorithm=tuple(_as_list(d["algorithm"])),
            adversary=tuple(adversary),
            seeds=tuple(int(s) for s in seeds),
            f=None if d.get("f") is None else int(d["f"]),
            t=tuple(_as_list(d.get("t", "f"))),
            universe_size=d.get("universe_size"),
        )
        if not (spec.n and spec.algorithm and spec.adversary and spec.seeds and spec.t):
            raise ConfigError("sweep spec expands to no points")
        for a in spec.algorithm:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}")
        return spec

    def points(self) -> List[RunConfig]:
        out = []
        for n, alg, adv, t_rule, seed in product(self.n, self.algorithm, self.adversary, self.t, self.seeds):
            f = (n - 1) // 3 if self.f is None else self.f
            t = _resolve_t(t_rule, f, seed)
            cfg = RunConfig.make(n, alg, f=f, t=t, adversary=adv, seed=seed,
                                 universe_size=self.universe_size)
            out.append(cfg.validate())
        return out


def _as_list(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


def _resolve_t(rule, f: int, seed: int) -> int:
    """``"f"`` means t = f, ``"below_f"`` picks t in [0, f) from the seed, an int is literal."""
    if rule == "f":
        return f
    if rule == "below_f":
        return seed % f if f > 0 else 0
    try:
        return int(rule)
    except (TypeError, ValueError):
        raise ConfigError(f"bad t rule {rule!r}") from None


def _run_one(args) -> RunReport:
    cfg, invert = args
    return run(cfg, invert=invert)


def _write_report(report: RunReport, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json() + "\n")


def _describe_failures(report: RunReport) -> str:
    names = ", ".join(v.name for v in report.failures())
    return f"failed: {names}"


def cmd_run(config_path: str, out_path: str, quiet: bool = False, invert: bool = False) -> int:
    try:
        text = Path(config_path).read_text()
        cfg = RunConfig.from_json(text).validate()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run(cfg, invert=invert)
    out = Path(out_path)
    _write_report(report, out)
    if report.passed:
        if not quiet:
            print(f"pass: {cfg.algorithm} n={cfg.n} f={cfg.f} t={cfg.t} sub_rounds={report.sub_rounds} -> {out}")
        return EXIT_OK
    print(f"{_describe_failures(report)}; witness in {out}", file=sys.stderr)
    return EXIT_FAIL


def cmd_sweep(spec_path: str, out_dir: str, quiet: bool = False, fail_fast: bool = False,
              jobs: int = 1, invert: bool = False) -> int:
    try:
        spec = SweepSpec.from_dict(json.loads(Path(spec_path).read_text()))
        points = spec.points()
    except OSError as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: spec is not JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    rows, failed = [], 0
    work = [(cfg, invert) for cfg in points]
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        results = pool.map(_run_one, work) if pool else map(_run_one, work)
        for cfg, report in zip(points, results):
            path = root / "reports" / f"{cfg.digest()}.json"
            _write_report(report, path)
            rows.append([cfg.n, cfg.f, cfg.t, cfg.algorithm, cfg.adversary, cfg.seed,
                         report.sub_rounds, report.envelopes, str(report.passed).lower()])
            if not report.passed:
                failed += 1
                print(f"{_describe_failures(report)}; witness in {path}", file=sys.stderr)
                if fail_fast:
                    break
            elif not quiet:
                print(f"pass: {cfg.algorithm} n={cfg.n} t={cfg.t} {cfg.adversary} seed={cfg.seed}")
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    with open(root / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        w.writerows(rows)
    if not quiet:
        print(f"{len(rows)} runs, {failed} failing; summary in {root / 'summary.csv'}")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blasim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="print failures only")
    # flips every verdict so the failure path can be exercised end to end
    common.add_argument("--invert-verdicts", action="store_true", help=argparse.SUPPRESS)

    r = sub.add_parser("run", parents=[common], help="run one config and write its report")
    r.add_argument("--config", required=True, help="RunConfig JSON file")
    r.add_argument("--out", required=True, help="where to write the RunReport JSON")

    s = sub.add_parser("sweep", parents=[common], help="run every point of a sweep spec")
    s.add_argument("--spec", required=True, help="SweepSpec JSON file")
    s.add_argument("--out-dir", required=True, help="directory for reports/ and summary.csv")
    s.add_argument("--fail-fast", action="store_true", help="stop at the first failing point")
    s.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "run":
        return cmd_run(args.config, args.out, args.quiet, args.invert_verdicts)
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    return cmd_sweep(args.spec, args.out_dir, args.quiet, args.fail_fast, args.jobs, args.invert_verdicts)


if __name__ == "__main__":
    sys.exit(main())
