"""Command-line entry point: gen-data, evolve, explain, report.

Exit codes: 0 success, 2 bad configuration, 3 bad or missing data,
4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import warnings
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

from .dsl.grammar import DSLError, TypeTag, base_grammar
from .dsl.parser import ParseError, parse_program, read_program_file
from .env import POLICIES, EnvError, EnvSpec, load_dataset, save_dataset, slice_dataset
from .explain import (
    EmptyReport,
    accuracy_report,
    diff_report,
    explain_decision,
    explanations_to_json,
    render_ascii,
    rows_to_csv,
)
from .gp.config import ConfigError, GPConfig
from .gp.evolution import RunReport, evolve
from .liblearn import load_library

log = logging.getLogger("gpxrl")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

DATA_MANIFEST = "manifest.json"
RUN_MANIFEST = "manifest.json"
REPORT_FILE = "report.json"
LIBRARY_FILE = "library.txt"
PROGRAM_FILE = "best_program.sexp"


class DataError(Exception):
    """Missing, malformed or inconsistent input data."""


class IndexOutOfRange(DataError, IndexError):
    pass


def dataset_filename(length: int) -> str:
    return f"len_{length:03d}.json"


def _tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_lengths(text: str) -> list:
    try:
        if "-" in text:
            lo, hi = (int(v) for v in text.split("-", 1))
            lengths = list(range(lo, hi + 1))
        else:
            lengths = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad --lengths value {text!r}; use e.g. 3-9 or 3,5,7") from None
    if not lengths or min(lengths) < 1:
        raise ConfigError("--lengths must name positive lengths")
    return lengths


# -- gen-data ---------------------------------------------------------------


def cmd_gen_data(args) -> int:
    if args.policy not in POLICIES:
        raise ConfigError(f"policy: unknown {args.policy!r}; choose from {', '.join(POLICIES)}")
    if args.count < 1:
        raise ConfigError("count must be >= 1")
    lengths = _parse_lengths(args.lengths)
    spec = EnvSpec(width=args.width, height=args.height, maze_seeds=tuple(args.seeds),
                   policy=args.policy, count=args.count, max_steps=args.max_steps,
                   slice_seed=args.slice_seed)
    started = _now()
    episodes = spec.build_episodes()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for length in lengths:
        dataset = slice_dataset(episodes, length, spec.count, spec.slice_seed + length,
                                spec.policy, spec.maze_seeds)
        if len(dataset) < spec.count:
            warnings.warn(f"length {length}: only {len(dataset)} windows available, wanted {spec.count}")
        path = out / dataset_filename(length)
        save_dataset(dataset, path)
        files[path.name] = _sha256(path.read_bytes())
    manifest = {
        "kind": "dataset",
        "env": {
            "width": spec.width, "height": spec.height, "maze_seeds": list(spec.maze_seeds),
            "policy": spec.policy, "count": spec.count, "max_steps": spec.max_steps,
            "slice_seed": spec.slice_seed, "lengths": lengths,
        },
        "files": files,
        "tool_version": _tool_version(),
    }
    manifest["hash"] = _sha256(json.dumps(manifest, sort_keys=True).encode())[:16]
    manifest["started_at"], manifest["finished_at"] = started, _now()
    _write_json(out / DATA_MANIFEST, manifest)
    print(f"wrote {len(lengths)} dataset files to {out}")
    return EXIT_OK


# -- evolve -----------------------------------------------------------------


def _load_config(args) -> GPConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError("config file must hold an object of GPConfig fields")
    if args.seed is not None:
        values["rng_seed"] = args.seed
    if args.no_library:
        values["use_library"] = False
    if args.max_length is not None:
        values["max_sequence_length"] = args.max_length
    if args.workers is not None:
        values["n_jobs"] = args.workers
    return GPConfig.from_dict(values)


def _data_dir_provider(data_dir: Path):
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    digests = {}

    def provide(length):
        path = data_dir / dataset_filename(length)
        if not path.exists():
            return None
        digests[path.name] = _sha256(path.read_bytes())
        try:
            dataset = load_dataset(path)
        except (KeyError, ValueError, EnvError) as exc:
            raise DataError(f"{path}: {exc}") from None
        if len(dataset) == 0:
            return None
        return dataset

    return provide, digests


def cmd_evolve(args) -> int:
    cfg = _load_config(args)
    started = _now()
    if args.data:
        provider, digests = _data_dir_provider(Path(args.data))
        if provider(cfg.start_length) is None:
            raise DataError(f"no dataset for start length {cfg.start_length} in {args.data}")
        data_source = {"data_dir": str(Path(args.data).name)}
    else:
        spec = EnvSpec()
        provider, digests = spec.dataset_provider(), {}
        data_source = {"env": {"width": spec.width, "height": spec.height,
                               "maze_seeds": list(spec.maze_seeds), "policy": spec.policy,
                               "count": spec.count, "slice_seed": spec.slice_seed}}

    result = evolve(cfg, provider)
    report = result.report

    manifest = {
        "kind": "run",
        "config": cfg.run_dict(),
        "config_hash": cfg.digest(),
        "data": data_source,
        "dataset_files": dict(sorted(digests.items())),
        "seeds": {"rng_seed": cfg.rng_seed},
        "tool_version": _tool_version(),
    }
    run_hash = _sha256(json.dumps(manifest, sort_keys=True).encode())[:16]
    manifest["hash"] = run_hash

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict(include_timing=True)
    payload["manifest_hash"] = run_hash
    _write_json(out / REPORT_FILE, payload)
    (out / PROGRAM_FILE).write_text(
        f"; manifest {run_hash}\n{report.best_program}\n", encoding="utf-8")
    library_path = out / LIBRARY_FILE
    if cfg.use_library:
        library_path.write_text(f"; manifest {run_hash}\n" + "\n".join(report.library)
                                + ("\n" if report.library else ""), encoding="utf-8")
    elif library_path.exists():
        library_path.unlink()
    manifest["started_at"], manifest["finished_at"] = started, _now()
    _write_json(out / RUN_MANIFEST, manifest)

    state = "halted" if report.halted else "finished"
    print(f"{state} at length {report.max_length}: {report.stop_reason}")
    for rec in report.records:
        print(f"  length {rec.sequence_length:3d}  best {rec.best_accuracy:.3f}  "
              f"union {rec.union_accuracy:.3f}  gens {rec.generations}")
    return EXIT_OK


# -- explain ----------------------------------------------------------------


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None


def cmd_explain(args) -> int:
    grammar = base_grammar()
    if args.library:
        grammar = load_library(_read_text(args.library), grammar)
    sources = read_program_file(_read_text(args.program))
    if not sources:
        raise DataError(f"no program in {args.program}")
    program = parse_program(sources[0], grammar, expected=TypeTag.ACTION)
    try:
        dataset = load_dataset(args.data)
    except FileNotFoundError:
        raise DataError(f"file not found: {args.data}") from None
    except (KeyError, ValueError, EnvError) as exc:
        raise DataError(f"{args.data}: {exc}") from None
    if not 0 <= args.index < len(dataset):
        raise IndexOutOfRange(f"index {args.index} outside 0..{len(dataset) - 1}")
    trajectory = dataset.trajectories[args.index]
    explanations = [explain_decision(program, obs) for obs, _ in trajectory]
    text = explanations_to_json(explanations)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if args.render:
        blocks = []
        for step, ((obs, taken), expl) in enumerate(zip(trajectory, explanations)):
            blocks.append(f"step {step} (demonstrated: {taken.value})\n{render_ascii(expl, obs)}")
        print("\n\n".join(blocks))
    elif not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# -- report -----------------------------------------------------------------


def _load_reports(run_dirs) -> list:
    reports = []
    for d in run_dirs:
        path = Path(d) / REPORT_FILE
        try:
            reports.append(RunReport.from_dict(json.loads(path.read_text(encoding="utf-8"))))
        except FileNotFoundError:
            raise DataError(f"no {REPORT_FILE} in {d}") from None
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: {exc}") from None
    return reports


def cmd_report(args) -> int:
    rows = accuracy_report(_load_reports(args.runs))
    if args.diff:
        rows = diff_report(rows, accuracy_report(_load_reports(args.diff)))
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- wiring -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpxrl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="roll out a policy in mazes and slice datasets")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--width", type=int, default=15)
    g.add_argument("--height", type=int, default=15)
    g.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5], help="maze seeds")
    g.add_argument("--policy", default="wall-follower", help=f"one of {', '.join(POLICIES)}")
    g.add_argument("--lengths", default="3-9", help="range like 3-9 or list like 3,5,7")
    g.add_argument("--count", type=int, default=50, help="sub-trajectories per length")
    g.add_argument("--max-steps", type=int, default=2000)
    g.add_argument("--slice-seed", type=int, default=0)
    g.set_defaults(func=cmd_gen_data)

    e = sub.add_parser("evolve", help="run the GP curriculum")
    e.add_argument("--out", required=True, help="run directory")
    e.add_argument("--data", help="directory written by gen-data (default: built-in maze set)")
    e.add_argument("--config", help="JSON file with GPConfig fields")
    e.add_argument("--seed", type=int, help="overrides rng_seed")
    e.add_argument("--no-library", action="store_true", help="skip library learning")
    e.add_argument("--max-length", type=int, help="overrides max_sequence_length")
    e.add_argument("--workers", type=int, help="parallel fitness workers (results do not depend on it)")
    e.set_defaults(func=cmd_evolve)

    x = sub.add_parser("explain", help="explain each decision of one sub-trajectory")
    x.add_argument("--program", required=True, help="program file (first program is used)")
    x.add_argument("--data", required=True, help="dataset file")
    x.add_argument("--index", type=int, default=0, help="sub-trajectory index")
    x.add_argument("--library", help="library file defining fn_k rules")
    x.add_argument("--render", action="store_true", help="print ASCII grids")
    x.add_argument("--out", help="write explanation JSON here")
    x.set_defaults(func=cmd_explain)

    r = sub.add_parser("report", help="aggregate accuracy over run directories")
    r.add_argument("runs", nargs="+", help="run directories")
    r.add_argument("--diff", nargs="+", help="second run set, subtracted per length")
    r.add_argument("--out", help="write CSV here instead of stdout")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, EnvError, ParseError, DSLError, EmptyReport, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
