"""Command-line interface.

Subcommands: ``rpf`` (export return probabilities), ``gram`` (kernel
matrices), ``classify`` (cross-validated accuracy), ``sweep`` (classify over
a range of S, D0 or Dc) and ``replay`` (re-run a metadata record).

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .dataio import load_tu_dataset, write_embeddings, write_gram, write_rpf
from .errors import DataError, NumericError
from .pipeline import (
    RESULT_COLUMNS,
    RunConfig,
    Timer,
    build_grams,
    classify,
    compute_rpfs,
    prepare,
)
from .svm import C_GRID

log = logging.getLogger("retgk")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


def _floats(text):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--dataset-dir", required=True, help="directory holding the TU files")
    p.add_argument("--dataset", required=True, help="dataset name, e.g. MUTAG")
    p.add_argument("--variant", choices=("retgk1", "retgk2"), default="retgk2")
    p.add_argument("--rpf-method", choices=("spectral", "monte-carlo"), default="spectral")
    p.add_argument("--steps", type=int, default=50, help="random walk steps S")
    p.add_argument("--mc-trials", type=int, default=200, help="Monte Carlo walks per node")
    p.add_argument("--d0", type=int, default=None, help="RFF dimension for RPF vectors")
    p.add_argument("--dc", type=int, default=None, help="RFF dimension for attributes")
    p.add_argument("--p-grid", type=_floats, default=[1.0, 2.0])
    p.add_argument("--c-grid", type=_floats, default=list(C_GRID))
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--self-loops", choices=("isolated", "all"), default="isolated")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retgk", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("rpf", "export return probability features as CSV"),
        ("gram", "compute Gram matrices (one per p)"),
        ("classify", "cross-validated SVM accuracy"),
        ("sweep", "classify over a range of one parameter"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_run_flags(p)
        if name == "sweep":
            p.add_argument("--axis", choices=("S", "D0", "Dc"), required=True)
            p.add_argument("--values", type=_floats, required=True)
    p = sub.add_parser("replay", help="re-run the command recorded in a metadata file")
    p.add_argument("metadata")
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        dataset_dir=args.dataset_dir,
        dataset=args.dataset,
        variant=args.variant,
        rpf_method=args.rpf_method,
        steps=args.steps,
        mc_trials=args.mc_trials,
        d0=args.d0,
        dc=args.dc,
        p_grid=args.p_grid,
        c_grid=args.c_grid,
        folds=args.folds,
        repeats=args.repeats,
        seed=args.seed,
        self_loops=args.self_loops,
        threads=args.threads,
        out=args.out,
        format=args.format,
    )


def _load(config: RunConfig, timer: Timer):
    with timer.stage("load"):
        ds = load_tu_dataset(config.dataset_dir, config.dataset)
    n_nodes = sum(g.n for g in ds.graphs)
    print(f"{config.dataset}: {len(ds)} graphs, {n_nodes} nodes")
    return ds


def _write_meta(out: Path, name: str, command: str, config: RunConfig, timer: Timer, **extra):
    meta = {"command": command, "config": config.to_dict(), "timings": dict(timer.stages)}
    meta.update(extra)
    path = out / name
    path.write_text(json.dumps(meta, indent=2, default=_jsonable))
    return path


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return str(obj)


def _append_rows(path: Path, rows):
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        if new:
            w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row[k]) for k in RESULT_COLUMNS})


def _cell(v):
    return format(v, ".17g") if isinstance(v, float) else v


def cmd_rpf(config: RunConfig):
    timer = Timer()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load(config, timer)
    with timer.stage("rpf"):
        rpfs = compute_rpfs(prepare(ds, config.self_loops), config)
    path = out / f"{config.dataset}_rpf.csv"
    write_rpf(rpfs, path, config.steps)
    _write_meta(out, f"{config.dataset}_rpf.json", "rpf", config, timer)
    print(f"wrote {path}")
    return path


def cmd_gram(config: RunConfig):
    timer = Timer()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load(config, timer)
    info: dict = {}
    grams, _, emb = build_grams(ds, config, timer, info)
    ext = "csv" if config.format == "csv" else "bin"
    paths = {}
    for p, k in grams.items():
        path = out / f"{config.dataset}_{config.variant}_p{p:g}.{ext}"
        write_gram(k, path, config.format)
        paths[str(p)] = str(path)
    if emb is not None:
        epath = out / f"{config.dataset}_{config.variant}_embeddings.{ext}"
        write_embeddings(emb, epath, info["embedding_dims"], config.format)
        paths["embeddings"] = str(epath)
    _write_meta(out, f"{config.dataset}_{config.variant}_gram.json", "gram", config, timer,
                info=info, files=paths)
    for path in paths.values():
        print(f"wrote {path}")
    return paths


def _classify_once(config: RunConfig, ds, timer: Timer):
    row, info = classify(ds, config, timer)
    print(f"{row['dataset']} {row['kernel']} S={row['S']}: "
          f"accuracy {100 * row['mean_acc']:.2f} +- {100 * row['std']:.2f} (std over repeats)")
    return row, info


def cmd_classify(config: RunConfig):
    timer = Timer()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load(config, timer)
    row, info = _classify_once(config, ds, timer)
    _append_rows(out / "results.csv", [row])
    _write_meta(out, f"{config.dataset}_{config.variant}_classify.json", "classify", config,
                timer, info=info, row=row)
    return row


_AXIS_FIELD = {"S": "steps", "D0": "d0", "Dc": "dc"}


def cmd_sweep(config: RunConfig, axis: str, values):
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    load_timer = Timer()
    ds = _load(config, load_timer)
    rows, infos = [], []
    for v in values:
        cfg = RunConfig(**{**config.to_dict(), _AXIS_FIELD[axis]: int(v)})
        row, info = _classify_once(cfg, ds, Timer())
        rows.append(row)
        infos.append(info)
    path = out / f"{config.dataset}_{config.variant}_sweep_{axis}.csv"
    path.unlink(missing_ok=True)
    _append_rows(path, rows)
    _write_meta(out, f"{config.dataset}_{config.variant}_sweep_{axis}.json", "sweep", config,
                load_timer, axis=axis, values=list(values), rows=rows, info=infos)
    print(f"wrote {path}")
    return rows


def cmd_replay(meta_path):
    meta = json.loads(Path(meta_path).read_text())
    config = RunConfig(**meta["config"])
    command = meta["command"]
    if command == "rpf":
        return cmd_rpf(config)
    if command == "gram":
        return cmd_gram(config)
    if command == "classify":
        return cmd_classify(config)
    if command == "sweep":
        return cmd_sweep(config, meta["axis"], meta["values"])
    raise ValueError(f"cannot replay command {command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "replay":
            cmd_replay(args.metadata)
            return 0
        config = config_from_args(args)
        if args.command == "rpf":
            cmd_rpf(config)
        elif args.command == "gram":
            cmd_gram(config)
        elif args.command == "classify":
            cmd_classify(config)
        else:
            cmd_sweep(config, args.axis, args.values)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
