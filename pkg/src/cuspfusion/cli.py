"""Command line front end: generate -> split -> join -> fit -> grid -> rank -> report.

Config files hold flat ``key=value`` lines (``#`` starts a comment); command
line flags override file values. Exit codes: 0 success, 2 config error,
3 pipeline error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import datastore, influence, models
from .cusp import MinimizerConfig, fold_boundary_b
from .errors import ConfigError, CuspFusionError
from .sampler import Person, SamplerConfig, sample_population, to_arrays
from .svg import cusp_curve_points, render_svg

log = logging.getLogger("cuspfusion")

EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 2, 3


@dataclass(frozen=True)
class RunConfig:
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    lam: float = 1.0
    grid_resolution: int = 100
    output_dir: Path = Path("out")
    emit_svg: bool = True


def _parse_bool(text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError("must be an unsigned 64-bit integer")
    return value


# key -> parser; ranges are given as separate lower/upper keys
CONFIG_KEYS = {
    "n": int,
    "seed": _parse_seed,
    "sigma": float,
    "lambda": float,
    "resolution": int,
    "out": Path,
    "emit_svg": _parse_bool,
    "exact": _parse_bool,
    "a_min": float, "a_max": float,
    "b_min": float, "b_max": float,
    "x0_min": float, "x0_max": float,
    "initial_step": float,
    "x_tolerance": float,
    "f_tolerance": float,
    "max_iterations": int,
}


def read_config_file(path):
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def parse_config(path=None, overrides=None) -> RunConfig:
    """Resolve a RunConfig from an optional file plus flag overrides.

    ``overrides`` maps config keys to already-typed or string values; ``None``
    entries are ignored so argparse namespaces can be passed straight in.
    """
    raw = read_config_file(path) if path else {}
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})

    values = {}
    for key, text in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown key")
        try:
            values[key] = CONFIG_KEYS[key](text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, str(exc)) from None

    defaults = SamplerConfig()
    mdef = MinimizerConfig()

    def get(key, default):
        return values.get(key, default)

    checks = [
        ("n", get("n", defaults.n) >= 1, "must be >= 1"),
        ("sigma", get("sigma", defaults.sigma) > 0, "must be > 0"),
        ("lambda", get("lambda", 1.0) >= 0, "must be >= 0"),
        ("resolution", get("resolution", 100) >= 2, "must be >= 2"),
        ("a_min", get("a_min", -1.0) < get("a_max", 1.0), "must be below a_max"),
        ("b_min", get("b_min", -2.0) < get("b_max", 4.0), "must be below b_max"),
        ("x0_min", get("x0_min", -1.0) < get("x0_max", 1.0), "must be below x0_max"),
        ("initial_step", get("initial_step", mdef.initial_step) > 0, "must be > 0"),
        ("x_tolerance", get("x_tolerance", mdef.x_tolerance) > 0, "must be > 0"),
        ("f_tolerance", get("f_tolerance", mdef.f_tolerance) > 0, "must be > 0"),
        ("max_iterations", get("max_iterations", mdef.max_iterations) >= 1, "must be >= 1"),
    ]
    for key, ok, reason in checks:
        if not ok:
            raise ConfigError(key, f"{reason} (got {values.get(key)!r})")

    sampler = SamplerConfig(
        n=get("n", defaults.n),
        seed=get("seed", defaults.seed),
        sigma=get("sigma", defaults.sigma),
        a_range=(get("a_min", -1.0), get("a_max", 1.0)),
        b_range=(get("b_min", -2.0), get("b_max", 4.0)),
        x0_range=(get("x0_min", -1.0), get("x0_max", 1.0)),
        minimizer=MinimizerConfig(
            get("initial_step", mdef.initial_step),
            get("x_tolerance", mdef.x_tolerance),
            get("f_tolerance", mdef.f_tolerance),
            get("max_iterations", mdef.max_iterations),
        ),
        exact_mode=get("exact", False),
    )
    return RunConfig(
        sampler=sampler,
        lam=get("lambda", 1.0),
        grid_resolution=get("resolution", 100),
        output_dir=get("out", Path("out")),
        emit_svg=get("emit_svg", True),
    )


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return Path(path)


def write_rows(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return Path(path)


def write_grid(grid, path):
    return write_rows(path, ("a", "b", "p"), grid.rows())


def write_susceptibility(records, path):
    return write_rows(
        path,
        ("id", "branch", "delta_b_flip", "flip_direction"),
        [(r.id, r.branch.value, r.delta_b_flip, r.flip_direction) for r in records],
    )


def load_model(path):
    return models.PolynomialLogisticRegression.from_dict(json.loads(Path(path).read_text()))


def people_from_table(table):
    cols = table.columns
    return [Person(**dict(zip(cols, row))) for row in table.rows]


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


MODEL_SPECS = {"a": models.ONLY_A, "b": models.ONLY_B, "joint": models.JOINT}


def run_pipeline(cfg: RunConfig):
    """Run every step, writing artifacts and ``manifest.json`` to ``cfg.output_dir``.

    Returns ``(exit_status, manifest)``. On failure the manifest records the
    files written so far plus an ``error`` note.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(path):
        written.append(Path(path))
        return path

    status, error = EXIT_OK, None
    try:
        population = sample_population(cfg.sampler)
        emit(datastore.export_csv(datastore.population_table(population), out / "population.csv"))
        db_a, db_b = datastore.split(population)
        emit(datastore.export_csv(db_a, out / "db_a.csv"))
        emit(datastore.export_csv(db_b, out / "db_b.csv"))
        joined = datastore.join(db_a, db_b)
        emit(datastore.export_csv(joined, out / "joined.csv"))

        fitted = {}
        for key, spec in MODEL_SPECS.items():
            fitted[key] = models.fit(joined, spec, cfg.lam)
            emit(write_json(fitted[key].to_dict(), out / f"model_{key}.json"))
            emit(write_json(models.evaluate(fitted[key], joined).to_dict(), out / f"metrics_{key}.json"))

        s = cfg.sampler
        grids = {}
        for key, model in fitted.items():
            grids[key] = models.probability_grid(model, s.a_range, s.b_range, cfg.grid_resolution)
            emit(write_grid(grids[key], out / f"grid_{key}.csv"))

        cols = to_arrays(population)
        emit(write_rows(
            out / "scatter.csv", ("id", "a", "b", "x", "y"),
            [(p.id, p.a, p.b, p.x, p.y) for p in population],
        ))
        curve = cusp_curve_points(s.a_range, s.b_range[1])
        emit(write_rows(out / "cusp_curve.csv", ("b", "a"), curve))
        fold = fold_boundary_b(0.5)
        emit(write_rows(out / "switching_lines.csv", ("a", "b"), [(-0.5, fold), (0.5, fold)]))

        records = influence.rank_targets(population)
        emit(write_susceptibility(records, out / "susceptibility.csv"))
        report = influence.fusion_gain(joined, fitted["a"], fitted["b"], fitted["joint"], records)
        emit(write_json(report.to_dict(), out / "fusion_report.json"))

        if cfg.emit_svg:
            emit(render_svg("fig1a", grids["a"], out / "fig1a.svg"))
            emit(render_svg("fig1b", grids["b"], out / "fig1b.svg"))
            emit(render_svg("fig1c", cols, out / "fig1c.svg"))
            emit(render_svg("fig1d", grids["joint"], out / "fig1d.svg"))
            emit(render_svg("fig2a", cols, out / "fig2a.svg"))
            emit(render_svg("fig2b", cols, out / "fig2b.svg"))
    except (CuspFusionError, ValueError, OSError) as exc:
        log.error("pipeline failed: %s", exc)
        status, error = EXIT_PIPELINE, f"{type(exc).__name__}: {exc}"

    manifest = {"files": {p.name: sha256(p) for p in written}}
    if error:
        manifest["error"] = error
        manifest["partial"] = True
    write_json(manifest, out / "manifest.json")
    return status, manifest


def _common_flags():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path)
    parent.add_argument("--seed")
    parent.add_argument("--n")
    parent.add_argument("--sigma")
    parent.add_argument("--lambda", dest="lam")
    parent.add_argument("--resolution")
    parent.add_argument("--out")
    parent.add_argument("--no-svg", action="store_true")
    parent.add_argument("--exact", action="store_true")
    return parent


def build_parser():
    parent = _common_flags()
    parser = argparse.ArgumentParser(prog="cuspfusion", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", parents=[parent], help="sample a population -> population.csv")
    p = sub.add_parser("split", parents=[parent], help="population.csv -> db_a.csv, db_b.csv")
    p.add_argument("--population", type=Path, required=True)
    p = sub.add_parser("join", parents=[parent], help="db_a.csv + db_b.csv -> joined.csv")
    p.add_argument("--db-a", type=Path, required=True)
    p.add_argument("--db-b", type=Path, required=True)
    p = sub.add_parser("fit", parents=[parent], help="joined.csv -> model_{a,b,joint}.json")
    p.add_argument("--joined", type=Path, required=True)
    p = sub.add_parser("grid", parents=[parent], help="model json -> probability grid csv")
    p.add_argument("--model", type=Path, required=True)
    p = sub.add_parser("rank", parents=[parent], help="population.csv -> susceptibility.csv")
    p.add_argument("--population", type=Path, required=True)
    p = sub.add_parser("intervene", parents=[parent], help="move one person's b and re-relax")
    p.add_argument("--population", type=Path, required=True)
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--new-b", type=float, required=True)
    p = sub.add_parser("report", parents=[parent], help="joined.csv + models -> fusion_report.json")
    p.add_argument("--joined", type=Path, required=True)
    p.add_argument("--models", type=Path, required=True, help="directory with model_*.json")
    p.add_argument("--population", type=Path, help="population.csv for the targetable count")
    sub.add_parser("all", parents=[parent], help="run the whole pipeline")
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {
        "seed": args.seed, "n": args.n, "sigma": args.sigma, "lambda": args.lam,
        "resolution": args.resolution, "out": args.out,
        "emit_svg": False if args.no_svg else None,
        "exact": True if args.exact else None,
    }
    return parse_config(args.config, overrides)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "all":
        status, manifest = run_pipeline(cfg)
        if status:
            print(f"pipeline failed: {manifest['error']}", file=sys.stderr)
        return status

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "generate":
            population = sample_population(cfg.sampler)
            datastore.export_csv(datastore.population_table(population), out / "population.csv")
        elif args.command == "split":
            population = people_from_table(datastore.import_csv(args.population, "population"))
            for table in datastore.split(population):
                datastore.export_csv(table, out / f"{table.name}.csv")
        elif args.command == "join":
            joined = datastore.join(
                datastore.import_csv(args.db_a, "db_a"), datastore.import_csv(args.db_b, "db_b")
            )
            datastore.export_csv(joined, out / "joined.csv")
        elif args.command == "fit":
            joined = datastore.import_csv(args.joined, "joined")
            for key, spec in MODEL_SPECS.items():
                write_json(models.fit(joined, spec, cfg.lam).to_dict(), out / f"model_{key}.json")
        elif args.command == "grid":
            model = load_model(args.model)
            s = cfg.sampler
            grid = models.probability_grid(model, s.a_range, s.b_range, cfg.grid_resolution)
            write_grid(grid, out / f"grid_{args.model.stem.removeprefix('model_')}.csv")
        elif args.command == "rank":
            population = people_from_table(datastore.import_csv(args.population, "population"))
            write_susceptibility(influence.rank_targets(population), out / "susceptibility.csv")
        elif args.command == "intervene":
            population = people_from_table(datastore.import_csv(args.population, "population"))
            person = next((p for p in population if p.id == args.id), None)
            if person is None:
                raise CuspFusionError(f"no person with id {args.id}")
            result = influence.apply_intervention(
                person, args.new_b, cfg.sampler.minimizer, cfg.sampler.sigma
            )
            print(json.dumps(vars(result), sort_keys=True))
        elif args.command == "report":
            joined = datastore.import_csv(args.joined, "joined")
            fitted = {k: load_model(args.models / f"model_{k}.json") for k in MODEL_SPECS}
            records = None
            if args.population:
                records = influence.rank_targets(
                    people_from_table(datastore.import_csv(args.population, "population"))
                )
            report = influence.fusion_gain(joined, fitted["a"], fitted["b"], fitted["joint"], records)
            write_json(report.to_dict(), out / "fusion_report.json")
    except (CuspFusionError, ValueError, OSError) as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
