"""Command line interface.

Every subcommand is a file-to-file transform.  Outputs are written
atomically and recorded, with content hashes of the inputs and the
effective options, in ``manifest-<command>.json``; rerunning with
unchanged inputs and options leaves everything untouched.

Exit codes: 0 success, 1 runtime failure, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .cohort import (
    block_columns,
    build_cohort,
    class_balance,
    design_matrix,
    featurize,
    instances_from_csv,
    instances_to_csv,
    label_imminent_task,
    label_longterm_task,
)
from .errors import BetrayalError, EmptyCorpus, InputError, RecordSyntaxError, SchemaError
from .gamelog import corpus_statistics, dump_game, filter_messages, iter_corpus, load_corpus, standard_only
from .lingcues import load_lexicons
from .model import Grid, dumps_model, evaluate, format_ranking, grid_search, loads_model, rank_features
from .model.artifact import parse_kv
from .pipeline import TASK_OBJECTIVE, TASKS, check_sufficient, corpus_lexicon, cue_curves, imbalance_tests, run_task
from .relations import RelationConfig, dyad_name, game_relations, transition_statistics
from .report import CURVE_COLUMNS, bar_chart, curve_charts, rows_to_csv
from .synth import SynthSpec, generate_corpus

EXIT_OK, EXIT_FAILURE, EXIT_INPUT = 0, 1, 2

# option name -> (type, default); shared by flags and the key=value config file
COMMON_OPTIONS = {
    "seed": (int, 0),
    "lexicons": (str, None),
    "task": (str, "longterm"),
    "strict_balance": (bool, False),
    "convoy_as_friendly": (bool, False),
    "strict_reciprocity": (bool, False),
    "folds": (int, 5),
    "bootstrap": (int, 1000),
    "nested": (bool, True),
    "k_features": (str, "1,2,4,8,16,all"),
    "scorers": (str, "anova_f,chi2"),
    "class_weights": (str, "none,balanced"),
    "regularizers": (str, "l1,l2"),
    "c_exponents": (str, "-12:12"),
    "standard_only": (bool, False),
}


class CliInputError(InputError):
    pass


# --------------------------------------------------------------------------
# Files, hashing, manifest
# --------------------------------------------------------------------------


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def file_digest(path: str | Path) -> str:
    try:
        return sha256_bytes(Path(path).read_bytes())
    except FileNotFoundError:
        raise CliInputError(f"input not found: {path}") from None


def lexicon_digest(directory: str | None) -> str:
    h = hashlib.sha256()
    if directory is None:
        root = resources.files("betrayal.lingcues").joinpath("data")
        entries = sorted((p.name, p.read_bytes()) for p in root.iterdir() if p.is_file())
    else:
        d = Path(directory)
        if not d.is_dir():
            raise CliInputError(f"lexicon directory not found: {directory}")
        entries = sorted((p.name, p.read_bytes()) for p in d.iterdir() if p.is_file())
    for name, data in entries:
        h.update(name.encode() + b"\0" + sha256_bytes(data).encode())
    return h.hexdigest()


def write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def run_stage(
    command: str, out: Path, inputs: dict[str, str], options: dict, produce: Callable[[], dict[str, str]]
) -> bool:
    """Write ``produce()`` outputs under ``out`` unless the manifest shows them current.

    Returns True when outputs were (re)written.
    """
    manifest_path = out / f"manifest-{command}.json"
    key = {"command": command, "version": __version__, "inputs": inputs, "options": options}
    if manifest_path.exists():
        try:
            old = json.loads(manifest_path.read_text())
        except (OSError, ValueError):
            old = None
        if old and {k: old.get(k) for k in key} == key and all(
            (out / name).exists() and file_digest(out / name) == digest for name, digest in old["outputs"].items()
        ):
            print(f"{command}: outputs up to date in {out}", file=sys.stderr)
            return False
    outputs = produce()
    for name, text in sorted(outputs.items()):
        write_atomic(out / name, text)
    manifest = dict(key, outputs={n: sha256_bytes(t.encode("utf-8")) for n, t in sorted(outputs.items())})
    write_atomic(manifest_path, dumps_json(manifest))
    return True


# --------------------------------------------------------------------------
# Options
# --------------------------------------------------------------------------


def read_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliInputError(f"config file not found: {path}") from None
    try:
        return parse_kv(text)
    except ValueError as exc:
        raise CliInputError(f"{path}: {exc}") from None


def _cast(name: str, typ, value):
    if typ is bool and isinstance(value, str):
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise CliInputError(f"option {name}: expected a boolean, got {value!r}")
    try:
        return typ(value)
    except (TypeError, ValueError):
        raise CliInputError(f"option {name}: cannot read {value!r} as {typ.__name__}") from None


def resolve_options(args: argparse.Namespace) -> dict:
    """Flags override the config file, which overrides defaults."""
    config = read_config(getattr(args, "config", None))
    opts = {}
    for name, (typ, default) in COMMON_OPTIONS.items():
        flag = getattr(args, name, None)
        if flag is not None:
            opts[name] = flag
        elif name in config:
            opts[name] = _cast(name, typ, config[name])
        else:
            opts[name] = default
    if opts["task"] not in TASKS:
        raise CliInputError(f"unknown task {opts['task']!r}")
    opts["extra"] = {k: v for k, v in config.items() if k not in COMMON_OPTIONS}
    return opts


def relation_config(opts: dict) -> RelationConfig:
    return RelationConfig(convoy_as_friendly=opts["convoy_as_friendly"], strict_reciprocity=opts["strict_reciprocity"])


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def grid_from_options(opts: dict) -> Grid:
    ks = tuple(k if k == "all" else int(k) for k in _csv_list(opts["k_features"]))
    exp = opts["c_exponents"]
    if ":" in exp:
        lo, hi = (int(x) for x in exp.split(":"))
        exps = range(lo, hi + 1)
    else:
        exps = [int(x) for x in _csv_list(exp)]
    try:
        grid = Grid(
            k_features=ks,
            scorers=tuple(_csv_list(opts["scorers"])),
            class_weights=tuple(_csv_list(opts["class_weights"])),
            regularizers=tuple(_csv_list(opts["regularizers"])),
            Cs=tuple(10.0 ** e for e in exps),
            objective_metric=TASK_OBJECTIVE[opts["task"]],
        )
        grid.configs()  # validates every point
    except ValueError as exc:
        raise CliInputError(f"invalid grid: {exc}") from None
    return grid


def option_record(opts: dict, names) -> dict:
    return {n: opts[n] for n in names}


_RELATION_OPTS = ("convoy_as_friendly", "strict_reciprocity")
_COHORT_OPTS = _RELATION_OPTS + ("seed", "task", "strict_balance")
_MODEL_OPTS = ("seed", "task", "folds", "bootstrap", "nested", "k_features", "scorers", "class_weights",
               "regularizers", "c_exponents")


def _load(path: str):
    file_digest(path)  # existence check with an input error
    games = load_corpus(path)
    if not games:
        raise EmptyCorpus(f"{path}: no games")
    return games


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_ingest(args, opts) -> int:
    inputs = {p: file_digest(p) for p in args.paths}

    def produce():
        games, errors = [], []
        for p in args.paths:
            try:
                games.extend(iter_corpus(p))
            except (RecordSyntaxError, SchemaError, InputError) as exc:
                errors.append(f"{p}: {exc}")
        if errors:
            raise CliInputError("\n".join(errors))
        if opts["standard_only"]:
            games = standard_only(games)
        if not games:
            raise EmptyCorpus("no games in input")
        games = [filter_messages(g) for g in games]
        stats = corpus_statistics(games)
        summary = {
            "stats": stats.to_dict(),
            "games": [{"game_id": g.game_id, "seasons": len(g.seasons), "messages": g.n_messages} for g in games],
        }
        return {"corpus.jsonl": "".join(dump_game(g) + "\n" for g in games), "corpus_summary.json": dumps_json(summary)}

    run_stage("ingest", args.out, inputs, option_record(opts, ("standard_only",)), produce)
    return EXIT_OK


def cmd_relate(args, opts) -> int:
    inputs = {args.corpus: file_digest(args.corpus)}

    def produce():
        games = _load(args.corpus)
        cfg = relation_config(opts)
        acts, spans, betrayals = [], [], []
        for g in games:
            for rel in game_relations(g, cfg):
                for a in rel.timeline.acts:
                    acts.append(json.dumps(dict(a.to_dict(), game_id=g.game_id), sort_keys=True))
                spans.extend(json.dumps(dict(s.to_dict(), betrayed=s in {b.span for b in rel.betrayals}),
                                        sort_keys=True) for s in rel.spans)
                betrayals.extend(json.dumps(b.to_dict(), sort_keys=True) for b in rel.betrayals)
        ts = transition_statistics(games, cfg)
        summary = {
            "n_games": len(games), "n_acts": len(acts), "n_spans": len(spans), "n_betrayals": len(betrayals),
            "rate_ratio": ts.rate_ratio,
            "p_dissolve": {b: ts.probability("friendly", b) for b in ("2", "10+")},
            "p_resolve": {b: ts.probability("hostile", b) for b in ("2", "10+")},
        }
        cols = ["relationship", "age", "transitions", "observations", "probability"]
        return {
            "acts.jsonl": "".join(a + "\n" for a in acts),
            "spans.jsonl": "".join(s + "\n" for s in spans),
            "betrayals.jsonl": "".join(b + "\n" for b in betrayals),
            "transitions.csv": rows_to_csv(ts.rows(), cols),
            "relations_summary.json": dumps_json(summary),
        }

    run_stage("relate", args.out, inputs, option_record(opts, _RELATION_OPTS), produce)
    return EXIT_OK


def _task_instances(games, opts):
    cohort = build_cohort(games, relation_config(opts), opts["seed"], opts["strict_balance"])
    if opts["task"] == "longterm":
        return cohort, label_longterm_task(cohort.pairs)
    return cohort, label_imminent_task(cohort.betrayals)


def cmd_cohort(args, opts) -> int:
    inputs = {args.corpus: file_digest(args.corpus)}

    def produce():
        games = _load(args.corpus)
        cohort, instances = _task_instances(games, opts)
        pairs = [
            json.dumps({
                "betrayal": p.betrayal.to_dict(), "control": p.control.to_dict(),
                "distance": p.distance, "control_betrayer": p.control_betrayer,
            }, sort_keys=True)
            for p in cohort.pairs
        ]
        info = {"balance": cohort.balance.to_dict(), "classes": class_balance(instances),
                "n_betrayals": len(cohort.betrayals), "n_candidates": len(cohort.candidates)}
        return {"pairs.jsonl": "".join(p + "\n" for p in pairs), "instances.csv": instances_to_csv(instances),
                "cohort_summary.json": dumps_json(info)}

    run_stage("cohort", args.out, inputs, option_record(opts, _COHORT_OPTS), produce)
    return EXIT_OK


def cmd_featurize(args, opts) -> int:
    inputs = {args.corpus: file_digest(args.corpus), "lexicons": lexicon_digest(opts["lexicons"])}

    def produce():
        games = _load(args.corpus)
        lex = corpus_lexicon(games, load_lexicons(opts["lexicons"]))
        _, raw = _task_instances(games, opts)
        instances = featurize(raw, games, lex)
        info = {"lexicon_version": lex.version, "pruned_connectives": sorted(lex.pruned),
                "classes": class_balance(instances)}
        return {"features.csv": instances_to_csv(instances), "features_summary.json": dumps_json(info)}

    run_stage("featurize", args.out, inputs, option_record(opts, _COHORT_OPTS), produce)
    return EXIT_OK


def _read_instances(path: str):
    file_digest(path)
    instances = instances_from_csv(Path(path).read_text(encoding="utf-8"))
    if not instances:
        raise EmptyCorpus(f"{path}: no instances")
    if any(i.features is None or i.features.size != len(block_columns(("B", "V", "imbalance")))
           for i in instances):
        raise CliInputError(f"{path}: rows lack the full feature block")
    return instances


def cmd_train(args, opts) -> int:
    inputs = {args.features: file_digest(args.features)}

    def produce():
        instances = _read_instances(args.features)
        check_sufficient(instances, opts["folds"])
        X, y, groups, names = design_matrix(instances)
        res = grid_search(X, y, groups, grid_from_options(opts), opts["folds"], opts["seed"], names,
                          opts["bootstrap"], opts["nested"])
        ranking = rank_features(res.model)
        report = {"best_config": res.best.to_dict(), "report": res.report.to_dict(),
                  "classes": class_balance(instances)}
        return {"model.kv": dumps_model(res.model), "train_report.json": dumps_json(report),
                "ranking.txt": format_ranking(ranking), "ranking.svg": bar_chart(ranking, "Coefficients")}

    run_stage("train", args.out, inputs, option_record(opts, _MODEL_OPTS), produce)
    return EXIT_OK


def cmd_evaluate(args, opts) -> int:
    inputs = {args.model: file_digest(args.model), args.features: file_digest(args.features)}

    def produce():
        try:
            model = loads_model(Path(args.model).read_text(encoding="utf-8"))
        except (KeyError, ValueError) as exc:
            raise CliInputError(f"{args.model}: {exc}") from None
        instances = _read_instances(args.features)
        X, y, _, names = design_matrix(instances)
        if any(names[i] != n for i, n in zip(model.selected_indices, model.feature_names)):
            raise CliInputError("model features do not match the feature file")
        rep = evaluate(model.predict(X), y, ("mcc", "accuracy", "f1"), opts["bootstrap"], opts["seed"])
        return {"evaluation.json": dumps_json(rep.to_dict())}

    run_stage("evaluate", args.out, inputs, option_record(opts, ("seed", "bootstrap")), produce)
    return EXIT_OK


def synth_spec(args, opts) -> SynthSpec:
    params = dict(opts["extra"])
    for name in ("n_games", "hazard"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    params["seed"] = opts["seed"]
    spec = SynthSpec.from_dict(params)
    return spec.null() if args.null_effects else spec


def cmd_synth(args, opts) -> int:
    spec = synth_spec(args, opts)
    inputs = {"lexicons": lexicon_digest(opts["lexicons"])}

    def produce():
        sc = generate_corpus(spec, load_lexicons(opts["lexicons"]))
        return {"corpus.jsonl": "".join(dump_game(g) + "\n" for g in sc.games), "truth.json": dumps_json(sc.truth())}

    run_stage("synth", args.out, inputs, spec.to_dict(), produce)
    return EXIT_OK


def _curve_outputs(curves) -> dict[str, str]:
    out = {"curves.csv": rows_to_csv(curves, CURVE_COLUMNS)}
    out.update({f"figures/{k}": v for k, v in curve_charts(curves).items()})
    return out


def cmd_report(args, opts) -> int:
    inputs = {args.features: file_digest(args.features)}

    def produce():
        instances = _read_instances(args.features)
        imminent = opts["task"] == "imminent"
        group_of = (lambda i: "betrayal") if imminent else (lambda i: "betrayal" if i.label else "control")
        curves = cue_curves(instances, group_of, seed=opts["seed"])
        tests = imbalance_tests(instances, None if imminent else 1)
        out = _curve_outputs(curves)
        out["imbalance_tests.json"] = dumps_json({k: v.to_dict() for k, v in tests.items()})
        return out

    run_stage("report", args.out, inputs, option_record(opts, ("seed", "task")), produce)
    return EXIT_OK


def cmd_run(args, opts) -> int:
    inputs = {args.corpus: file_digest(args.corpus), "lexicons": lexicon_digest(opts["lexicons"])}

    def produce():
        games = _load(args.corpus)
        run = run_task(
            games, opts["task"], load_lexicons(opts["lexicons"]), opts["seed"], relation_config(opts),
            opts["strict_balance"], grid_from_options(opts), opts["folds"], opts["bootstrap"],
            nested=opts["nested"],
        )
        out = {
            "report.json": dumps_json(run.summary()),
            "ranking.txt": run.ranking_table,
            "ranking.svg": bar_chart(run.ranking, "Coefficients"),
            "model.kv": dumps_model(run.result.model),
            "features.csv": instances_to_csv(run.instances),
        }
        out.update(_curve_outputs(run.curves))
        return out

    run_stage("run", args.out, inputs, option_record(opts, _COHORT_OPTS + _MODEL_OPTS), produce)
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--lexicons", help="lexicon directory (default: shipped lexicons)")
    p.add_argument("--task", choices=TASKS)
    p.add_argument("--strict-balance", dest="strict_balance", action="store_const", const=True,
                   help="fail when matched sets differ (Mann-Whitney p <= 0.05)")
    p.add_argument("--convoy-as-friendly", dest="convoy_as_friendly", action="store_const", const=True)
    p.add_argument("--strict-reciprocity", dest="strict_reciprocity", action="store_const", const=True,
                   help="require two friendly acts in each direction")
    p.add_argument("--folds", type=int)
    p.add_argument("--bootstrap", type=int, help="bootstrap replicates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betrayal", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, validate and filter JSONL game logs")
    p.add_argument("paths", nargs="+")
    p.add_argument("--standard-only", dest="standard_only", action="store_const", const=True)
    _common(p)
    p.set_defaults(func=cmd_ingest)

    for name, helptext, func in (
        ("relate", "acts, friendships, betrayals and transition statistics", cmd_relate),
        ("cohort", "matched betrayal/control cohort and task labels", cmd_cohort),
        ("featurize", "cue features for the task instances", cmd_featurize),
        ("run", "cohort, features, grid search, ranking and figures", cmd_run),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("corpus")
        _common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("train", help="grid search and fit on a feature file")
    p.add_argument("features")
    _common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on a feature file")
    p.add_argument("model")
    p.add_argument("features")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="per-season cue curves and imbalance tests")
    p.add_argument("features")
    _common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted betrayals")
    p.add_argument("--n-games", dest="n_games", type=int)
    p.add_argument("--hazard", type=float)
    p.add_argument("--null-effects", action="store_true", help="switch every planted effect off")
    _common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        return args.func(args, opts)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BetrayalError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
