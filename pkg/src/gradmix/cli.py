"""Command-line front end: regroup, train, cost, theory-check, run.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
divergence (including failed theory checks).

Experiment config files are flat ``key = value`` text with ``#`` comments.
Unknown keys are hard errors, and ``config_version`` is required so stale
configs fail loudly. ``GRADMIX_OUTPUT_DIR`` overrides the configured
output directory; no other setting can come from the environment.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gradmix import _kernels, costmodel, theory
from gradmix.corpus import CorpusError, EmbeddingServiceError, eval_proportions, load_corpus
from gradmix.regroup import (
    KSelectionReport,
    extend_to_eval,
    kmeans,
    load_partition,
    save_partition,
    select_k,
)
from gradmix.seeding import substream_seed
from gradmix.trainer import DivergenceError, RoundLog, TrainConfig, run_training

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3

CONFIG_VERSION = 1
FORMAT_VERSIONS = {
    "config": 1,
    "manifest": 1,
    "partition": 1,
    "rounds_csv": 1,
    "plot_data_csv": 1,
    "report": 1,
}

OUTPUT_DIR_ENV = "GRADMIX_OUTPUT_DIR"


class ConfigError(Exception):
    """The experiment configuration is missing, malformed, or inconsistent."""


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass(frozen=True)
class ExperimentConfig:
    manifest: str
    output_dir: str
    seed: int
    strategy: str
    rounds: int
    steps_per_round: int
    batch_size: int
    learning_rate: float
    k: int | None = None
    k_candidates: tuple[int, ...] | None = None
    lam: float = 3.0
    eta: float = 1.0
    hidden_units: int = 16
    eval_weighting: str = "example"
    normalize_embeddings: bool = False
    silhouette_sample_cap: int = 2048
    dump_gram: bool = False
    loss: str = "cross_entropy"


_REQUIRED_KEYS = (
    "config_version",
    "manifest",
    "output_dir",
    "seed",
    "strategy",
    "rounds",
    "steps_per_round",
    "batch_size",
    "learning_rate",
)
_OPTIONAL_KEYS = (
    "k",
    "k_candidates",
    "lambda",
    "eta",
    "hidden_units",
    "eval_weighting",
    "normalize_embeddings",
    "silhouette_sample_cap",
    "dump_gram",
    "loss",
)


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; later duplicates are errors."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_experiment_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = parse_config_text(path.read_text(encoding="utf-8"))

    unknown = sorted(set(raw) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    missing = sorted(set(_REQUIRED_KEYS) - set(raw))
    if missing:
        raise ConfigError(f"missing required config key(s): {', '.join(missing)}")

    def as_int(key: str) -> int:
        try:
            return int(raw[key])
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw[key]!r}") from None

    def as_float(key: str) -> float:
        try:
            return float(raw[key])
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw[key]!r}") from None

    if as_int("config_version") != CONFIG_VERSION:
        raise ConfigError(
            f"config_version {raw['config_version']} unsupported "
            f"(this build reads version {CONFIG_VERSION})"
        )
    if ("k" in raw) == ("k_candidates" in raw):
        raise ConfigError("exactly one of 'k' and 'k_candidates' must be set")

    k = as_int("k") if "k" in raw else None
    k_candidates = None
    if "k_candidates" in raw:
        try:
            k_candidates = tuple(int(v) for v in raw["k_candidates"].split(",") if v.strip())
        except ValueError:
            raise ConfigError(
                f"k_candidates: expected comma-separated integers, got {raw['k_candidates']!r}"
            ) from None
        if not k_candidates:
            raise ConfigError("k_candidates: empty list")

    strategy = raw["strategy"]
    eval_weighting = raw.get("eval_weighting", "example")
    if eval_weighting not in ("example", "token"):
        raise ConfigError(
            f"eval_weighting must be 'example' or 'token', got {eval_weighting!r}"
        )

    cfg = ExperimentConfig(
        manifest=raw["manifest"],
        output_dir=raw["output_dir"],
        seed=as_int("seed"),
        strategy=strategy,
        rounds=as_int("rounds"),
        steps_per_round=as_int("steps_per_round"),
        batch_size=as_int("batch_size"),
        learning_rate=as_float("learning_rate"),
        k=k,
        k_candidates=k_candidates,
        lam=as_float("lambda") if "lambda" in raw else 3.0,
        eta=as_float("eta") if "eta" in raw else 1.0,
        hidden_units=as_int("hidden_units") if "hidden_units" in raw else 16,
        eval_weighting=eval_weighting,
        normalize_embeddings=_parse_bool(
            "normalize_embeddings", raw.get("normalize_embeddings", "false")
        ),
        silhouette_sample_cap=(
            as_int("silhouette_sample_cap") if "silhouette_sample_cap" in raw else 2048
        ),
        dump_gram=_parse_bool("dump_gram", raw.get("dump_gram", "false")),
        loss=raw.get("loss", "cross_entropy"),
    )
    try:
        _train_config(cfg)  # surface invalid numbers as config errors now
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


def _train_config(cfg: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        rounds=cfg.rounds,
        steps_per_round=cfg.steps_per_round,
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        lam=cfg.lam,
        seed=cfg.seed,
        strategy=cfg.strategy,
        hidden_units=cfg.hidden_units,
        eta=cfg.eta,
        loss_kind=cfg.loss,
    )


# ---------------------------------------------------------------------------
# artifact writers / readers


def write_rounds_csv(logs: list[RoundLog], path) -> None:
    """One row per round; float cells use repr so parsing round-trips exactly."""
    m = len(logs[0].weights_used)
    header = (
        ["round"]
        + [f"p_{i}" for i in range(m)]
        + ["train_loss", "eval_loss_weighted"]
        + [f"eval_loss_{i}" for i in range(m)]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for log in logs:
            row = [str(log.round)]
            row += [repr(float(v)) for v in log.weights_used]
            row += [repr(float(log.train_loss)), repr(float(log.eval_loss_weighted))]
            row += [repr(float(v)) for v in log.eval_loss_per_cluster]
            writer.writerow(row)


def read_rounds_csv(path) -> list[dict]:
    """Parse a rounds CSV back into per-round dicts of floats/arrays."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        m = sum(1 for h in header if h.startswith("p_"))
        rows = []
        for rec in reader:
            vals = dict(zip(header, rec))
            rows.append(
                {
                    "round": int(vals["round"]),
                    "weights": np.array([float(vals[f"p_{i}"]) for i in range(m)]),
                    "train_loss": float(vals["train_loss"]),
                    "eval_loss_weighted": float(vals["eval_loss_weighted"]),
                    "eval_loss_per_cluster": np.array(
                        [float(vals[f"eval_loss_{i}"]) for i in range(m)]
                    ),
                }
            )
    return rows


def emit_plot_data(logs: list[RoundLog], path) -> None:
    """Plot-ready table: round, weight_<i> stack, then the loss curves."""
    m = len(logs[0].weights_used)
    header = (
        ["round"]
        + [f"weight_{i}" for i in range(m)]
        + ["train_loss", "eval_loss_weighted"]
        + [f"eval_loss_cluster_{i}" for i in range(m)]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for log in logs:
            row = [str(log.round)]
            row += [repr(float(v)) for v in log.weights_used]
            row += [repr(float(log.train_loss)), repr(float(log.eval_loss_weighted))]
            row += [repr(float(v)) for v in log.eval_loss_per_cluster]
            writer.writerow(row)


def write_gram_dump(logs: list[RoundLog], out_dir: Path) -> list[str]:
    names = []
    for log in logs:
        name = f"gram_round_{log.round:03d}.txt"
        with open(out_dir / name, "w", encoding="utf-8") as fh:
            for row in log.gram:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        names.append(name)
    return names


def _selection_dict(report: KSelectionReport | None):
    if report is None:
        return None
    return {
        "chosen_k": report.chosen_k,
        "candidates": [
            {
                "k": c.k,
                "silhouette": c.silhouette,
                "inertia": c.inertia,
                "seed": c.seed,
            }
            for c in report.candidates
        ],
    }


# ---------------------------------------------------------------------------
# full pipeline


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Regroup, rebalance-train, and persist artifacts; returns the report."""
    started = time.time()
    corpus = load_corpus(cfg.manifest)
    train_exs = corpus.train_examples
    embeddings = corpus.embedding_matrix("train")
    ids = [ex.id for ex in train_exs]

    clustering_seed = substream_seed(cfg.seed, "clustering")
    selection: KSelectionReport | None = None
    if cfg.k is not None:
        partition = kmeans(
            embeddings, cfg.k, seed=clustering_seed, ids=ids,
            normalize=cfg.normalize_embeddings,
        )
        chosen_k = cfg.k
    else:
        partition, selection = select_k(
            embeddings, cfg.k_candidates, seed=clustering_seed, ids=ids,
            normalize=cfg.normalize_embeddings,
            sample_cap=cfg.silhouette_sample_cap,
        )
        chosen_k = selection.chosen_k

    partition = extend_to_eval(corpus, partition)
    p_eval = eval_proportions(corpus, partition, by_token=cfg.eval_weighting == "token")
    model, logs = run_training(corpus, partition, _train_config(cfg), p_eval)

    out_dir = Path(os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_rounds_csv(logs, out_dir / "rounds.csv")
    emit_plot_data(logs, out_dir / "plot_data.csv")
    save_partition(partition, out_dir / "partition.txt")
    artifacts = ["rounds.csv", "plot_data.csv", "partition.txt", "report.json"]
    if cfg.dump_gram:
        artifacts += write_gram_dump(logs, out_dir)

    report = {
        "format_versions": FORMAT_VERSIONS,
        "kernel_backend": _kernels.BACKEND,
        "config": dataclasses.asdict(cfg),
        "chosen_k": chosen_k,
        "k_selection": _selection_dict(selection),
        "eval_proportions": [float(v) for v in p_eval],
        "final_eval_loss_weighted": logs[-1].eval_loss_weighted,
        "final_weights": [float(v) for v in logs[-1].weights_used],
        "rounds_completed": len(logs),
        "wall_clock_seconds": time.time() - started,
        "artifacts": artifacts,
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# theory checks


def run_theory_checks(trials: int, seed: int) -> dict:
    """Randomized validation of the supporting results; see theory module."""
    rng = np.random.default_rng(seed)
    results: dict[str, dict] = {}

    violations = 0
    worst = -np.inf  # largest regret - bound (negative means slack)
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        mu = rng.normal(0.0, 1.0, size=2)
        a = rng.normal(mu[0], 1.0, size=n)
        b = rng.normal(mu[1], 1.0, size=n)
        inst = theory.AlignmentInstance.from_lists([a, b])
        i, j = (0, 1) if a.mean() >= b.mean() else (1, 0)
        res = theory.regret_bound(inst, i, j)
        worst = max(worst, res.regret - res.bound)
        violations += res.violated
    results["regret_bound"] = {
        "trials": trials,
        "violations": int(violations),
        "worst_margin": float(worst),
        "pass": violations == 0,
    }

    violations = 0
    worst = -np.inf  # improvement found for a stable top cluster
    for _ in range(trials):
        m = int(rng.integers(2, 5))
        sizes = rng.integers(2, 6, size=m)
        if rng.random() < 0.5:
            # construct a stable instance: chunk sorted values
            values = np.sort(rng.normal(0.0, 1.0, size=int(sizes.sum())))[::-1]
            clusters, pos = [], 0
            for s in sizes:
                clusters.append(values[pos : pos + s])
                pos += s
        else:
            clusters = [rng.normal(0.0, 1.0, size=s) for s in sizes]
        inst = theory.AlignmentInstance.from_lists(clusters)
        stable = theory.is_stable(inst)
        top = int(np.argmax([c.mean() for c in inst.clusters]))
        best_gain = -np.inf
        for j, other in enumerate(inst.clusters):
            if j == top:
                continue
            # best single swap: drop our worst member, take their best
            gain = (other.max() - inst.clusters[top].min()) / inst.clusters[top].size
            best_gain = max(best_gain, gain)
        if stable and best_gain > 1e-12:
            violations += 1
            worst = max(worst, best_gain)
    results["stability_no_improving_swap"] = {
        "trials": trials,
        "violations": int(violations),
        "worst_margin": float(worst) if np.isfinite(worst) else 0.0,
        "pass": violations == 0,
    }

    violations = 0
    for _ in range(trials):
        vals = rng.normal(0.0, 1.0, size=int(rng.integers(2, 7)))
        out_idx = int(rng.integers(len(vals)))
        candidate = float(rng.normal(0.0, 1.0))
        swapped = vals.copy()
        swapped[out_idx] = candidate
        improved = swapped.mean() > vals.mean()
        if theory.swap_improves(float(vals[out_idx]), candidate) != improved:
            violations += 1
    results["swap_sign"] = {
        "trials": trials,
        "violations": int(violations),
        "worst_margin": 0.0,
        "pass": violations == 0,
    }

    violations = 0
    worst = np.inf  # smallest greedy-minus-alternative decrease gap
    for _ in range(trials):
        m = int(rng.integers(2, 6))
        d = int(rng.integers(2, 9))
        g = rng.normal(0.0, 1.0, size=(m, d))
        p = rng.dirichlet(np.ones(m))
        p_alt = rng.dirichlet(np.ones(m))
        L = float(rng.uniform(0.5, 2.0))
        bound = theory.eta_bound(g, p, p_alt, L)
        res = theory.greedy_dominates(g, p, p_alt, L, step_size=bound / 2.0)
        margin = res.decrease_max_corner - res.decrease_alternative
        worst = min(worst, margin)
        if margin < -1e-9:
            violations += 1
    results["greedy_step_dominance"] = {
        "trials": trials,
        "violations": int(violations),
        "worst_margin": float(worst),
        "pass": violations == 0,
    }

    return {
        "seed": seed,
        "trials_per_check": trials,
        "checks": results,
        "all_pass": all(r["pass"] for r in results.values()),
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_regroup(args) -> int:
    corpus = load_corpus(args.manifest)
    embeddings = corpus.embedding_matrix("train")
    ids = [ex.id for ex in corpus.train_examples]
    seed = substream_seed(args.seed, "clustering")
    cap = args.sample_cap if args.sample_cap > 0 else None
    if args.k is not None:
        partition = kmeans(embeddings, args.k, seed=seed, ids=ids,
                           normalize=args.normalize)
        selection = None
    else:
        candidates = [int(v) for v in args.k_candidates.split(",") if v.strip()]
        partition, selection = select_k(
            embeddings, candidates, seed=seed, ids=ids,
            normalize=args.normalize, sample_cap=cap,
        )
    save_partition(partition, args.out)
    print(f"k={partition.k} inertia={partition.inertia:.6g} "
          f"clusters={[int(c) for c in partition.counts()]}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(_selection_dict(selection), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def _cmd_train(args) -> int:
    corpus = load_corpus(args.manifest)
    partition = load_partition(args.partition)
    config = TrainConfig(
        rounds=args.rounds,
        steps_per_round=args.steps_per_round,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        lam=args.lam,
        seed=args.seed,
        strategy=args.strategy,
        hidden_units=args.hidden_units,
        eta=args.eta,
        loss_kind=args.loss,
    )
    p_eval = eval_proportions(corpus, partition, by_token=args.eval_weighting == "token")
    model, logs = run_training(corpus, partition, config, p_eval)
    out_dir = Path(os.environ.get(OUTPUT_DIR_ENV) or args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_rounds_csv(logs, out_dir / "rounds.csv")
    emit_plot_data(logs, out_dir / "plot_data.csv")
    if args.dump_gram:
        write_gram_dump(logs, out_dir)
    print(f"rounds={len(logs)} final_eval_loss_weighted="
          f"{logs[-1].eval_loss_weighted:.6f} final_weights="
          f"{[round(float(v), 4) for v in logs[-1].weights_used]}")
    return EXIT_OK


def _cmd_cost(args) -> int:
    try:
        params = costmodel.CostParams(
            N=args.N, D_t=args.D_t, D_e=args.D_e, m=args.m, T=args.T,
            delta=args.delta,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None
    report = costmodel.compare(params, include_prose=args.show_prose_variant)
    if args.json:
        payload = {
            "params": dataclasses.asdict(params),
            "rows": [dataclasses.asdict(r) for r in report.rows],
            "randb_cheaper_than_dga": report.randb_cheaper_than_dga,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    name_w = max(len(r.method) for r in report.rows)
    print(f"{'method':<{name_w}}  {'total FLOPs':>14}  {'overhead':>12}  consistent"
          + ("  prose total" if args.show_prose_variant else ""))
    for r in report.rows:
        line = (f"{r.method:<{name_w}}  {r.total_flops:>14.6e}  "
                f"{r.relative_overhead:>12.6e}  {str(r.consistent):<10}")
        if args.show_prose_variant:
            prose = "-" if r.prose_total_flops is None else f"{r.prose_total_flops:.6e}"
            line += f"  {prose}"
        print(line)
    side = "<" if report.randb_cheaper_than_dga else ">="
    print(f"gram rebalancing vs proxy gradient alignment: m {side} sqrt(D_e) "
          f"(m={params.m}, sqrt(D_e)={params.D_e ** 0.5:.1f})")
    return EXIT_OK


def _cmd_theory_check(args) -> int:
    summary = run_theory_checks(trials=args.trials, seed=args.seed)
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        for name, res in summary["checks"].items():
            status = "PASS" if res["pass"] else "FAIL"
            print(f"{name}: {status} ({res['violations']} violations / "
                  f"{res['trials']} trials, worst margin {res['worst_margin']:.3g})")
        print(f"all checks passed: {summary['all_pass']}")
    return EXIT_OK if summary["all_pass"] else EXIT_DIVERGED


def _cmd_run(args) -> int:
    cfg = load_experiment_config(args.config)
    report = run_experiment(cfg)
    out_dir = os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir
    print(f"wrote {', '.join(report['artifacts'])} to {out_dir}")
    print(f"chosen_k={report['chosen_k']} "
          f"final_eval_loss_weighted={report['final_eval_loss_weighted']:.6f}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    data problems, so route usage errors to the config-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradmix", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("regroup", help="cluster a corpus's train split")
    p.add_argument("--manifest", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, default=None)
    group.add_argument("--k-candidates", dest="k_candidates",
                       help="comma-separated candidate cluster counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true",
                   help="unit-normalize embeddings before clustering")
    p.add_argument("--sample-cap", dest="sample_cap", type=int, default=2048,
                   help="silhouette subsample size; <= 0 means exact")
    p.add_argument("--out", required=True, help="partition file to write")
    p.add_argument("--report", default=None, help="k-selection report JSON")
    p.set_defaults(func=_cmd_regroup)

    p = sub.add_parser("train", help="train against an existing partition")
    p.add_argument("--manifest", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--steps-per-round", dest="steps_per_round", type=int, required=True)
    p.add_argument("--batch-size", dest="batch_size", type=int, required=True)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=3.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--strategy", default="randb",
                   choices=("stratified", "multiplicative_weights", "randb"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden-units", dest="hidden_units", type=int, default=16)
    p.add_argument("--loss", default="cross_entropy",
                   choices=("cross_entropy", "squared_error"))
    p.add_argument("--eval-weighting", dest="eval_weighting", default="example",
                   choices=("example", "token"))
    p.add_argument("--dump-gram", dest="dump_gram", action="store_true")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("cost", help="evaluate the FLOPs cost formulas")
    p.add_argument("--N", type=float, required=True, help="model parameters")
    p.add_argument("--Dt", dest="D_t", type=float, required=True,
                   help="training tokens")
    p.add_argument("--De", dest="D_e", type=float, required=True,
                   help="evaluation tokens")
    p.add_argument("--m", type=int, required=True, help="number of domains")
    p.add_argument("--T", type=int, required=True, help="reweighting rounds")
    p.add_argument("--delta", type=float, default=0.1,
                   help="proxy model size relative to N")
    p.add_argument("--show-prose-variant", dest="show_prose_variant",
                   action="store_true",
                   help="also evaluate the alternative published accounting")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_cost)

    p = sub.add_parser("theory-check", help="randomized checks of the "
                                            "supporting results")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_theory_check)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusError, EmbeddingServiceError, FileNotFoundError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as e:
        print(f"diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
