"""
wishmix command-line interface.

    simulate    draw a synthetic dataset with planted views and clusters
    preprocess  Ledoit-Wolf regularisation and whitening
    fit         ICM restarts plus model selection
    evaluate    recovery against ground truth, or comparison of two models
    importance  original-node importance ranking for one view

Exit codes: 0 success, 1 data or runtime error, 2 usage error.
"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import typer

from src.config.config import (
    Hyperparams,
    PreprocessConfig,
    RunConfig,
    SynthConfig,
    get_default_hyperparams,
    get_default_workers,
)
from src.inference.restarts import derive_seed, run_restarts, select_model
from src.io.formats import (
    read_dataset,
    read_json,
    read_model,
    read_truth,
    read_whiten_report,
    write_dataset,
    write_json,
    write_model,
    write_table,
    write_truth,
    write_whiten_report,
)
from src.logs import RunTimer, log_fit_failure, log_fit_run
from src.metrics.matching import match_subjects
from src.metrics.partition import compare_models, recovery_score, view_stability_limits
from src.model.errors import WishmixError
from src.preprocess.preprocess import importance_ranking, pooled_mean, whiten
from src.synth.synthgen import GroundTruth, generate

logger = logging.getLogger(__name__)

DEFAULTS = get_default_hyperparams()

app = typer.Typer(
    name="wishmix",
    help="Multiple-view clustering of correlation matrices with Wishart mixtures",
    add_completion=False,
)


@contextmanager
def _handle_errors():
    """Report library and IO errors on stderr and exit with code 1."""
    try:
        yield
    except (WishmixError, OSError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(1)


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr)
    if verbose:
        logging.getLogger().setLevel(logging.INFO)


def _positive(value: Optional[float]) -> Optional[float]:
    if value is not None and value <= 0:
        raise typer.BadParameter(f"must be > 0, got {value}")
    return value


# ── simulate ───────────────────────────────────────────────────────

@app.command()
def simulate(
    data_type: int = typer.Option(1, "--type", min=1, max=2, help="1: zero background, 2: background 0.2"),
    w: float = typer.Option(0.0, "--w", min=0.0, max=1.0, help="Noise weight in [0, 1]"),
    p: int = typer.Option(30, "--p", min=1, help="Number of nodes"),
    n: int = typer.Option(100, "--n", min=1, help="Number of objects"),
    views: int = typer.Option(3, "--views", "-V", min=1, help="Number of planted views"),
    clusters: int = typer.Option(4, "--clusters", "-K", min=1, help="Object clusters per view"),
    datapoints: Optional[int] = typer.Option(None, "--datapoints", min=2, help="Samples per object (default p + 10)"),
    balanced: bool = typer.Option(False, "--balanced", help="Exactly equal cluster sizes"),
    seed: int = typer.Option(0, "--seed", help="Random seed"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Write a synthetic dataset (manifest + per-subject CSVs) and its ground truth."""
    _setup_logging(verbose)
    if p % views != 0:
        raise typer.BadParameter(f"--p={p} must be divisible by --views={views}", param_hint="--views")
    with _handle_errors():
        config = SynthConfig.for_type(
            data_type, p=p, n=n, n_views=views, n_clusters=clusters, w=w,
            datapoints=datapoints, balanced=balanced, seed=seed,
        )
        with RunTimer("simulate", {"p": p, "n": n, "w": w}):
            data, truth = generate(config)
        provenance = {
            "generator": "synthgen",
            "type": data_type,
            "seed": seed,
            "config": {
                "p": config.p, "n": config.n, "n_views": config.n_views,
                "n_clusters": config.n_clusters, "w": config.w,
                "background": config.background, "datapoints": config.datapoints,
                "balanced": config.balanced,
            },
        }
        manifest = write_dataset(out, data, provenance)
        write_truth(out / "truth.json", truth.view_labels, truth.cluster_labels)
    typer.echo(f"Wrote {data.n} matrices ({data.p}x{data.p}) to {manifest}")


# ── preprocess ─────────────────────────────────────────────────────

@app.command()
def preprocess(
    input_manifest: Path = typer.Option(..., "--in", "-i", help="Input manifest.json"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
    regularize: bool = typer.Option(False, "--regularize", help="Ledoit-Wolf shrinkage (time-series input)"),
    do_whiten: bool = typer.Option(False, "--whiten", help="Whiten with the mean matrix"),
    mean_from: Optional[List[Path]] = typer.Option(
        None, "--mean-from", help="Further manifests pooled into the whitening mean"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Regularise and/or whiten a dataset; writes the dataset and a whitening report."""
    _setup_logging(verbose)
    if mean_from and not do_whiten:
        raise typer.BadParameter("--mean-from only applies together with --whiten", param_hint="--mean-from")
    with _handle_errors():
        steps = PreprocessConfig(regularize=regularize, whiten=do_whiten,
                                 mean_from=[str(m) for m in (mean_from or [])])
        data, manifest = read_dataset(input_manifest, regularize=steps.regularize)
        provenance = {
            "parent": manifest.provenance,
            "source": str(input_manifest),
            "steps": steps.to_dict(),
        }
        if steps.whiten:
            mean = None
            if mean_from:
                others = [read_dataset(m, regularize=regularize)[0] for m in mean_from]
                mean = pooled_mean([data] + others)
            with RunTimer("whiten", {"n": data.n, "p": data.p}):
                data, report = whiten(data, mean)
            write_whiten_report(out, report, {
                "source": str(input_manifest),
                "node_names": None if data.node_names is None else list(data.node_names),
            })
        write_dataset(out, data, provenance)
    typer.echo(f"Preprocessed {data.n} matrices into {out}")


# ── fit ────────────────────────────────────────────────────────────

@app.command()
def fit(
    input_manifest: Path = typer.Option(..., "--in", "-i", help="Dataset manifest.json"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
    restarts: int = typer.Option(DEFAULTS.restarts, "--restarts", "-J", min=1, help="Number of ICM restarts"),
    alpha: float = typer.Option(DEFAULTS.alpha, "--alpha", callback=_positive, help="CRP concentration"),
    alpha_view: Optional[float] = typer.Option(None, "--alpha-view", callback=_positive),
    alpha_node: Optional[float] = typer.Option(None, "--alpha-node", callback=_positive),
    alpha_object: Optional[float] = typer.Option(None, "--alpha-object", callback=_positive),
    delta: int = typer.Option(DEFAULTS.delta, "--delta", min=1, help="Degree-of-freedom grid step"),
    max_iter: int = typer.Option(DEFAULTS.max_iter, "--max-iter", min=0),
    max_stability: int = typer.Option(DEFAULTS.max_stability, "--max-stability", min=1),
    epsilon: float = typer.Option(DEFAULTS.epsilon, "--epsilon", callback=_positive),
    placement: str = typer.Option(DEFAULTS.view_move_placement, "--placement", help="View-move placement: best | singleton"),
    single_view: bool = typer.Option(False, "--single-view", help="Fix all nodes to one view"),
    selection: str = typer.Option("stable", "--selection", help="Model selection: stable | best"),
    top_k: int = typer.Option(10, "--top-k", min=1, help="Rows of the summary table"),
    stability_perm: int = typer.Option(1000, "--stability-perm", min=0, help="Permutations for stability limits (0 skips)"),
    seed: int = typer.Option(0, "--seed", help="Master seed"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", min=1, help="Parallel workers (default WISHMIX_WORKERS or 1)"),
    log_runs: bool = typer.Option(True, "--log-runs/--no-log-runs", help="Record restarts in the run log"),
    debug: bool = typer.Option(False, "--debug", help="Check every move against the full posterior"),
    plot: bool = typer.Option(False, "--plot", help="Also render the view stability bars (needs matplotlib)"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Run ICM restarts and write the selected model and a top-k summary."""
    _setup_logging(verbose)
    if placement not in ("best", "singleton"):
        raise typer.BadParameter(f"unknown placement '{placement}'", param_hint="--placement")
    if selection not in ("stable", "best"):
        raise typer.BadParameter(f"unknown selection '{selection}'", param_hint="--selection")
    with _handle_errors():
        data, _ = read_dataset(input_manifest)
        hyper = Hyperparams(
            alpha=alpha, alpha_view=alpha_view, alpha_node=alpha_node, alpha_object=alpha_object,
            delta=delta, restarts=restarts, max_iter=max_iter, max_stability=max_stability,
            epsilon=epsilon, seed=seed, view_move_placement=placement,
            fix_single_view=single_view, debug=debug,
        )
        run = RunConfig(workers=workers or get_default_workers(), verbose=verbose, log_runs=log_runs)

        with RunTimer("fit", {"restarts": restarts, "n": data.n, "p": data.p}):
            try:
                results = run_restarts(data, hyper, run)
            except WishmixError as e:
                if run.log_runs:
                    log_fit_failure(e, seed=seed, source=str(input_manifest))
                raise
        if run.log_runs:
            seed_index = {derive_seed(seed, j): j for j in range(restarts)}
            for result in results:
                log_fit_run(result, restart_index=seed_index.get(result.seed, -1),
                            source=str(input_manifest))

        chosen = select_model(results, hyper, selection)
        report = chosen.to_dict()
        if stability_perm > 0 and len(results) > 1:
            probes = [r.state for k, r in enumerate(results[:hyper.stability_probe]) if k != chosen.rank]
            limits, pvalues = view_stability_limits(
                chosen.result.state, probes, n_perm=stability_perm,
                rng=np.random.default_rng(derive_seed(seed, restarts)),
            )
            report["view_stability_q95"] = limits.tolist()
            report["view_stability_p"] = pvalues.tolist()

        write_model(out / "model.json", chosen.result, hyper.to_dict(), report)
        write_table(out / "summary.csv", [
            {
                "rank": k + 1,
                "seed": r.seed,
                "log_posterior": r.log_posterior,
                "n_views": r.state.n_views,
                "iterations": r.iterations,
                "converged": r.converged,
            }
            for k, r in enumerate(results[:top_k])
        ])
        if plot and report["view_stability"]:
            from src.cli.plots import plot_bars
            plot_bars(out / "view_stability.png",
                      [str(v + 1) for v in range(len(report["view_stability"]))],
                      report["view_stability"], "view stability (mean Dice)",
                      report.get("view_stability_q95"))

    best = chosen.result
    typer.echo(
        f"Selected model ({selection}): logL={best.log_posterior:.4f}, "
        f"{best.state.n_views} views, clusters per view {best.state.n_clusters()}, T={best.state.T}"
    )


# ── evaluate ───────────────────────────────────────────────────────

@app.command()
def evaluate(
    model_path: Path = typer.Option(..., "--in", "-i", help="model.json to evaluate"),
    out: Path = typer.Option(..., "--out", "-o", help="Output directory"),
    truth_path: Optional[Path] = typer.Option(None, "--truth", help="Ground-truth truth.json"),
    model_b_path: Optional[Path] = typer.Option(None, "--model-b", help="Second model.json to compare against"),
    data_a: Optional[Path] = typer.Option(None, "--data", help="Manifest of model A's dataset (subject matching)"),
    data_b: Optional[Path] = typer.Option(None, "--data-b", help="Manifest of model B's dataset (subject matching)"),
    match_dof: Optional[int] = typer.Option(None, "--match-dof", min=1, help="Wishart dof for matching (default model T)"),
    n_perm: int = typer.Option(1000, "--n-perm", min=1, help="Permutations per test"),
    seed: int = typer.Option(0, "--seed", help="Seed of the permutation tests"),
    plot: bool = typer.Option(False, "--plot", help="Also render PNG figures (needs matplotlib)"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Score a model against ground truth (--truth) or compare it with another model (--model-b)."""
    _setup_logging(verbose)
    if (truth_path is None) == (model_b_path is None):
        raise typer.BadParameter("give exactly one of --truth or --model-b", param_hint="--truth/--model-b")
    with _handle_errors():
        model = read_model(model_path)
        state = model.to_state()
        if truth_path is not None:
            _evaluate_truth(state, truth_path, out, plot)
        else:
            _evaluate_pair(state, model_b_path, out, data_a, data_b, match_dof, n_perm, seed, plot)


def _evaluate_truth(state, truth_path: Path, out: Path, plot: bool) -> None:
    raw = read_truth(truth_path)
    truth = GroundTruth(view_labels=raw.view_labels, cluster_labels=raw.cluster_labels)
    report = recovery_score(truth, state)
    write_json(out / "recovery.json", report.to_dict())
    rows = [{"true_view": v + 1, "cluster_ari": ari}
            for v, ari in enumerate(report.cluster_ari_per_true_view)]
    write_table(out / "recovery.csv", rows)
    if plot:
        from src.cli.plots import plot_bars
        plot_bars(out / "recovery.png", [str(r["true_view"]) for r in rows],
                  list(report.cluster_ari_per_true_view), f"view ARI {report.view_ari:.3f}")
    typer.echo(
        f"view ARI={report.view_ari:.4f}, grand mean cluster ARI={report.grand_mean_cluster_ari:.4f}"
    )


def _evaluate_pair(state_a, model_b_path: Path, out: Path, data_a: Optional[Path],
                   data_b: Optional[Path], match_dof: Optional[int], n_perm: int,
                   seed: int, plot: bool) -> None:
    state_b = read_model(model_b_path).to_state()
    comparison = compare_models(state_a, state_b, n_perm=n_perm, rng=np.random.default_rng(seed))

    if data_a is not None and data_b is not None:
        dataset_a, _ = read_dataset(data_a)
        dataset_b, _ = read_dataset(data_b)
        T = match_dof if match_dof is not None else state_a.T
        for i, j in comparison.significant_pairs:
            subset = sorted(set(state_a.view_nodes(i + 1).tolist()) & set(state_b.view_nodes(j + 1).tolist()))
            if not subset:
                continue
            b_to_a, _ = match_subjects(dataset_a, dataset_b, subset, T)
            a_to_b, _ = match_subjects(dataset_b, dataset_a, subset, T)
            comparison.matching_accuracy[(i, j)] = (b_to_a, a_to_b)
    elif comparison.significant_pairs:
        logger.info("no --data/--data-b given; skipping subject matching")

    write_table(out / "comparison.csv", comparison.rows())
    write_table(out / "dice_table.csv", pd.DataFrame(comparison.dice))
    write_table(out / "ari_table.csv", pd.DataFrame(comparison.ari))
    if plot:
        from src.cli.plots import plot_heatmap
        plot_heatmap(out / "dice_table.png", comparison.dice, "Dice of view memberships")
        plot_heatmap(out / "ari_table.png", comparison.ari, "ARI of object clusterings")
    typer.echo(f"{len(comparison.significant_pairs)} significant view pair(s)")
    for (i, j), (b_to_a, a_to_b) in sorted(comparison.matching_accuracy.items()):
        typer.echo(f"  views {i + 1}-{j + 1}: matching accuracy B->A {b_to_a:.3f}, A->B {a_to_b:.3f}")


# ── importance ─────────────────────────────────────────────────────

@app.command()
def importance(
    model_path: Path = typer.Option(..., "--model", "-m", help="model.json"),
    report_path: Path = typer.Option(..., "--report", "-r", help="whiten_report.json from preprocess --whiten"),
    view: int = typer.Option(..., "--view", min=1, help="View label (1-based)"),
    top: int = typer.Option(10, "--top", min=1, help="Number of nodes to list"),
    raw: bool = typer.Option(False, "--raw", help="Use Mbar^{1/2} without correlation normalisation"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Optional CSV of the full ranking"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Rank original nodes by their importance for one view."""
    _setup_logging(verbose)
    with _handle_errors():
        if not report_path.exists():
            typer.echo(
                f"Error: whitening report {report_path} not found; importance requires the "
                "whitening provenance written by `preprocess --whiten`", err=True,
            )
            raise typer.Exit(1)
        state = read_model(model_path).to_state()
        report = read_whiten_report(report_path)
        if view > state.n_views:
            typer.echo(f"Error: model has {state.n_views} views, got --view {view}", err=True)
            raise typer.Exit(1)
        if report.p != state.p:
            typer.echo(f"Error: report has p={report.p}, model has p={state.p}", err=True)
            raise typer.Exit(1)
        names = _node_names(report_path, report.p)
        scores = importance_ranking(state.view_nodes(view), report, normalize=not raw)

    if top > report.p:
        logger.warning("--top %d exceeds p=%d; listing all nodes", top, report.p)
        top = report.p
    order = np.argsort(-scores, kind="stable")
    table = pd.DataFrame({
        "rank": np.arange(1, report.p + 1),
        "node": order,
        "name": [names[i] for i in order],
        "importance": scores[order],
    })
    if out is not None:
        with _handle_errors():
            write_table(out, table)
    typer.echo(table.head(top).to_string(index=False))


def _node_names(report_path: Path, p: int) -> List[str]:
    names = read_json(report_path).get("provenance", {}).get("node_names")
    return list(names) if names else [f"node{i}" for i in range(p)]


def main():
    app()


if __name__ == "__main__":
    main()
