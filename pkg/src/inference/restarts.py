"""
Restart farm and model selection.

Restart j runs icm_fit with a seed derived from (master seed, j) through
numpy's SeedSequence, so the sorted result list does not depend on the
number of workers or the order in which restarts finish.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from src.config.config import Hyperparams, ProgressHook, RunConfig
from src.inference.icm import icm_fit
from src.metrics.partition import adjusted_rand_index, view_stability
from src.model.types import Dataset, FitResult

logger = logging.getLogger(__name__)


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed of restart `index`: first word of SeedSequence([master_seed, index])."""
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def _sort_results(results: Sequence[Tuple[int, FitResult]]) -> List[FitResult]:
    # descending L; restart index breaks ties so the order is reproducible
    return [r for _, r in sorted(results, key=lambda item: (-item[1].log_posterior, item[0]))]


def run_restarts(data: Dataset, hyper: Hyperparams, run: Optional[RunConfig] = None,
                 progress: Optional[ProgressHook] = None) -> List[FitResult]:
    """
    Run hyper.restarts independent ICM fits and return them sorted by log posterior.

    With one worker the progress hook sees every sweep; with several it is
    called once per finished restart with its final iteration count.
    """
    run = run if run is not None else RunConfig()
    progress = progress if progress is not None else run.progress
    seeds = [derive_seed(hyper.seed, j) for j in range(hyper.restarts)]
    bar = tqdm(total=hyper.restarts, desc="restarts", disable=not run.verbose)
    collected: List[Tuple[int, FitResult]] = []

    if run.workers == 1:
        for j, seed in enumerate(seeds):
            collected.append((j, icm_fit(data, hyper, seed, progress=progress, restart_index=j)))
            bar.update(1)
    else:
        jobs = Parallel(n_jobs=run.workers, return_as="generator")(
            delayed(icm_fit)(data, hyper, seed, None, j) for j, seed in enumerate(seeds)
        )
        for j, result in enumerate(jobs):
            collected.append((j, result))
            if progress is not None:
                progress(j, result.iterations, result.log_posterior)
            bar.update(1)
    bar.close()

    ordered = _sort_results(collected)
    logger.info(
        "%d restarts done; best logL=%.6f (seed %d)",
        len(ordered), ordered[0].log_posterior, ordered[0].seed,
    )
    return ordered


@dataclass
class ModelSelection:
    """The selected fit and how it was chosen."""
    result: FitResult
    method: str
    rank: int                                   # 0-based position among the sorted fits
    pair: Optional[Tuple[int, int]] = None      # ranks of the most agreeing top pair
    pair_ari: Optional[float] = None
    view_stability: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "rank": self.rank,
            "pair": None if self.pair is None else list(self.pair),
            "pair_ari": self.pair_ari,
            "view_stability": list(self.view_stability),
        }


def select_best_model(results: Sequence[FitResult]) -> FitResult:
    """The fit with the largest log posterior."""
    if not results:
        raise ValueError("no fits to select from")
    return max(results, key=lambda r: r.log_posterior)


def stable_selection(results: Sequence[FitResult], top_n: int = 5,
                     probe: int = 30) -> ModelSelection:
    """
    Among the top_n fits, take the pair whose view memberships agree best
    (ARI of u) and return its member with larger log posterior, together with
    per-view Dice stability against the other top-`probe` fits.
    """
    ordered = _sort_results(list(enumerate(results)))
    if not ordered:
        raise ValueError("no fits to select from")
    if len(ordered) < 2:
        logger.warning("fewer than 2 fits; returning the single best without a stability check")
        return ModelSelection(result=ordered[0], method="stable", rank=0)

    top = ordered[:top_n]
    best_pair, best_ari = (0, 1), -np.inf
    for i, j in combinations(range(len(top)), 2):
        ari = adjusted_rand_index(top[i].state.u, top[j].state.u)
        if ari > best_ari:
            best_pair, best_ari = (i, j), ari
    rank = best_pair[0]   # i < j and the list is sorted, so i has the larger L
    chosen = top[rank]
    probes = [r.state for k, r in enumerate(ordered[:probe]) if k != rank]
    return ModelSelection(
        result=chosen,
        method="stable",
        rank=rank,
        pair=best_pair,
        pair_ari=float(best_ari),
        view_stability=view_stability(chosen.state, probes),
    )


def select_stable_model(results: Sequence[FitResult], top_n: int = 5, probe: int = 30) -> FitResult:
    """Stability-based choice among the top fits; see stable_selection."""
    return stable_selection(results, top_n, probe).result


def select_model(results: Sequence[FitResult], hyper: Hyperparams, method: str = "stable") -> ModelSelection:
    """Dispatch between the stability heuristic and plain best-of-J."""
    if method == "stable":
        return stable_selection(results, hyper.top_n, hyper.stability_probe)
    if method == "best":
        ordered = _sort_results(list(enumerate(results)))
        probes = [r.state for r in ordered[1:hyper.stability_probe]]
        return ModelSelection(
            result=ordered[0], method="best", rank=0,
            view_stability=view_stability(ordered[0].state, probes),
        )
    raise ValueError(f"unknown selection method '{method}'")
