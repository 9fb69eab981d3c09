"""Survival curves, ROC grids, failure attribution and phase-diagram scans.

Every analysis walks a parameter lattice, runs cascades per cell, and reduces
results in lattice order no matter how many workers computed them. Per-cell
RNG streams are derived from (master seed, cell index, replicate index), so
the outputs are independent of execution order and of --jobs.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cascade import DOMAIN_CELL, CascadeParams, run_cascade, stream
from .network import BankAssetNetwork, FloatA

SPLIT_FULL = "full"
SPLIT_FIRST = "first_step"
SPLIT_CONSECUTIVE = "consecutive_steps"

REGION_STABLE = "I"
REGION_COLLAPSED = "II"

DEFAULT_REGION_THRESHOLD = 0.05
DEFAULT_REPLICATES = 300

# default lattice resolution when a caller asks for "the" grid
DEFAULT_ALPHA_STEP = 0.02
DEFAULT_P_STEP = 0.02
DEFAULT_ETA_STEP = 0.02


def default_axis(name: str) -> FloatA:
    if name in ("alpha", "p"):
        step = DEFAULT_ALPHA_STEP if name == "alpha" else DEFAULT_P_STEP
        return np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    if name == "eta":
        return np.round(np.arange(0.0, 0.5 + DEFAULT_ETA_STEP / 2, DEFAULT_ETA_STEP), 12)
    raise ValueError(f"unknown axis {name!r}")


@dataclass(frozen=True)
class RocPoint:
    alpha: float
    eta: float
    p: float
    tpr: float
    fpr: float
    true_positives: int
    split: str


@dataclass(frozen=True)
class SweepRecord:
    p: float
    alpha: float
    eta: float
    survival_all: float
    survival_labeled: float  # None when no labeled bank is in the network


@dataclass(frozen=True)
class SweepGrid:
    """A full (alpha, eta, p) lattice, enumerated in fixed order."""

    alphas: tuple
    etas: tuple
    ps: tuple

    def cells(self):
        return enumerate(itertools.product(self.alphas, self.etas, self.ps))

    @property
    def n_cells(self):
        return len(self.alphas) * len(self.etas) * len(self.ps)


@dataclass
class PhaseDiagram:
    axis_names: tuple
    axis_values: tuple          # one array per axis
    mean_survival: FloatA       # shaped like the axes
    ci_half: FloatA             # None when replicates < 2
    region: np.ndarray          # 'I' / 'II' per cell
    threshold: float
    replicates: int
    fixed: dict
    max_step_drop: float = None  # only for 1-D scans


# ---------------------------------------------------------------------------
# parallel lattice plumbing: a context object is shipped to each worker once,
# cell tasks are plain indices, reduction keeps lattice order

_CTX = None


def _init_worker(ctx):
    global _CTX
    _CTX = ctx


def _map_cells(cell_fn, n_cells: int, ctx, jobs: int):
    if jobs is None or jobs <= 1 or n_cells <= 1:
        _init_worker(ctx)
        return [cell_fn(i) for i in range(n_cells)]
    chunk = max(1, n_cells // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(ctx,)) as pool:
        return list(pool.map(cell_fn, range(n_cells), chunksize=chunk))


@dataclass
class _SurvivalCtx:
    network: BankAssetNetwork
    labeled_idx: np.ndarray
    shocked_asset: int
    cells: list          # (p, alpha) per cell
    eta: float
    seed: int


def _survival_cell(i):
    ctx = _CTX
    p, alpha = ctx.cells[i]
    params = CascadeParams.single(ctx.shocked_asset, p, alpha, ctx.eta, seed=ctx.seed)
    rng = stream(ctx.seed, DOMAIN_CELL, i, 0)
    result = run_cascade(ctx.network, params, rng=rng)
    labeled = None
    if ctx.labeled_idx.size:
        alive = result.failed_round == -1
        labeled = float(alive[ctx.labeled_idx].mean())
    return SweepRecord(p, alpha, ctx.eta, result.survival_fraction_all, labeled)


def _labeled_indices(network, labels):
    if labels is None:
        return np.array([], dtype=np.int64)
    idx = sorted(network.index_of(b) for b in set(labels) if b in network._index_of)
    return np.array(idx, dtype=np.int64)


def survival_curves(network, labels, shocked_asset, p_grid, alpha_grid, eta,
                    *, seed=0, jobs=1):
    """Survival fraction (all banks, labeled banks) per (p, alpha) cell.

    One cascade per cell; cells are enumerated alpha-major so each alpha value
    forms one curve over the p grid.
    """
    p_grid = [float(p) for p in p_grid]
    alpha_grid = [float(a) for a in alpha_grid]
    if not p_grid or not alpha_grid:
        raise ValueError("empty parameter grid")
    labeled_idx = _labeled_indices(network, labels)
    if labels is not None and labeled_idx.size == 0:
        warnings.warn("labels are disjoint from the network; labeled fraction undefined")
    cells = [(p, a) for a in alpha_grid for p in p_grid]
    ctx = _SurvivalCtx(network, labeled_idx, int(shocked_asset), cells, float(eta), int(seed))
    return _map_cells(_survival_cell, len(cells), ctx, jobs)


@dataclass
class _RocCtx:
    network: BankAssetNetwork
    pos_mask: np.ndarray
    shocked_asset: int
    cells: list          # (alpha, eta, p) per cell
    replicates: int
    seed: int


def _classify_failed(ctx, cell_index, alpha, eta, p):
    """Per-bank classification for one lattice cell.

    Returns boolean arrays (model_failed, first_step). With replicates > 1 the
    bank is classified failed by strict majority vote, and attributed to the
    first step when at least half of its failing runs failed in round 1.
    """
    n = ctx.network.n_banks
    reps = ctx.replicates
    failed_votes = np.zeros(n, dtype=np.int64)
    first_votes = np.zeros(n, dtype=np.int64)
    params = CascadeParams.single(ctx.shocked_asset, p, alpha, eta, seed=ctx.seed)
    for rep in range(reps):
        rng = stream(ctx.seed, DOMAIN_CELL, cell_index, rep)
        result = run_cascade(ctx.network, params, rng=rng)
        failed_votes += result.failed_round >= 1
        first_votes += result.failed_round == 1
    if reps == 1:
        model_failed = failed_votes == 1
    else:
        model_failed = failed_votes * 2 > reps
    first_step = model_failed & (first_votes * 2 >= failed_votes)
    return model_failed, first_step


def _roc_cell(i):
    ctx = _CTX
    alpha, eta, p = ctx.cells[i]
    model_failed, first_step = _classify_failed(ctx, i, alpha, eta, p)
    pos = ctx.pos_mask
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    points = []
    for split, mask in ((SPLIT_FULL, model_failed),
                        (SPLIT_FIRST, first_step),
                        (SPLIT_CONSECUTIVE, model_failed & ~first_step)):
        tp = int((mask & pos).sum())
        fp = int((mask & ~pos).sum())
        points.append(RocPoint(alpha, eta, p, tp / n_pos, fp / n_neg, tp, split))
    return points


def roc_grid(network, labels, shocked_asset, grid: SweepGrid,
             *, seed=0, replicates=1, jobs=1):
    """ROC points over a parameter lattice, three splits per cell.

    Positives are the labeled banks present in the network; negatives are the
    rest. A bank counts as model-failed when its fate round is >= 1, so
    pre-shock insolvencies never contribute to any split. The first-step and
    consecutive-steps splits partition the full split's true positives.
    """
    labeled_idx = _labeled_indices(network, labels)
    pos_mask = np.zeros(network.n_banks, dtype=bool)
    pos_mask[labeled_idx] = True
    n_pos = int(pos_mask.sum())
    n_neg = network.n_banks - n_pos
    if n_pos == 0 or n_neg == 0:
        warnings.warn("ROC undefined: need at least one positive and one negative bank; "
                      "no points emitted")
        return []
    cells = [c for _, c in SweepGrid(tuple(grid.alphas), tuple(grid.etas),
                                     tuple(grid.ps)).cells()]
    ctx = _RocCtx(network, pos_mask, int(shocked_asset), cells, int(replicates), int(seed))
    nested = _map_cells(_roc_cell, len(cells), ctx, jobs)
    return [pt for cell_points in nested for pt in cell_points]


def attribution_split(result, labels, network) -> dict:
    """Count correctly-identified failures by first step vs later steps.

    Pre-shock failures (round 0) are excluded from both counts; the two counts
    sum to the full split's true positives.
    """
    labeled_idx = _labeled_indices(network, labels)
    pos = np.zeros(network.n_banks, dtype=bool)
    pos[labeled_idx] = True
    first = int(((result.failed_round == 1) & pos).sum())
    consecutive = int(((result.failed_round >= 2) & pos).sum())
    return {"first_step_count": first, "consecutive_count": consecutive}


@dataclass
class _PhaseCtx:
    network: BankAssetNetwork
    shocked_asset: int
    cells: list          # dict of {p, alpha, eta} per cell
    replicates: int
    seed: int


def _phase_cell(i):
    ctx = _CTX
    kv = ctx.cells[i]
    params = CascadeParams.single(ctx.shocked_asset, kv["p"], kv["alpha"], kv["eta"],
                                  seed=ctx.seed)
    fractions = np.empty(ctx.replicates)
    for rep in range(ctx.replicates):
        rng = stream(ctx.seed, DOMAIN_CELL, i, rep)
        fractions[rep] = run_cascade(ctx.network, params, rng=rng).survival_fraction_all
    mean = float(fractions.mean())
    ci = float(1.96 * fractions.std(ddof=1) / np.sqrt(ctx.replicates)) \
        if ctx.replicates >= 2 else None
    return mean, ci


def phase_scan(network, shocked_asset, axes: dict, fixed: dict,
               replicates=DEFAULT_REPLICATES, *, seed=0,
               threshold=DEFAULT_REGION_THRESHOLD, jobs=1) -> PhaseDiagram:
    """Mean survival over a 1-D or 2-D parameter scan, with region labels.

    axes maps one or two of {p, alpha, eta} to value grids; fixed supplies the
    remaining parameters. Region II marks cells whose mean survival falls
    below the threshold. 1-D scans also report the largest jump between
    adjacent cells (the abrupt-transition detector).
    """
    names = list(axes)
    if not 1 <= len(names) <= 2:
        raise ValueError("phase_scan needs one or two axes")
    all_params = {"p", "alpha", "eta"}
    if not set(names) <= all_params:
        raise ValueError(f"axes must be among {sorted(all_params)}")
    missing = all_params - set(names) - set(fixed)
    if missing:
        raise ValueError(f"missing fixed parameters: {sorted(missing)}")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")

    values = [np.asarray([float(v) for v in axes[k]]) for k in names]
    combos = list(itertools.product(*values))
    cells = []
    for combo in combos:
        kv = {k: float(fixed[k]) for k in all_params - set(names)}
        kv.update({k: float(v) for k, v in zip(names, combo)})
        cells.append(kv)

    ctx = _PhaseCtx(network, int(shocked_asset), cells, int(replicates), int(seed))
    out = _map_cells(_phase_cell, len(cells), ctx, jobs)

    shape = tuple(len(v) for v in values)
    mean = np.array([m for m, _ in out]).reshape(shape)
    ci = None
    if replicates >= 2:
        ci = np.array([c for _, c in out]).reshape(shape)
    region = np.where(mean < threshold, REGION_COLLAPSED, REGION_STABLE)
    drop = None
    if len(names) == 1 and mean.size > 1:
        drop = float(np.max(np.abs(np.diff(mean))))
    return PhaseDiagram(tuple(names), tuple(values), mean, ci, region,
                        float(threshold), int(replicates),
                        {k: float(v) for k, v in fixed.items()}, drop)


# ---------------------------------------------------------------------------
# plot-ready CSV output; repr() keeps every float round-trippable and stable


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def write_roc_csv(points, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["alpha", "eta", "p", "split", "fpr", "tpr", "tp_count"])
        for pt in points:
            writer.writerow([_fmt(pt.alpha), _fmt(pt.eta), _fmt(pt.p), pt.split,
                             _fmt(pt.fpr), _fmt(pt.tpr), pt.true_positives])


def write_survival_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p", "alpha", "eta", "survival_all", "survival_labeled"])
        for rec in records:
            writer.writerow([_fmt(rec.p), _fmt(rec.alpha), _fmt(rec.eta),
                             _fmt(rec.survival_all), _fmt(rec.survival_labeled)])


def write_phase_csv(diagram: PhaseDiagram, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(diagram.axis_names) + ["mean_survival", "ci_half", "region"])
        combos = list(itertools.product(*[range(len(v)) for v in diagram.axis_values]))
        for idx in combos:
            row = [_fmt(diagram.axis_values[k][i]) for k, i in enumerate(idx)]
            ci = diagram.ci_half[idx] if diagram.ci_half is not None else None
            writer.writerow(row + [_fmt(diagram.mean_survival[idx]), _fmt(ci),
                                   str(diagram.region[idx])])
