import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.errors import BoundError, InputError
from core.frog_model import (
    DepthCap,
    FenceAtDepth,
    FrogModel,
    FrogStatus,
    InitialCondition,
    OnePerSite,
    SelfSimilarCollision,
    StopAtRoot,
)
from core.graphs import DAryTree, GraphKind, Side, VertexAddress, ZGlueTree6
from core.rng import RngStreamSpec
from core.walkers import WalkerKind

logger = logging.getLogger(__name__)

FENCE_STEP_CAP = 1_000_000
FENCE_MAX_DEPTH = 25
ABC_HORIZON = 100_000
EXACT_DELTA_MAX = 100_000


def _pool_map(fn, jobs: List, parallel: int) -> List:
    """Map ``fn`` over ``jobs`` in order, in worker processes when ``parallel > 1``."""
    if parallel <= 1 or len(jobs) < 2:
        return [fn(job) for job in jobs]
    chunksize = max(1, len(jobs) // (4 * parallel))
    with ProcessPoolExecutor(max_workers=parallel) as ex:
        return list(ex.map(fn, jobs, chunksize=chunksize))


def _mean_stderr(values: List[float]) -> Tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values, dtype=float)
    if len(arr) < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


# ----------------------------------------------------------------------
# Stunning fences
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FenceRecord:
    k: int
    reps: int
    mean_A: float
    stderr_A: float
    scaled: float
    mean_root_visits: float
    aborted: int


@dataclass
class FenceStats:
    d: int
    records: Dict[int, FenceRecord] = field(default_factory=dict)
    # every replicate's stunned counts, epoch by epoch (completed replicates only)
    samples: List[List[int]] = field(default_factory=list)
    aborted: int = 0
    diagnostics: List[str] = field(default_factory=list)

    CSV_HEADER = ("d", "k", "reps", "mean_A", "stderr_A", "scaled", "mean_root_visits", "aborted")

    def rows(self) -> List[Dict]:
        return [
            {
                "d": self.d,
                "k": r.k,
                "reps": r.reps,
                "mean_A": r.mean_A,
                "stderr_A": r.stderr_A,
                "scaled": r.scaled,
                "mean_root_visits": r.mean_root_visits,
                "aborted": r.aborted,
            }
            for _, r in sorted(self.records.items())
        ]


@dataclass(frozen=True)
class _FenceJob:
    d: int
    k_max: int
    spec: RngStreamSpec
    step_cap: int
    stun_woken: bool


def _longest_epoch_walk(model: FrogModel, base: Dict[int, int]) -> int:
    return max((f.steps - base.get(f.id, 0) for f in model.state.frogs), default=0)


def _fence_replicate(job: _FenceJob) -> Tuple[List[int], List[int], Optional[str]]:
    """One replicate: epochs k = 1..k_max; returns stunned counts, root visits, abort reason."""
    model = FrogModel(
        DAryTree(job.d),
        OnePerSite(),
        WalkerKind.SIMPLE,
        [FenceAtDepth(1)],
        job.spec.generator(),
        stun_woken_on_fence=job.stun_woken,
    )
    stunned: List[int] = []
    visits: List[int] = []
    for k in range(1, job.k_max + 1):
        if k > 1:
            model.resume_stunned(new_fence=k)
        base = {f.id: f.steps for f in model.state.frogs}
        rounds = 0
        while model.step():
            rounds += 1
            # a frog moves at most once per round, so no frog can pass the cap sooner
            if rounds > job.step_cap and _longest_epoch_walk(model, base) > job.step_cap:
                return stunned, visits, (
                    f"replicate {job.spec.index}: a frog exceeded {job.step_cap} steps in epoch {k}"
                )
        stunned.append(model.status_counts()[FrogStatus.STUNNED.value])
        visits.append(model.epoch_root_visits)
    return stunned, visits, None


def fence_experiment(
    d: int,
    k_max: int,
    reps: int,
    seed: int,
    *,
    step_cap: int = FENCE_STEP_CAP,
    stun_woken_on_fence: bool = True,
    parallel: int = 1,
) -> FenceStats:
    """Stunning-fence statistics A_{d,k} on the d-ary tree.

    Parameters
    ----------
    d : int
        Branching number, at least 2.
    k_max : int
        Deepest fence, between 1 and 25.
    reps : int
        Number of independent replicates; replicate ``i`` draws from
        ``RngStreamSpec(seed, i)``.
    step_cap : int
        Rounds allowed per epoch before the replicate is aborted.
    """
    if d < 2:
        raise InputError(f"d must be >= 2, got {d}")
    if not 1 <= k_max <= FENCE_MAX_DEPTH:
        raise BoundError(f"k_max must lie in [1, {FENCE_MAX_DEPTH}], got {k_max}")
    if reps < 1:
        raise InputError(f"reps must be >= 1, got {reps}")

    logger.info("fence experiment d=%d k_max=%d reps=%d seed=%d", d, k_max, reps, seed)
    jobs = [_FenceJob(d, k_max, RngStreamSpec(seed, i), step_cap, stun_woken_on_fence) for i in range(reps)]
    results = _pool_map(_fence_replicate, jobs, parallel)

    stats = FenceStats(d=d)
    root_visits: List[List[int]] = []
    for stunned, visits, reason in results:
        if reason is not None:
            logger.warning("aborted %s", reason)
            stats.aborted += 1
            stats.diagnostics.append(reason)
            continue
        stats.samples.append(stunned)
        root_visits.append(visits)

    for k in range(1, k_max + 1):
        counts = [s[k - 1] for s in stats.samples]
        mean_a, se_a = _mean_stderr(counts)
        mean_v, _ = _mean_stderr([v[k - 1] for v in root_visits])
        stats.records[k] = FenceRecord(
            k=k,
            reps=len(counts),
            mean_A=mean_a,
            stderr_A=se_a,
            scaled=k * float(d) ** (-k) * mean_a,
            mean_root_visits=mean_v,
            aborted=stats.aborted,
        )
        logger.debug("d=%d k=%d mean_A=%.4f scaled=%.5f", d, k, mean_a, stats.records[k].scaled)
    return stats


# ----------------------------------------------------------------------
# Events A, B, C on the self-similar binary-tree model
# ----------------------------------------------------------------------

def self_similar_model(depth_cap: int, rng) -> FrogModel:
    return FrogModel(
        DAryTree(2),
        OnePerSite(),
        WalkerKind.SELF_SIMILAR,
        [StopAtRoot(), SelfSimilarCollision(), DepthCap(depth_cap)],
        rng,
    )


def classify_abc(model: FrogModel, horizon: int = ABC_HORIZON) -> str:
    """Run a fresh self-similar model and label it "A", "B" or "C".

    After round 1 the initial frog stands at the root's child ∅′; after round 2
    it stands at a grandchild v, and u is v's sibling.  A: the frog woken at ∅′
    is the first to reach u.  B: some other frog reaches u.  C: u is never
    visited.
    """
    frog0 = model.state.frogs[0]
    model.step()
    model.step()
    v = frog0.address
    u = VertexAddress(v.level, v.index ^ 1)
    model.run(horizon)
    first = model.state.visited.get(u)
    if first is None:
        return "C"
    return "A" if first == 1 else "B"


def _abc_replicate(job: Tuple[int, RngStreamSpec]) -> str:
    depth_cap, spec = job
    return classify_abc(self_similar_model(depth_cap, spec.generator()))


def event_abc_counts(reps: int, depth_cap: int, seed: int, *, parallel: int = 1) -> Counter:
    """How many replicates fell in each of A, B and C."""
    if reps < 1:
        raise InputError(f"reps must be >= 1, got {reps}")
    if depth_cap < 2:
        raise InputError(f"depth_cap must be >= 2, got {depth_cap}")
    labels = _pool_map(_abc_replicate, [(depth_cap, RngStreamSpec(seed, i)) for i in range(reps)], parallel)
    tally = Counter({"A": 0, "B": 0, "C": 0})
    tally.update(labels)
    return tally


def event_abc_estimate(reps: int, depth_cap: int, seed: int, *, parallel: int = 1) -> Tuple[float, float, float]:
    """Monte Carlo frequencies (p_A, p_B, p_C), each counted directly."""
    tally = event_abc_counts(reps, depth_cap, seed, parallel=parallel)
    logger.info("events over %d replicates: %s", reps, dict(tally))
    return tally["A"] / reps, tally["B"] / reps, tally["C"] / reps


# ----------------------------------------------------------------------
# Root-visit census
# ----------------------------------------------------------------------

@dataclass
class CensusResult:
    graph: str
    horizon: int
    reps: int
    histogram: Dict[int, int]
    returned_fraction: float
    truncated: int
    # ZGlueTree6 only: share of replicates whose first step enters the tree
    first_step_into_tree: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "graph": self.graph,
            "horizon": self.horizon,
            "reps": self.reps,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "returned_fraction": self.returned_fraction,
            "truncated": self.truncated,
            "first_step_into_tree": self.first_step_into_tree,
        }


@dataclass(frozen=True)
class _CensusJob:
    graph: GraphKind
    init: InitialCondition
    horizon: int
    depth_cap: Optional[int]
    max_frogs: Optional[int]
    spec: RngStreamSpec


def _census_replicate(job: _CensusJob) -> Tuple[int, bool, bool]:
    rules = [DepthCap(job.depth_cap)] if job.depth_cap else []
    model = FrogModel(job.graph, job.init, WalkerKind.SIMPLE, rules, job.spec.generator(), max_frogs=job.max_frogs)
    into_tree = False
    if job.horizon > 0:
        model.step()
        first = model.state.frogs[0].address
        into_tree = first.side == Side.TREE and first.level == 1
    summary = model.run(job.horizon)
    return summary.root_visits, into_tree, summary.truncated


def root_visit_census(
    g: GraphKind,
    init: InitialCondition,
    horizon: int,
    reps: int,
    seed: int,
    *,
    depth_cap: Optional[int] = 8,
    max_frogs: Optional[int] = 200_000,
    parallel: int = 1,
) -> CensusResult:
    """Histogram of root visits within ``horizon`` rounds over ``reps`` replicates."""
    if reps < 1:
        raise InputError(f"reps must be >= 1, got {reps}")
    if horizon < 0:
        raise InputError(f"horizon must be >= 0, got {horizon}")
    jobs = [_CensusJob(g, init, horizon, depth_cap, max_frogs, RngStreamSpec(seed, i)) for i in range(reps)]
    results = _pool_map(_census_replicate, jobs, parallel)

    histogram = Counter(v for v, _, _ in results)
    result = CensusResult(
        graph=repr(g),
        horizon=horizon,
        reps=reps,
        histogram=dict(histogram),
        returned_fraction=sum(1 for v, _, _ in results if v > 0) / reps,
        truncated=sum(1 for _, _, t in results if t),
    )
    if isinstance(g, ZGlueTree6):
        result.first_step_into_tree = (
            sum(1 for _, t, _ in results if t) / reps if horizon > 0 else 0.0
        )
    logger.info("census %s: %.3f of %d replicates returned", g, result.returned_fraction, reps)
    return result


# ----------------------------------------------------------------------
# Escape bound
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class EscapeBound:
    n: int
    delta: Fraction
    closed_form: Fraction
    limit: Fraction
    # True when delta came from multiplying out the product
    exact_product: bool
    delta_float: float

    @property
    def gap_to_limit(self) -> float:
        return self.delta_float - float(self.limit)

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "closed_form": f"{self.closed_form.numerator}/{self.closed_form.denominator}",
            "limit": f"{self.limit.numerator}/{self.limit.denominator}",
            "exact_product": self.exact_product,
            "delta_float": self.delta_float,
            "gap_to_limit": self.gap_to_limit,
        }


def delta_float(n: int) -> float:
    """Float δₙ from the product, summed in log space."""
    k = np.arange(1, n, dtype=float)
    return math.exp(math.log(1 / 8) + float(np.sum(np.log1p(-1.0 / (k + 1) ** 2))))


def delta_lower_bound(n: int) -> EscapeBound:
    """δₙ = (1/8)·∏_{k=1}^{n−1}(1 − 1/(k+1)²), which telescopes to (n+1)/(16n)."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    closed = Fraction(n + 1, 16 * n)
    if n <= EXACT_DELTA_MAX:
        delta = Fraction(1, 8)
        for k in range(1, n):
            delta *= 1 - Fraction(1, (k + 1) ** 2)
        exact = True
    else:
        delta, exact = closed, False
    return EscapeBound(
        n=n,
        delta=delta,
        closed_form=closed,
        limit=Fraction(1, 16),
        exact_product=exact,
        delta_float=delta_float(n),
    )
