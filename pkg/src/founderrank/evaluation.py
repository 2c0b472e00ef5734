"""Compare a candidate founder ranking with a baseline ranking.

Throughout, ``rg(f)`` is the founder's 0-based position in the baseline
(0 = best) and ``X_i`` is the founder at the candidate's i-th position.
DCG relevance is ``N - rg``, so the baseline's best founder has relevance N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ranking import Ranking, position_scores

DEFAULT_P_AT = (5, 10, 20)
DEFAULT_TRIALS = 10000


def baseline_scores(b: Ranking) -> dict[str, float]:
    """Baseline score ``1 - r/(N-1)`` for the founder at position r."""
    return position_scores(b.order)


def _strict_order(x: Ranking) -> tuple[str, ...]:
    # tied candidate scores fall back to founder id
    return tuple(sorted(x.order, key=lambda f: (-x.score[f], f)))


def baseline_positions(x: Ranking, b: Ranking) -> np.ndarray:
    """rg(X_i) for i = 0..N-1 as an integer array."""
    if set(x.order) != set(b.order):
        raise ValueError("candidate and baseline must rank the same founders")
    pos = {f: i for i, f in enumerate(b.order)}
    return np.array([pos[f] for f in _strict_order(x)], dtype=np.int64)


def _dcg(ranks: np.ndarray, n: int, linear_gain: bool) -> float:
    discounts = [math.log2(i + 2) for i in range(len(ranks))]
    if linear_gain:
        return math.fsum((n - int(r)) / d for r, d in zip(ranks, discounts))
    # (2^(N-r) - 1) scaled by 2^-N so large N cannot overflow; the factor
    # cancels in the NDCG ratio
    tail = math.ldexp(1.0, -n)
    return math.fsum((math.ldexp(1.0, -int(r)) - tail) / d for r, d in zip(ranks, discounts))


def ndcg(x: Ranking, b: Ranking, linear_gain: bool = False) -> float:
    """DCG of the candidate divided by DCG of the baseline itself.

    ``linear_gain`` swaps the exponential gain for plain relevance ``N - rg``
    (useful for very large N; not the standard definition used here).
    """
    ranks = baseline_positions(x, b)
    n = len(ranks)
    return _dcg(ranks, n, linear_gain) / _dcg(np.arange(n), n, linear_gain)


def precision_at(x: Ranking, b: Ranking, n: int) -> float:
    """Share of the candidate's top n that is also in the baseline's top n."""
    if not 1 <= n <= len(b):
        raise ValueError(f"n must be in [1, {len(b)}]")
    if set(x.order) != set(b.order):
        raise ValueError("candidate and baseline must rank the same founders")
    top_x = set(_strict_order(x)[:n])
    return len(top_x & set(b.order[:n])) / n


def _inversions(seq) -> int:
    """Number of pairs i < j with seq[i] > seq[j], by merge sort."""
    seq = list(seq)
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _inversions(left) + _inversions(right)
    left.sort()
    right.sort()
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            i += 1
        else:
            count += len(left) - i
            j += 1
    return count


def _tau_from_inversions(inv, n):
    return 1.0 - 4.0 * inv / (n * (n - 1))


def kendall_tau(x: Ranking, b: Ranking) -> float:
    ranks = baseline_positions(x, b)
    n = len(ranks)
    if n < 2:
        raise ValueError("kendall_tau needs at least 2 founders")
    return _tau_from_inversions(_inversions(ranks.tolist()), n)


def _rho_from_ranks(ranks: np.ndarray, n: int):
    d = ranks - np.arange(n)
    return 1.0 - 6.0 * (d * d).sum(axis=-1) / (n * (n * n - 1))


def spearman_rho(x: Ranking, b: Ranking) -> float:
    ranks = baseline_positions(x, b)
    n = len(ranks)
    if n < 2:
        raise ValueError("spearman_rho needs at least 2 founders")
    return float(_rho_from_ranks(ranks, n))


def score_differences(x: Ranking, b: Ranking) -> np.ndarray:
    if set(x.order) != set(b.order):
        raise ValueError("candidate and baseline must rank the same founders")
    bs = baseline_scores(b)
    return np.array([x.score[f] - bs[f] for f in sorted(x.order)], dtype=float)


def rmse(x: Ranking, b: Ranking) -> float:
    d = score_differences(x, b)
    return float(np.sqrt(np.mean(d * d)))


def mae(x: Ranking, b: Ranking) -> float:
    return float(np.mean(np.abs(score_differences(x, b))))


# -- permutation p-values --------------------------------------------------

def batch_inversions(perms: np.ndarray) -> np.ndarray:
    """Inversion count of every row of a (T, N) array of permutations of 0..N-1.

    A Fenwick tree per row, advanced column by column for all rows at once.
    """
    t, n = perms.shape
    tree = np.zeros((t, n + 1), dtype=np.int64)
    rows = np.arange(t)
    inv = np.zeros(t, dtype=np.int64)
    for j in range(n):
        v = perms[:, j] + 1
        # how many inserted values are <= current one
        idx = v.copy()
        seen_le = np.zeros(t, dtype=np.int64)
        while True:
            live = idx > 0
            if not live.any():
                break
            seen_le[live] += tree[rows[live], idx[live]]
            idx[live] -= idx[live] & -idx[live]
        inv += j - seen_le
        idx = v.copy()
        while True:
            live = idx <= n
            if not live.any():
                break
            tree[rows[live], idx[live]] += 1
            idx[live] += idx[live] & -idx[live]
    return inv


def perm_pvalue(stat: str, x: Ranking, b: Ranking, trials: int = DEFAULT_TRIALS, seed: int = 0,
                chunk: int = 2000) -> float:
    """Two-sided Monte Carlo permutation p-value for tau or rho.

    Shuffles the candidate order ``trials`` times and returns
    ``(1 + #{|shuffled| >= |observed|}) / (trials + 1)``.
    """
    if stat not in ("tau", "rho"):
        raise ValueError("stat must be 'tau' or 'rho'")
    if trials < 100:
        raise ValueError("use at least 100 trials")
    ranks = baseline_positions(x, b)
    n = len(ranks)
    if n < 2:
        raise ValueError("need at least 2 founders")
    if stat == "tau":
        observed = _tau_from_inversions(_inversions(ranks.tolist()), n)
    else:
        observed = float(_rho_from_ranks(ranks, n))
    threshold = abs(observed) - 1e-12
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        perms = rng.permuted(np.tile(ranks, (size, 1)), axis=1)
        if stat == "tau":
            values = _tau_from_inversions(batch_inversions(perms), n)
        else:
            values = _rho_from_ranks(perms, n)
        hits += int(np.count_nonzero(np.abs(values) >= threshold))
        done += size
    return (hits + 1) / (trials + 1)


@dataclass(frozen=True)
class EvalReport:
    ndcg: float
    precision_at: dict = field(default_factory=dict)
    kendall_tau: float = 0.0
    spearman_rho: float = 0.0
    rmse: float = 0.0
    mae: float = 0.0
    p_tau: float = 1.0
    p_rho: float = 1.0
    linear_gain: bool = False
    n: int = 0

    def columns(self, p_at=DEFAULT_P_AT) -> list[tuple[str, float | None]]:
        cols = [("NDCG", self.ndcg)]
        cols += [(f"P@{k}", self.precision_at.get(k)) for k in p_at]
        cols += [("tau", self.kendall_tau), ("rho", self.spearman_rho), ("RMSE", self.rmse),
                 ("MAE", self.mae), ("p_tau", self.p_tau), ("p_rho", self.p_rho)]
        return cols

    def to_text(self, p_at=DEFAULT_P_AT) -> str:
        cols = self.columns(p_at)
        gain = "linear (non-standard NDCG)" if self.linear_gain else "exponential"
        head = "\t".join(name for name, _ in cols)
        vals = "\t".join("NA" if v is None else format(v, ".6g") for _, v in cols)
        return f"# founders: {self.n}\n# ndcg gain: {gain}\n{head}\n{vals}\n"

    def to_dict(self) -> dict:
        return {
            "n": self.n, "ndcg": self.ndcg, "linear_gain": self.linear_gain,
            "precision_at": {str(k): v for k, v in sorted(self.precision_at.items())},
            "kendall_tau": self.kendall_tau, "spearman_rho": self.spearman_rho,
            "rmse": self.rmse, "mae": self.mae, "p_tau": self.p_tau, "p_rho": self.p_rho,
        }


def evaluate(x: Ranking, b: Ranking, p_at=DEFAULT_P_AT, trials: int = DEFAULT_TRIALS,
             seed: int = 0, linear_gain: bool = False) -> EvalReport:
    n = len(b)
    if n < 2:
        raise ValueError("evaluation needs at least 2 founders")
    precision = {k: precision_at(x, b, k) for k in p_at if 1 <= k <= n}
    return EvalReport(
        ndcg=ndcg(x, b, linear_gain),
        precision_at=precision,
        kendall_tau=kendall_tau(x, b),
        spearman_rho=spearman_rho(x, b),
        rmse=rmse(x, b),
        mae=mae(x, b),
        p_tau=perm_pvalue("tau", x, b, trials, seed),
        p_rho=perm_pvalue("rho", x, b, trials, seed + 1),
        linear_gain=linear_gain,
        n=n,
    )
