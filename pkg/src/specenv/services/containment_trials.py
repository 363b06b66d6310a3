# containment_trials.py
#
# Randomized finite-dimensional containment trials: A diagonal with
# uniform eigenvalues, B a complex Gaussian matrix scaled to a prescribed
# Hilbert-Schmidt norm. One seed per trial index.

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..core.similarity_envelope import check_containment, envelope

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialResult:
    index: int
    seed: int
    hs_level: float
    size: int
    violations: int
    margin: float
    l2_tail_norm: float

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "hs_level": self.hs_level,
            "size": self.size,
            "violations": self.violations,
            "margin": self.margin,
            "l2_tail_norm": self.l2_tail_norm,
        }


def random_pair(seed: int, size: int, spread: float, hs_level: float):
    """Diagonal of A uniform in [-spread, spread] and B with ||B||_2 = hs_level."""
    rng = np.random.default_rng(seed)
    A_diag = rng.uniform(-spread, spread, size)
    B = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    B *= hs_level / np.linalg.norm(B)
    return A_diag, B


def run_trial(index: int, base_seed: int, size: int, spread: float, hs_levels: Sequence[float]) -> TrialResult:
    seed = base_seed + index
    hs_level = float(hs_levels[index % len(hs_levels)])
    A_diag, B = random_pair(seed, size, spread, hs_level)
    env = envelope(A_diag, B)
    report = check_containment(A_diag, B, env)
    return TrialResult(
        index=index,
        seed=seed,
        hs_level=hs_level,
        size=size,
        violations=report.violations,
        margin=report.margin,
        l2_tail_norm=env.l2_tail_norm(),
    )


def run_trials(count: int, size: int, spread: float, hs_levels: Sequence[float], base_seed: int = 0,
               workers: int = 1) -> List[TrialResult]:
    """
    Runs `count` trials in a thread pool; results are ordered by trial index.

    Args:
        count (int): Number of trials.
        size (int): Matrix dimension m.
        spread (float): Half-width of the eigenvalue range of A.
        hs_levels (Sequence[float]): HS norms of B, cycled by trial index.
        base_seed (int): Trial i uses seed base_seed + i.
        workers (int): Thread cap.
    """
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(
            lambda i: run_trial(i, base_seed, size, spread, hs_levels), range(count)
        ))
    results.sort(key=lambda r: r.index)
    total = sum(r.violations for r in results)
    logger.info(f"Containment trials finished: {count} trial(s) of size {size}, {total} violation(s).")
    return results
