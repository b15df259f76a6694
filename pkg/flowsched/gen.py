"""
INSTANCE GENERATORS
Seeded random instances and named adversarial families. The RNG is numpy's
PCG64, which produces the same stream on every platform for a given seed.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Union

import numpy as np

from .models import INF, Instance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenSpec:
    n: int = 5
    p_max: int = 4
    r_max: int = 8
    w_max: int = 5
    m: int = 1
    inf_density: float = 0.0
    seed: int = 0
    with_matrix: bool = False

    def __post_init__(self):
        for name in ("n", "p_max", "w_max", "m"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.r_max < 0:
            raise ValueError(f"r_max must be >= 0, got {self.r_max}")
        if not 0.0 <= self.inf_density < 1.0:
            raise ValueError(f"inf_density must lie in [0, 1), got {self.inf_density}")


class AdversarialKind(str, Enum):
    BURST = "burst"
    STAIRCASE_RELEASES = "staircase-releases"
    GEOMETRIC_WEIGHTS = "geometric-weights"


def gen_random(spec: GenSpec) -> Instance:
    """Uniform independent draws; with a matrix every job keeps at least one finite machine"""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    releases = rng.integers(0, spec.r_max + 1, size=spec.n)
    weights = rng.integers(1, spec.w_max + 1, size=spec.n)
    if spec.m == 1 and not spec.with_matrix:
        sizes = rng.integers(1, spec.p_max + 1, size=spec.n)
        return Instance.from_jobs([(int(p), int(r), int(w)) for p, r, w in zip(sizes, releases, weights)])

    table = rng.integers(1, spec.p_max + 1, size=(spec.m, spec.n))
    blocked = rng.random((spec.m, spec.n)) < spec.inf_density
    keep = rng.integers(0, spec.m, size=spec.n)
    blocked[keep, np.arange(spec.n)] = False
    machines: List[List[Union[int, float]]] = [
        [INF if blocked[i, j] else int(table[i, j]) for j in range(spec.n)] for i in range(spec.m)
    ]
    triples = []
    for j in range(spec.n):
        fastest = min(int(table[i, j]) for i in range(spec.m) if not blocked[i, j])
        triples.append((fastest, int(releases[j]), int(weights[j])))
    return Instance.from_jobs(triples, machines)


def gen_adversarial(kind: Union[AdversarialKind, str], n: int) -> Instance:
    """
    burst: all released at 0 with p = 1, 2, 4, ...
    staircase-releases: r = 0, 1, 2, ... with p = 1
    geometric-weights: all released at 0 with p = 1 and w = 1, 2, 4, ...
    """
    try:
        kind = AdversarialKind(kind)
    except ValueError:
        raise ValueError(f"unknown adversarial family {kind!r}; "
                         f"expected one of {', '.join(k.value for k in AdversarialKind)}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if kind is AdversarialKind.BURST:
        triples = [(1 << k, 0, 1) for k in range(n)]
    elif kind is AdversarialKind.STAIRCASE_RELEASES:
        triples = [(1, k, 1) for k in range(n)]
    else:
        triples = [(1, 0, 1 << k) for k in range(n)]
    return Instance.from_jobs(triples)


def gen_batch(spec: GenSpec, count: int, first_seed: Optional[int] = None) -> List[Instance]:
    """`count` instances with consecutive seeds"""
    start = spec.seed if first_seed is None else first_seed
    return [gen_random(replace(spec, seed=start + k)) for k in range(count)]
