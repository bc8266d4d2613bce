"""Naive-versus-boxed benchmark harness."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .blocked import MemoTable, boxed_decide, make_partition
from .distance import discrete_frechet
from .freespace import naive_decide
from .generators import perturbed_copy, random_walk, zigzag
from .io import format_float

__all__ = ["BenchRow", "BenchReport", "BenchMismatchError", "make_instance", "run_bench", "GENERATORS"]

GENERATORS = ("perturbed", "walk", "zigzag")


class BenchMismatchError(RuntimeError):
    """Naive and boxed decisions disagreed."""


@dataclass
class BenchRow:
    index: int
    n: int
    m: int
    delta: float
    naive: bool
    boxed: bool
    boxes: int
    hits: int
    misses: int
    entries: int
    agree: bool
    naive_time: float = 0.0
    boxed_time: float = 0.0

    @property
    def hit_rate(self) -> float:
        return self.hits / self.boxes if self.boxes else 0.0


@dataclass
class BenchReport:
    generator: str
    seed: int
    alpha: int
    theta: int
    noise: float
    delta_factor: float
    rows: List[BenchRow] = field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        return all(r.agree for r in self.rows)

    @property
    def median_hit_rate(self) -> float:
        return statistics.median(r.hit_rate for r in self.rows) if self.rows else 0.0

    def median_times(self) -> tuple:
        if not self.rows:
            return 0.0, 0.0
        return (
            statistics.median(r.naive_time for r in self.rows),
            statistics.median(r.boxed_time for r in self.rows),
        )

    def to_text(self, timings: bool = False) -> str:
        """Tab-separated report; wall times are included only with ``timings``."""
        lines = [
            f"# generator={self.generator} seed={self.seed} alpha={self.alpha} theta={self.theta}"
            f" noise={format_float(self.noise)} delta_factor={format_float(self.delta_factor)}",
        ]
        cols = ["idx", "n", "m", "delta", "naive", "boxed", "boxes", "hits", "misses", "entries", "hit_rate", "agree"]
        if timings:
            cols += ["naive_s", "boxed_s"]
        lines.append("\t".join(cols))
        for r in self.rows:
            vals = [
                str(r.index), str(r.n), str(r.m), format_float(r.delta),
                str(r.naive).lower(), str(r.boxed).lower(),
                str(r.boxes), str(r.hits), str(r.misses), str(r.entries),
                f"{r.hit_rate:.4f}", str(r.agree).lower(),
            ]
            if timings:
                vals += [f"{r.naive_time:.3f}", f"{r.boxed_time:.3f}"]
            lines.append("\t".join(vals))
        lines.append(f"# instances={len(self.rows)} all_agree={str(self.all_agree).lower()}"
                     f" median_hit_rate={self.median_hit_rate:.4f}")
        if timings:
            tn, tb = self.median_times()
            lines.append(f"# median_naive_s={tn:.3f} median_boxed_s={tb:.3f}")
        return "\n".join(lines) + "\n"

    def to_json(self, timings: bool = False) -> str:
        rows = []
        for r in self.rows:
            d = asdict(r)
            d["hit_rate"] = r.hit_rate
            if not timings:
                del d["naive_time"], d["boxed_time"]
            rows.append(d)
        meta = {k: v for k, v in asdict(self).items() if k != "rows"}
        meta.update(all_agree=self.all_agree, median_hit_rate=self.median_hit_rate, rows=rows)
        if timings:
            meta["median_naive_s"], meta["median_boxed_s"] = self.median_times()
        return json.dumps(meta, indent=1, sort_keys=True) + "\n"


def make_instance(generator: str, n: int, m: int, rng, noise: float = 0.1):
    """One seeded ``(tau, sigma)`` pair."""
    if generator == "perturbed":
        tau = random_walk(n, seed=rng)
        sigma = perturbed_copy(tau, noise, seed=rng)
    elif generator == "walk":
        tau = random_walk(n, seed=rng)
        sigma = random_walk(m, seed=rng)
    elif generator == "zigzag":
        tau = zigzag(n)
        sigma = perturbed_copy(zigzag(m), noise, seed=rng)
    else:
        raise ValueError(f"unknown generator {generator!r}")
    return tau, sigma


def run_bench(
    n: int = 200,
    m: Optional[int] = None,
    instances: int = 3,
    seed: int = 0,
    alpha: Optional[int] = None,
    theta: Optional[int] = None,
    generator: str = "perturbed",
    noise: float = 0.1,
    delta_factor: float = 1.0,
    memo: Optional[MemoTable] = None,
) -> BenchReport:
    """Decide each seeded instance with both engines at ``delta_factor`` times its discrete distance.

    A fresh memo table is used per instance unless ``memo`` is given.

    Raises
    ------
    BenchMismatchError
        As soon as the two engines disagree.
    """
    if generator == "perturbed":
        m = n
    m = n if m is None else m
    part = make_partition(n, m, alpha, theta)
    rng = np.random.default_rng(seed)
    report = BenchReport(generator, seed, part.alpha, part.theta, noise, delta_factor)
    for idx in range(instances):
        tau, sigma = make_instance(generator, n, m, rng, noise)
        delta = delta_factor * discrete_frechet(tau, sigma)
        t0 = time.perf_counter()
        r_naive = naive_decide(tau, sigma, delta).reachable
        t1 = time.perf_counter()
        table = memo if memo is not None else MemoTable(part.alpha, part.theta)
        res = boxed_decide(tau, sigma, delta, part, table)
        t2 = time.perf_counter()
        row = BenchRow(
            idx, n, m, delta, r_naive, res.reachable,
            res.stats["boxes"], res.stats["hits"], res.stats["misses"], len(table),
            r_naive == res.reachable, t1 - t0, t2 - t1,
        )
        if not row.agree:
            raise BenchMismatchError(
                f"instance {idx}: naive={r_naive} boxed={res.reachable} at delta={format_float(delta)}"
            )
        report.rows.append(row)
    return report
