"""Parameter sweeps over (p, d, eps, delta) with deterministic artifacts."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds
from .directions import largest_power_of_two
from .noise import IsotropicGaussian, UniformBox, spawn_seeds
from .norms import INF, inv_p, l2_exponent, p_label, parse_p
from .tv import tv_gaussian_shift, tv_uniform_box_worst_shift

CSV_HEADER = ["p", "d", "eps", "delta", "bound_id", "value"]


@dataclass
class SweepSpec:
    ps: Sequence
    ds: Sequence[int]
    deltas: Sequence[float]
    epss: Sequence[float] = (1.0,)
    family: str = "gauss"
    budget: int = 1000
    seed: int = 42
    out: Optional[str] = None
    quantile: float = 0.01
    fraction: float = bounds.DEFAULT_FRACTION

    def __post_init__(self):
        self.ps = [parse_p(p) for p in self.ps]
        self.ds = [int(d) for d in self.ds]
        self.deltas = [float(x) for x in self.deltas]
        self.epss = [float(x) for x in self.epss]
        if not (self.ps and self.ds and self.deltas and self.epss):
            raise ValueError("every sweep grid must be nonempty")
        if self.budget < 1000:
            raise ValueError(f"per-cell Monte Carlo budget must be >= 1000, got {self.budget}")
        if self.family not in ("gauss", "box"):
            raise ValueError(f"family must be 'gauss' or 'box', got {self.family!r}")

    def cells(self):
        return list(product(self.ps, self.ds, self.epss, self.deltas))

    def as_dict(self):
        return {
            "ps": [p_label(p) for p in self.ps],
            "ds": self.ds,
            "epss": self.epss,
            "deltas": self.deltas,
            "family": self.family,
            "budget": self.budget,
            "seed": self.seed,
            "quantile": self.quantile,
            "fraction": self.fraction,
        }


def _cell(spec: SweepSpec, cfg: bounds.BoundConfig, seed) -> dict:
    vals = {
        "theorem_l2sq": bounds.theorem_lower_bound_l2sq(cfg),
        "first_moment": bounds.first_moment_lower_bound(cfg),
        "peeling_top": bounds.peeling_entry(cfg, 1),
        "peeling_quantile_floor": bounds.peeling_floor(cfg, spec.quantile),
        "coverage_floor": bounds.coverage_floor(cfg, spec.fraction),
    }
    sigma = bounds.gaussian_sizing(cfg)
    worst_l2 = cfg.eps * cfg.d ** l2_exponent(cfg.p)
    worst_tv = tv_gaussian_shift(sigma, worst_l2).value
    vals.update(
        gaussian_sigma=sigma,
        gaussian_coord_var=sigma * sigma,
        gaussian_worst_tv=worst_tv,
        gaussian_worst_tv_ok=float(worst_tv <= cfg.delta),
        witness_boundary_delta=worst_tv,
    )
    dist = IsotropicGaussian(sigma, cfg.d)
    if cfg.p is INF:
        r = bounds.uniform_box_sizing(cfg)
        box_tv = tv_uniform_box_worst_shift(r, cfg.d, cfg.eps).value
        vals.update(uniform_box_r=r, uniform_box_worst_tv=box_tv)
        if spec.family == "box":
            dist = UniformBox(r, cfg.d)
    if spec.family == "gauss" or cfg.p is INF:
        # row 0 of the sign family; any row gives the same check for these laws
        b = largest_power_of_two(cfg.d)
        v = np.zeros(cfg.d)
        v[:b] = cfg.eps * b ** (-inv_p(cfg.p))
        check = bounds.verify_direction_moment(dist, v, spec.budget, seed)
        vals.update(mc_direction_moment_ratio=check.ratio,
                    mc_direction_moment_holds=float(check.status == "holds"))
    return vals


def pixel_domination_d(p, eps: float = 16.0, delta: float = 0.1, limit: float = 255.0,
                       quantile: float = 0.01, d_max: int = 1 << 40) -> Optional[int]:
    """Smallest d whose quantile peeling floor has square root above ``limit``."""
    p = parse_p(p)

    def dominated(d):
        return math.sqrt(bounds.peeling_floor(bounds.BoundConfig(p, d, eps, delta), quantile)) > limit

    hi = 1
    while not dominated(hi):
        hi *= 2
        if hi > d_max:
            return None
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if dominated(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list = field(default_factory=list)  # (cfg, {bound_id: value}) in cell order
    summary: dict = field(default_factory=dict)

    def rows(self):
        for cfg, vals in self.cells:
            for key, val in vals.items():
                yield [p_label(cfg.p), cfg.d, repr(cfg.eps), repr(cfg.delta), key, repr(float(val))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.rows())
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "spec": self.spec.as_dict(),
            "rows": [dict(zip(CSV_HEADER, r)) for r in self.rows()],
            "summary": self.summary,
        }
        return json.dumps(doc, indent=2)


def _summary(spec: SweepSpec, cells) -> dict:
    slopes = []
    for p, eps, delta in product(spec.ps, spec.epss, spec.deltas):
        group = [(cfg.d, vals) for cfg, vals in cells
                 if cfg.p == p and cfg.eps == eps and cfg.delta == delta]
        ds = sorted({d for d, _ in group})
        if len(ds) < 2:
            continue
        entry = {"p": p_label(p), "eps": eps, "delta": delta, "expected": 1.0 - 2.0 * (0.0 if p is INF else 1.0 / p)}
        for key in ("peeling_quantile_floor", "coverage_floor", "gaussian_coord_var"):
            by_d = {d: vals[key] for d, vals in group}
            entry[key] = bounds.loglog_slope(ds, [by_d[d] for d in ds])
        slopes.append(entry)
    domination = {}
    for p in spec.ps:
        if p is INF or p > 2:
            domination[p_label(p)] = pixel_domination_d(p, quantile=spec.quantile)
    return {"loglog_slopes_vs_d": slopes, "pixel_domination_d": domination}


def run_sweep(spec: SweepSpec, threads: Optional[int] = None) -> SweepResult:
    """Evaluate every grid cell; write ``sweep.csv`` and ``sweep.json`` under ``spec.out`` if set.

    Cell i draws its randomness from child i of the master seed and rows are
    emitted in cell order, so the thread count never changes the output.
    """
    if threads is None:
        threads = int(os.environ.get("SMOOTHCERT_THREADS", "1") or 1)
    grid = spec.cells()
    seeds = spawn_seeds(spec.seed, len(grid))
    cfgs = [bounds.BoundConfig(p, d, eps, delta) for p, d, eps, delta in grid]

    def work(i):
        return i, _cell(spec, cfgs[i], seeds[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(work, range(len(grid))))
    else:
        done = [work(i) for i in range(len(grid))]
    done.sort(key=lambda t: t[0])
    cells = [(cfgs[i], vals) for i, vals in done]
    result = SweepResult(spec, cells, _summary(spec, cells))
    if spec.out:
        out = Path(spec.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(result.to_csv())
        (out / "sweep.json").write_text(result.to_json())
    return result
