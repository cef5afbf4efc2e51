"""Heat-integral ceiling, lattice-lemma and unit-sum checks on random samples."""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cuspbergman._io import rows_to_csv
from cuspbergman.bounds import auxlemma_lhs, heat_integral, heat_integral_ceiling, unit_sum
from cuspbergman.hyperbolic import UhpPoint
from cuspbergman.quadfield import QuadraticField, fundamental_unit


@dataclass
class BoundConfig:
    fields: tuple[int, ...] = (2, 5)
    trials: int = 20
    seed: int = 0
    out_dir: Path = Path("results")


def heat_rows() -> list[dict]:
    rows = []
    for i in range(33):
        rho = 0.25 * i
        v, c = heat_integral(rho), heat_integral_ceiling(rho)
        rows.append({"rho": rho, "integral": v, "ceiling": c, "ratio": v / c})
    return rows


def lattice_rows(cfg: BoundConfig) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for D in cfg.fields:
        F = QuadraticField(D)
        e0 = fundamental_unit(F)
        for t in range(cfg.trials):
            n = int(rng.integers(-3, 4))
            eps = (1 if rng.integers(0, 2) else -1) * e0 ** n
            z = [UhpPoint(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.5, 4.0))) for _ in range(2)]
            ks = [int(rng.choice([2, 4, 6])) for _ in range(2)]
            rep = auxlemma_lhs(F, z, eps, ks)
            u = unit_sum(F, [p.y for p in z])
            rows.append({"D": D, "trial": t, "unit_power": n, "k1": ks[0], "k2": ks[1],
                         "lhs": rep.truncated_value, "lhs_tail": rep.tail_bound, "rhs": rep.ceiling,
                         "lhs_over_rhs": (rep.truncated_value + rep.tail_bound) / rep.ceiling,
                         "unit_sum": u.truncated_value, "unit_tail": u.tail_bound, "unit_ceiling": u.ceiling})
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    a = ap.parse_args()
    cfg = BoundConfig(trials=a.trials, seed=a.seed, out_dir=a.out_dir)
    heat = heat_rows()
    lat = lattice_rows(cfg)
    over = [r["rho"] for r in heat if r["ratio"] > 1]
    print(f"heat integral above 2 sqrt2 e^-rho at {len(over)}/{len(heat)} points; max ratio "
          f"{max(r['ratio'] for r in heat):.3f}")
    ratios = [r["lhs_over_rhs"] for r in lat]
    print(f"lattice lemma: LHS/RHS between {min(ratios):.3f} and {max(ratios):.3f} "
          f"(4 pi / sqrt(disc): D=2 {4 * math.pi / math.sqrt(8):.3f}, D=5 {4 * math.pi / math.sqrt(5):.3f})")
    print(f"unit sums: max (sum + tail)/ceiling "
          f"{max((r['unit_sum'] + r['unit_tail']) / r['unit_ceiling'] for r in lat):.3f}")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "heat_integral.csv").write_text(rows_to_csv(heat))
    (cfg.out_dir / "lattice_and_units.csv").write_text(rows_to_csv(lat))
