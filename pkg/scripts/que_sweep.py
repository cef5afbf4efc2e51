"""Normalized Bergman mass of a box against its hyperbolic share, across weights k = 0 mod 12 and others."""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from cuspbergman._io import rows_to_csv
from cuspbergman.asymptotics import STANDARD_BOX, MassBox, que_mass
from cuspbergman.forms import dim_cusp_forms


@dataclass
class QueConfig:
    box: tuple[float, float, float, float] = STANDARD_BOX
    k_min: int = 12
    k_max: int = 120
    step: int = 2
    out_dir: Path = Path("results")


def run(cfg: QueConfig) -> list[dict]:
    box = MassBox(*cfg.box)
    rows = []
    for k in range(cfg.k_min, cfg.k_max + 1, cfg.step):
        if dim_cusp_forms(k) == 0:
            continue
        q = que_mass(box, k)
        rows.append({"k": k, "dim": dim_cusp_forms(k), "mass": q.mass, "target": q.target, "abs_error": q.error})
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--box", default=",".join(map(str, STANDARD_BOX)), help="x0,x1,y0,y1 (use --box=...)")
    ap.add_argument("--k-min", type=int, default=12)
    ap.add_argument("--k-max", type=int, default=120)
    ap.add_argument("--step", type=int, default=2)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    a = ap.parse_args()
    cfg = QueConfig(tuple(float(v) for v in a.box.split(",")), a.k_min, a.k_max, a.step, a.out_dir)
    rows = run(cfg)
    for r in rows:
        print(f"k={r['k']:4d}  dim={r['dim']:2d}  mass={r['mass']:.6f}  |error|={r['abs_error']:.6f}")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "que_sweep.csv").write_text(rows_to_csv(rows))
