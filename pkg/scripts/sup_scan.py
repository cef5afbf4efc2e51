"""Sup of B_k over the fundamental domain, normalized by k^{3/2}, and B_k(z)/k at fixed points."""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from cuspbergman._io import rows_to_csv
from cuspbergman.asymptotics import supnorm_scan
from cuspbergman.forms import bergman_kernel
from cuspbergman.hyperbolic import UhpPoint


@dataclass
class ScanConfig:
    weights: tuple[int, ...] = tuple(range(12, 121, 12))
    grid: int = 200
    out_dir: Path = Path("results")


def run(cfg: ScanConfig) -> list[dict]:
    rows = []
    for k in cfg.weights:
        s = supnorm_scan(k, cfg.grid, cfg.grid)
        row = {"k": k, "sup": s.value, "x": s.point.x, "y": s.point.y, "sup_over_k32": s.ratio}
        for label, z in (("i", UhpPoint(0, 1)), ("2i", UhpPoint(0, 2)), ("0.3+1.5i", UhpPoint(0.3, 1.5))):
            row[f"B_over_k_at_{label}"] = bergman_kernel(k, z) / k
        rows.append(row)
        print(f"k={k:4d}  sup={s.value:.6g} at ({s.point.x:+.4f}, {s.point.y:.4f})  sup/k^1.5={s.ratio:.5f}")
    ratios = [r["sup_over_k32"] for r in rows]
    print(f"max/min of sup/k^1.5: {max(ratios) / min(ratios):.3f}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--weights", default="12:120:12")
    ap.add_argument("--grid", type=int, default=200)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    a = ap.parse_args()
    lo, hi, st = (int(v) for v in a.weights.split(":"))
    cfg = ScanConfig(tuple(range(lo, hi + 1, st)), a.grid, a.out_dir)
    rows = run(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "sup_scan.csv").write_text(rows_to_csv(rows))
