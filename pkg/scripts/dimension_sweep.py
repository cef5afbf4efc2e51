"""Integrate B_k over the fundamental domain and compare with dim S_k for a weight sweep."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from cuspbergman._io import rows_to_csv
from cuspbergman.asymptotics import dimension_consistency


@dataclass
class SweepConfig:
    weights: tuple[int, ...] = (12, 16, 18, 20, 22, 24, 26, 28, 30, 36, 40)
    out_dir: Path = Path("results")


def run(cfg: SweepConfig) -> list[dict]:
    rows = []
    for k in cfg.weights:
        t0 = time.perf_counter()
        d = dimension_consistency(k)
        rows.append({"k": k, "integral": d.integral, "dim": d.dim, "rel_error": d.rel_error,
                     "seconds": round(time.perf_counter() - t0, 3)})
        print(f"k={k:4d}  integral={d.integral:.12f}  dim={d.dim}  rel_error={d.rel_error:.2e}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--weights", default=",".join(map(str, SweepConfig.weights)))
    ap.add_argument("--out-dir", type=Path, default=SweepConfig.out_dir)
    a = ap.parse_args()
    cfg = SweepConfig(tuple(int(k) for k in a.weights.split(",")), a.out_dir)
    rows = run(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / "dimension_sweep.csv").write_text(rows_to_csv([{k: v for k, v in r.items() if k != "seconds"}
                                                                 for r in rows]))
