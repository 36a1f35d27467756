"""Robust fraction and I/T/C regime over a (b, T) grid.

The desk preset covers b in {0.3, 0.5, 0.7} and T in {0.05, 0.5, 1.5} on a
0.05 disk grid; one cell takes about a minute on one core.
"""
import argparse
from dataclasses import dataclass, field
from pathlib import Path

from stirmix import cli


@dataclass
class PlaneSweep:
    b_values: tuple = (0.3, 0.5, 0.7)
    T_values: tuple = (0.05, 0.5, 1.5)
    preset: str = "desk"
    eps_thr: float = 12.0
    workers: int = 1
    out_dir: Path = field(default_factory=lambda: Path("runs/fig5"))


def run(cfg: PlaneSweep) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out = cfg.out_dir / f"regimes_thr{cfg.eps_thr:g}.csv"
    code = cli.main([
        "scan",
        "--b", ",".join(map(str, cfg.b_values)),
        "--T", ",".join(map(str, cfg.T_values)),
        "--preset", cfg.preset,
        "--eps-thr", str(cfg.eps_thr),
        "--workers", str(cfg.workers),
        "--out", str(out),
    ])
    if code == 0:
        print(out.read_text(), end="")
    return code


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=PlaneSweep().out_dir)
    ap.add_argument("--preset", choices=("desk", "paper"), default="desk")
    ap.add_argument("--eps-thr", type=float, default=12.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--b", default=None, help="comma list overriding the b values")
    ap.add_argument("--T", default=None, help="comma list overriding the T values")
    a = ap.parse_args()
    cfg = PlaneSweep(preset=a.preset, eps_thr=a.eps_thr, workers=a.workers, out_dir=a.out_dir)
    if a.b:
        cfg.b_values = tuple(float(x) for x in a.b.split(","))
    if a.T:
        cfg.T_values = tuple(float(x) for x in a.T.split(","))
    raise SystemExit(run(cfg))
