"""Frequency maps along the upper radius for b = 0.5, T in {0.05, 0.125, 0.2}."""
import argparse
from dataclasses import dataclass, field
from pathlib import Path

from stirmix import cli


@dataclass
class FrequencyMapSweep:
    b: float = 0.5
    periods: tuple = (0.05, 0.125, 0.2)
    preset: str = "desk"
    workers: int = 1
    out_dir: Path = field(default_factory=lambda: Path("runs/fig2"))


def run(cfg: FrequencyMapSweep) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for T in cfg.periods:
        out = cfg.out_dir / f"freqmap_b{cfg.b:g}_T{T:g}.csv"
        code = cli.main(["freqmap", "--b", str(cfg.b), "--T", str(T), "--preset", cfg.preset,
                         "--workers", str(cfg.workers), "--out", str(out)])
        if code:
            return code
        print(out)
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=FrequencyMapSweep().out_dir)
    ap.add_argument("--preset", choices=("desk", "paper"), default="desk")
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    raise SystemExit(run(FrequencyMapSweep(preset=a.preset, workers=a.workers, out_dir=a.out_dir)))
