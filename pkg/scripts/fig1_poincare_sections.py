"""Poincare sections for b = 0.5 at increasing stirring periods.

Writes one CSV (plus metadata and a plot script) per period into --out-dir.
"""
import argparse
from dataclasses import dataclass, field
from pathlib import Path

from stirmix import cli


@dataclass
class SectionSweep:
    b: float = 0.5
    periods: tuple = (0.05, 0.125, 0.2, 0.5)
    n_iter: int = 10000
    n_orbits: int = 18
    out_dir: Path = field(default_factory=lambda: Path("runs/fig1"))


def run(cfg: SectionSweep) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for T in cfg.periods:
        out = cfg.out_dir / f"poincare_b{cfg.b:g}_T{T:g}.csv"
        code = cli.main(["poincare", "--b", str(cfg.b), "--T", str(T), "--n-iter", str(cfg.n_iter),
                         "--n-orbits", str(cfg.n_orbits), "--out", str(out)])
        if code:
            return code
        print(out)
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=SectionSweep().out_dir)
    ap.add_argument("--n-iter", type=int, default=SectionSweep.n_iter)
    a = ap.parse_args()
    raise SystemExit(run(SectionSweep(n_iter=a.n_iter, out_dir=a.out_dir)))
