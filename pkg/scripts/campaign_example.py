"""Reproduce the thirteen-baseline GPS campaign example (x coordinate).

Shows both norms of the deviation series so the effect of the norm choice
is visible, locates the corrupted point, fits corrections for the two
baselines at that point and samples the two-variable error surface.

    python3 scripts/campaign_example.py --out results/ --steps 81
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from loopwatch import datasets
from loopwatch.detect import build_error_function, detect, minimize_error, orient_suspects, sample_error_surface
from loopwatch.matrix import power_diagonals


@dataclass
class Config:
    z: float = 2.0
    r: int = 4
    suspects: tuple[tuple[str, str], ...] = (("4", "5"), ("1", "4"))
    lo: float = -0.5
    hi: float = 0.3
    steps: int = 81
    out: Path = Path("results")


def fmt(values, digits: int = 5) -> str:
    return "(" + ", ".join(f"{v:.{digits}f}" for v in values) + ")"


def run(cfg: Config) -> None:
    for name in ("campaign_x", "campaign_x_blunder"):
        G = datasets.load(name)
        for norm in ("l1", "l2"):
            print(f"{name:20s} {norm} norms:", fmt(power_diagonals(G, cfg.z, 6, norm=norm).norms))
        print(f"{name:20s} diag T3:", fmt(power_diagonals(G, cfg.z, 3).diag(3)))
        rep = detect(G, cfg.z, 6, norm="l2")
        print(f"{name:20s} verdict: {rep.verdict}, largest deviation at point {rep.vertex_ranking[0][0]}")

    bad = datasets.load("campaign_x_blunder")
    suspects = orient_suspects(bad, cfg.suspects)
    f = build_error_function(bad, suspects, cfg.z, cfg.r)
    print("e(x, y) =", f.poly)
    res = minimize_error(f)
    x, y = res.x_star
    print(f"minimum e = {res.e_min:.6f} at (x, y) = ({x:.6f}, {y:.6f})")
    for (u, v), w in zip(suspects, res.corrected_weights()):
        print(f"  corrected {u}->{v}: {w:.4f}")
    print("post-correction l2 norms:", fmt(detect(res.corrected, cfg.z, 6, norm="l2").series.norms))

    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "campaign_error_surface.csv"
    rows = sample_error_surface(f, [(cfg.lo, cfg.hi, cfg.steps)] * 2)
    path.write_text("x,y,e\n" + "".join(f"{a!r},{b!r},{e!r}\n" for a, b, e in rows), encoding="utf-8")
    print("wrote", path)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--steps", type=int, default=Config.steps)
    args = p.parse_args()
    run(Config(out=args.out, steps=args.steps))


if __name__ == "__main__":
    main()
