"""Command-line frontend.

    loopwatch check baselines.csv --coord all
    loopwatch spectrum baselines.csv --z 3
    loopwatch correct baselines.csv --suspects 4-5,1-4 --surface=-0.5:0.3:81,-0.5:0.3:81
    loopwatch oracle small.csv --rmax 4

Exit codes for ``check``: 0 clean, 2 minor, 3 gross.  ``oracle`` exits 4
when a symbolic power disagrees with walk enumeration.  Any usage, input or
numerical error exits 1.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import report, svg
from .detect import (
    VERDICTS,
    build_error_function,
    choose_r,
    detect,
    minimize_error,
    orient_suspects,
    rank_suspect_arcs,
    sample_error_surface,
)
from .errors import LoopwatchError, TermBudgetExceeded
from .matrix import asymptotic_diag_slope, build_poly_matrix, symbolic_power, walk_oracle
from .network import BaselineTable, WeightedDigraph, dump_baselines, project, read_baselines, update_table
from .spectral import spectrum, spectrum_distance

EXIT_OK, EXIT_ERROR, EXIT_MINOR, EXIT_GROSS, EXIT_ORACLE_FAIL = 0, 1, 2, 3, 4
_VERDICT_EXIT = {"clean": EXIT_OK, "minor": EXIT_MINOR, "gross": EXIT_GROSS}


@dataclass
class RunConfig:
    input: Path
    coord: str = "x"
    z: float = 2.0
    z_list: list[float] = field(default_factory=list)
    r_max: int | None = None
    r: int | None = None
    tau: float = 1e-2
    norm: str = "l1"
    suspects: list[tuple[str, str]] | None = None
    k: int = 2
    surface: list[tuple[float, float, int]] | None = None
    out: Path | None = None
    corrected: Path | None = None
    surface_out: Path | None = None
    svg: Path | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        for z in [self.z, *self.z_list]:
            if not z > 0 or z == 1:
                raise LoopwatchError(f"z must be positive and different from 1, got {z}")
        if self.r_max is not None and self.r_max < 1:
            raise LoopwatchError("--rmax must be at least 1")
        if self.r is not None and self.r < 1:
            raise LoopwatchError("--r must be at least 1")
        if not self.tau > 0:
            raise LoopwatchError("--tau must be positive")

    @property
    def zs(self) -> list[float]:
        return self.z_list or [self.z]


def parse_suspects(text: str) -> list[tuple[str, str]]:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if item.count("-") != 1:
            raise LoopwatchError(f"suspect {item!r} must look like 'u-v'")
        u, v = (s.strip() for s in item.split("-"))
        if not u or not v:
            raise LoopwatchError(f"suspect {item!r} must look like 'u-v'")
        pairs.append((u, v))
    return pairs


def parse_surface(text: str) -> list[tuple[float, float, int]]:
    grid = []
    for part in text.split(","):
        try:
            lo, hi, steps = part.split(":")
            grid.append((float(lo), float(hi), int(steps)))
        except ValueError:
            raise LoopwatchError(f"surface range {part!r} must be lo:hi:steps") from None
        if grid[-1][2] < 2:
            raise LoopwatchError("surface ranges need at least 2 steps")
    return grid


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise LoopwatchError(f"bad number list {text!r}") from None


def _coordinates(table: BaselineTable, coord: str) -> list[str]:
    if table.coordinates == ("w",):
        return ["w"]
    return ["x", "y", "z"] if coord == "all" else [coord]


def _components(G: WeightedDigraph) -> list[WeightedDigraph]:
    comps = G.components()
    if len(comps) > 1:
        print(
            f"warning: network has {len(comps)} weakly connected components; analysing each separately",
            file=sys.stderr,
        )
    return comps


def _emit(config: RunConfig, payload: dict, text: str) -> None:
    body = report.dumps(payload) if config.format == "json" else text
    if config.out is None:
        sys.stdout.write(body)
    else:
        config.out.write_text(body, encoding="utf-8")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


# -- check -----------------------------------------------------------------


def _asymptotic(G: WeightedDigraph, r: int | None) -> dict | None:
    if r is None:
        return None
    try:
        e_max, vec = asymptotic_diag_slope(G, r)
    except TermBudgetExceeded:
        return {"r": r, "skipped": "term budget exceeded"}
    return {"r": r, "e_max": e_max, "coefficients": list(vec)}


def cmd_check(config: RunConfig) -> int:
    table = read_baselines(config.input.read_text(encoding="utf-8"))
    worst = "clean"
    coords, lines = [], []
    for coord in _coordinates(table, config.coord):
        comps = []
        for c, G in enumerate(_components(project(table, coord))):
            reports = []
            for z in config.zs:
                rep = detect(G, z, config.r_max, config.tau, norm=config.norm)
                if VERDICTS.index(rep.verdict) > VERDICTS.index(worst):
                    worst = rep.verdict
                d = rep.to_dict()
                d["asymptotic"] = _asymptotic(G, rep.first_failing_r)
                reports.append(d)
                lines.append(f"coordinate {coord}, component {c + 1} ({G.n} vertices), z={_fmt(z)}, {config.norm} norm")
                for e in rep.series.entries:
                    lines.append(f"  r={e.r:<3d} norm={_fmt(rep.series.norm(e.r))}")
                if rep.first_failing_r is None:
                    lines.append("  verdict: clean")
                else:
                    top, dev = rep.vertex_ranking[0]
                    lines.append(
                        f"  verdict: {rep.verdict} (first failing r={rep.first_failing_r}, "
                        f"largest deviation {_fmt(dev)} at vertex {top}, tau={_fmt(config.tau)})"
                    )
            comps.append({"vertices": list(G.vertices), "reports": reports})
        coords.append({"coordinate": coord, "components": comps})
    lines.append(f"overall verdict: {worst}")
    payload = {"command": "check", "input": str(config.input), "verdict": worst, "coordinates": coords}
    _emit(config, payload, "\n".join(lines) + "\n")
    return _VERDICT_EXIT[worst]


# -- spectrum --------------------------------------------------------------


def cmd_spectrum(config: RunConfig) -> int:
    table = read_baselines(config.input.read_text(encoding="utf-8"))
    coords, lines = [], []
    for coord in _coordinates(table, config.coord):
        comps = []
        for c, G in enumerate(_components(project(table, coord))):
            ref = spectrum(G, 1.0)
            for z in config.zs:
                sp = spectrum(G, z)
                d = sp.to_dict()
                d["deviation_from_z1"] = spectrum_distance(sp, ref)
                d["reference"] = ref.to_dict()
                comps.append({"vertices": list(G.vertices), **d})
                mult = ", ".join(f"[{_fmt(v)}]^{m}" for v, m in sp.multiplicities())
                flag = "" if sp.is_real else " (non-real eigenvalues present)"
                lines.append(f"coordinate {coord}, component {c + 1}, z={_fmt(z)}: {{{mult}}}{flag}")
                lines.append(f"  deviation from z=1: {_fmt(d['deviation_from_z1'])}")
        coords.append({"coordinate": coord, "components": comps})
    payload = {"command": "spectrum", "input": str(config.input), "coordinates": coords}
    _emit(config, payload, "\n".join(lines) + "\n")
    return EXIT_OK


# -- correct ---------------------------------------------------------------


def _default_path(config: RunConfig, suffix: str) -> Path:
    base = config.out.parent if config.out is not None else config.input.parent
    return base / (config.input.stem + suffix)


def _with_coord(path: Path, coord: str, many: bool) -> Path:
    return path.with_name(f"{path.stem}.{coord}{path.suffix}") if many else path


def _correct_component(config: RunConfig, G: WeightedDigraph) -> tuple[dict, WeightedDigraph, list | None]:
    rep = detect(G, config.z, config.r_max, config.tau, norm=config.norm, with_spectrum=False)
    if config.suspects is not None:
        wanted = [p for p in config.suspects if p[0] in G.vertices and p[1] in G.vertices]
    elif rep.first_failing_r is None:
        return {"vertices": list(G.vertices), "verdict": "clean", "correction": None}, G, None
    else:
        wanted = rank_suspect_arcs(G, rep, config.k)
    if not wanted:
        return {"vertices": list(G.vertices), "verdict": rep.verdict, "correction": None}, G, None
    suspects = orient_suspects(G, wanted)
    r = config.r or rep.first_failing_r or choose_r(G, suspects, config.z)
    f = build_error_function(G, suspects, config.z, r, method="auto")
    result = minimize_error(f, r_max=config.r_max, tau=config.tau)
    rows = sample_error_surface(f, config.surface) if config.surface else None
    body = {
        "vertices": list(G.vertices),
        "verdict": rep.verdict,
        "r": r,
        "z": config.z,
        "error_function": str(f.poly) if hasattr(f, "poly") else "numeric",
        "correction": result.to_dict(),
    }
    return body, result.corrected, rows


def cmd_correct(config: RunConfig) -> int:
    table = read_baselines(config.input.read_text(encoding="utf-8"))
    coords_used = _coordinates(table, config.coord)
    many = len(coords_used) > 1
    corrected_table = table
    coords, lines, written = [], [], []
    for coord in coords_used:
        comps = []
        for c, G in enumerate(_components(project(table, coord))):
            body, fixed, rows = _correct_component(config, G)
            corrected_table = update_table(corrected_table, coord, fixed)
            comps.append(body)
            corr = body["correction"]
            if corr is None:
                lines.append(f"coordinate {coord}, component {c + 1}: no correction ({body['verdict']})")
                continue
            lines.append(f"coordinate {coord}, component {c + 1}: r={body['r']}, e(x) = {body['error_function']}")
            for name, x, w in zip(corr["suspects"], corr["x_star"], corr["corrected_weights"]):
                lines.append(f"  {name}: correction {_fmt(x)} -> weight {_fmt(w)}")
            lines.append(f"  e(0) = {_fmt(corr['e_zero'])}, e_min = {_fmt(corr['e_min'])}")
            if rows is not None:
                path = _with_coord(config.surface_out or _default_path(config, ".surface.csv"), coord, many)
                path = path if len(comps) == 1 else path.with_name(f"{path.stem}.c{c + 1}{path.suffix}")
                header = ["x0", "x1"][: len(rows[0]) - 1] + ["e"]
                path.write_text(
                    ",".join(header) + "\n" + "".join(",".join(repr(float(v)) for v in row) + "\n" for row in rows),
                    encoding="utf-8",
                )
                body["surface"] = str(path)
                written.append(path)
                if config.svg is not None:
                    target = _with_coord(config.svg, coord, many)
                    plot = svg.line_plot(rows) if len(rows[0]) == 2 else svg.heat_map(rows)
                    target.write_text(plot, encoding="utf-8")
                    written.append(target)
        coords.append({"coordinate": coord, "components": comps})
    corrected_path = config.corrected or _default_path(config, ".corrected.csv")
    corrected_path.write_text(dump_baselines(corrected_table), encoding="utf-8")
    lines.append(f"corrected baselines written to {corrected_path}")
    for p in written:
        lines.append(f"wrote {p}")
    payload = {
        "command": "correct",
        "input": str(config.input),
        "corrected_file": str(corrected_path),
        "coordinates": coords,
    }
    _emit(config, payload, "\n".join(lines) + "\n")
    return EXIT_OK


# -- oracle ----------------------------------------------------------------


def cmd_oracle(config: RunConfig) -> int:
    table = read_baselines(config.input.read_text(encoding="utf-8"))
    r_top = config.r_max or 4
    if r_top > 8:
        raise LoopwatchError("oracle supports r <= 8")
    coords, lines = [], []
    failures = 0
    for coord in _coordinates(table, config.coord):
        G = project(table, coord)
        if G.n > 10:
            raise LoopwatchError("oracle supports networks with at most 10 vertices")
        M = build_poly_matrix(G)
        results = []
        for r in range(r_top + 1):
            P = symbolic_power(M, r)
            for i, u in enumerate(G.vertices):
                for j, v in enumerate(G.vertices):
                    ok = P.entry(i, j).isclose(walk_oracle(G, u, v, r))
                    failures += not ok
                    results.append({"u": u, "v": v, "r": r, "pass": ok})
                    if not ok:
                        lines.append(f"FAIL coordinate {coord}: ({u},{v}) r={r}")
        passed = sum(x["pass"] for x in results)
        lines.append(f"coordinate {coord}: {passed}/{len(results)} entries agree with walk enumeration")
        coords.append({"coordinate": coord, "passed": passed, "total": len(results), "results": results})
    payload = {"command": "oracle", "input": str(config.input), "all_pass": failures == 0, "coordinates": coords}
    _emit(config, payload, "\n".join(lines) + "\n")
    return EXIT_OK if failures == 0 else EXIT_ORACLE_FAIL


COMMANDS = {"check": cmd_check, "spectrum": cmd_spectrum, "correct": cmd_correct, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", type=Path, help="baseline CSV (from,to,dx,dy,dz or from,to,w)")
    common.add_argument("--coord", choices=("x", "y", "z", "all"), default="x")
    common.add_argument("--z", type=float, default=2.0, help="evaluation point (default 2)")
    common.add_argument("--z-list", default="", help="comma-separated evaluation points; overrides --z")
    common.add_argument("--rmax", type=int, default=None, help="largest power (default: number of vertices)")
    common.add_argument("--tau", type=float, default=1e-2, help="gross-error threshold in metres")
    common.add_argument("--norm", choices=("l1", "l2"), default="l1", help="norm of the diagonal deviation")
    common.add_argument("--out", type=Path, default=None, help="report path (default stdout)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="loopwatch", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="loop-law diagnostics")
    sub.add_parser("spectrum", parents=[common], help="spectra of A(z) and A(1)")
    p = sub.add_parser("correct", parents=[common], help="estimate corrections for suspect baselines")
    p.add_argument("--suspects", default=None, help="comma-separated baselines 'u-v'; default: top --k ranked")
    p.add_argument("--k", type=int, default=2, help="number of auto-ranked suspects")
    p.add_argument("--r", type=int, default=None, help="walk length (default: first failing power)")
    p.add_argument("--surface", default=None, help="sample e on lo:hi:steps[,lo:hi:steps]; use --surface=... for negatives")
    p.add_argument("--corrected", type=Path, default=None, help="corrected baseline CSV path")
    p.add_argument("--surface-out", type=Path, default=None, help="surface CSV path")
    p.add_argument("--svg", type=Path, default=None, help="also render the surface as SVG")
    sub.add_parser("oracle", parents=[common], help="compare symbolic powers with walk enumeration")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        input=args.input,
        coord=args.coord,
        z=args.z,
        z_list=_floats(args.z_list),
        r_max=args.rmax,
        r=getattr(args, "r", None),
        tau=args.tau,
        norm=args.norm,
        suspects=parse_suspects(args.suspects) if getattr(args, "suspects", None) else None,
        k=getattr(args, "k", 2),
        surface=parse_surface(args.surface) if getattr(args, "surface", None) else None,
        out=args.out,
        corrected=getattr(args, "corrected", None),
        surface_out=getattr(args, "surface_out", None),
        svg=getattr(args, "svg", None),
        format=args.format,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        return COMMANDS[args.command](config)
    except (LoopwatchError, OSError, ValueError) as exc:
        print(f"loopwatch {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
