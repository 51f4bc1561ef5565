"""Command-line front end: ``wrapsurf reconstruct | sample | verify | stats``.

Exit codes: 0 success, 1 failed verification, 2 bad input file, flags or
config, 3 degenerate point set, 4 internal invariant violation (a dump is
written next to the output). ``WRAP_LOG`` sets the log level.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import random
import sys
import time
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import jsonschema
import tomli_w

from . import delaunay, flow, meshio, sculpt
from .errors import BadParameters, DegenerateInput, ParseError, WrapError

log = logging.getLogger("wrapsurf")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE, EXIT_INVARIANT = 0, 1, 2, 3, 4
_FAULTS = ("none", "drop-tet", "reverse-edge", "drop-face")


class InvariantViolation(WrapError):
    pass


@dataclasses.dataclass
class RunConfig:
    """Everything that determines a reconstruction run."""

    input: str = ""
    output: str = ""
    input_format: str | None = None
    output_format: str | None = None
    holes: int = 0
    stages_dir: str | None = None
    stats: str | None = None
    seed: int = 0
    emit_diagnostics: bool = False
    oracle_checks: bool = False

    def validate(self) -> "RunConfig":
        if not self.input or not self.output:
            raise BadParameters("input and output paths are required")
        if not isinstance(self.holes, int) or self.holes < 0:
            raise BadParameters("holes must be a nonnegative integer")
        return self

    @property
    def stats_path(self) -> Path:
        if self.stats:
            return Path(self.stats)
        out = Path(self.output)
        return out.with_name(out.stem + ".stats.json")

    def to_toml(self) -> str:
        return tomli_w.dumps({k: v for k, v in dataclasses.asdict(self).items() if v is not None})

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise BadParameters(f"config: {exc}") from None
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise BadParameters(f"config: unknown keys {sorted(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# helpers


def _load_points(path, fmt=None):
    return meshio.read_points(path, fmt)


def _schema() -> dict:
    return json.loads(resources.files("wrapsurf").joinpath("stats.schema.json").read_text())


def validate_stats(data: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``data`` does not match the schema."""
    jsonschema.validate(data, _schema())


def _dump_json(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _write_stage_surface(stage, cx, path, fmt=None) -> int:
    verts, tris = meshio.compact(cx.points, stage.surface.all_triangles)
    return meshio.write_surface(path, verts, tris, fmt)


def _family(cx, holes, rng=None):
    stages = sculpt.nested_family(cx, max_stages=holes + 1, rng=rng)
    if len(stages) < holes + 1:
        raise BadParameters(f"only {len(stages) - 1} sink deletions possible, asked for {holes}")
    return stages


def _inject(cx, fault):
    if fault == "drop-tet" and cx.tets:
        return delaunay.DelaunayComplex(cx.points, cx.tets[1:])
    return cx


def _dump_failure(cfg: RunConfig, cx, stages, problems) -> Path:
    where = Path(cfg.stages_dir or Path(cfg.output).parent) / "wrapsurf-dump"
    where.mkdir(parents=True, exist_ok=True)
    (where / "problems.txt").write_text("\n".join(problems) + "\n")
    (where / "delaunay.txt").write_text(cx.dump())
    for st in stages:
        (where / f"stage_{st.index:03d}.txt").write_text(delaunay.dump_simplices(st.complex))
    return where


# ---------------------------------------------------------------------------
# commands


def cmd_reconstruct(cfg: RunConfig, fault: str = "none") -> int:
    cfg.validate()
    t0 = time.perf_counter()
    pts = _load_points(cfg.input, cfg.input_format)
    cx = delaunay.build(pts)
    t1 = time.perf_counter()
    log.info("built %d tetrahedra on %d points", len(cx.tets), len(pts))
    stages = _family(cx, cfg.holes)
    if fault == "drop-face" and stages:
        st = stages[0]
        face = min((s for s in st.complex if len(s) == 2), key=delaunay.canonical_key)
        stages[0] = dataclasses.replace(st, complex=st.complex - {face})
    t2 = time.perf_counter()

    problems = sculpt.stage_violations(stages, cx)
    if cfg.oracle_checks:
        problems += [f"local Delaunay violation {v}" for v in delaunay.local_violations(cx)]
        ok, cycle = flow.check_acyclic(cx)
        if not ok:
            problems.append(f"flow cycle {cycle}")
    if problems:
        where = _dump_failure(cfg, cx, stages, problems)
        raise InvariantViolation(f"{len(problems)} invariant violations; dump in {where}")

    final = stages[-1]
    nbytes = _write_stage_surface(final, cx, cfg.output, cfg.output_format)
    log.info("wrote %s (%d bytes)", cfg.output, nbytes)
    if cfg.stages_dir:
        root = Path(cfg.stages_dir)
        for st in stages:
            d = root / f"stage_{st.index:03d}"
            d.mkdir(parents=True, exist_ok=True)
            _write_stage_surface(st, cx, d / "surface.off")
            (d / "complex.txt").write_text(delaunay.dump_simplices(st.complex))
            _dump_json(st.stats, d / "stats.json")
    if cfg.emit_diagnostics:
        diag = Path(cfg.output).with_suffix(".flow.csv")
        with open(diag, "w", newline="") as fh:
            flow.write_diagnostics(cx, fh)
    t3 = time.perf_counter()
    stats = {
        "n_points": len(pts),
        "stages": [st.stats for st in stages],
        "sink_log": [{"verts": list(c.simplex), "rho2": c.significance}
                     for c in stages[0].sink_log],
        "timings_ms": {"build": 1e3 * (t1 - t0), "wrap": 1e3 * (t2 - t1), "total": 1e3 * (t3 - t0)},
    }
    validate_stats(stats)
    _dump_json(stats, cfg.stats_path)
    rep = final.surface.report()
    print(f"stage {final.index}: {final.counts} chi(X)={final.chi_complex} "
          f"chi(W)={rep['chi']} closed={rep['closed']} manifold={rep['manifold']} genus={rep['genus']}")
    return EXIT_OK


def cmd_sample(args) -> int:
    params = {"n": args.n, "seed": args.seed}
    if args.shape == "sphere":
        params.update(radius=args.radius, jitter=args.jitter)
        pts = meshio.sample_sphere(args.n, args.radius, args.jitter, args.seed)
    else:
        profile = {"torus": "circle", "pentagon-torus": "pentagon",
                   "twisted-pentagon-torus": "twisted"}[args.shape]
        params.update(R=args.R, r=args.r, profile=profile)
        if profile == "twisted":
            params["twists"] = args.twists
        pts = meshio.sample_torus(args.R, args.r, args.n, args.seed, profile, args.twists)
    meshio.write_points(args.output, pts)
    print(f"# {args.shape} " + " ".join(f"{k}={v}" for k, v in params.items()))
    return EXIT_OK


def _x0_hash(stage) -> str:
    return hashlib.sha256(delaunay.dump_simplices(stage.complex).encode()).hexdigest()[:16]


def cmd_verify(args) -> int:
    pts = _load_points(args.input, args.format)
    cx = _inject(delaunay.build(pts), args.inject_fault)
    rows = []

    bad = delaunay.local_violations(cx)
    rows.append(("complex", not bad, f"{len(cx.tets)} tets, {len(bad)} local violations"))
    if len(pts) <= 15:
        rep = delaunay.verify_delaunay(cx, pts)
        rows.append(("delaunay-oracle", rep.ok,
                     f"{len(rep.non_empty)} non-empty, {len(rep.missing)} missing"))
    extra = []
    if args.inject_fault == "reverse-edge":
        a, b = next(iter(flow.flow_edges(cx)))
        extra = [(b, a)]
    ok, cycle = flow.check_acyclic(cx, extra)
    rows.append(("acyclic", ok, "topological sort ok" if ok else f"cycle of length {len(cycle) - 1}"))

    base = _x0_hash(sculpt.wrap(cx))
    rng = random.Random(args.seed)
    hashes = {_x0_hash(sculpt.wrap(cx, rng=random.Random(rng.getrandbits(64))))
              for _ in range(args.trials)}
    conf = hashes == {base}
    rows.append(("confluence", conf, f"{args.trials} orders, X0 hash {base}" if conf
                 else f"{len(hashes | {base})} distinct X0"))

    width = max(len(r[0]) for r in rows)
    for name, passed, detail in rows:
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}  {detail}")
    return EXIT_OK if all(r[1] for r in rows) else EXIT_FAIL


def cmd_stats(args) -> int:
    path = Path(args.input)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        try:
            validate_stats(data)
        except jsonschema.ValidationError as exc:
            raise BadParameters(f"stats file does not match schema: {exc.message}") from None
        stages = data["stages"]
    else:
        cx = delaunay.build(_load_points(path, args.format))
        stages = [st.stats for st in _family(cx, args.holes)]
    print("stage      v      e      f      t  chi(X)  chi(W)  manifold  deleted rho2")
    for st in stages:
        c = st["counts"]
        sink = st["deleted_sink"]
        rho = f"{sink['rho2']:.6g}" if sink else "-"
        print(f"{st['index']:5d} {c['v']:6d} {c['e']:6d} {c['f']:6d} {c['t']:6d} "
              f"{st['chi_complex']:7d} {st['chi_surface']:7d}  {str(st['manifold']):8s}  {rho}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wrapsurf", description="Wrap surfaces from 3D point clouds.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reconstruct", help="point cloud -> wrap surface")
    r.add_argument("-c", "--config", help="TOML key=value config; flags override it")
    r.add_argument("-i", "--input")
    r.add_argument("-o", "--output")
    r.add_argument("--input-format", choices=("xyz", "ply"))
    r.add_argument("--output-format", choices=meshio.SURFACE_FORMATS + ("stl",))
    r.add_argument("--holes", type=int, help="number of sink deletions (default 0)")
    r.add_argument("--stages-dir", help="write surface, complex and stats per stage here")
    r.add_argument("--stats", help="stats.json path (default: <output stem>.stats.json)")
    r.add_argument("--seed", type=int)
    r.add_argument("--diagnostics", dest="emit_diagnostics", action="store_true", default=None,
                   help="write a flow CSV next to the output")
    r.add_argument("--oracle-checks", action="store_true", default=None,
                   help="also run Delaunay and acyclicity checks")
    r.add_argument("--write-config", help="save the effective config and continue")
    r.add_argument("--inject-fault", choices=_FAULTS, default="none", help=argparse.SUPPRESS)

    s = sub.add_parser("sample", help="write a synthetic xyz point cloud")
    s.add_argument("shape", choices=("sphere", "torus", "pentagon-torus", "twisted-pentagon-torus"))
    s.add_argument("-n", type=int, default=1000)
    s.add_argument("--R", type=float, default=3.0)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--jitter", type=float, default=0.0)
    s.add_argument("--twists", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)

    v = sub.add_parser("verify", help="acyclicity, confluence and Delaunay checks")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("--format", choices=("xyz", "ply"))
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", choices=_FAULTS, default="none", help=argparse.SUPPRESS)

    t = sub.add_parser("stats", help="stage table for a stats.json or a point cloud")
    t.add_argument("input")
    t.add_argument("--format", choices=("xyz", "ply"))
    t.add_argument("--holes", type=int, default=0)
    return p


def _config_from(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            cfg = RunConfig.from_toml(Path(args.config).read_text())
        except OSError as exc:
            raise BadParameters(f"config: {exc}") from None
    for f in dataclasses.fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    cfg.validate()
    if args.write_config:
        Path(args.write_config).write_text(cfg.to_toml())
    return cfg


def main(argv=None) -> int:
    level = os.environ.get("WRAP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "reconstruct":
            return cmd_reconstruct(_config_from(args), args.inject_fault)
        if args.command == "sample":
            return cmd_sample(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_stats(args)
    except DegenerateInput as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ParseError, BadParameters, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # anything else is a broken invariant
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
