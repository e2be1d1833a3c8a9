"""Command-line frontend: ``build``, ``search``, ``verify`` and ``simulate``.

Exit codes: 0 success, 1 verification or consistency failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import jsonschema

from . import sim
from .automorphism import (Permutation, is_code_automorphism,
                           search_automorphisms)
from .gf2m import FieldError, PRIMITIVE_POLYS
from .rs_core import ConstructionError, build_summary, code_spec, compute_m_matrix, field_id

log = logging.getLogger("rsaut")

M_RANGE = (min(PRIMITIVE_POLYS), max(PRIMITIVE_POLYS))
MANIFEST_SCHEMA = "rsaut.manifest/1"

SIM_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["m", "ebno_db"],
    "properties": {
        "m": {"type": "integer", "minimum": M_RANGE[0], "maximum": M_RANGE[1]},
        "parity": {"enum": [2, 3]},
        "ebno_db": {"type": "array", "minItems": 1,
                    "items": {"anyOf": [{"type": "number"}, {"const": "inf"}]}},
        "decoders": {"type": "array", "minItems": 1, "uniqueItems": True,
                     "items": {"enum": list(sim.DECODERS)}},
        "max_iters": {"type": "integer", "minimum": 1},
        "max_perms": {"type": "integer", "minimum": 0},
        "exclude_identity": {"type": "boolean"},
        "combine": {"enum": ["posterior", "extrinsic"]},
        "count_initial_run": {"type": "boolean"},
        "min_frame_errors": {"type": "integer", "minimum": 1},
        "max_frames": {"type": "integer", "minimum": 1},
        "chunk_size": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "threads": {"type": "integer", "minimum": 1},
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(2)


@dataclass
class RunManifest:
    command: str
    code: dict
    seeds: dict
    config: dict
    outputs: list[str]
    started: str
    finished: str = ""
    tool_version: str = ""
    git_describe: str = ""
    schema: str = MANIFEST_SCHEMA
    extra: dict = field(default_factory=dict)

    def write(self, path: Path):
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def _check_m(m: int):
    if not M_RANGE[0] <= m <= M_RANGE[1]:
        raise UsageError(f"--m must lie in {M_RANGE[0]}..{M_RANGE[1]}, got {m}")


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    _check_m(args.m)
    try:
        summary = build_summary(code_spec(args.m, args.parity))
    except (ConstructionError, FieldError) as exc:
        log.error("construction failed: %s", exc)
        return 1
    _emit(summary, args.out)
    return 0


def cmd_search(args) -> int:
    _check_m(args.m)
    spec = code_spec(args.m, 3)
    t0 = time.perf_counter()
    group = search_automorphisms(compute_m_matrix(spec), spec, args.paper_faithful, args.threads)
    log.info("search finished in %.2f s", time.perf_counter() - t0)
    print(f"order={group.order}, classes={len(group.base_classes)}")
    for k, p in enumerate(group.base_classes, 1):
        print(f"{k:3d}  sigma={p.cycles():<20s} l={p.l}  a={list(p.a)}")
    if args.out:
        _emit(group.to_dict(field_id(spec.field)), args.out)
    return 0


def _load_permutations(path: str, m: int, n: int) -> list[Permutation]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    entries = data["classes"] if isinstance(data, dict) and "classes" in data else data
    if isinstance(data, dict) and "m" in data and int(data["m"]) != m:
        raise UsageError(f"{path} describes m={data['m']}, not m={m}")
    if not isinstance(entries, list):
        raise UsageError(f"{path}: expected a list of permutations or a group document")
    out = []
    for k, e in enumerate(entries):
        try:
            out.append(Permutation.from_dict(e, m, n))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"{path}: entry {k}: {exc}") from None
    return out


def cmd_verify(args) -> int:
    _check_m(args.m)
    spec = code_spec(args.m, 3)
    perms = _load_permutations(args.permutations, spec.m, spec.n)
    bad = 0
    for k, p in enumerate(perms):
        ok = is_code_automorphism(p, spec)
        bad += not ok
        print(f"{k}: {'ACCEPT' if ok else 'REJECT'}  sigma={p.cycles()} l={p.l} a={list(p.a)}")
    print(f"accepted={len(perms) - bad}, rejected={bad}")
    return 0 if bad == 0 else 1


def load_sim_config(path: str) -> sim.SweepConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        jsonschema.validate(data, SIM_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"invalid config at '{where}': {exc.message}") from None
    data = dict(data)
    if data.get("parity", 3) == 2 and "pspa" in data.get("decoders", sim.DECODERS):
        raise UsageError("invalid config at 'decoders': pspa needs the triple-parity group (parity 3)")
    data["ebno_db"] = [float(x) for x in data["ebno_db"]]
    return sim.SweepConfig(**data)


def cmd_simulate(args) -> int:
    cfg = load_sim_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    spec = code_spec(cfg.m, cfg.parity)
    started = _now()

    def progress(ebno, pts):
        line = " ".join(f"{d}:{p.frame_errors}/{p.frames}" for d, p in pts.items())
        print(f"[{ebno:g} dB] {line}", file=sys.stderr, flush=True)

    points = sim.sweep(cfg, progress if args.progress else None)
    text = sim.csv_text(points)
    if not args.out:
        sys.stdout.write(text)
        return 0
    csv_path = Path(args.out)
    csv_path.write_text(text)
    man_path = csv_path.with_suffix(".manifest.json")
    config = sim.config_dict(cfg)
    config["ebno_db"] = [str(x) if x == float("inf") else x for x in config["ebno_db"]]
    RunManifest(
        command="simulate",
        code={"m": spec.m, "n": spec.n, "k": spec.k, "parity": spec.parity,
              "field": field_id(spec.field), "prim_poly": spec.field.prim_poly},
        seeds={"master_seed": cfg.seed, "derivation": "numpy SeedSequence([seed, point, chunk])"},
        config=config,
        outputs=[str(csv_path)],
        started=started,
        finished=_now(),
        tool_version=tool_version(),
        git_describe=git_describe(),
        extra={"wall_time_s": {f"{p.ebno_db:g}": p.wall_time for p in points}},
    ).write(man_path)
    log.info("wrote %s and %s", csv_path, man_path)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rsaut", description="Binary-image automorphisms and permutation decoding "
                                           "of triple-parity Reed-Solomon codes.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="field, idempotent, u vectors and M-matrix as JSON")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--parity", type=int, choices=(2, 3), default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("search", help="automorphism search; prints order and class table")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--paper-faithful", action="store_true",
                   help="sweep (a2, a3) pairs instead of deriving offsets from a2")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write the group JSON here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="check permutations against the code")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--permutations", required=True,
                   help="JSON list of {sigma, a, l} or a group document")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="BER sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="CSV path; a .manifest.json is written next to it")
    p.add_argument("--progress", action="store_true", help="per-chunk progress on stderr")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("rsaut: error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rsaut: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
