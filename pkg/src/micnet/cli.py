"""Command-line entry point: ``micnet {mine,score,oracle,bench}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bench import DEFAULT_NOISE_GRID, KINDS, equitability_report
from .export import GraphDocument, write_edge_tsv, write_graphml, write_sif
from .mic import (MicConfig, PairedSample, SampleTooLargeError, approx_mic,
                  brute_force_mic, iamic)
from .pipeline import (PipelineConfig, PipelineError, permutation_pvalue,
                       run_pipeline)
from .similarity import MeasureKind, UndefinedScoreError, score

log = logging.getLogger("micnet")

OUTPUT_FILES = ("support_matrix.tsv", "association_matrix.tsv", "edges.tsv",
                "network.sif", "network.graphml", "manifest.json")
ORACLE_LIMIT = 12
DOMINANCE_TOL = 1e-12


class CliError(Exception):
    """Reported as ``micnet: error: <message>`` with exit status 1."""


# ------------------------------------------------------------------ config

_PIPELINE_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}
_MIC_FIELDS = {f.name: f for f in dataclasses.fields(MicConfig)}
# settings that change speed only, so they stay out of the manifest
_RUNTIME_ONLY = {"n_jobs"}


def _unescape(text: str) -> str:
    return {"tab": "\t", "\\t": "\t", "comma": ","}.get(text, text)


def _coerce(name: str, raw, fields) -> object:
    default = fields[name].default
    if raw is None or (isinstance(raw, str) and raw.lower() in ("none", "")):
        if default is None:
            return None
        raise CliError(f"[config] {name} cannot be empty")
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        low = str(raw).lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise CliError(f"[config] {name}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except (TypeError, ValueError):
        raise CliError(f"[config] {name}: cannot parse {raw!r}") from None
    if isinstance(default, MeasureKind):
        try:
            return MeasureKind(str(raw))
        except ValueError:
            raise CliError(f"[config] measure: unknown measure {raw!r}; expected one of "
                           + ", ".join(m.value for m in MeasureKind)) from None
    return _unescape(str(raw))


def read_config_file(path: Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file {str(path)!r}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"[config] {path}:{lineno}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        if key not in _PIPELINE_FIELDS and key not in _MIC_FIELDS:
            raise CliError(f"[config] {path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def build_configs(settings: dict[str, object]) -> tuple[PipelineConfig, MicConfig]:
    pipe, mic = {}, {}
    for key, raw in settings.items():
        if key in _PIPELINE_FIELDS:
            pipe[key] = _coerce(key, raw, _PIPELINE_FIELDS)
        elif key in _MIC_FIELDS:
            mic[key] = _coerce(key, raw, _MIC_FIELDS)
        else:
            raise CliError(f"[config] unknown setting {key!r}")
    try:
        return PipelineConfig(**pipe), MicConfig(**mic)
    except ValueError as exc:
        raise CliError(f"[config] {exc}") from None


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _manifest(input_path: str, digest: str, pipe: PipelineConfig, mic: MicConfig,
              outputs: dict[str, str]) -> str:
    pipeline = {k: v for k, v in dataclasses.asdict(pipe).items() if k not in _RUNTIME_ONLY}
    pipeline["measure"] = pipe.measure.value
    doc = {
        "tool": "micnet",
        "version": __version__,
        "command": "mine",
        "input": {"path": input_path, "sha256": digest},
        "seed": pipe.rng_seed,
        "pipeline": pipeline,
        "mic": dataclasses.asdict(mic),
        "outputs": outputs,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load_manifest(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read manifest {str(path)!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"[manifest] {path}: invalid JSON ({exc})") from None
    if doc.get("command") != "mine" or "pipeline" not in doc or "mic" not in doc:
        raise CliError(f"[manifest] {path}: not a mine manifest")
    return doc


# -------------------------------------------------------------------- mine

_FLAG_KEYS = ("min_frequency", "p_threshold", "n_permutations", "rng_seed",
              "multivalue_delimiter", "measure", "delimiter",
              "exclude_pair_positions", "n_jobs", "alpha", "clump_factor",
              "refine_max_iters", "refine_tolerance")


def cmd_mine(args) -> int:
    settings: dict[str, object] = {}
    input_path = args.input
    expected_digest = None
    if args.manifest:
        doc = _load_manifest(Path(args.manifest))
        settings.update(doc["pipeline"])
        settings.update(doc["mic"])
        input_path = input_path or doc["input"]["path"]
        expected_digest = doc["input"]["sha256"]
    if args.config:
        settings.update(read_config_file(Path(args.config)))
    for key in _FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if input_path is None:
        raise CliError("mine needs an input table (or a manifest naming one)")
    pipe, mic = build_configs(settings)

    try:
        raw = Path(input_path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read input {input_path!r}: {exc.strerror}") from None
    digest = _sha256(raw)
    if expected_digest is not None and digest != expected_digest:
        raise CliError(f"[manifest] input {input_path!r} does not match the "
                       f"manifest digest (got {digest[:12]}, expected {expected_digest[:12]})")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CliError(f"[parse] {input_path}: not UTF-8 ({exc.reason} at byte {exc.start})") from None

    support, assoc, edges = run_pipeline(text, pipe, mic)
    doc = GraphDocument.from_edge_list(edges)
    files = {
        "support_matrix.tsv": support.to_text(),
        "association_matrix.tsv": assoc.to_text(),
        "edges.tsv": write_edge_tsv(doc),
        "network.sif": write_sif(doc),
        "network.graphml": write_graphml(doc),
    }
    outputs = {name: _sha256(body.encode("utf-8")) for name, body in files.items()}
    files["manifest.json"] = _manifest(input_path, digest, pipe, mic, outputs)

    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, body in files.items():
            with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(body)
    except OSError as exc:
        raise CliError(f"cannot write to {str(out)!r}: {exc.strerror}") from None
    log.info("%d annotations, %d edges -> %s", len(support), len(edges), out)
    return 0


# ------------------------------------------------------------ numeric input


def read_numeric_columns(path: str, columns: Sequence[int] = (0, 1)
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Two numeric columns from a comma or tab separated file.

    A first line that does not parse as numbers is taken as a header.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read input {path!r}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CliError(f"[parse] {path}: no data")
    delim = "\t" if "\t" in lines[0] else ","
    rows = list(csv.reader(io.StringIO("\n".join(lines)), delimiter=delim))
    start = 0
    try:
        [float(rows[0][c]) for c in columns]
    except (ValueError, IndexError):
        start = 1
    cols = [[], []]
    for r in range(start, len(rows)):
        for k, c in enumerate(columns):
            if c >= len(rows[r]):
                raise CliError(f"[parse] {path}: row {r + 1} has no column {c + 1}")
            cell = rows[r][c].strip()
            try:
                value = float(cell)
            except ValueError:
                raise CliError(f"[parse] {path}: row {r + 1}, column {c + 1}: "
                               f"non-numeric value {cell!r}") from None
            if not math.isfinite(value):
                raise CliError(f"[parse] {path}: row {r + 1}, column {c + 1}: "
                               f"non-finite value {cell!r}")
            cols[k].append(value)
    if len(cols[0]) < 2:
        raise CliError(f"[parse] {path}: need at least 2 data rows, got {len(cols[0])}")
    return np.array(cols[0]), np.array(cols[1])


def _measures(text: str) -> list[MeasureKind]:
    out = []
    for name in text.split(","):
        name = name.strip()
        try:
            out.append(MeasureKind(name))
        except ValueError:
            raise CliError(f"unknown measure {name!r}; expected one of "
                           + ", ".join(m.value for m in MeasureKind)) from None
    return out


def _mic_from_args(args) -> MicConfig:
    return build_configs({k: getattr(args, k) for k in _MIC_FIELDS
                          if getattr(args, k, None) is not None})[1]


def cmd_score(args) -> int:
    xs, ys = read_numeric_columns(args.input, tuple(args.columns))
    mic = _mic_from_args(args)
    for m in _measures(args.measures):
        try:
            value = score(m, xs, ys, mic)
        except UndefinedScoreError:
            print(f"{m.value}\tundefined")
            continue
        line = f"{m.value}\t{value:.6f}"
        if args.pvalue:
            p = permutation_pvalue(xs, ys, m, args.n_permutations, args.seed, mic)
            line += f"\t{p:.6g}"
        print(line)
    return 0


def cmd_oracle(args) -> int:
    xs, ys = read_numeric_columns(args.input, tuple(args.columns))
    mic = _mic_from_args(args)
    sample = PairedSample(xs, ys)
    try:
        exact = brute_force_mic(sample, mic, n_limit=args.limit)
    except SampleTooLargeError:
        raise CliError(f"oracle refuses n={sample.n}: the exhaustive search "
                       f"limit is n <= {args.limit}") from None
    base = approx_mic(sample, mic)
    refined = iamic(sample, mic)
    holds = (base.mic <= refined.mic + DOMINANCE_TOL
             and refined.mic <= exact.mic + DOMINANCE_TOL)
    print(f"brute_force\t{exact.mic:.6f}")
    print(f"approx_mic\t{base.mic:.6f}")
    print(f"iamic\t{refined.mic:.6f}")
    print(f"dominance\t{'holds' if holds else 'VIOLATED'}")
    return 0


def cmd_bench(args) -> int:
    kinds = [k.strip() for k in args.kinds.split(",")]
    for k in kinds:
        if k not in KINDS:
            raise CliError(f"unknown kind {k!r}; expected one of {', '.join(KINDS)}")
    try:
        noise = [float(v) for v in args.noise.split(",")]
    except ValueError:
        raise CliError(f"--noise must be comma-separated numbers, got {args.noise!r}") from None
    report = equitability_report(kinds, noise, _measures(args.measures), n=args.n,
                                 seeds=args.seeds, seed=args.seed,
                                 config=_mic_from_args(args))
    text = report.to_text()
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {args.output!r}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)
    return 0


# ------------------------------------------------------------------ parser


def _add_mic_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("MIC settings")
    g.add_argument("--alpha", type=float, help="grid budget exponent (default 0.6)")
    g.add_argument("--clump-factor", type=int, dest="clump_factor")
    g.add_argument("--refine-max-iters", type=int, dest="refine_max_iters")
    g.add_argument("--refine-tolerance", type=float, dest="refine_tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="micnet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"micnet {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="annotation table -> association network files")
    p.add_argument("input", nargs="?", help="delimited annotation table")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--config", help="file of 'key = value' settings (flags win)")
    p.add_argument("--manifest", help="replay the settings and input of a previous run")
    p.add_argument("--min-frequency", type=int, dest="min_frequency")
    p.add_argument("--p-threshold", type=float, dest="p_threshold")
    p.add_argument("--n-permutations", type=int, dest="n_permutations")
    p.add_argument("--seed", type=int, dest="rng_seed")
    p.add_argument("--measure", choices=[m.value for m in MeasureKind])
    p.add_argument("--multivalue-delimiter", dest="multivalue_delimiter")
    p.add_argument("--delimiter", help="table delimiter, 'tab' or ',' (default: sniff)")
    p.add_argument("--exclude-pair-positions", dest="exclude_pair_positions",
                   action="store_const", const=True)
    p.add_argument("-j", "--jobs", type=int, dest="n_jobs")
    _add_mic_flags(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("score", help="score two numeric columns with several measures")
    p.add_argument("input")
    p.add_argument("--measures", default="iamic,approx_mic,pearson,spearman,jaccard,cosine")
    p.add_argument("--columns", type=int, nargs=2, default=[1, 2], metavar=("X", "Y"),
                   help="1-based column numbers (default 1 2)")
    p.add_argument("--pvalue", action="store_true")
    p.add_argument("--n-permutations", type=int, default=1000, dest="n_permutations")
    p.add_argument("--seed", type=int, default=0)
    _add_mic_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("oracle", help="exhaustive MIC next to both approximations")
    p.add_argument("input")
    p.add_argument("--columns", type=int, nargs=2, default=[1, 2], metavar=("X", "Y"))
    p.add_argument("--limit", type=int, default=ORACLE_LIMIT)
    _add_mic_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="equitability report on synthetic relationships")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    p.add_argument("--kinds", default=",".join(KINDS))
    p.add_argument("--noise", default=",".join(f"{v:g}" for v in DEFAULT_NOISE_GRID))
    p.add_argument("--measures", default="approx_mic,iamic,pearson")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_mic_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "columns", None) is not None:
        if min(args.columns) < 1:
            parser.error("--columns are 1-based")
        args.columns = [c - 1 for c in args.columns]
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"micnet: error: {exc}", file=sys.stderr)
    except PipelineError as exc:
        print(f"micnet: error: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"micnet: error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
