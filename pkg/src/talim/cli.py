"""Command line front end: analyze, batch, correlate, factor, synth, report.

Exit codes: 0 success, 1 usage, 2 input/output, 3 analysis failure.
Set ``TALIM_LOG`` (DEBUG, INFO, WARNING, ...) for log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .errors import TalimError
from .reports import (
    ManifestRow,
    feature_csv_lines,
    feature_json,
    read_manifest,
    write_correlation_report,
    write_descriptives,
    write_factor_report,
    write_manifest,
)
from .signal_io import DEFAULT_SAMPLE_RATE, load_wav, write_wav
from .spectrum import SpectrumConfig, compute_ltas
from .stats import FeatureMatrix, factor_analysis, pearson, read_matrix_csv, write_matrix_csv
from .synth import SynthSpec, stroke_corpus, synth_stroke, write_sidecar
from .timbre import FEATURE_NAMES, FeatureParams, TimbreVector, compute_all

log = logging.getLogger("talim")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ANALYSIS = 0, 1, 2, 3

# every option that a config file may set, with its built-in default
DEFAULTS = {
    "frame_size": 4096,
    "hop": 2048,
    "window": "hann",
    "fmin": 80.0,
    "fmax": 1000.0,
    "max_partials": 10,
    "min_separation": 50.0,
    "threshold_db": 40.0,
    "envelope_window_ms": 10.0,
    "envelope_hop_ms": 1.0,
    "format": "json",
    "jobs": 1,
    "factors": "auto",
    "kaiser_normalize": True,
    "suppress": 0.5,
    "transpose": False,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes and underscores are interchangeable."""
    cfg = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                key = key.replace("-", "_")
                if key not in DEFAULTS:
                    raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
                cfg[key] = value
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return cfg


def _coerce(key: str, value):
    default = DEFAULTS[key]
    if isinstance(value, str) and not isinstance(default, str):
        if isinstance(default, bool):
            low = value.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise UsageError(f"option {key}: not a boolean: {value!r}")
            return low in ("1", "true", "yes", "on")
        try:
            return type(default)(value)
        except ValueError as exc:
            raise UsageError(f"option {key}: {exc}") from exc
    return value


def resolve(args: argparse.Namespace) -> dict:
    """Command-line values, then config file values, then built-in defaults."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, default in DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None:
            value = cfg.get(key, default)
        out[key] = _coerce(key, value)
    return out


def _spectrum_config(opts) -> SpectrumConfig:
    try:
        return SpectrumConfig(opts["frame_size"], opts["hop"], opts["window"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _feature_params(opts) -> FeatureParams:
    return FeatureParams(
        fmin=opts["fmin"], fmax=opts["fmax"], max_partials=opts["max_partials"],
        min_separation=opts["min_separation"], threshold_db=opts["threshold_db"],
        envelope_window_ms=opts["envelope_window_ms"], envelope_hop_ms=opts["envelope_hop_ms"],
    )


def _check_rate(clip) -> None:
    if clip.sample_rate != DEFAULT_SAMPLE_RATE:
        log.warning("%s: sample rate %d Hz differs from %d Hz", clip.source_id,
                    clip.sample_rate, DEFAULT_SAMPLE_RATE)


def _write_lines(rows, out) -> None:
    if out is None:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
        return
    with open(out, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


# -- commands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    opts = resolve(args)
    cfg, params = _spectrum_config(opts), _feature_params(opts)
    clip = load_wav(args.wav)
    _check_rate(clip)
    vec = compute_all(clip, cfg, params)
    if args.ltas_csv:
        compute_ltas(clip, cfg).to_csv(args.ltas_csv)
    if opts["format"] == "json":
        print(feature_json(vec))
    else:
        _write_lines(feature_csv_lines([(clip.source_id, vec)]), None)
    return EXIT_OK


def _analyze_row(row: ManifestRow, cfg, params) -> TimbreVector:
    clip = load_wav(row.path)
    _check_rate(clip)
    return compute_all(clip, cfg, params)


def run_batch(rows: list[ManifestRow], cfg: SpectrumConfig, params: FeatureParams,
              jobs: int = 1) -> tuple[list[tuple[str, TimbreVector]], list[tuple[ManifestRow, str]]]:
    """Analyze manifest rows; returns (successes in manifest order, failures)."""

    def attempt(row):
        try:
            return _analyze_row(row, cfg, params), None
        except TalimError as exc:
            return None, str(exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(attempt, rows))
    else:
        results = [attempt(r) for r in rows]

    done, failed = [], []
    for row, (vec, err) in zip(rows, results):
        if vec is None:
            failed.append((row, err))
        elif not vec.complete:
            failed.append((row, "two-peak differences undefined (fewer than two LTAS peaks)"))
        else:
            done.append((row.row_id, vec))
    for row, err in failed:
        log.warning("skipping %s: %s", row.path, err)
    return done, failed


def cmd_batch(args) -> int:
    opts = resolve(args)
    rows = read_manifest(args.manifest)
    done, _failed = run_batch(rows, _spectrum_config(opts), _feature_params(opts), opts["jobs"])
    if not done:
        log.error("no recording in %s could be analyzed", args.manifest)
        return EXIT_ANALYSIS
    _write_lines(feature_csv_lines(done), args.output)
    return EXIT_OK


def _load_matrix(path, transpose: bool) -> FeatureMatrix:
    m = read_matrix_csv(path)
    return m.transpose() if transpose else m


def _factors(value):
    if str(value).lower() in ("auto", "kaiser"):
        return "kaiser"
    try:
        k = int(value)
    except ValueError as exc:
        raise UsageError(f"--factors expects 'auto' or an integer, got {value!r}") from exc
    if k < 1:
        raise UsageError("--factors must be at least 1")
    return k


def cmd_correlate(args) -> int:
    opts = resolve(args)
    result = pearson(_load_matrix(args.matrix, opts["transpose"]))
    for p in write_correlation_report(result, args.out):
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_factor(args) -> int:
    opts = resolve(args)
    matrix = _load_matrix(args.matrix, opts["transpose"])
    model = factor_analysis(matrix, _factors(opts["factors"]), opts["kaiser_normalize"])
    for p in write_factor_report(model, args.out, opts["suppress"]):
        log.info("wrote %s", p)
    return EXIT_OK


def _floats(text: str | None):
    if text is None:
        return None
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def cmd_synth(args) -> int:
    if args.corpus:
        out = Path(args.corpus)
        out.mkdir(parents=True, exist_ok=True)
        rows = []
        for entry in stroke_corpus(seed=args.seed, tablas=args.tablas, duration=args.duration):
            stem = f"{entry.tabla_id}_{entry.stroke_label}"
            write_wav(synth_stroke(entry.spec, stem), out / f"{stem}.wav")
            write_sidecar(entry.spec, out / f"{stem}.json")
            rows.append(ManifestRow(Path(f"{stem}.wav"), entry.stroke_label, entry.tabla_id))
        write_manifest(rows, out / "manifest.csv")
        log.info("wrote %d clips and %s", len(rows), out / "manifest.csv")
        return EXIT_OK

    if not args.output:
        raise UsageError("synth needs an output WAV path or --corpus DIR")
    spec = SynthSpec(
        f0=args.f0,
        partial_amps=_floats(args.amps) or (1.0,) * 5,
        stretch=_floats(args.stretch),
        attack=args.attack,
        decay=_floats(args.decay),
        duration=args.duration,
        sample_rate=args.sample_rate,
    )
    out = Path(args.output)
    write_wav(synth_stroke(spec, out.stem), out)
    write_sidecar(spec, out.with_suffix(".json"))
    return EXIT_OK


def cmd_report(args) -> int:
    """Batch analysis, descriptives, correlation and factor reports for one manifest."""
    opts = resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = read_manifest(args.manifest)
    done, _failed = run_batch(rows, _spectrum_config(opts), _feature_params(opts), opts["jobs"])
    if len(done) < 3:
        log.error("only %d usable recordings; statistics need at least 3", len(done))
        return EXIT_ANALYSIS
    matrix = FeatureMatrix(tuple(r for r, _ in done), FEATURE_NAMES,
                           [v.as_array() for _, v in done])
    write_matrix_csv(matrix, out / "features.csv")
    write_descriptives(matrix, out)
    write_correlation_report(pearson(matrix), out / "correlation")
    model = factor_analysis(matrix, _factors(opts["factors"]), opts["kaiser_normalize"])
    write_factor_report(model, out / "factor", opts["suppress"])

    strokes = matrix.transpose()
    write_correlation_report(pearson(strokes), out / "strokes" / "correlation")
    write_factor_report(factor_analysis(strokes, "kaiser", opts["kaiser_normalize"]),
                        out / "strokes" / "factor", opts["suppress"])
    log.info("report written to %s", out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("analysis")
    g.add_argument("--frame-size", type=int, help="LTAS frame length, power of two (4096)")
    g.add_argument("--hop", type=int, help="LTAS hop in samples (2048)")
    g.add_argument("--window", help="LTAS window name (hann)")
    g.add_argument("--fmin", type=float, help="lowest pitch searched, Hz (80)")
    g.add_argument("--fmax", type=float, help="highest pitch searched, Hz (1000)")
    g.add_argument("--max-partials", type=int, help="harmonic partials measured (10)")
    g.add_argument("--min-separation", type=float, help="minimum LTAS peak spacing, Hz (50)")
    g.add_argument("--threshold-db", type=float, help="peak floor below the LTAS maximum, dB (40)")
    g.add_argument("--envelope-window-ms", type=float, help="RMS envelope window, ms (10)")
    g.add_argument("--envelope-hop-ms", type=float, help="RMS envelope hop, ms (1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="talim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"talim {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file mirroring the long options")

    p = sub.add_parser("analyze", parents=[common], help="timbre vector of one WAV file")
    p.add_argument("wav")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--ltas-csv", help="also dump the LTAS as freq_hz,magnitude_db")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("batch", parents=[common], help="feature matrix for a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", help="CSV path (default: standard output)")
    p.add_argument("--jobs", type=int, help="clips analyzed concurrently (1)")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_batch)

    def add_matrix_cmd(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("matrix", help="CSV: header of column ids, first column row ids")
        p.add_argument("--out", default=".", help="output directory (.)")
        p.add_argument("--transpose", action="store_const", const=True,
                       help="treat rows as variables (stroke-level analysis)")
        p.set_defaults(func=func)
        return p

    add_matrix_cmd("correlate", cmd_correlate, "Pearson r / p matrices with significance flags")
    p = add_matrix_cmd("factor", cmd_factor, "PCA, communalities, variance table, varimax")
    p.add_argument("--factors", help="'auto' (eigenvalue > 1) or a count")
    p.add_argument("--no-kaiser-normalize", dest="kaiser_normalize", action="store_const",
                   const=False, help="rotate raw rather than row-normalized loadings")
    p.add_argument("--suppress", type=float, help="blank rotated loadings below this magnitude (0.5)")

    p = sub.add_parser("synth", help="synthetic stroke WAV plus JSON ground truth")
    p.add_argument("output", nargs="?", help="WAV path (sidecar written next to it)")
    p.add_argument("--corpus", help="write a tablas x strokes corpus with manifest.csv here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tablas", type=int, default=5)
    p.add_argument("--f0", type=float, default=259.0)
    p.add_argument("--amps", help="comma-separated partial amplitudes (1,1,1,1,1)")
    p.add_argument("--stretch", help="comma-separated per-partial frequency factors")
    p.add_argument("--decay", help="comma-separated per-partial decay constants, s")
    p.add_argument("--attack", type=float, default=0.012)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--sample-rate", type=int, default=DEFAULT_SAMPLE_RATE)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", parents=[common], help="batch + descriptives + correlate + factor")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--factors")
    p.add_argument("--no-kaiser-normalize", dest="kaiser_normalize", action="store_const", const=False)
    p.add_argument("--suppress", type=float)
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def _configure_logging(verbose: int) -> None:
    level = os.environ.get("TALIM_LOG", "").upper() or ("DEBUG" if verbose > 1 else
                                                        "INFO" if verbose else "WARNING")
    numeric = getattr(logging, level, logging.WARNING)
    logging.basicConfig(level=numeric, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    log.setLevel(numeric)
    logging.captureWarnings(True)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"talim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TalimError as exc:
        print(f"talim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"talim: error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
