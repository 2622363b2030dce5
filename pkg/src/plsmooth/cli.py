"""Command-line front end: ``plsmooth <subcommand> [flags]``.

Exit codes: 0 on success, 1 on a processing error (one-line diagnostic on
stderr), 2 on an argument error (usage text on stderr).
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path
from typing import Dict, Sequence

from .errors import FormatError
from .fileio import kind_from_path, load_image, png_kind, save_image
from .filters.spec import L0, Bilateral, DomainTransformNC, FilterSpec, Guided, WeightedMedian
from .image import ImageBuffer, check_same_shape, denormalize, normalize_unit
from .parallel import set_threads
from .pipeline import (
    BETA_ENHANCE,
    BETA_FLASH,
    BETA_TONEMAP,
    PipelineConfig,
    ToneMapConfig,
    detail_enhance,
    pc_smooth,
    pc_smooth_then_reconstruct,
    pl_smooth,
    tone_map,
)
from .studies import (
    DETAIL_PAIRS,
    FLASH_PAIRS,
    TONEMAP_PAIRS,
    beta_study,
    quantization_study,
    quantization_test_image,
    reversal_study,
    synthetic_image,
    write_csv,
)

PROG = "plsmooth"
FILTERS = ("bilateral", "dt", "wmf", "l0", "guided")
_DEFAULTS = {
    "bilateral": Bilateral(),
    "dt": DomainTransformNC(),
    "wmf": WeightedMedian(),
    "l0": L0(),
    "guided": Guided(),
}
_PRESETS = {"smooth": DETAIL_PAIRS, "enhance": DETAIL_PAIRS, "tonemap": TONEMAP_PAIRS,
            "flashnoflash": FLASH_PAIRS}
_APP_BETA = {"smooth": BETA_ENHANCE, "enhance": BETA_ENHANCE, "tonemap": BETA_TONEMAP,
             "flashnoflash": BETA_FLASH}

# flag dest -> (flag, dataclass field, filters it applies to, validity test, requirement)
_PARAM_FLAGS = {
    "sigma_s": ("--sigma-s", "sigma_s", ("bilateral", "dt"), lambda v: v > 0, "must be > 0"),
    "sigma_r": ("--sigma-r", "sigma_r", ("bilateral", "dt", "wmf"), lambda v: v > 0, "must be > 0"),
    "radius": ("--radius", "radius", ("wmf", "guided"), lambda v: v >= 1, "must be >= 1"),
    "bins": ("--bins", "bins", ("wmf",), lambda v: v >= 2, "must be >= 2"),
    "lam": ("--lambda", "lam", ("l0",), lambda v: v >= 0, "must be >= 0"),
    "kappa": ("--kappa", "kappa", ("l0",), lambda v: v > 1, "must be > 1"),
    "iterations": ("--iterations", "iterations", ("dt",), lambda v: v >= 1, "must be >= 1"),
    "epsilon": ("--epsilon", "epsilon", ("guided",), lambda v: v >= 0, "must be >= 0"),
    "fast": ("--fast/--exact", "fast", ("bilateral",), lambda v: True, ""),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _finite(v: float) -> bool:
    return math.isfinite(v)


def _add_filter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--filter", choices=FILTERS, default="bilateral")
    p.add_argument("--sigma-s", dest="sigma_s", type=float)
    p.add_argument("--sigma-r", dest="sigma_r", type=float)
    p.add_argument("--radius", type=int)
    p.add_argument("--bins", type=int, help="weighted-median quantization levels")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--epsilon", type=float)
    fast = p.add_mutually_exclusive_group()
    fast.add_argument("--fast", dest="fast", action="store_true", default=None,
                      help="bilateral-grid approximation")
    fast.add_argument("--exact", dest="fast", action="store_false")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, help="worker thread cap (also PLS_THREADS)")


def _add_image_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bits", type=int, choices=(8, 16), help="PNG output depth (default: input depth)")


_SUBPARSERS: Dict[str, argparse.ArgumentParser] = {}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Piecewise-linear edge-preserving smoothing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_ in (("smooth", "smooth an image"), ("enhance", "detail enhancement")):
        p = sub.add_parser(name, help=help_)
        _add_image_io(p)
        _add_filter_flags(p)
        p.add_argument("--mode", choices=("pc", "pl", "control"), default="pl")
        p.add_argument("--beta", type=float)
        p.add_argument("--guide", help="guidance image for joint filtering")
        if name == "enhance":
            p.add_argument("-k", type=float, default=5.0, help="detail gain")
        _add_common(p)

    p = sub.add_parser("tonemap", help="HDR tone mapping (PFM or 16-bit PNG in)")
    _add_image_io(p)
    _add_filter_flags(p)
    p.add_argument("--mode", choices=("pc", "pl"), default="pl")
    p.add_argument("--beta", type=float)
    p.add_argument("--contrast", type=float, default=ToneMapConfig.target_base_contrast,
                   help="base-layer contrast ratio")
    p.add_argument("--saturation", type=float, default=ToneMapConfig.saturation)
    _add_common(p)

    p = sub.add_parser("flashnoflash", help="flash/no-flash denoising")
    p.add_argument("-i", "--input", "--noflash", dest="input", required=True)
    p.add_argument("--flash", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bits", type=int, choices=(8, 16))
    _add_filter_flags(p)
    p.add_argument("--mode", choices=("pc", "pl"), default="pl")
    p.add_argument("--beta", type=float)
    _add_common(p)

    p = sub.add_parser("study-reversal", help="gradient reversal counts on the synthetic scan line")
    p.add_argument("--filter", choices=("bilateral", "dt", "wmf", "l0", "all"), default="all")
    p.add_argument("-k", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=BETA_ENHANCE)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; the signal is fixed")
    p.add_argument("--out")
    _add_common(p)

    p = sub.add_parser("study-bins", help="weighted-median quantization study")
    p.add_argument("-i", "--input", help="normalized input (default: synthetic HDR ramp)")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--sigma-r", dest="sigma_r", type=float, default=0.1)
    p.add_argument("--bins", default="256,1024,4096", help="comma-separated step counts")
    p.add_argument("--beta", type=float, default=BETA_ENHANCE)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_common(p)

    p = sub.add_parser("study-beta", help="data term over a beta sweep")
    p.add_argument("-i", "--input", help="input image (default: synthetic)")
    _add_filter_flags(p)
    p.add_argument("--betas", default="1,16,256,1024")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_common(p)
    _SUBPARSERS.update(sub.choices)
    return parser


def _bad(parser: argparse.ArgumentParser, flag: str, why: str) -> UsageError:
    return UsageError(f"{parser.format_usage()}{parser.prog}: error: argument {flag}: {why}")


def make_filter(args, app: str, mode: str, parser=None) -> FilterSpec:
    """Preset for ``(app, filter, mode)`` with any explicitly given flags applied on top."""
    parser = parser or build_parser()
    name = args.filter
    pairs = _PRESETS.get(app, DETAIL_PAIRS)
    if name in pairs:
        spec = pairs[name][0 if mode in ("pc", "control") else 1]
    else:
        spec = _DEFAULTS[name]
    overrides = {}
    for dest, (flag, fieldname, applies, ok, need) in _PARAM_FLAGS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if name not in applies:
            raise _bad(parser, flag, f"not applicable to --filter {name}")
        if isinstance(value, float) and not _finite(value) or not ok(value):
            raise _bad(parser, flag, f"{need}, got {value}")
        overrides[fieldname] = value
    try:
        return dataclasses.replace(spec, **overrides)
    except ValueError as exc:
        raise _bad(parser, "--filter", str(exc)) from exc


def _parse_list(parser, flag, text, cast, ok, need):
    try:
        values = [cast(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise _bad(parser, flag, f"expected a comma-separated list, got {text!r}") from None
    if not values or not all(ok(v) for v in values):
        raise _bad(parser, flag, f"every entry {need}, got {text!r}")
    return values


def _validate(args, parser) -> Dict:
    """Check every flag before any file is touched; returns derived settings."""
    if args.threads is not None and args.threads < 1:
        raise _bad(parser, "--threads", f"must be >= 1, got {args.threads}")
    out: Dict = {}
    cmd = args.command
    if cmd in ("smooth", "enhance", "tonemap", "flashnoflash"):
        beta = getattr(args, "beta", None)
        if beta is not None and not (_finite(beta) and beta >= 0):
            raise _bad(parser, "--beta", f"must be >= 0, got {beta}")
        if args.mode == "pc" and beta is not None:
            print(f"{PROG}: warning: --beta is ignored with --mode pc", file=sys.stderr)
        out["beta"] = _APP_BETA[cmd] if beta is None else beta
        out["filter"] = make_filter(args, cmd, args.mode, parser)
        for flag, path in (("--input", args.input), ("--output", args.output)):
            if Path(path).suffix.lower() not in (".png", ".pfm"):
                raise _bad(parser, flag, f"expected a .png or .pfm path, got {path!r}")
        if cmd == "enhance" and not _finite(args.k):
            raise _bad(parser, "-k", f"must be finite, got {args.k}")
        if cmd == "tonemap":
            if not (_finite(args.contrast) and args.contrast > 1):
                raise _bad(parser, "--contrast", f"must be > 1, got {args.contrast}")
            if not 0 < args.saturation <= 1:
                raise _bad(parser, "--saturation", f"must lie in (0, 1], got {args.saturation}")
    elif cmd == "study-reversal":
        if not _finite(args.k):
            raise _bad(parser, "-k", f"must be finite, got {args.k}")
        if not (_finite(args.tau) and args.tau >= 0):
            raise _bad(parser, "--tau", f"must be >= 0, got {args.tau}")
        if not (_finite(args.beta) and args.beta >= 0):
            raise _bad(parser, "--beta", f"must be >= 0, got {args.beta}")
    elif cmd == "study-bins":
        out["bins"] = _parse_list(parser, "--bins", args.bins, int, lambda v: v >= 1, "must be >= 1")
        if args.radius < 1:
            raise _bad(parser, "--radius", f"must be >= 1, got {args.radius}")
        if not (_finite(args.sigma_r) and args.sigma_r > 0):
            raise _bad(parser, "--sigma-r", f"must be > 0, got {args.sigma_r}")
        if not (_finite(args.beta) and args.beta >= 0):
            raise _bad(parser, "--beta", f"must be >= 0, got {args.beta}")
        if args.size < 2:
            raise _bad(parser, "--size", f"must be >= 2, got {args.size}")
        if args.repeats < 1:
            raise _bad(parser, "--repeats", f"must be >= 1, got {args.repeats}")
    elif cmd == "study-beta":
        out["betas"] = _parse_list(parser, "--betas", args.betas, float,
                                   lambda v: _finite(v) and v >= 0, "must be >= 0")
        out["filter"] = make_filter(args, "smooth", "pl", parser)
        if args.size < 2:
            raise _bad(parser, "--size", f"must be >= 2, got {args.size}")
    return out


def _output_kind(args, in_kind: str) -> str:
    if Path(args.output).suffix.lower() == ".pfm":
        return "pfm"
    bits = args.bits or (16 if in_kind in ("png16", "pfm") else 8)
    return kind_from_path(args.output, bits)


def _input_kind(path: str) -> str:
    kind = kind_from_path(path)
    return "pfm" if kind == "pfm" else png_kind(path)


def _smooth_image(img: ImageBuffer, args, opts, guide: ImageBuffer | None) -> ImageBuffer:
    spec = opts["filter"]
    if args.mode == "pc":
        return pc_smooth(img, spec, guide)
    if args.mode == "control":
        return pc_smooth_then_reconstruct(img, spec, opts["beta"])
    return pl_smooth(img, PipelineConfig(filter=spec, beta=opts["beta"], guide=guide))


def _cmd_smooth(args, opts) -> None:
    in_kind = _input_kind(args.input)
    raw = load_image(args.input, in_kind)
    img, state = normalize_unit(raw)
    guide = None
    if getattr(args, "guide", None):
        guide = normalize_unit(load_image(args.guide))[0]
        check_same_shape(img, guide)
    out = _smooth_image(img, args, opts, guide)
    if args.command == "enhance":
        out = detail_enhance(img, out, args.k)
    save_image(denormalize(out, state), args.output, _output_kind(args, in_kind))


def _cmd_tonemap(args, opts) -> None:
    in_kind = _input_kind(args.input)
    if in_kind == "png8":
        raise FormatError(f"{args.input} is an 8-bit image; tonemap needs PFM or 16-bit PNG input")
    hdr = load_image(args.input, in_kind)
    cfg = PipelineConfig(filter=opts["filter"], beta=opts["beta"],
                         tone_map=ToneMapConfig(args.contrast, args.saturation))
    out = tone_map(hdr, cfg, arm=args.mode)
    save_image(out, args.output, _output_kind(args, in_kind))


def _cmd_flash(args, opts) -> None:
    in_kind = _input_kind(args.input)
    noflash, state = normalize_unit(load_image(args.input, in_kind))
    flash = normalize_unit(load_image(args.flash))[0]
    check_same_shape(noflash, flash)
    out = _smooth_image(noflash, args, opts, flash)
    save_image(denormalize(out, state), args.output, _output_kind(args, in_kind))


def _emit_csv(rows, path: str | None) -> None:
    if path is None:
        write_csv(rows, sys.stdout)
        return
    try:
        with open(path, "w", newline="") as fh:
            write_csv(rows, fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _cmd_study_reversal(args, opts) -> None:
    names = ("bilateral", "l0", "dt", "wmf") if args.filter == "all" else (args.filter,)
    _emit_csv(reversal_study(names, k=args.k, tau=args.tau, beta=args.beta), args.out)


def _load_normalized(path: str) -> ImageBuffer:
    return normalize_unit(load_image(path))[0]


def _cmd_study_bins(args, opts) -> None:
    img = _load_normalized(args.input) if args.input else quantization_test_image(args.size, args.seed)
    rows = quantization_study(img, args.radius, args.sigma_r, opts["bins"], args.beta, args.repeats)
    _emit_csv(rows, args.out)


def _cmd_study_beta(args, opts) -> None:
    img = _load_normalized(args.input) if args.input else synthetic_image(args.size, args.seed)
    _emit_csv(beta_study(img, opts["filter"], opts["betas"], args.filter), args.out)


_COMMANDS = {
    "smooth": _cmd_smooth,
    "enhance": _cmd_smooth,
    "tonemap": _cmd_tonemap,
    "flashnoflash": _cmd_flash,
    "study-reversal": _cmd_study_reversal,
    "study-bins": _cmd_study_bins,
    "study-beta": _cmd_study_beta,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        opts = _validate(args, _SUBPARSERS[args.command])
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    set_threads(args.threads)
    try:
        _COMMANDS[args.command](args, opts)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a one-line diagnostic
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
