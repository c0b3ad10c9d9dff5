#!/usr/bin/env python3
"""Command-line entry point: phantom, decompose, filter, segment, oracle-check, compare."""

import argparse
import logging
import sys
from pathlib import Path

from ..analysis.bands import band_mask, cluster_bands
from ..core.config import RunConfig, log_level_from_env
from ..core.errors import ImageFormatError, SolverDivergenceError
from ..core.presets import PHANTOM_PRESETS, SCALE_PROFILES, SOLVER_PROFILES
from ..data.image_io import ensure_writable_dir, read_image
from ..data.outputs import RUN_CONFIG_FILE, load_decomposition, write_masks, write_outputs
from ..data.phantoms import main as render_phantom
from .pipeline import compare_fidelities, oracle_check, run_decompose

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DIVERGENCE = 4


def _add_config_arguments(parser):
    parser.add_argument("--fidelity", choices=["l1", "l2"], help="Data fidelity (default: l1)")
    parser.add_argument(
        "--n-scales", type=int, help="Number of scales (default: from the scale profile)"
    )
    parser.add_argument("--t-min", type=float, help="Smallest scale (default: 0.5)")
    parser.add_argument(
        "--t-max", type=float, help="Largest scale (default: 1.25 * max(width, height) / 4)"
    )
    parser.add_argument("--spacing", choices=["linear", "logarithmic"], help="Scale spacing")
    parser.add_argument(
        "--scale-profile",
        choices=sorted(SCALE_PROFILES),
        help="Named scale grid (synthetic: 20 scales, experimental: 50)",
    )
    parser.add_argument("--tau", type=float, help="Primal step size")
    parser.add_argument("--sigma", type=float, help="Dual step size")
    parser.add_argument("--theta", type=float, help="Extrapolation weight")
    parser.add_argument("--max-its", type=int, help="Iteration cap per scale")
    parser.add_argument("--tol", type=float, help="Relative early-stop tolerance (0 disables)")


def _add_band_arguments(parser):
    parser.add_argument(
        "--bands",
        default=None,
        help="Band selection: auto, otsu or manual:i0-i1,i2-i3 (default: auto)",
    )
    parser.add_argument("--min-prominence", type=float, help="Peak prominence fraction")
    parser.add_argument("--epsilon", type=float, help="Segmentation threshold (default: 1e-3)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tv-spectrum",
        description="Spectral total-variation decomposition of images",
    )
    parser.add_argument(
        "--profile", choices=sorted(SOLVER_PROFILES), help="Solver profile (default: paper)"
    )
    parser.add_argument("--config", help="Run configuration file (key = value lines)")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: TV_SPECTRUM_LOG_LEVEL or INFO)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    phantom = commands.add_parser("phantom", help="Render a disc phantom to PGM")
    source = phantom.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", help="Phantom spec file")
    source.add_argument("--preset", choices=sorted(PHANTOM_PRESETS), help="Named layout")
    phantom.add_argument("--bias", type=float, help="Intensity ramp strength")
    phantom.add_argument("--out", required=True, help="Output PGM path")

    decompose = commands.add_parser("decompose", help="Run the full decomposition pipeline")
    decompose.add_argument("--input", required=True, help="PGM or PNG image")
    _add_config_arguments(decompose)
    _add_band_arguments(decompose)
    decompose.add_argument("--out-dir", help="Output directory")

    for name, text in (
        ("filter", "Band reconstructions and composite of a saved decomposition"),
        ("segment", "Band masks of a saved decomposition"),
    ):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("--decomp", required=True, help="Directory written by decompose")
        _add_band_arguments(sub)
        sub.add_argument("--out-dir", help="Output directory (default: the decomposition dir)")

    oracle = commands.add_parser("oracle-check", help="Compare a disc run with its closed form")
    oracle.add_argument("--r", type=float, required=True, help="Disc radius in pixels")
    oracle.add_argument("--c", type=float, required=True, help="Disc contrast")
    oracle.add_argument("--fidelity", choices=["l1", "l2"], required=True)
    oracle.add_argument("--n-scales", type=int, help="Number of scales (default: 20)")
    oracle.add_argument("--max-its", type=int, help="Iteration cap per scale")
    oracle.add_argument("--tol", type=float, help="Relative early-stop tolerance")

    compare = commands.add_parser("compare", help="Peaks of both fidelities side by side")
    compare.add_argument("--input", required=True, help="PGM or PNG image")
    _add_config_arguments(compare)
    compare.add_argument("--min-prominence", type=float, help="Peak prominence fraction")
    compare.add_argument("--out-dir", help="Also write compare.csv here")
    return parser


def _overrides(args):
    """CLI values keyed like the configuration file; unset flags stay None"""
    keys = {
        "profile": "profile",
        "fidelity": "fidelity",
        "n_scales": "n_scales",
        "t_min": "t_min",
        "t_max": "t_max",
        "spacing": "spacing",
        "scale_profile": "scale_profile",
        "tau": "tau",
        "sigma": "sigma",
        "theta": "theta",
        "max_its": "max_its",
        "tol": "rel_tol",
        "bands": "bands",
        "min_prominence": "min_prominence",
        "epsilon": "epsilon_seg",
        "out_dir": "output_dir",
    }
    return {target: getattr(args, source, None) for source, target in keys.items()}


def _config_path(args):
    """--config, or for filter/segment the run_config.txt saved next to the decomposition"""
    if args.config or args.command not in ("filter", "segment"):
        return args.config
    saved = Path(args.decomp) / RUN_CONFIG_FILE
    return saved if saved.is_file() else None


def _run_bands(args, config, with_masks):
    dec, f = load_decomposition(args.decomp)
    config = config.with_overrides(fidelity=dec.mode)
    out_dir = ensure_writable_dir(args.out_dir or args.decomp)
    bands = cluster_bands(dec.clamped_response(), config.band_method, config.band_params)
    if with_masks:
        masks = [band_mask(dec, band, config.epsilon_seg) for band in bands]
        write_masks(bands, masks, out_dir)
    else:
        write_outputs(dec, bands, None, config, f, out_dir)
    return bands


def run_command(args):
    if args.command == "phantom":
        return render_phantom(args.spec, args.preset, args.bias, args.out)

    config = RunConfig.load(_config_path(args), _overrides(args))

    if args.command == "decompose":
        f = read_image(args.input)
        ensure_writable_dir(config.output_dir)
        _, bands, written = run_decompose(f, config, config.output_dir)
        print(f"{len(bands)} band(s); {len(written)} file(s) written to {config.output_dir}")
    elif args.command == "filter":
        bands = _run_bands(args, config, with_masks=False)
        print(f"{len(bands)} band reconstruction(s) written")
    elif args.command == "segment":
        bands = _run_bands(args, config, with_masks=True)
        print(f"{len(bands)} mask(s) written")
    elif args.command == "oracle-check":
        report = oracle_check(args.r, args.c, args.fidelity, config)
        print("\n".join(report.lines()))
    elif args.command == "compare":
        f = read_image(args.input)
        if args.out_dir:
            ensure_writable_dir(args.out_dir)
        table = compare_fidelities(f, config, args.out_dir)
        print(table.to_string(index=False))
    return EXIT_OK


def main(argv=None):
    """
    Run one tv-spectrum command

    Args:
        argv: Argument list (default: sys.argv[1:])

    Returns:
        Exit code: 0 success, 2 usage error (including an unwritable output
        directory), 3 input-format error, 4 divergence
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    level = args.log_level or log_level_from_env()
    logging.basicConfig(
        level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    logging.getLogger().setLevel(level)

    try:
        return run_command(args)
    except SolverDivergenceError as e:
        logger.error(str(e))
        return EXIT_DIVERGENCE
    except (ImageFormatError, FileNotFoundError) as e:
        logger.error(f"Cannot read input: {e}")
        return EXIT_INPUT
    except OSError as e:
        logger.error(f"Cannot write output: {e}")
        return EXIT_USAGE
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
