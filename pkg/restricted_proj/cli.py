"""
Command Line Interface for restricted_proj
"""

import os
import sys
import argparse
import json
import math
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .acceptance import replicate_acceptance
from .energy import select_good_sets, write_energy_profile
from .errors import RestrictedProjError
from .experiment import ExperimentRunner, load_config, plotdata
from .geometry import ProjectionFamily, factor_map, sample_annulus
from .lie import lie_verification_table
from .models import FamilySpec, GeneratorSpec, Settings, TruncatedEnergyParams
from .pointcloud import generate, load_cloud, save_cloud, verify_regularity
from .projection import finitary_check, moment_curve_concentration, projected_dimensions
from .settings import get_settings

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="restricted-proj - numerical lab for restricted projections and truncated energies",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument(
        "--check-env",
        action="store_true",
        help="Check environment variables setup and print status",
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Generate command
    generate_parser = subparsers.add_parser("generate", help="Generate a point cloud")
    generate_parser.add_argument("--spec", help="GeneratorSpec JSON file (overrides the flags below)")
    generate_parser.add_argument(
        "--kind",
        choices=["cantor_product", "uniform_segment", "alpha_regular_random", "kernel_hyperplane", "finite_grid"],
        help="Generator kind",
    )
    generate_parser.add_argument("--n", type=int, default=3, help="Ambient dimension")
    generate_parser.add_argument("--size", type=int, help="Number of points")
    generate_parser.add_argument("--coordinates", type=int, nargs="+", default=[0], help="Coordinates carrying the Cantor/grid factor")
    generate_parser.add_argument("--ratio", type=float, default=1.0 / 3.0, help="Cantor contraction ratio")
    generate_parser.add_argument("--branches", type=int, default=2, help="Cantor pieces per step")
    generate_parser.add_argument("--level", type=int, default=8, help="Cantor construction depth")
    generate_parser.add_argument("--target-alpha", type=float, help="Exponent for alpha_regular_random")
    generate_parser.add_argument("--t0", type=float, nargs="+", help="Degenerate parameter for kernel_hyperplane")
    generate_parser.add_argument("--c", type=float, default=0.0, help="Level value for kernel_hyperplane")
    generate_parser.add_argument("--k0", type=int, help="Scale floor exponent (delta0 = 2^-k0)")
    generate_parser.add_argument("--seed", type=int, default=0, help="Random seed")
    generate_parser.add_argument("--out", required=True, help="Output cloud file")

    # Verify-regularity command
    regularity_parser = subparsers.add_parser("verify-regularity", help="Measure the non-concentration constant of a cloud")
    regularity_parser.add_argument("--cloud", required=True, help="Cloud file")
    regularity_parser.add_argument("--alpha", type=float, help="Exponent (defaults to the cloud's claim)")
    regularity_parser.add_argument("--seed", type=int, default=0, help="Seed for subsampling large clouds")

    # Energy command
    energy_parser = subparsers.add_parser("energy", help="Projected truncated energies and good-set selection")
    energy_parser.add_argument("--cloud", required=True, help="Cloud file")
    energy_parser.add_argument("--family", help="FamilySpec JSON file (standard family if omitted)")
    energy_parser.add_argument("--alpha", type=float, help="Energy exponent (defaults to the cloud's claim)")
    energy_parser.add_argument("--epsilon", type=float, required=True, help="Exponent of the Chebyshev cuts")
    energy_parser.add_argument("--t-samples", type=int, default=64, help="Number of parameters drawn from B")
    energy_parser.add_argument("--seed", type=int, default=0, help="Seed for the parameter samples")
    energy_parser.add_argument("--out", required=True, help="Output directory")

    # Sweep command
    sweep_parser = subparsers.add_parser("sweep", help="Finitary concentration sweep over parameters")
    sweep_parser.add_argument("--cloud", required=True, help="Cloud file")
    sweep_parser.add_argument("--family", help="FamilySpec JSON file (standard family if omitted)")
    sweep_parser.add_argument("--delta", type=float, nargs="+", required=True, help="Dyadic scales")
    sweep_parser.add_argument("--epsilon", type=float, required=True, help="Exponent epsilon")
    sweep_parser.add_argument("--t-samples", type=int, default=64, help="Number of parameters drawn from B")
    sweep_parser.add_argument("--seed", type=int, default=0, help="Seed for the parameter samples")
    sweep_parser.add_argument("--bound-form", choices=["theorem", "proof"], default="theorem", help="Operative count bound")
    sweep_parser.add_argument("--a-emp", type=float, default=1.0, help="Exponent A of the removal budget")
    sweep_parser.add_argument("--realization", choices=["projection", "adjoint"], default="projection", help="Scalar map")
    sweep_parser.add_argument("--out", required=True, help="Output directory")

    # Moment command
    moment_parser = subparsers.add_parser("moment", help="Moment-curve concentration of the factor map image")
    moment_parser.add_argument("--cloud", required=True, help="Cloud file")
    moment_parser.add_argument("--family", help="FamilySpec JSON file (standard family if omitted)")
    moment_parser.add_argument("--t", type=float, nargs="+", required=True, help="Parameter of the factor map")
    moment_parser.add_argument("--delta", type=float, required=True, help="Window half-width")
    moment_parser.add_argument("--epsilon", type=float, required=True, help="Exponent epsilon")
    moment_parser.add_argument("--alpha", type=float, help="Exponent (defaults to the cloud's claim)")
    moment_parser.add_argument("--grid-size", type=int, default=33, help="Number of s values in [0, 2]")
    moment_parser.add_argument("--c-hat", type=float, help="Constant of the bound (measured if omitted)")

    # Lie-check command
    lie_parser = subparsers.add_parser("lie-check", help="Verify the SO(n,1) realization")
    lie_parser.add_argument("--ns", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8], help="Dimensions n")
    lie_parser.add_argument("--trials", type=int, default=1000, help="Random trials per n")
    lie_parser.add_argument("--seed", type=int, default=0, help="Random seed")

    # Dims command
    dims_parser = subparsers.add_parser("dims", help="Box-counting dimensions of projections")
    dims_parser.add_argument("--cloud", required=True, help="Cloud file")
    dims_parser.add_argument("--family", help="FamilySpec JSON file (standard family if omitted)")
    dims_parser.add_argument("--t-samples", type=int, default=64, help="Number of parameters drawn from B")
    dims_parser.add_argument("--seed", type=int, default=0, help="Seed for the parameter samples")
    dims_parser.add_argument("--t0", type=float, nargs="+", help="Reference parameter for distances")
    dims_parser.add_argument("--fit-range", type=float, nargs=2, metavar=("LO", "HI"), help="Scales of the fit")
    dims_parser.add_argument("--out", required=True, help="Output JSON file")

    # Plotdata command
    plot_parser = subparsers.add_parser("plotdata", help="Flatten reports into CSV series")
    plot_parser.add_argument("paths", nargs="*", help="Report files or run directories")
    plot_parser.add_argument("--out", help="Output CSV (stdout if omitted)")

    # Replicate-acceptance command
    acceptance_parser = subparsers.add_parser("replicate-acceptance", help="Run the replication suite")
    acceptance_parser.add_argument("--scale", choices=["quick", "full"], default="full", help="Sample sizes")
    acceptance_parser.add_argument("--seed", type=int, default=0, help="Random seed")
    acceptance_parser.add_argument("--only", nargs="+", help="Names of the checks to run")

    # Run command
    run_parser = subparsers.add_parser("run", help="Run an experiment config")
    run_parser.add_argument("config", help="ExperimentConfig JSON file")
    run_parser.add_argument("--output-root", help="Root directory for runs (default RPROJ_OUTPUT_ROOT)")

    return parser.parse_args(argv)


def print_environment_status(settings: Settings) -> None:
    """Print environment variable setup status in a user-friendly way"""
    print("\nEnvironment Variables Setup:")
    print("=" * 60)
    for var, value, default in [
        ("RPROJ_OUTPUT_ROOT", settings.output_root, "runs"),
        ("RPROJ_WORKERS", settings.workers, "number of CPUs"),
        ("RPROJ_LOG_LEVEL", settings.log_level, "INFO"),
    ]:
        if os.getenv(var):
            print(f"✅ {var}: {value}")
        else:
            print(f"❌ {var}: Not set (using {value}, default {default})")

    print("\nHow to set up environment variables:")
    print("-" * 60)
    print("Option 1: Create a .env file in the current directory:")
    print("  RPROJ_OUTPUT_ROOT=runs")
    print("  RPROJ_WORKERS=4")
    print("\nOption 2: Set environment variables directly:")
    print("  export RPROJ_OUTPUT_ROOT=runs")
    print("  export RPROJ_LOG_LEVEL=DEBUG")
    print("=" * 60)


def _family(path: Optional[str], n: int) -> ProjectionFamily:
    if not path:
        return ProjectionFamily.standard(n)
    spec = FamilySpec.model_validate_json(Path(path).read_text())
    return ProjectionFamily.from_spec(spec, n).require_valid()


def _generator_spec(args: argparse.Namespace) -> GeneratorSpec:
    if args.spec:
        return GeneratorSpec.model_validate_json(Path(args.spec).read_text())
    if not args.kind:
        raise ValueError("generate needs --kind or --spec")
    return GeneratorSpec(
        kind=args.kind,
        n=args.n,
        size=args.size,
        coordinates=args.coordinates,
        ratio=args.ratio,
        branches=args.branches,
        level=args.level,
        target_alpha=args.target_alpha,
        t0=args.t0,
        c=args.c,
        k0=args.k0,
    )


def _dump(model, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n")


def run_command(args: argparse.Namespace, settings: Settings) -> int:
    """Dispatch one subcommand; returns the process exit code."""
    if args.command == "generate":
        cloud = generate(_generator_spec(args), seed=args.seed)
        save_cloud(cloud, args.out)
        print(json.dumps({"path": args.out, "N": cloud.size, "n": cloud.n, "delta0": cloud.delta0,
                          "alpha": cloud.claimed_alpha, "C": cloud.claimed_C}))
        return 0

    if args.command == "verify-regularity":
        report = verify_regularity(load_cloud(args.cloud), alpha=args.alpha, seed=args.seed)
        print(report.model_dump_json(indent=2))
        return 0 if report.passed else 1

    if args.command == "energy":
        cloud = load_cloud(args.cloud)
        fam = _family(args.family, cloud.n)
        params = TruncatedEnergyParams(alpha=args.alpha or cloud.claimed_alpha, delta0=cloud.delta0)
        ts = sample_annulus(fam.m, args.t_samples, seed=args.seed)
        selection = select_good_sets(cloud, fam, params, args.epsilon, ts, workers=settings.workers)
        out = Path(args.out)
        for profile in selection.profiles:
            write_energy_profile(profile, out / "energy" / f"profile_{profile.t_index:04d}.csv")
        _dump(selection.model_copy(update={"profiles": []}), out / "good_sets.json")
        print(f"Kept {len(selection.good_t_indices)}/{args.t_samples} parameters, C'={selection.c_prime:.6g}")
        return 0 if selection.rejected_t_fraction <= selection.chebyshev_bound else 1

    if args.command == "sweep":
        cloud = load_cloud(args.cloud)
        fam = _family(args.family, cloud.n)
        ts = sample_annulus(fam.m, args.t_samples, seed=args.seed)
        regularity = verify_regularity(cloud, seed=args.seed).worst_ratio
        for delta in args.delta:
            report = finitary_check(
                cloud, fam, delta, args.epsilon, ts,
                bound_form=args.bound_form, a_emp=args.a_emp, regularity=regularity,
                realization=args.realization, workers=settings.workers, seed=args.seed,
            )
            _dump(report, Path(args.out) / f"sweep_{round(-math.log2(delta)):02d}.json")
            print(f"delta={delta:.6g}: exceptional fraction {report.exceptional_fraction:.4f}")
        return 0

    if args.command == "moment":
        cloud = load_cloud(args.cloud)
        fam = _family(args.family, cloud.n)
        triples = factor_map(fam, args.t, cloud.points)
        grid = [2.0 * i / max(1, args.grid_size - 1) for i in range(args.grid_size)]
        report = moment_curve_concentration(
            triples, args.delta, args.epsilon, grid,
            alpha=args.alpha or cloud.claimed_alpha, c_hat=args.c_hat, workers=settings.workers,
        )
        print(report.model_dump_json(indent=2, exclude={"reports"}))
        return 0

    if args.command == "lie-check":
        table = lie_verification_table(ns=args.ns, trials=args.trials, seed=args.seed)
        print(table.to_string(index=False))
        return 0 if bool(table["passed"].all()) else 1

    if args.command == "dims":
        cloud = load_cloud(args.cloud)
        fam = _family(args.family, cloud.n)
        ts = sample_annulus(fam.m, args.t_samples, seed=args.seed)
        report = projected_dimensions(cloud, fam, ts, fit_range=args.fit_range, t0=args.t0, workers=settings.workers)
        _dump(report, Path(args.out))
        print(f"Median box dimension: {report.median_slope:.4f}")
        return 0

    if args.command == "plotdata":
        frame = plotdata(args.paths)
        if args.out:
            frame.to_csv(args.out, index=False, float_format="%.17g")
        else:
            print(frame.to_csv(index=False, float_format="%.17g"), end="")
        return 0

    if args.command == "replicate-acceptance":
        results = replicate_acceptance(scale=args.scale, seed=args.seed, only=args.only)
        print(f"{'Check':<24} {'Result':<8} {'Seconds':>8}  Detail")
        print("-" * 80)
        for r in results:
            print(f"{r.name:<24} {'PASS' if r.passed else 'FAIL':<8} {r.seconds:>8.1f}  {r.detail}")
        return 0 if all(r.passed for r in results) else 1

    if args.command == "run":
        config = load_config(args.config)
        manifest = ExperimentRunner(config, output_root=args.output_root, settings=settings).run()
        print(f"Run directory: {manifest.run_dir}")
        for name, passed in manifest.checks.items():
            print(f"  {name:<12} {'PASS' if passed else 'FAIL'}")
        return 0 if manifest.passed else 1

    raise ValueError(f"Unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI"""
    settings = get_settings()

    logging.basicConfig(level=getattr(logging, settings.log_level, logging.INFO), format=LOG_FORMAT)

    args = parse_args(argv)

    # If --check-env flag is provided, print status and exit
    if getattr(args, "check_env", False):
        print_environment_status(settings)
        return 0

    # Handle no command
    if not getattr(args, "command", None):
        print("Please specify a command. Use --help for more information.")
        return 1

    try:
        return run_command(args, settings)
    except (RestrictedProjError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
