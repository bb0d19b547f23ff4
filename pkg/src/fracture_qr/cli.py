"""Command-line front end: ``fracture-qr <scenario> --config <path>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, FractureQRError, NotConverged
from .scenarios import SCENARIOS, config_from_dict, default_config, load_config, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

log = logging.getLogger("fracture_qr")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracture-qr", description="Phase-field fracture scenarios.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", type=Path, help="JSON configuration (defaults to the built-in one)")
    p.add_argument("--output", type=Path, help="output directory (overrides the configuration)")
    p.add_argument("--mesh", type=Path, help="ASCII mesh file (overrides the configuration)")
    p.add_argument("--seed", type=int, help="seed for randomized inner restarts")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            config = load_config(args.config)
        else:
            config = config_from_dict(default_config(args.scenario))
        if config.scenario != args.scenario:
            raise ConfigError(f"configuration is for {config.scenario!r}, not {args.scenario!r}")
        if args.output is not None:
            config.output_dir = args.output
        if args.mesh is not None:
            if not args.mesh.is_file():
                raise ConfigError(f"mesh file {args.mesh} does not exist")
            config.mesh_spec = {"path": str(args.mesh)}
        if args.seed is not None:
            config.seed = args.seed
        run_scenario(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotConverged as exc:
        where = f" at load step {exc.step}" if exc.step is not None else ""
        print(f"solver did not converge{where}: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except FractureQRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote results to {config.output_dir}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
