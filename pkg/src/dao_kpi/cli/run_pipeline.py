import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dao_kpi.cli import stages
from dao_kpi.cli.config import ProjectConfig, load_config
from dao_kpi.errors import ArgumentError, ConfigError, DaoKpiError, SpecError
from dao_kpi.report.emit import FORMATS, parse_formats
from dao_kpi.synth.project import random_specs, read_specs, write_synth_project


EXIT_OK, EXIT_STAGE, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 3
PIPELINE = ('fetch', 'decode', 'build', 'kpi', 'stats', 'report')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dao-kpi', description='Collect DAO governance data from EVM chains, '
                                     'compute KPIs, test them statistically and report the results.')
    commands = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, required=True, help='Project config (JSON).')
    common.add_argument('--output', type=Path, help='Output directory; overrides output_dir of the config.')
    common.add_argument('--snapshot-block', type=int, help='Cutoff block for every chain of the config.')
    common.add_argument('--alpha', type=float, help='Significance level of the statistical tests.')
    common.add_argument('--formats', default=','.join(FORMATS), help='Comma-separated report formats: csv, json, svg.')
    common.add_argument('--radar-daos', help='Comma-separated dao_ids for the radar chart.')
    common.add_argument('--verbose', action='store_true', help='Debug logging.')
    for name in PIPELINE + ('all',):
        commands.add_parser(name, parents=[common], help=f'Run the {name} stage.' if name != 'all'
                            else 'Run every stage in order.')

    synth = commands.add_parser('synth', help='Write a synthetic project with recorded fixtures and ground truth.')
    synth.add_argument('--output', type=Path, required=True, help='Project directory to write.')
    synth.add_argument('--seed', type=int, default=0, help='Seed of the generated specs.')
    synth.add_argument('--dao-count', type=int, default=10, help='Number of synthetic DAOs.')
    synth.add_argument('--spec', type=Path, help='JSON list of synth specs; replaces --seed/--dao-count.')
    synth.add_argument('--alpha', type=float, help='Significance level written into the project config.')
    synth.add_argument('--verbose', action='store_true', help='Debug logging.')
    return parser


def run_stage(name: str, config: ProjectConfig, output_dir: Path, formats: List[str],
              radar_daos: Optional[List[str]]) -> None:
    logging.info(f'Stage {name}')
    if name == 'report':
        stages.run_report(config, output_dir, formats, radar_daos)
    else:
        getattr(stages, f'run_{name}')(config, output_dir)


def run(argv: Optional[List[str]] = None) -> int:
    ''' Command-line entry point; returns the process exit code. '''
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger('urllib3').setLevel(logging.WARNING)
    logging.getLogger('matplotlib').setLevel(logging.WARNING)

    try:
        if args.command == 'synth':
            specs = read_specs(args.spec) if args.spec else random_specs(args.seed, args.dao_count)
            path = write_synth_project(specs, args.output, alpha=args.alpha)
            logging.info(f'Synthetic project written to {path}')
            return EXIT_OK

        formats = parse_formats(args.formats.split(','))
        radar_daos = [d.strip() for d in args.radar_daos.split(',') if d.strip()] if args.radar_daos else None
        config = load_config(args.config, snapshot_block=args.snapshot_block, alpha=args.alpha,
                             output_dir=args.output.resolve() if args.output else None)
        output_dir = config.path(config.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        for name in (PIPELINE if args.command == 'all' else (args.command,)):
            run_stage(name, config, output_dir, formats, radar_daos)
    except (ConfigError, SpecError) as e:
        logging.error(str(e))
        return EXIT_CONFIG
    except ArgumentError as e:
        logging.error(str(e))
        return EXIT_USAGE
    except DaoKpiError as e:
        logging.error(str(e))
        return EXIT_STAGE
    except OSError as e:
        logging.error(f'I/O failure: {e}')
        return EXIT_STAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
