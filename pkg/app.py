"""
HetNet Backhaul Optimizer - Application Core
"""
import argparse
import json
import logging
import sys

from core import (
    APP_NAME, APP_VERSION, ALGORITHMS, ExperimentRepository, ExperimentSpec, ScenarioRepository,
    get_success_message
)
from services import run_experiment, run_sweep
from utils import print_header, print_section, display_summary_table, display_sweep_table, display_files

logger = logging.getLogger(__name__)

SCENARIO_ALIASES = {'unified': 'unified', 'percell': 'per_cell', 'per_cell': 'per_cell'}
USAGE_EXIT_CODE = 2


class JsonErrorParser(argparse.ArgumentParser):
    """Argument parser whose usage errors end with the machine-readable error line."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({'error': 'UsageError', 'message': message}), file=sys.stderr)
        self.exit(USAGE_EXIT_CODE)


def count_list(text: str):
    try:
        values = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = JsonErrorParser(
        prog='hetnet-wbba',
        description="Monte-Carlo evaluation of joint cell association and wireless backhaul bandwidth allocation.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--config', help="JSON experiment spec; flags below override its values")
    parser.add_argument('--scenario-file', help="JSON network scenario replacing the one in the experiment spec")
    parser.add_argument('--scenario', choices=sorted(SCENARIO_ALIASES), help="WBBA scenario")
    parser.add_argument('--algos', help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    parser.add_argument('--trials', type=int, help="number of Monte-Carlo trials")
    parser.add_argument('--seed', type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument('--ns', type=int, help="number of small cells N_S")
    parser.add_argument('--nu', type=int, help="number of MTs N_U")
    parser.add_argument('--ns-sweep', type=count_list, help="sweep N_S over these values, e.g. 5,10,15")
    parser.add_argument('--nu-sweep', type=count_list, help="sweep N_U over these values, e.g. 25,50,100,150,200")
    parser.add_argument('--out', help="output directory")
    parser.add_argument('--workers', type=int, help="worker processes")
    parser.add_argument('--cre-bias', type=float, help="CRE bias in dB")
    parser.add_argument('--bits-per-second', action='store_true', help="report rates in bit/s instead of bit/s/Hz")
    parser.add_argument('--dump-links', action='store_true', help="write the link budget and node positions of trial 0")
    parser.add_argument('--diagnostics', action='store_true', help="write per-trial solver diagnostics")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    verbosity.add_argument('-q', '--quiet', action='store_true', help="warnings only")
    parser.add_argument('--version', action='version', version=f"{APP_NAME} {APP_VERSION}")
    return parser


class HetNetExperimentApp:
    """Command-line coordinator: spec assembly, experiment run, report."""

    def __init__(self, argv=None):
        self.args = build_parser().parse_args(argv)
        self.experiment_repo = ExperimentRepository()
        self.scenario_repo = ScenarioRepository()

    def configure_logging(self):
        level = logging.DEBUG if self.args.verbose else logging.WARNING if self.args.quiet else logging.INFO
        logging.basicConfig(stream=sys.stderr, level=level,
                            format='%(asctime)s - %(levelname)s - %(name)s - %(message)s')

    def build_spec(self) -> ExperimentSpec:
        args = self.args
        spec = self.experiment_repo.load(args.config) if args.config else ExperimentSpec()
        data = spec.to_dict()
        overrides = {
            'scenario_kind': SCENARIO_ALIASES.get(args.scenario),
            'algorithms': [a.strip() for a in args.algos.split(',') if a.strip()] if args.algos else None,
            'n_trials': args.trials,
            'master_seed': args.seed,
            'output_dir': args.out,
            'n_workers': args.workers,
            'cre_bias_db': args.cre_bias,
            'ns_sweep': args.ns_sweep,
            'nu_sweep': args.nu_sweep,
        }
        data.update({k: v for k, v in overrides.items() if v is not None})
        if args.scenario_file:
            data['scenario'] = self.scenario_repo.load(args.scenario_file).to_dict()
        if args.ns is not None:
            data['scenario']['n_small_cells'] = args.ns
        if args.nu is not None:
            data['scenario']['n_mts'] = args.nu
        return ExperimentSpec.from_dict(data)

    def run(self) -> int:
        self.configure_logging()
        spec = self.build_spec()
        args = self.args

        if not args.quiet:
            print_header(f"📡 {APP_NAME.upper()} 📡")
            print(f"Scenario: {spec.scenario_kind} WBBA, N_S={spec.scenario.n_small_cells}, "
                  f"N_U={spec.scenario.n_mts}, {spec.n_trials} trials, seed {spec.master_seed}")

        if spec.is_sweep:
            return self.run_sweep(spec)

        outcome = run_experiment(spec, write=True, bits_per_second=args.bits_per_second,
                                 dump_links=args.dump_links, diagnostics=args.diagnostics)

        if not args.quiet:
            print_section("Summary")
            display_summary_table(outcome.summary)
            print(f"\n{get_success_message('experiment_done', trials=spec.n_trials, algorithms=len(spec.algorithms))}")
            print(get_success_message('results_written', output_dir=spec.output_dir))
            display_files(outcome.files)
        return 0

    def run_sweep(self, spec: ExperimentSpec) -> int:
        args = self.args
        if args.diagnostics:
            logger.warning("--diagnostics is ignored for sweeps")
        sweep = run_sweep(spec, write=True, bits_per_second=args.bits_per_second, dump_links=args.dump_links)

        if not args.quiet:
            print_section("Sweep")
            display_sweep_table(sweep.frame)
            print(f"\n{get_success_message('sweep_done', points=len(sweep.points), trials=spec.n_trials)}")
            print(get_success_message('results_written', output_dir=spec.output_dir))
            display_files(sweep.files)
        return 0
