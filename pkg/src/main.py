import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from catalog import CASE_IDS, CaseCatalog, CaseResult, UnknownCaseError, format_table, reproduce, reproduce_all
from scenarios import ConfigError, ScenarioConfig, dump_report, run_scenario, write_csv_tables, write_report

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qgess',
        description='Payoffs, equilibrium certification and replicator probes for quantized games',
    )
    parser.add_argument('--verbose', action='store_true', help='log at DEBUG level')
    verbs = parser.add_subparsers(dest='verb', required=True)

    run = verbs.add_parser('run', help='run one scenario config and emit its JSON report')
    run.add_argument('config', help='path to a scenario config (JSON)')
    run.add_argument('--out', help='write the report here instead of stdout')
    run.add_argument('--csv', metavar='DIR', help='write trajectories and grid scans as CSV')

    rep = verbs.add_parser('reproduce', help='check a catalog case (or all) against stored expectations')
    rep.add_argument('case', help="catalog id or 'all'")
    rep.add_argument('--out', help='write the per-case results as JSON')
    rep.add_argument('--csv', metavar='DIR', help='write trajectories and grid scans as CSV')

    verbs.add_parser('list-cases', help='print catalog ids with the claim each covers')
    return parser


def write_github_outputs(results: List[CaseResult]) -> None:
    """Append reproduce outputs to the file named by GITHUB_OUTPUT, if set"""
    output_path = os.environ.get('GITHUB_OUTPUT')
    if not output_path:
        return
    failed = sum(r.failed_assertions for r in results)
    summary = [{'case': r.case_id, 'passed': r.passed, 'failed_assertions': r.failed_assertions,
                'discrepancies': len(r.discrepancies)} for r in results]
    try:
        with open(output_path, 'a') as f:
            f.write(f"cases_run={len(results)}\n")
            f.write(f"failed_assertions={failed}\n")
            f.write(f"all_passed={'true' if failed == 0 else 'false'}\n")
            f.write(f"summary<<EOF\n{json.dumps(summary, ensure_ascii=False)}\nEOF\n")
        logger.info("GitHub Action outputs written successfully")
    except OSError as e:
        raise IOError(f"Cannot write GitHub Action outputs to {output_path}: {e}")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = ScenarioConfig.from_file(args.config)
    tables = {} if args.csv else None
    report = run_scenario(cfg, tables)
    if args.out:
        write_report(report, args.out)
        logger.info(f"Report written to '{args.out}'")
    else:
        sys.stdout.write(dump_report(report))
    if args.csv:
        write_csv_tables(tables, args.csv)
    return 0


def cmd_reproduce(args: argparse.Namespace) -> int:
    catalog = CaseCatalog()
    tables = {} if args.csv else None
    if args.case == 'all':
        results = reproduce_all(catalog, tables)
    else:
        results = [reproduce(args.case, catalog, tables)]
    print(format_table(results))

    if args.out:
        try:
            with open(args.out, 'w', encoding='utf-8') as f:
                json.dump([r.to_dict() for r in results], f, indent=2, sort_keys=True)
                f.write('\n')
        except OSError as e:
            raise IOError(f"Cannot write results {args.out}: {e}")
    if args.csv:
        write_csv_tables(tables, args.csv)
    write_github_outputs(results)

    failed = sum(r.failed_assertions for r in results)
    if failed:
        logger.error(f"{failed} assertion(s) failed")
        return 1
    logger.info(f"All {len(results)} case(s) reproduced")
    return 0


def cmd_list_cases(args: argparse.Namespace) -> int:
    catalog = CaseCatalog()
    for case_id in CASE_IDS:
        print(f"{case_id:26} {catalog[case_id].claim}")
    return 0


COMMANDS = {'run': cmd_run, 'reproduce': cmd_reproduce, 'list-cases': cmd_list_cases}


def main(argv: Optional[List[str]] = None):
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    logger.debug(f"Starting with arguments: {vars(args)}")

    try:
        code = COMMANDS[args.verb](args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        sys.exit(1)
    except UnknownCaseError as e:
        logger.error(f"{e.args[0] if e.args else e}")
        sys.exit(1)
    except IOError as e:
        logger.error(f"I/O failure: {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        logger.warning("Operation cancelled by user")
        sys.exit(130)
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        sys.exit(1)
    sys.exit(code)


if __name__ == "__main__":
    main()
