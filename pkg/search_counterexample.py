import argparse

from natlogic.commands import add_common_arguments, cmd_search, configure_logging, emit
from natlogic.search import DEFAULT_BUDGET, DEFAULT_SEED, SEARCHES


def main():
    parser = argparse.ArgumentParser(description="Search small presentations for a counterexample")
    parser.add_argument("--property", choices=sorted(SEARCHES), required=True)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--budget", type=int, help="Candidates to examine", default=DEFAULT_BUDGET)
    parser.add_argument("--output", type=str, help="Witness file to write", default=None)
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_search(args.property, args.seed, args.budget, args.output, args.strict), args)


if __name__ == "__main__":
    main()
