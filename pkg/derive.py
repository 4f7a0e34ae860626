import argparse

from natlogic.commands import add_common_arguments, cmd_derive, configure_logging, emit


def main():
    parser = argparse.ArgumentParser(description="Decide a derivability question by saturation")
    parser.add_argument("logic", type=str, help="Presentation file or builtin:<name>")
    parser.add_argument("--premises", type=str, help="Comma separated premises", default="")
    parser.add_argument("--goal", type=str, help="Goal formula", required=True)
    parser.add_argument("--bounds", type=str, help='Search bounds, e.g. "depth=2 iters=64"', default=None)
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_derive(args.logic, args.premises, args.goal, args.bounds, args.strict), args)


if __name__ == "__main__":
    main()
