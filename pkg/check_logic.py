import argparse

from natlogic.commands import SUITES, add_common_arguments, cmd_check, configure_logging, emit


def main():
    parser = argparse.ArgumentParser(description="Run the property suites on a logic")
    parser.add_argument("logic", type=str, help="Presentation file or builtin:<name>")
    parser.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    parser.add_argument("--to-vars", type=str, help="Variables of the extension, default adds one", default=None)
    parser.add_argument("--arity", type=str, help="Arity bound for plus in the chain, n or omega", default=None)
    parser.add_argument(
        "--premises",
        type=str,
        action="append",
        help="Premise set for the chain outside constants-only signatures, repeatable",
        default=None,
    )
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_check(args.logic, args.suite, args.to_vars, args.arity, args.premises, strict=args.strict), args)


if __name__ == "__main__":
    main()
