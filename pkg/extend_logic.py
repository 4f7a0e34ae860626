import argparse

from natlogic.commands import add_common_arguments, cmd_extend, configure_logging, emit


def main():
    parser = argparse.ArgumentParser(description="Ask a question in an extension of a logic to more variables")
    parser.add_argument("logic", type=str, help="Presentation file or builtin:<name>")
    parser.add_argument("--to-vars", type=str, help="Variables of the extension, default adds one", default=None)
    parser.add_argument("--method", choices=["ls", "ss", "minus", "plus"], default="minus")
    parser.add_argument("--arity", type=str, help="Arity bound n or omega", default=None)
    parser.add_argument("--premises", type=str, help="Comma separated premises", default="")
    parser.add_argument("--goal", type=str, help="Goal formula", required=True)
    parser.add_argument("--bounds", type=str, help='Search bounds, e.g. "depth=2 iters=64"', default=None)
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    report = cmd_extend(
        args.logic, args.to_vars, args.method, args.arity, args.premises, args.goal, args.bounds, args.strict
    )
    emit(report, args)


if __name__ == "__main__":
    main()
