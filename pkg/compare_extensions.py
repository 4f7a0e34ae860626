import argparse

from natlogic.commands import add_common_arguments, cmd_compare, configure_logging, emit

METHODS = ["ls", "ss", "minus", "plus"]


def main():
    parser = argparse.ArgumentParser(description="Check that one extension is included in another")
    parser.add_argument("logic", type=str, help="Presentation file or builtin:<name>")
    parser.add_argument("first", choices=METHODS)
    parser.add_argument("second", choices=METHODS)
    parser.add_argument("--to-vars", type=str, help="Variables of the extension, default adds one", default=None)
    parser.add_argument("--arity", type=str, help="Arity bound for plus, n or omega", default=None)
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_compare(args.logic, args.first, args.second, args.to_vars, args.arity, args.strict), args)


if __name__ == "__main__":
    main()
