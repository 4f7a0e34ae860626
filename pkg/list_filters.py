import argparse

from natlogic.commands import add_common_arguments, cmd_filters, configure_logging, emit


def main():
    parser = argparse.ArgumentParser(description="List the filters of a logic on finite structures")
    parser.add_argument("structures", type=str, help="Structure file")
    parser.add_argument("logic", type=str, help="Presentation file or builtin:<name>")
    parser.add_argument("--generate", type=str, help="Space separated elements to generate a filter from", default=None)
    parser.add_argument("--structure", type=str, help="Structure for --generate, default the first", default=None)
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_filters(args.structures, args.logic, args.generate, args.structure, args.strict), args)


if __name__ == "__main__":
    main()
