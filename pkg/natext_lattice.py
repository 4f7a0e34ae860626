import argparse

from natlogic.commands import add_common_arguments, cmd_natext_lattice, configure_logging, emit


def main():
    parser = argparse.ArgumentParser(description="Enumerate the natural extensions of a logic")
    parser.add_argument("logic", type=str, help="Presentation file or builtin:<name>")
    parser.add_argument("--to-vars", type=str, help="Variables of the extension, default adds one", default=None)
    parser.add_argument("--emit", choices=["json", "dot"], default="json")
    parser.add_argument("--output", type=str, help="Write the diagram or tables here", default=None)
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_natext_lattice(args.logic, args.to_vars, args.emit, args.output, args.strict), args)


if __name__ == "__main__":
    main()
