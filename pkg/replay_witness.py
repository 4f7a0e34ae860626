import argparse

from natlogic.commands import add_common_arguments, cmd_replay, configure_logging, emit


def main():
    parser = argparse.ArgumentParser(description="Re-check a witness file")
    parser.add_argument("witness", type=str, help="Witness file")
    add_common_arguments(parser)

    args = parser.parse_args()
    configure_logging(args.verbose)
    emit(cmd_replay(args.witness, args.strict), args)


if __name__ == "__main__":
    main()
