"""Interface de linha de comando ``cnsk-verify``.

Códigos de saída: 0 quando todas as verificações passam, 1 quando alguma
verificação falha e 2 para erros de configuração ou de execução.
"""
import argparse
import logging
import os
import sys

from . import __version__
from . import adapters
from . import exceptions
from .config import load_config, setup_logging
from .services import get_handlers

LOGGER = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="cnsk-verify",
        description="Spectral verification experiments for the linearized "
        "compressible Navier-Stokes-Korteweg system.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    run = subparsers.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", help="path to the INI configuration")
    validate = subparsers.add_parser("validate", help="validate a config file without running it")
    validate.add_argument("config", help="path to the INI configuration")
    subparsers.add_parser("list-experiments", help="list the available experiments")
    return parser.parse_args(argv)


def make_session_factory(config):
    directory = os.path.join(config.output["directory"], config.id)
    filesystem = adapters.FileSystem(directory, overwrite=config.output["overwrite"])
    return adapters.Session.partial(filesystem)


def _print_errors(error: exceptions.ConfigurationError) -> None:
    print("invalid configuration:", file=sys.stderr)
    for key in sorted(error.errors):
        print("  %s: %s" % (key or "<file>", error.errors[key]), file=sys.stderr)


def run(path: str) -> int:
    try:
        config = load_config(path)
    except exceptions.ConfigurationError as exc:
        _print_errors(exc)
        return EXIT_ERROR
    setup_logging(path)
    handlers = get_handlers(make_session_factory(config))
    try:
        report = handlers["run_experiment"](config)
    except exceptions.AlreadyExists as exc:
        print("cannot write results: %s" % exc, file=sys.stderr)
        return EXIT_ERROR
    for line in report.lines():
        print(line)
    if report.failed:
        return EXIT_ERROR
    return EXIT_PASSED if report.passed else EXIT_CHECK_FAILED


def validate(path: str) -> int:
    try:
        config = load_config(path)
    except exceptions.ConfigurationError as exc:
        _print_errors(exc)
        return EXIT_ERROR
    print("configuration is valid: experiment %s, run %s" % (config.experiment, config.id))
    return EXIT_PASSED


def list_experiments() -> int:
    handlers = get_handlers(lambda: None)
    for name, description in handlers["list_experiments"]():
        print("%-16s %s" % (name, description))
    return EXIT_PASSED


def main(argv=None) -> int:
    args = parse_args(argv)
    if args.command == "run":
        return run(args.config)
    if args.command == "validate":
        return validate(args.config)
    return list_experiments()


if __name__ == "__main__":
    sys.exit(main())
