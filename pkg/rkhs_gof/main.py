"""
RKHS-GOF command-line entry point.

Runs one subcommand (simulate, fit, cv, test, power, bench) and exits 0 on success,
1 on a failed run and 2 on a usage error.
"""

import logging
import sys
from typing import List, Optional

from rkhs_gof.cli.app import build_parser, config_from_args
from rkhs_gof.cli.commands import COMMAND_HANDLERS
from rkhs_gof.config import DEBUG, PROJECT_NAME, VERSION
from rkhs_gof.errors import InputError, RkhsGofError, UnknownScenarioError

logger = logging.getLogger("RKHS-GOF-Main")

EXIT_FAILURE = 1
EXIT_USAGE = 2


def _report(exc: BaseException) -> None:
    """One machine-parseable line on stderr."""
    message = str(exc).replace("\n", " ")
    print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parses ``argv`` and runs the selected command.

    Returns:
        int: Process exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", False) or DEBUG
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        config = config_from_args(args)
    except (InputError, TypeError) as exc:
        _report(exc)
        return EXIT_USAGE
    except OSError as exc:
        _report(exc)
        return EXIT_FAILURE
    except Exception as exc:
        logger.debug("Unreadable configuration", exc_info=True)
        _report(exc)
        return EXIT_USAGE

    logger.info(f"{PROJECT_NAME} v{VERSION}: '{config.command}' (seed {config.seed})")
    try:
        paths = COMMAND_HANDLERS[config.command](config)
    except UnknownScenarioError as exc:
        logger.error(f"Usage error: {exc}")
        _report(exc)
        return EXIT_USAGE
    except RkhsGofError as exc:
        logger.error(f"Run failed: {exc}")
        _report(exc)
        return EXIT_FAILURE
    except OSError as exc:
        logger.error(f"I/O failure: {exc}")
        _report(exc)
        return EXIT_FAILURE
    except Exception as exc:
        logger.error(f"Unexpected failure: {exc}")
        logger.debug("Traceback", exc_info=True)
        _report(exc)
        return EXIT_FAILURE

    for path in paths:
        print(path)
    logger.info(f"'{config.command}' finished, {len(paths)} files written")
    return 0


if __name__ == "__main__":
    sys.exit(main())
