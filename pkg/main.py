"""
Main entry point for balobs.

    python3 main.py <command> [options]

Logging goes to stderr; reports go to stdout.
"""

import sys

from utils.logger import get_logger, setup_logging

logger = get_logger(__name__)


def main() -> int:
    """Set up logging from the environment and hand over to the CLI."""
    setup_logging()
    from interfaces.cli import main as cli_main
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(1)
