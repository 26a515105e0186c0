import logging
import sys

from .main import main as run_main


def main() -> None:
    """Main entry point"""
    try:
        sys.exit(run_main())
    except KeyboardInterrupt:
        logger = logging.getLogger("SYMKERNEL")
        logger.error("Interrupted")
        sys.exit(130)


if __name__ == "__main__":
    main()
