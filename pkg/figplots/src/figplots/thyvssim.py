"""Four-curve overlay of the simulated ensemble against the analytic model."""

import sys

from ._cli import run


def main(argv=None) -> int:
    return run("thyvssim", __doc__, argv)


if __name__ == "__main__":
    sys.exit(main())
