"""Measurement-only convergence curves, one line per probe photon number."""

import sys

from ._cli import run


def main(argv=None) -> int:
    return run("fig2a", __doc__, argv)


if __name__ == "__main__":
    sys.exit(main())
