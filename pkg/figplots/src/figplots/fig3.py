"""Dual-axis sweep: balanced-error fidelity (left) and iteration counts (right)."""

import sys

from ._cli import run


def main(argv=None) -> int:
    return run("fig3", __doc__, argv)


if __name__ == "__main__":
    sys.exit(main())
