"""Heat map of the window-averaged target fidelity over the decay sweep grid."""

import sys

from ._cli import run


def main(argv=None) -> int:
    return run("fbfid", __doc__, argv)


if __name__ == "__main__":
    sys.exit(main())
