"""Run the ``convergence`` campaign; extra arguments are passed to the CLI."""

import sys

from nslab.cli import main

if __name__ == "__main__":
    sys.exit(main(["convergence", *sys.argv[1:]]))
