"""Application entry point.

Equivalent to `python -m presentation.cli.main`:

    python main.py simulate --out runs/point --timing point
"""

import sys

from presentation.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
