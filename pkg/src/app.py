"""Command-line entry point for weakgrid."""

from __future__ import annotations

import sys

from dotenv import load_dotenv

load_dotenv()

from weakgrid.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
