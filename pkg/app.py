"""
Entry point without installing the package: `uv run python app.py run scenarios/flat_crawl.yaml`
"""

import sys

from planner.cli import main

if __name__ == "__main__":
    sys.exit(main())
