# 01_00_specenv-cli.py
#
# Launcher for the specenv command line when the package is not installed
# as a console script. Example:
#   python scripts/01_00_specenv-cli.py -c config/specenv_config.json verify --suite norms

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from specenv.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
