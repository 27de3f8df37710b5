# main.py
"""kspectral entry point: python main.py <subcommand> ..."""

from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parent / "kspectral"))

from cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
