"""Entry point: render figures from JSON figure specifications."""
from __future__ import annotations

import argparse
import sys

from .render import FigureSpecError, load_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rydcz-plots",
        description="Render simulation output files into publication-style figures.",
    )
    parser.add_argument("spec", nargs="+", help="JSON figure specification file(s)")
    args = parser.parse_args(argv)
    for path in args.spec:
        try:
            spec = load_spec(path)
            written = render(spec)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except FigureSpecError as exc:
            print(f"spec error ({path}): {exc}", file=sys.stderr)
            return 1
        for out in written:
            print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
