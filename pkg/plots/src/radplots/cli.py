"""CLI: ``plots <kind> --in <dir> --out fig.png``.

Input-file conventions inside the --in directory:

* ``regimes``        summary_*.json (one panel per file)
* ``dichotomy``      dichotomy.json
* ``bounds-scatter`` *.csv sweep files
* ``concentration``  concentration_*.json

Exit codes: 0 success, 1 usage error, 2 missing/mismatched data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import figures, schema

KINDS = ("regimes", "dichotomy", "bounds-scatter", "concentration")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots",
                                     description="Render figures from experiment outputs.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory with the experiment outputs")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def _stem_label(path: Path, prefix: str) -> str:
    stem = path.stem
    return stem[len(prefix):] if stem.startswith(prefix) else stem


def render(kind: str, in_dir: Path, out: Path) -> Path:
    if kind == "regimes":
        files = sorted(in_dir.glob("summary_*.json")) or sorted(in_dir.glob("*summary*.json"))
        if not files:
            raise FileNotFoundError(f"no summary_*.json files in {in_dir}")
        summaries = [(_stem_label(p, "summary_"), schema.load_summary_json(p))
                     for p in files]
        return figures.render_regimes(summaries, out)
    if kind == "dichotomy":
        path = in_dir / "dichotomy.json"
        if not path.exists():
            raise FileNotFoundError(f"{path} not found")
        return figures.render_dichotomy(schema.load_dichotomy_json(path), out)
    if kind == "bounds-scatter":
        files = sorted(in_dir.glob("*.csv"))
        if not files:
            raise FileNotFoundError(f"no sweep .csv files in {in_dir}")
        sweeps = [(_stem_label(p, "sweep_"), schema.load_sweep_csv(p)) for p in files]
        return figures.render_bounds_scatter(sweeps, out)
    if kind == "concentration":
        files = sorted(in_dir.glob("concentration_*.json"))
        if not files:
            raise FileNotFoundError(f"no concentration_*.json files in {in_dir}")
        checks = []
        for p in files:
            checks.extend(schema.load_concentration_json(p))
        return figures.render_concentration(checks, out)
    raise ValueError(f"unknown kind {kind!r}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        path = render(args.kind, Path(args.in_dir), Path(args.out))
    except (FileNotFoundError, schema.SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
