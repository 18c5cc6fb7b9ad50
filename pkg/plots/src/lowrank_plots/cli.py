"""Command-line entry: `plots <kind> --in <dir> --out <file>`."""

from __future__ import annotations

import sys

import click

from .figures import FIGURE_KINDS, PlotSpec, render
from .io import InputError


@click.command()
@click.argument("kind", type=click.Choice(FIGURE_KINDS))
@click.option("--in", "input_dir", required=True, type=click.Path(exists=False))
@click.option("--out", "output_path", required=True, type=click.Path())
def main(kind: str, input_dir: str, output_path: str) -> None:
    """Render one figure from a run directory's CSV/JSON outputs."""
    try:
        info = render(PlotSpec(input_dir=input_dir, kind=kind, output_path=output_path))
    except InputError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {info['output']}")


if __name__ == "__main__":
    main()
