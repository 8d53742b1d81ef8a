"""Allow running as ``python -m liouville_biortho``."""

from .cli import cli

cli()
