"""System graph modelling toolchain.

Models are loaded into opaque ``SystemGraph`` handles; every other function
returns plain Python values.
"""

import sys

from ._sysgraph import (
    RECORD_SCHEMA_VERSION,
    SKELETON_SCHEMA_VERSION,
    ModelError,
    SystemGraph,
    TransitionSystem,
    __version__,
    check_property,
    classify_next_move,
    cli,
    diagnostics,
    divergences,
    elaborate,
    embed,
    graph_from_skeleton,
    is_module,
    load,
    parse,
    promela,
    refines,
    run,
    skeleton,
)

__all__ = [
    "RECORD_SCHEMA_VERSION",
    "SKELETON_SCHEMA_VERSION",
    "ModelError",
    "SystemGraph",
    "TransitionSystem",
    "__version__",
    "check_property",
    "classify_next_move",
    "cli",
    "diagnostics",
    "divergences",
    "elaborate",
    "embed",
    "graph_from_skeleton",
    "is_module",
    "load",
    "main",
    "parse",
    "promela",
    "refines",
    "run",
    "skeleton",
]


def main(argv=None):
    """Console entry point equivalent to the ``sysgraph`` binary."""
    args = sys.argv[1:] if argv is None else list(argv)
    stdin = "" if sys.stdin is None or sys.stdin.isatty() else sys.stdin.read()
    code, out, err = cli(args, stdin)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
