"""Command-line entry point.

    qaction {flow,instanton,poincare,full} --config CONFIG [--out DIR] [--seed N]

Exit code 0 on success; on failure a machine-readable error JSON goes to
stderr and the exit code is nonzero. The subcommand overrides the config's
experiment tag; --out and the QACTION_OUT environment variable override the
configured output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .errors import QuantumActionError
from .pipeline import parse_config, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaction",
        description="renormalized-action experiments: parameter flows, "
                    "instantons, and Poincare sections")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, doc in [
        ("flow", "fit the action parameters over the configured durations"),
        ("instanton", "parameter flow plus classical and quantum kink profiles"),
        ("poincare", "sections and Lyapunov classification, classical vs quantum"),
        ("full", "every stage applicable to the configured action"),
    ]:
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--out", default=None, help="output directory (overrides config)")
        cmd.add_argument("--seed", type=int, default=None, help="seed override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        config = dataclasses.replace(config, experiment=args.experiment)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        out_dir = args.out or os.environ.get("QACTION_OUT") or config.output_dir
        manifest = run_pipeline(config, out_dir=out_dir)
    except QuantumActionError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1
    except Exception as exc:  # noqa: BLE001 - uniform machine-readable failure
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1
    print(json.dumps({"ok": True, "files": len(manifest.files),
                      "output_dir": str(out_dir)}))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
