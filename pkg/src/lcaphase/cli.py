"""Command line entry point: ``lcaphase {retrieve,verify,lln,demo}``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, load_config
from .groups import GroupError
from .harness import cmd_demo, cmd_lln, cmd_retrieve, cmd_verify, to_json, write_outputs


def parse_seeds(text: str) -> list[int]:
    """``"0:100"`` (half-open range) or ``"1,5,9"``."""
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return list(range(int(a), int(b)))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcaphase", description="STFT phase retrieval on finite and "
                                "discrete abelian groups")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True,
                            help="TOML config path, or builtin:<name> for a bundled one")
            sp.add_argument("--seeds", type=parse_seeds, help="override run.seeds, e.g. 0:100 or 1,2,3")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for seed sweeps")
        sp.add_argument("--out-dir", default=None, help="write report.json and CSV tables here")

    r = sub.add_parser("retrieve", help="end-to-end retrieval per seed")
    common(r)
    r.add_argument("--dump-matrices", action="store_true",
                   help="write per-stage matrices as CSV under <out-dir>/matrices")
    v = sub.add_parser("verify", help="uniqueness or completeness certificates")
    common(v)
    v.add_argument("what", choices=["uniqueness", "completeness"])
    ll = sub.add_parser("lln", help="averaging diagnostics for the random window coefficients")
    common(ll)
    d = sub.add_parser("demo", help="bundled Z/4 x Z/9 example, 10 seeds")
    common(d, config=False)
    return p


def _summary_line(rec) -> str:
    return json.dumps({"command": rec.command, **rec.aggregate}, default=str, sort_keys=True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            rec = cmd_demo(workers=args.workers)
        else:
            cfg = load_config(args.config)
            if args.seeds:
                cfg = cfg.with_seeds(args.seeds)
            if args.command == "retrieve":
                dump = None
                if args.dump_matrices:
                    if not args.out_dir:
                        raise ConfigError("--dump-matrices", "requires --out-dir")
                    dump = f"{args.out_dir}/matrices"
                rec = cmd_retrieve(cfg, workers=args.workers, dump_dir=dump)
            elif args.command == "verify":
                rec = cmd_verify(cfg, args.what, workers=args.workers)
            else:
                rec = cmd_lln(cfg)
    except ConfigError as e:
        sys.stderr.write(to_json(e.record()))
        return 2
    except (GroupError, ValueError) as e:
        sys.stderr.write(to_json({"error": type(e).__name__, "message": str(e)}))
        return 1
    if args.out_dir:
        write_outputs(rec, args.out_dir)
    print(_summary_line(rec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
