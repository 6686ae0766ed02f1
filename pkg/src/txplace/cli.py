"""Command-line entry point: ``txplace gen|label|eval|report``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import cmd_eval, cmd_gen, cmd_label, parse_model
from .ledger import DEFAULT_BATCH_SIZE
from .propagation import PropagationParams
from .report import cmd_report

PARAM_FLAG = {"topk_power": "k", "topk_coverage": "k", "minimax": "k", "union": "m", "samples": "n"}


def _param_list(text):
    """``"1,4,16"`` -> [1, 4, 16]; ``all`` stands for the whole feasible region."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        out.append(None if tok == "all" else int(tok))
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="txplace", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded corpus of building maps")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--count", type=int, default=50)
    g.add_argument("--width", type=int, default=32)
    g.add_argument("--height", type=int, default=32)
    g.add_argument("--density", type=float, default=0.25)
    g.add_argument("--block-min", type=int, default=2)
    g.add_argument("--block-max", type=int, default=6)
    g.add_argument("--out", required=True)

    lb = sub.add_parser("label", help="exhaustively label a corpus")
    lb.add_argument("--manifest", required=True)
    lb.add_argument("--out", required=True)
    lb.add_argument("--margin", type=int, default=8)
    lb.add_argument("--model", default="wall_count", type=parse_model)
    lb.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    lb.add_argument("--seed", type=int, default=42, help="train/val/test split seed")
    lb.add_argument("--jobs", type=int, default=1)
    defaults = PropagationParams()
    lb.add_argument("--tx-power-dbm", type=float, default=defaults.tx_power_dbm)
    lb.add_argument("--pathloss-exponent", type=float, default=defaults.pathloss_exponent)
    lb.add_argument("--ref-loss-db", type=float, default=defaults.ref_loss_db)
    lb.add_argument("--wall-loss-db", type=float, default=defaults.wall_loss_db)

    ev = sub.add_parser("eval", help="run a candidate-selection strategy over a labeled split")
    ev.add_argument("--data", required=True)
    ev.add_argument("--strategy", choices=sorted(PARAM_FLAG), default="union")
    ev.add_argument("--select", choices=("best_power", "best_coverage", "best_l2"), default=None)
    ev.add_argument("--k", type=_param_list, default=None, help="K list for top-K and minimax pools")
    ev.add_argument("--m", type=_param_list, default=None, help="M list for union pools")
    ev.add_argument("--n", type=_param_list, default=None, help="N list for sample pools")
    ev.add_argument("--source", default="oracle_scores", help="oracle_scores | sampler | file:<dir>")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--sigma", type=float, default=2.0, help="sample-pool jitter in pixels")
    ev.add_argument("--split", default="test", choices=("train", "val", "test", "all"))
    ev.add_argument("--batch-size", type=int, default=None)
    ev.add_argument("--jobs", type=int, default=1)
    ev.add_argument("--out", required=True)

    rp = sub.add_parser("report", help="render tables, ground-truth bounds and scatter CSV")
    rp.add_argument("--results", nargs="*", default=[])
    rp.add_argument("--data", default=None)
    rp.add_argument("--scenario", default=None)
    rp.add_argument("--split", default="all", choices=("train", "val", "test", "all"))
    rp.add_argument("--out", required=True)
    return p


def run(args):
    if args.command == "gen":
        recs = cmd_gen(
            args.seed, args.count, args.out, args.width, args.height, args.density,
            (args.block_min, args.block_max),
        )
        print(f"wrote {len(recs)} maps to {args.out}")
    elif args.command == "label":
        params = PropagationParams(
            tx_power_dbm=args.tx_power_dbm,
            pathloss_exponent=args.pathloss_exponent,
            ref_loss_db=args.ref_loss_db,
            wall_loss_db=args.wall_loss_db,
        )
        recs = cmd_label(
            args.manifest, args.out, args.margin, args.model, params, args.batch_size,
            args.jobs, args.seed,
        )
        print(f"labeled {len(recs)} scenarios into {args.out}")
    elif args.command == "eval":
        params = getattr(args, PARAM_FLAG[args.strategy]) or [None]
        rows, _ = cmd_eval(
            args.data, args.strategy, params, args.select, args.source, args.seed, args.sigma,
            args.split, args.out, args.jobs, args.batch_size,
        )
        print(f"wrote {len(rows)} result rows to {args.out}")
    elif args.command == "report":
        written, _ = cmd_report(args.results, args.out, args.data, args.scenario, args.split)
        print(written["tables"].read_text(), end="")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run(args)
    except (ValueError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
