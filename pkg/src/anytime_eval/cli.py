"""Command-line front door: evaluate, prefgen, report, check."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import trip
from .config import load_config, make_backend, make_manifest
from .pipeline import resume_run, run_evaluation, run_prefgen
from .report import emit_report, format_table, load_summaries

log = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anytime-eval",
        description="Budget-aware evaluation harness for anytime LLM reasoning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="run the truncation/re-prompt/score pipeline")
    p_eval.add_argument("--config", required=True, help="TOML run configuration")
    p_eval.add_argument("--replay", help="answer all requests from this fixture JSONL")
    p_eval.add_argument("--resume", action="store_true",
                        help="complete the missing cells of an existing run")

    p_pref = sub.add_parser("prefgen", help="generate preference pairs and PDP prompts")
    p_pref.add_argument("--config", required=True, help="TOML run configuration")
    p_pref.add_argument("--replay", help="answer all requests from this fixture JSONL")

    p_rep = sub.add_parser("report", help="tabulate summaries and emit curve CSVs")
    p_rep.add_argument("--runs", required=True, help="directory containing run outputs")
    p_rep.add_argument("--out", help="directory for report.csv and curve CSVs")
    p_rep.add_argument("--q-max-mode", choices=("fixed", "shared"), default="fixed",
                       help="normalize anytime indices by 1.0 or by the best "
                            "score across compared methods")

    p_check = sub.add_parser("check", help="check one trip plan against one query")
    p_check.add_argument("--query", required=True, help="file holding the query text")
    p_check.add_argument("--plan", required=True, help="file holding the plan text")
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "prefgen":
            return _cmd_prefgen(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "check":
            return _cmd_check(args)
    except Exception as exc:  # surfaced as a nonzero exit, not a traceback
        log.error("%s", exc)
        return 1
    return 0


def _cmd_evaluate(args) -> int:
    config = load_config(args.config)
    backend = make_backend(config, replay_path=args.replay)
    if args.resume:
        run_dir = Path(config.out_dir) / config.run_id
        summary = resume_run(run_dir, backend, max_in_flight=config.max_in_flight,
                             q_max=config.q_max)
    else:
        manifest = make_manifest(config)
        summary = run_evaluation(manifest, backend, config.out_dir,
                                 max_in_flight=config.max_in_flight,
                                 q_max=config.q_max)
    print(json.dumps({
        "run_id": summary["run_id"],
        "final": summary["final"],
        "average": summary["average"],
        "anytime_index": summary["anytime_index"],
        "cells_ok": summary["cells_ok"],
        "cells_failed": summary["cells_failed"],
    }, indent=2))
    return 0


def _cmd_prefgen(args) -> int:
    config = load_config(args.config)
    backend = make_backend(config, replay_path=args.replay)
    manifest = make_manifest(config, prefgen=True)
    summary = run_prefgen(
        manifest, backend, config.out_dir,
        max_pairs=config.prefgen_max_pairs,
        max_in_flight=config.max_in_flight,
        metric_name=config.metric_name,
        scoring_blurb=config.scoring_blurb,
    )
    print(json.dumps({
        "run_id": summary["run_id"],
        "n_pairs": summary["n_pairs"],
        "pairs_file": summary["pairs_file"],
        "prompt_files": summary["prompt_files"],
    }, indent=2))
    return 0


def _cmd_report(args) -> int:
    summaries = load_summaries(args.runs)
    table = emit_report(summaries, out_dir=args.out, q_max_mode=args.q_max_mode)
    print(format_table(table))
    return 0


def _cmd_check(args) -> int:
    query = trip.parse_trip_query(Path(args.query).read_text(encoding="utf-8"))
    plan = trip.parse_itinerary(Path(args.plan).read_text(encoding="utf-8"))
    outcomes = trip.evaluate_constraints(query, plan)
    print(json.dumps({
        "outcomes": [o.as_dict() for o in outcomes],
        "csr": trip.csr(outcomes),
        "satisfied": sum(1 for o in outcomes if o.satisfied),
        "total": len(outcomes),
        "plan_notes": list(plan.notes),
        "query_notes": list(query.notes),
    }, indent=2))
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
