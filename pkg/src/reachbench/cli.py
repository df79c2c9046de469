"""Command-line entry points.

    reachbench run        run a session (headless or serving the UI)
    reachbench fit        identify a person model from a session log
    reachbench summarize  recompute a session summary from a log
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import WorkbenchConfig, build_config, parse_kv_file
from .errors import ReachBenchError
from .fitting import identify_person_model, recorded_trials_from_log
from .metrics import summarize_session
from .service import run_session
from .triallog import read_trial_log


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="run one session")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--headless", action="store_true", help="no service; simulated human drives")
    p.add_argument("--mode", help="individual | robot_follower | robot_equal | robot_leader | human_pair_replay")
    p.add_argument("--seed", type=int, help="session seed")
    p.add_argument("--out-dir", help="directory for trial logs and summaries")
    p.add_argument("--replay", metavar="LOGFILE", help="prior session log replayed as the partner")
    p.add_argument("--port", type=int, help="service port (serving mode)")
    p.add_argument("--trials", type=int, help="trials per session (multiple of 9)")
    p.add_argument("--no-realtime", action="store_true", help="serve without wall-clock pacing")


def _resolve_run_config(args) -> WorkbenchConfig:
    values = parse_kv_file(args.config) if args.config else {}
    if args.mode:
        values["mode"] = args.mode
    if args.seed is not None:
        values["seed"] = str(args.seed)
    if args.out_dir:
        values["out_dir"] = args.out_dir
    if args.replay:
        values["replay"] = args.replay
        values.setdefault("mode", "human_pair_replay")
    if args.port is not None:
        values["port"] = str(args.port)
    if args.trials is not None:
        values["trials"] = str(args.trials)
    return build_config(values)


def cmd_run(args) -> int:
    wb = _resolve_run_config(args)
    endpoint = None if args.headless else f"{wb.host}:{wb.port}"
    summary = run_session(
        wb.session,
        partner=wb.partner,
        endpoint=endpoint,
        person_model=wb.person_model,
        sim_human_params=wb.sim_human,
        input_mapping=wb.mapping,
        replay_log=wb.replay_log,
        live=not args.headless and wb.session.mode != "human_pair_replay",
        realtime=not args.no_realtime,
        out_dir=wb.out_dir,
        session_id=wb.session_id,
    )
    json.dump(summary.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_fit(args) -> int:
    recs = []
    for log in args.log:
        _, records, trajectories = read_trial_log(log)
        recs.extend(recorded_trials_from_log(records, trajectories))
    report = identify_person_model(recs, tau=args.tau)
    if report.gain_laws is None:
        print(
            "warning: no gain laws identified (need >= 3 distinct target conditions "
            "recorded without an obstacle; pass that set as an extra --log)",
            file=sys.stderr,
        )
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


def cmd_summarize(args) -> int:
    _, records, _ = read_trial_log(args.log)
    summary = summarize_session(records)
    json.dump(summary.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="reachbench")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_parser(sub)

    p_fit = sub.add_parser("fit", help="identify a person model from session logs")
    p_fit.add_argument(
        "--log",
        required=True,
        action="append",
        help="trial log (.jsonl); repeat to combine an obstacle-free set with an obstacle set",
    )
    p_fit.add_argument("--out", help="write the identification report here (JSON)")
    p_fit.add_argument("--tau", type=float, default=1.0, help="model timescale")

    p_sum = sub.add_parser("summarize", help="summary metrics from a session log")
    p_sum.add_argument("--log", required=True, help="trial log (.jsonl)")

    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "fit": cmd_fit, "summarize": cmd_summarize}[args.command]
    try:
        return handler(args)
    except ReachBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
