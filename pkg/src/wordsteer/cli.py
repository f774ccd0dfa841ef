"""Command line front end: scenario runs, the live service, and a parse REPL."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .chart import Chart, current_result, dump, feed_word, reset as chart_reset
from .lexicon import load_shipped_grammar
from .runner import read_metrics, run
from .scenario import MODE_BASELINE, MODE_ONLINE, load_scenario, shipped_scenarios


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wordsteer",
        description="Incremental word-by-word instruction parsing driving an online motion pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario closed-loop")
    p_run.add_argument("scenario", help=f"scenario file or shipped name ({', '.join(shipped_scenarios())})")
    p_run.add_argument("--mode", choices=["online", "offline"], default=None)
    p_run.add_argument("--offline-latency", type=float, default=5.6)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None, help="directory for trajectory.csv and metrics.json")

    p_serve = sub.add_parser("serve", help="start the WebSocket steering service")
    p_serve.add_argument("--port", type=int, default=8700)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--world", default="scenario1", help="initial scenario world")
    p_serve.add_argument("--speed", type=float, default=1.0, help="real-time multiplier")

    p_parse = sub.add_parser("parse", help="chart-parser REPL")
    p_parse.add_argument("--interactive", action="store_true")
    p_parse.add_argument("--words", default=None, help="parse these words and exit")

    p_metrics = sub.add_parser("metrics", help="print metrics of a finished run")
    p_metrics.add_argument("run_dir")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "serve":
        return cmd_serve(args)
    if args.command == "parse":
        return cmd_parse(args)
    if args.command == "metrics":
        return cmd_metrics(args)
    return 2


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.mode == "offline":
        scenario = dataclasses.replace(
            scenario, mode=MODE_BASELINE, offline_latency=args.offline_latency
        )
    elif args.mode == "online":
        scenario = dataclasses.replace(scenario, mode=MODE_ONLINE, offline_latency=0.0)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    metrics, logs = run(scenario, out_dir=args.out)
    payload = {"scenario": scenario.name, "mode": scenario.mode, **metrics.to_dict()}
    print(json.dumps(payload, indent=2))
    if logs.timed_out:
        print("warning: run hit the timeout", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(scenario_name=args.world, speed=args.speed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_parse(args) -> int:
    dictionary = load_shipped_grammar()
    chart = Chart()
    if args.words:
        for word in args.words.split():
            feed_word(chart, word, dictionary)
        print(dump(chart))
        result = current_result(chart)
        print(f"status: {result.status}")
        if result.best is not None:
            print(f"best: {result.best.render_semantics()}")
        return 0

    print("type words (blank line resets, 'exit' quits):")
    for line in sys.stdin:
        line = line.strip()
        if line == "exit":
            break
        if not line:
            chart_reset(chart)
            print("(chart reset)")
            continue
        result = None
        for word in line.split():
            result = feed_word(chart, word, dictionary)
        print(dump(chart))
        if result is not None:
            print(f"status: {result.status}")
            if result.best is not None:
                print(f"best: {result.best.render_semantics()}")
    return 0


def cmd_metrics(args) -> int:
    print(json.dumps(read_metrics(args.run_dir), indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
