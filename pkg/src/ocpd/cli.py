"""``ocpd`` command line: discover, patterns, replay, flatten."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .extensions import discover
from .log import LogError, flatten_by_object, read_log
from .ocpn import (
    DEFAULT_MAX_BINDING_SUBSETS,
    dumps_aocpn,
    is_oc_sound,
    loads_aocpn,
    replay,
    to_dot,
)
from .patterns import detect_all, matches_to_json
from .petri import DEFAULT_MAX_MARKINGS, NetError, SoundnessVerdict, Status

EXIT_OK, EXIT_INPUT, EXIT_PIPELINE = 0, 1, 2
EXIT_UNSOUND, EXIT_UNKNOWN, EXIT_PATTERNS, EXIT_REPLAY = 3, 4, 5, 6
VERDICT_EXIT = {Status.SOUND: EXIT_OK, Status.UNSOUND: EXIT_UNSOUND, Status.UNKNOWN: EXIT_UNKNOWN}


@dataclass
class RunConfig:
    input: str
    variant: str = "base"
    out: str | None = None
    dot: str | None = None
    trace: str | None = None
    verify: bool = False
    max_markings: int = DEFAULT_MAX_MARKINGS
    max_binding_subsets: int = DEFAULT_MAX_BINDING_SUBSETS


def _positive(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _env_markings():
    raw = os.environ.get("OCPD_MAX_MARKINGS")
    if raw is None:
        return DEFAULT_MAX_MARKINGS
    try:
        return _positive(raw)
    except (ValueError, argparse.ArgumentTypeError):
        print(f"ignoring invalid OCPD_MAX_MARKINGS={raw!r}", file=sys.stderr)
        return DEFAULT_MAX_MARKINGS


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_log(path):
    try:
        return read_log(path)
    except OSError as exc:
        raise LogError(f"cannot read {path}: {exc.strerror}") from exc


def cmd_discover(cfg: RunConfig) -> int:
    try:
        log = _load_log(cfg.input)
        if len(log) == 0:
            raise LogError("the log has no events")
    except LogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        aocpn, trace = discover(log, cfg.variant)
    except (NetError, ValueError) as exc:
        print(f"error: discovery failed: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    try:
        if cfg.out:
            _write(cfg.out, dumps_aocpn(aocpn) + "\n")
        else:
            print(dumps_aocpn(aocpn))
        if cfg.dot:
            _write(cfg.dot, to_dot(aocpn))
        if cfg.trace and trace is not None:
            _write(cfg.trace, trace.to_json() + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for note in aocpn.diagnostics:
        print(f"note: {note}", file=sys.stderr)
    if trace is not None:
        print(trace.summary(), file=sys.stderr)
    if not cfg.verify:
        return EXIT_OK
    try:
        verdict = is_oc_sound(aocpn, cfg.max_markings, cfg.max_binding_subsets)
    except NetError as exc:
        # soundness is only defined for object-centric WF-nets
        verdict = SoundnessVerdict(Status.UNSOUND, reason=str(exc))
    print(f"verdict: {verdict.summary()}", file=sys.stderr)
    return VERDICT_EXIT[verdict.status]


def cmd_patterns(path) -> int:
    try:
        log = _load_log(path)
    except LogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    matches = detect_all(log)
    print(matches_to_json(matches))
    return EXIT_PATTERNS if matches else EXIT_OK


def cmd_replay(net_path, log_path, max_markings, max_binding_subsets) -> int:
    try:
        log = _load_log(log_path)
        with open(net_path, encoding="utf-8") as fh:
            aocpn = loads_aocpn(fh.read())
    except (LogError, NetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: cannot read {net_path}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    report = replay(aocpn, log, max_markings, max_binding_subsets)
    print(json.dumps(report.to_dict(), indent=2))
    if not report.success:
        where = f" at event {report.failed_event}" if report.failed_event else ""
        print(f"replay failed{where}: {report.reason}", file=sys.stderr)
        return EXIT_REPLAY
    return EXIT_OK


def cmd_flatten(path, ot) -> int:
    try:
        traces = flatten_by_object(_load_log(path), ot)
    except LogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for oi, trace in traces.items():
        print(f"{oi}: {', '.join(trace)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocpd", description="Object-centric process discovery.")
    sub = parser.add_subparsers(dest="command", required=True)

    def caps(p):
        p.add_argument("--max-markings", type=_positive, default=None,
                       help="state-space cap (default: $OCPD_MAX_MARKINGS or 100000)")
        p.add_argument("--max-binding-subsets", type=_positive,
                       default=DEFAULT_MAX_BINDING_SUBSETS)

    d = sub.add_parser("discover", help="discover an object-centric Petri net")
    d.add_argument("--input", required=True)
    d.add_argument("--variant", choices=["base", "da", "sa", "si"], default="base")
    d.add_argument("--out", help="net JSON path (stdout if omitted)")
    d.add_argument("--dot", help="write a Graphviz rendering here")
    d.add_argument("--trace", help="write the repair trace JSON here")
    d.add_argument("--verify", action="store_true", help="check soundness; sets the exit status")
    caps(d)

    p = sub.add_parser("patterns", help="list pattern matches as JSON")
    p.add_argument("--input", required=True)

    r = sub.add_parser("replay", help="replay a log on a net")
    r.add_argument("--net", required=True)
    r.add_argument("--input", required=True)
    caps(r)

    f = sub.add_parser("flatten", help="print one activity trace per object")
    f.add_argument("--input", required=True)
    f.add_argument("--type", required=True, dest="object_type")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "discover":
        markings = args.max_markings or _env_markings()
        return cmd_discover(RunConfig(args.input, args.variant, args.out, args.dot, args.trace,
                                      args.verify, markings, args.max_binding_subsets))
    if args.command == "patterns":
        return cmd_patterns(args.input)
    if args.command == "replay":
        return cmd_replay(args.net, args.input, args.max_markings or _env_markings(),
                          args.max_binding_subsets)
    return cmd_flatten(args.input, args.object_type)


if __name__ == "__main__":
    sys.exit(main())
