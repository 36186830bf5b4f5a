"""Command line: broker, the two nodes, replay, batch runs, and training."""
import argparse
import dataclasses
import sys
import time

from . import bus
from .bus import Broker, BusClient, broker_address_from_env
from .config import load_config
from .errors import AgileHeadError, Disconnected
from .pipeline import AgileEyeNode, FaceAnglesNode, replay, run_pipeline
from .regressor import fit, load_dataset


def _load(args):
    config = load_config(args.config)
    override = broker_address_from_env(default=None)
    if override is not None:
        config = dataclasses.replace(config, broker=override)
    if getattr(args, "batch", False):
        config = dataclasses.replace(config, batch=True)
    return config


def _cmd_broker(args):
    broker = Broker("127.0.0.1", args.port).start()
    print(f"broker listening on 127.0.0.1:{broker.port}")
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        broker.stop()
    return 0


def _cmd_face_angles(args):
    node = FaceAnglesNode(_load(args)).run()
    print(f"face_angles: {node.frames} frames, {node.skipped} skipped", file=sys.stderr)
    return 0


def _cmd_agile_eye(args):
    node = AgileEyeNode(_load(args), out_dir=args.out).run()
    r = node.report
    print(f"agile_eye: {r.frames_processed} frames ({r.frames_held} held), "
          f"rms {r.rms_error_deg}", file=sys.stderr)
    return 0


def _cmd_replay(args):
    client = BusClient(broker_address_from_env(), name="replay").connect()
    try:
        n = replay(args.trace, client, speed=args.speed, publish_eos=not args.no_eos)
    finally:
        client.close()
    print(f"replayed {n} frames from {args.trace}", file=sys.stderr)
    return 0


def _cmd_run(args):
    out = run_pipeline(args.trace, args.config, args.out)
    print(f"run complete: {out / 'report.json'}")
    return 0


def _cmd_train(args):
    dataset = load_dataset(args.dataset)
    model = fit(dataset, args.axis, ridge_lambda=args.ridge)
    model.save(args.out)
    print(f"{args.axis} model on {model.n_train}+{model.n_val} samples, "
          f"validation rmse {model.val_rmse:.4f} -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="agile-head",
        description="Head-and-eye imitation pipeline on a simulated 3-DOF wrist")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("broker", help="run the pub/sub broker")
    p.add_argument("--port", type=int, default=bus.DEFAULT_PORT)
    p.set_defaults(func=_cmd_broker)

    for name, func in (("face-angles", _cmd_face_angles), ("agile-eye", _cmd_agile_eye)):
        p = sub.add_parser(name, help=f"run the {name.replace('-', '_')} node")
        p.add_argument("--config", required=True)
        p.add_argument("--batch", action="store_true",
                       help="deterministic message-time control clock")
        if name == "agile-eye":
            p.add_argument("--out", default=None, help="report output directory")
        p.set_defaults(func=func)

    p = sub.add_parser("replay", help="publish a recorded landmark trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--speed", type=float, default=0.0,
                   help="inter-frame spacing multiplier; 0 = as fast as possible")
    p.add_argument("--no-eos", action="store_true",
                   help="do not publish the end-of-stream marker")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("run", help="broker + both nodes + batch replay")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("train", help="fit one pose model from a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--axis", required=True, choices=("horizontal", "vertical"))
    p.add_argument("--out", required=True)
    p.add_argument("--ridge", type=float, default=1e-3)
    p.set_defaults(func=_cmd_train)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Disconnected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AgileHeadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
