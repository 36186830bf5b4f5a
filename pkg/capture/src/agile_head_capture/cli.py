"""Command line: live streaming (default) and the ingest subcommand."""
import argparse
import sys

from .client import BrokerUnavailable, CaptureSession, stream


def _stream_parser():
    p = argparse.ArgumentParser(
        prog="agile-head-capture",
        description="Stream webcam face-mesh landmarks to the agile-head bus")
    p.add_argument("--broker", default="127.0.0.1:7447", help="HOST:PORT")
    p.add_argument("--camera", type=int, default=0,
                   help="camera index; -1 plays the built-in synthetic swaying face")
    p.add_argument("--record", default=None, metavar="trace.jsonl")
    p.add_argument("--no-overlay", action="store_true")
    p.add_argument("--fps", type=float, default=20.0)
    p.add_argument("--detector", default="mediapipe",
                   choices=("mediapipe", "synthetic"),
                   help="synthetic drives the demo face renderer detector")
    p.add_argument("--frames", type=int, default=None,
                   help="stop after N captured frames")
    return p


def _ingest_parser():
    p = argparse.ArgumentParser(
        prog="agile-head-capture ingest",
        description="Convert a labeled image folder into a training dataset")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True,
                   help="CSV with header file,horizontal,vertical")
    p.add_argument("--out", required=True)
    p.add_argument("--detector", default="mediapipe",
                   choices=("mediapipe", "synthetic"))
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["ingest"]:
        args = _ingest_parser().parse_args(argv[1:])
        from .detector import make_detector
        from .ingest import ingest_images
        result = ingest_images(args.images, args.labels, args.out,
                               make_detector(args.detector))
        print(f"wrote {result['written']} records to {args.out}; "
              f"{len(result['skipped'])} skipped")
        return 0

    args = _stream_parser().parse_args(argv)
    camera = None
    detector_kind = args.detector
    if args.camera == -1:
        from .camera import SyntheticCamera
        n = args.frames if args.frames is not None else 120
        camera = SyntheticCamera.swaying(n=n)
        detector_kind = "synthetic"
    session = CaptureSession(broker=args.broker, camera_id=args.camera,
                             fps=args.fps, record_path=args.record,
                             show_overlay=not args.no_overlay,
                             detector_kind=detector_kind,
                             max_frames=args.frames)
    try:
        counters = stream(session, camera=camera)
    except BrokerUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"captured {counters['captured']} frames, "
          f"published {counters['published']}, "
          f"{counters['no_face']} without a face", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
