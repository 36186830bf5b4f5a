"""Image-folder ingestion: run the detector per image, emit a dataset.

Input: a directory of images plus a labels CSV with header
``file,horizontal,vertical`` (labels on the -10..10 scale). Output: the
training-dataset layout the robot side consumes -- ``frames.jsonl`` and
``labels.csv`` (header ``index,horizontal,vertical``) -- plus
``skipped.json`` listing images that could not contribute.
"""
import csv
import json
import pathlib

import cv2


def read_labels(path):
    labels = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            labels[row["file"]] = (float(row["horizontal"]), float(row["vertical"]))
    return labels


def ingest_images(image_dir, labels_csv, out_dir, detector) -> dict:
    """Returns {"written": n, "skipped": [{file, reason}, ...]}."""
    image_dir = pathlib.Path(image_dir)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = read_labels(labels_csv)

    written = 0
    skipped = []
    frames_path = out / "frames.jsonl"
    labels_path = out / "labels.csv"
    with open(frames_path, "w") as frames_fh, \
            open(labels_path, "w", newline="") as labels_fh:
        writer = csv.writer(labels_fh)
        writer.writerow(["index", "horizontal", "vertical"])
        for name in sorted(labels):
            path = image_dir / name
            img = cv2.imread(str(path))
            if img is None:
                skipped.append({"file": name, "reason": "unreadable"})
                continue
            points = detector.detect(img)
            if points is None:
                skipped.append({"file": name, "reason": "no face detected"})
                continue
            h, v = labels[name]
            payload = {"stamp_us": written, "w": img.shape[1], "h": img.shape[0],
                       "pts": points.tolist()}
            frames_fh.write(json.dumps(payload, separators=(",", ":")) + "\n")
            writer.writerow([written, h, v])
            written += 1
    (out / "skipped.json").write_text(json.dumps(skipped, indent=2) + "\n")
    return {"written": written, "skipped": skipped}
