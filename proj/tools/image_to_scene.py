#!/usr/bin/env python3
"""Build a satkit scene file from a high-resolution image and annotations.

The annotation JSON holds {"persons": [{"bbox": [...], "depth": ...}, ...]}
plus any optional scene fields (fov_deg, gt_focal, patch_size, name). Boxes
are in pixels of the given image. The image is resized so that its sides
are even and the low-resolution size is half of it.
"""

import argparse
import json

from PIL import Image


def build_scene(image_path, annotations):
    img = Image.open(image_path).convert("RGB")
    width, height = img.size
    even = (width - width % 2, height - height % 2)
    if even != img.size:
        img = img.crop((0, 0, *even))
    scene = {
        "schema_version": 1,
        "image": {"width": even[0] // 2, "height": even[1] // 2},
        "image_hr": {"width": even[0], "height": even[1]},
        "patch_size": annotations.get("patch_size", 14),
        "fov_deg": annotations.get("fov_deg", 60.0),
        "persons": annotations["persons"],
        "pixels": {"width": even[0], "height": even[1], "data": list(img.tobytes())},
    }
    for key in ("name", "gt_focal"):
        if key in annotations:
            scene[key] = annotations[key]
    return scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("image")
    ap.add_argument("annotations")
    ap.add_argument("output")
    args = ap.parse_args()
    with open(args.annotations) as f:
        annotations = json.load(f)
    with open(args.output, "w") as f:
        json.dump(build_scene(args.image, annotations), f)


if __name__ == "__main__":
    main()
