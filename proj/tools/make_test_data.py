"""Regenerate tests/data from the scikit-image sample images.

Each image is centre-cropped to a square, resized to 256x256 with
anti-aliasing and stored as 8-bit RGB PNG (grayscale samples are
replicated into three channels).
"""
import pathlib

import numpy as np
from skimage import data, io, transform

NAMES = ["astronaut", "coffee", "chelsea", "rocket",
         "immunohistochemistry", "hubble_deep_field", "colorwheel", "camera"]


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        im = getattr(data, name)()
        if im.ndim == 2:
            im = np.stack([im] * 3, -1)
        h, w = im.shape[:2]
        s = min(h, w)
        y0, x0 = (h - s) // 2, (w - s) // 2
        im = transform.resize(im[y0:y0 + s, x0:x0 + s], (256, 256), anti_aliasing=True)
        io.imsave(out / f"{name}.png", (np.clip(im, 0, 1) * 255 + 0.5).astype(np.uint8), check_contrast=False)


if __name__ == "__main__":
    main()
