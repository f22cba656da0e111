"""Write the 128x128 grayscale test crops used by the test suites.

Sources are the public-domain sample images bundled with scikit-image.
"""
import pathlib

import numpy as np
import skimage.data
from skimage.color import rgb2gray

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"
SIDE = 128


def gray(name):
    img = getattr(skimage.data, name)()
    if img.ndim == 3:
        img = np.round(rgb2gray(img) * 255.0).astype(np.uint8)
    return img


def center_crop(img, side):
    h, w = img.shape
    r, c = (h - side) // 2, (w - side) // 2
    return img[r : r + side, c : c + side]


def write_pgm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def main():
    OUT.mkdir(exist_ok=True)
    for name in ["camera", "astronaut", "coins", "chelsea"]:
        write_pgm(OUT / f"{name}_128.pgm", center_crop(gray(name), SIDE))


if __name__ == "__main__":
    main()
