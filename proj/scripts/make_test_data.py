"""Regenerates tests/data from the sample images bundled with scikit-image."""
from pathlib import Path

import numpy as np
from PIL import Image
from skimage import color, data, transform

OUT = Path(__file__).resolve().parent.parent / "tests" / "data"
TRAIN = ["astronaut", "camera", "coffee", "coins", "grass"]


def gray_u8(name):
    img = getattr(data, name)()
    if img.ndim == 3:
        img = color.rgb2gray(img[..., :3])
    else:
        img = img / 255.0
    return img


def to_u8(img):
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def main():
    (OUT / "train").mkdir(parents=True, exist_ok=True)
    for name in TRAIN:
        img = gray_u8(name)
        scale = 256.0 / max(img.shape)
        small = transform.rescale(img, scale, anti_aliasing=True)
        Image.fromarray(to_u8(small)).save(OUT / "train" / f"{name}.pgm")

    cat = to_u8(gray_u8("chelsea"))
    # 128x128 window around the face; the 64x64 test crop is its top-left quadrant shifted by 32.
    big = cat[60:188, 130:258]
    Image.fromarray(big).save(OUT / "chelsea128.pgm")
    Image.fromarray(big[32:96, 32:96]).save(OUT / "chelsea64.pgm")

    Image.fromarray(np.arange(16, dtype=np.uint16).reshape(4, 4) * 4000).save(OUT / "gray16.png")
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    rgb[..., 0] = 200
    Image.fromarray(rgb).save(OUT / "rgb.png")
    Image.fromarray(np.array([[0, 255], [128, 64]], dtype=np.uint8)).save(OUT / "tiny.png")


if __name__ == "__main__":
    main()
