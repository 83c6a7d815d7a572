"""Color quantization as discrete scenario reduction on RGB histograms.

Colors are points in R^3 under the type-1 distance induced by the 1-norm.
Images are pre-reduced by median cut to a tractable number of colors, the
palette is optimized by any reducer, pixels are remapped to the palette, and
a gap report compares the algorithms against an exact or best-known value.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import DiscreteDistribution, Metric, ValidationError
from .exact import discrete_exact
from .heuristics import dupacova_greedy, local_search

QUANTIZE_METRIC = Metric(1, 1)

ALGORITHMS = ("dpcv", "loc1", "loc2", "exact")


@dataclass(frozen=True)
class ImageRaster:
    """RGB24 raster: row-major pixels with integer channels in [0, 255]."""

    width: int
    height: int
    pixels: np.ndarray

    def __init__(self, width: int, height: int, pixels):
        px = np.asarray(pixels, dtype=np.int64).reshape(-1, 3)
        if width < 1 or height < 1:
            raise ValidationError("image dimensions must be positive")
        if px.shape[0] != width * height:
            raise ValidationError(
                f"expected {width * height} pixels, got {px.shape[0]}")
        if px.min() < 0 or px.max() > 255:
            raise ValidationError("channels must lie in [0, 255]")
        arr = px.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "width", int(width))
        object.__setattr__(self, "height", int(height))
        object.__setattr__(self, "pixels", arr)


def read_ppm(path) -> ImageRaster:
    """Read a binary (P6) PPM file with maxval 255."""
    with open(path, "rb") as handle:
        data = handle.read()
    if not data.startswith(b"P6"):
        raise ValidationError("only binary PPM (P6) images are supported")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ValidationError(f"only maxval 255 is supported, got {maxval}")
    raw = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    return ImageRaster(width, height, raw.reshape(-1, 3))


def write_ppm(image: ImageRaster, path) -> None:
    """Write a binary (P6) PPM file; read_ppm(write_ppm(x)) is bit-exact."""
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(image.pixels.tobytes())


def read_png(path) -> ImageRaster:
    """Optional PNG ingestion; requires Pillow."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise ValidationError("PNG support needs the optional Pillow dependency") from exc
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"))
    return ImageRaster(rgb.shape[1], rgb.shape[0], rgb.reshape(-1, 3))


def load_image(path, allow_png: bool = False) -> ImageRaster:
    name = str(path).lower()
    if name.endswith(".png"):
        if not allow_png:
            raise ValidationError("PNG input is disabled; pass allow_png=True")
        return read_png(path)
    return read_ppm(path)


def bundled_image() -> ImageRaster:
    """The small test image shipped with the package (a 64x64 synthetic scene)."""
    ref = importlib.resources.files("scenred") / "_data" / "testcard64.ppm"
    with importlib.resources.as_file(ref) as path:
        return read_ppm(path)


def image_histogram(image: ImageRaster) -> DiscreteDistribution:
    """Distinct colors as atoms in R^3, weighted by pixel frequency."""
    colors, counts = np.unique(image.pixels, axis=0, return_counts=True)
    return DiscreteDistribution(colors.astype(float), counts / counts.sum())


def _split_axis(colors: np.ndarray, weights: np.ndarray, members: np.ndarray):
    spans = colors[members].max(axis=0) - colors[members].min(axis=0)
    axis = int(spans.argmax())
    return float(spans[axis]), axis


def _median_cut(colors: np.ndarray, weights: np.ndarray, n_target: int):
    """Median-cut boxes over a weighted color cloud.

    Returns the box id of every input color and the weighted-mean
    representative (rounded to integer channels) of every box.
    """
    boxes: list[np.ndarray] = [np.arange(colors.shape[0])]
    while len(boxes) < n_target:
        candidates = []
        for i, box in enumerate(boxes):
            if box.size > 1:
                span, axis = _split_axis(colors, weights, box)
                if span > 0:
                    candidates.append((span, -i, i, axis))
        if not candidates:
            break
        _, _, box_id, axis = max(candidates)
        box = boxes[box_id]
        order = box[np.argsort(colors[box, axis], kind="stable")]
        cum = np.cumsum(weights[order])
        half = 0.5 * cum[-1]
        cut = int(np.searchsorted(cum, half)) + 1
        cut = min(max(cut, 1), box.size - 1)
        boxes[box_id] = order[:cut]
        boxes.append(order[cut:])
    reps = np.empty((len(boxes), 3))
    box_of = np.empty(colors.shape[0], dtype=int)
    for i, box in enumerate(boxes):
        w = weights[box]
        total = w.sum()
        mean = colors[box].mean(axis=0) if total <= 0 else (
            (w[:, None] * colors[box]).sum(axis=0) / total)
        reps[i] = np.rint(mean)
        box_of[box] = i
    return box_of, reps


def _reduce_with_map(hist: DiscreteDistribution, n_target: int):
    """Median-cut pre-reduction plus the color -> representative map."""
    if n_target < 1:
        raise ValidationError("n_target must be positive")
    colors = hist.points
    if hist.n <= n_target:
        return hist, colors.copy()
    box_of, reps = _median_cut(colors, hist.weights, n_target)
    rep_of_color = reps[box_of]
    merged, inverse = np.unique(rep_of_color, axis=0, return_inverse=True)
    weights = np.zeros(merged.shape[0])
    np.add.at(weights, inverse, hist.weights)
    return DiscreteDistribution(merged, weights), rep_of_color


def pre_reduce(hist: DiscreteDistribution, n_target: int) -> DiscreteDistribution:
    """Median-cut the histogram down to at most n_target colors.

    Identity when the histogram is already small enough; the output
    aggregates box masses, so the total mass is preserved.
    """
    return _reduce_with_map(hist, n_target)[0]


@dataclass(frozen=True)
class GapEntry:
    algorithm: str
    value: float
    gap: float
    seconds: float


@dataclass(frozen=True)
class GapReport:
    """Per-algorithm distances and optimality gaps versus a reference value."""

    entries: tuple[GapEntry, ...]
    reference: str            # "exact" or "best_known"
    reference_value: float
    m: int
    n_pre: int
    clamped: bool = False

    def entry(self, algorithm: str) -> GapEntry:
        for e in self.entries:
            if e.algorithm == algorithm:
                return e
        raise KeyError(algorithm)

    def to_json(self) -> str:
        payload = {
            "reference": self.reference,
            "reference_value": self.reference_value,
            "m": self.m,
            "n_pre": self.n_pre,
            "clamped": self.clamped,
            "entries": [
                {"algorithm": e.algorithm, "value": e.value, "gap": e.gap,
                 "seconds": e.seconds, "reference": self.reference}
                for e in self.entries
            ],
        }
        return json.dumps(payload, indent=2) + "\n"


def _run_algorithm(name: str, hist: DiscreteDistribution, m: int,
                   metric: Metric, budget: int):
    if name == "dpcv":
        return dupacova_greedy(hist, m, metric)
    if name == "loc1":
        warm = dupacova_greedy(hist, m, metric)
        return local_search(hist, m, metric, init=warm)
    if name == "loc2":
        return local_search(hist, m, metric, init=None)
    if name == "exact":
        return discrete_exact(hist, m, metric, budget=budget)
    raise ValidationError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")


def quantize_image(image: ImageRaster, m: int, algorithm="loc1",
                   n_pre: int = 1024, metric: Metric = QUANTIZE_METRIC,
                   budget: int = 10**7):
    """Quantize an image to m colors; returns (palette, remapped image, report).

    `algorithm` is one of dpcv | loc1 | loc2 | exact, or a sequence of them;
    with several algorithms the remap uses the best value found and the
    report gaps compare against the exact value when computed, otherwise
    against the best value (flagged "best_known"). When m exceeds the number
    of distinct pre-reduced colors it is clamped (flagged in the report).
    """
    if m < 1:
        raise ValidationError("m must be positive")
    names = [algorithm] if isinstance(algorithm, str) else list(algorithm)
    for name in names:
        if name not in ALGORITHMS:
            raise ValidationError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    hist = image_histogram(image)
    pre, rep_of_color = _reduce_with_map(hist, n_pre)
    m_eff = min(m, pre.n)
    results = {}
    timings = {}
    for name in names:
        start = time.perf_counter()
        results[name] = _run_algorithm(name, pre, m_eff, metric, budget)
        timings[name] = time.perf_counter() - start
    if "exact" in names:
        reference, ref_value = "exact", results["exact"].value
    else:
        reference, ref_value = "best_known", min(r.value for r in results.values())
    entries = tuple(
        GapEntry(algorithm=name, value=results[name].value,
                 gap=(results[name].value / ref_value - 1.0) if ref_value > 0
                 else (0.0 if results[name].value == 0 else math.inf),
                 seconds=timings[name])
        for name in names
    )
    report = GapReport(entries=entries, reference=reference,
                       reference_value=ref_value, m=m_eff, n_pre=n_pre,
                       clamped=m_eff < m)
    chosen = min(names, key=lambda name: (results[name].value, names.index(name)))
    palette = np.rint(results[chosen].support).astype(np.int64)
    remapped = _remap(image, rep_of_color, hist, palette)
    return palette, remapped, report


def _remap(image: ImageRaster, rep_of_color: np.ndarray,
           hist: DiscreteDistribution, palette: np.ndarray) -> ImageRaster:
    """Send every pixel to the palette color nearest (1-norm) to its
    pre-reduced representative; ties break to the lowest palette index."""
    reps = rep_of_color
    diffs = np.abs(reps[:, None, :] - palette[None, :, :].astype(float)).sum(axis=2)
    nearest = palette[diffs.argmin(axis=1)]
    # hist.points are the sorted distinct colors; map each pixel through them
    colors = hist.points.astype(np.int64)
    flat = image.pixels.astype(np.int64)
    keys = (flat[:, 0] << 16) | (flat[:, 1] << 8) | flat[:, 2]
    color_keys = (colors[:, 0] << 16) | (colors[:, 1] << 8) | colors[:, 2]
    order = np.argsort(color_keys)
    idx = order[np.searchsorted(color_keys[order], keys)]
    out = nearest[idx]
    return ImageRaster(image.width, image.height, out)
