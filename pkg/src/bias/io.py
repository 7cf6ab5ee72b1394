"""Frame ingestion, result serialization, and ground-truth loading.

Supported inputs: a directory of PNG/PPM (or other image) frames read in
filename order, or a raw RGB24 stream (8-bit interleaved, row-major) with
declared dimensions, from a file or standard input.

Outputs: saliency maps as 8-bit grayscale PNG or PGM (P5), peak-scaled so
a nonzero map always reaches 255 (``round(255 * map / max)``); optional
float .npy copies for full precision; foci as line-delimited text; stage
timings as TSV.

Fixation ground truth is accepted as a text file of ``frame x y`` lines
or as a directory of binary fixation-map images (nonzero = fixated),
auto-detected by extension.
"""

from __future__ import annotations

import queue
import sys
import threading
from pathlib import Path

import cv2
import numpy as np

from .core import MAP_DTYPE, FrameRGB

IMAGE_EXTENSIONS = (".png", ".ppm", ".pgm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff")

FOCI_HEADER = "frame mu_x mu_y sigma_x sigma_y amplitude"


def _read_image_rgb(path: Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise IOError(f"unreadable image: {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def list_frame_files(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    files = sorted(p for p in directory.iterdir()
                   if p.suffix.lower() in IMAGE_EXTENSIONS)
    if not files:
        raise IOError(f"no frame images in {directory}")
    return files


def read_frames_dir(directory: str | Path):
    """Frames decoded from a directory of images, in filename order."""
    shape = None
    for path in list_frame_files(directory):
        rgb = _read_image_rgb(path)
        if shape is None:
            shape = rgb.shape
        elif rgb.shape != shape:
            raise IOError(
                f"inconsistent frame dimensions: {path} is "
                f"{rgb.shape[1]}x{rgb.shape[0]}, expected {shape[1]}x{shape[0]}"
            )
        yield FrameRGB.from_array(rgb)


def read_frames_raw(stream, width: int, height: int):
    """Frames from an interleaved RGB24 byte stream (row-major, 8-bit)."""
    frame_bytes = width * height * 3
    index = 0
    while True:
        buf = stream.read(frame_bytes)
        if not buf:
            return
        if len(buf) != frame_bytes:
            raise IOError(
                f"truncated raw stream at frame {index}: got {len(buf)} of "
                f"{frame_bytes} bytes"
            )
        arr = np.frombuffer(buf, dtype=np.uint8).reshape(height, width, 3)
        yield FrameRGB.from_array(arr)
        index += 1


def read_frames(path: str | Path, raw_dims: tuple[int, int] | None = None):
    """Dispatch on the input kind: directory, raw file, or '-' for stdin."""
    if str(path) == "-":
        if raw_dims is None:
            raise IOError("raw stream input needs declared dimensions")
        return read_frames_raw(sys.stdin.buffer, *raw_dims)
    p = Path(path)
    if p.is_dir():
        return read_frames_dir(p)
    if raw_dims is not None:
        return read_frames_raw(open(p, "rb"), *raw_dims)
    raise IOError(f"unsupported input: {p} (directory or raw stream expected)")


_PREFETCH_END = object()


def prefetch(iterable, depth: int = 4):
    """Run the source on a reader thread, handing items over a bounded queue.

    Decode overlaps with compute while order is preserved; source errors
    re-raise at the consumer in stream position.
    """
    q: queue.Queue = queue.Queue(maxsize=depth)

    def pump():
        try:
            for item in iterable:
                q.put(item)
        except BaseException as exc:  # re-raised on the consuming side
            q.put(exc)
            return
        q.put(_PREFETCH_END)

    thread = threading.Thread(target=pump, daemon=True)
    thread.start()
    while True:
        item = q.get()
        if item is _PREFETCH_END:
            thread.join()
            return
        if isinstance(item, BaseException):
            thread.join()
            raise item
        yield item


# ---------------------------------------------------------------------------
# Outputs
# ---------------------------------------------------------------------------


def quantize_map(m: np.ndarray) -> np.ndarray:
    """8-bit form, peak-scaled so any nonzero map reaches 255."""
    peak = float(m.max())
    if peak <= 0.0:
        return np.zeros(m.shape, dtype=np.uint8)
    return np.clip(np.rint(255.0 * (m / peak)), 0, 255).astype(np.uint8)


def write_map(m: np.ndarray, path: Path, float_out: bool = False) -> None:
    if float_out:
        np.save(path.with_suffix(".npy"), m.astype(MAP_DTYPE))
    else:
        if not cv2.imwrite(str(path), quantize_map(m)):
            raise IOError(f"failed to write {path}")


def read_saliency_map(path: str | Path) -> np.ndarray:
    """Load a prediction map: .npy floats or an 8-bit image scaled to [0, 1]."""
    path = Path(path)
    if path.suffix.lower() == ".npy":
        return np.load(path).astype(MAP_DTYPE)
    img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise IOError(f"unreadable saliency map: {path}")
    return (img.astype(MAP_DTYPE) / 255.0)


_EMIT_MAPS = {
    "saliency": "fixation_map",
    "master": "master_map",
    "static": "static_map",
    "dynamic": "dynamic_map",
}
EMIT_KINDS = tuple(_EMIT_MAPS) + ("foci", "timings")


def write_outputs(results, out_dir: str | Path, emit=("saliency",),
                  image_format: str = "png", float_out: bool = False) -> int:
    """Serialize a result stream; returns the number of frames written.

    ``emit`` selects artifact kinds: per-frame maps ('saliency' is the
    final fixation map, plus 'master'/'static'/'dynamic'), 'foci', and
    'timings'.  Map files are named <kind>_<frame:06d>.<ext>.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    emit = tuple(emit)
    unknown = [kind for kind in emit if kind not in EMIT_KINDS]
    if unknown:
        raise ValueError(f"unknown emit kinds: {', '.join(unknown)}")
    if image_format not in ("png", "pgm"):
        raise ValueError(f"unsupported image format {image_format!r}")

    foci_file = open(out_dir / "foci.txt", "w") if "foci" in emit else None
    if foci_file:
        foci_file.write(FOCI_HEADER + "\n")
    timing_file = open(out_dir / "timings.tsv", "w") if "timings" in emit else None
    timing_keys: list[str] | None = None

    count = 0
    try:
        for result in results:
            for kind in emit:
                if kind in _EMIT_MAPS:
                    m = getattr(result, _EMIT_MAPS[kind])
                    name = f"{kind}_{result.frame_index:06d}.{image_format}"
                    write_map(m, out_dir / name, float_out=float_out)
            if foci_file is not None:
                for focus in result.foci:
                    foci_file.write(
                        f"{result.frame_index} {focus.mu[0]:.3f} {focus.mu[1]:.3f} "
                        f"{focus.sigma[0]:.3f} {focus.sigma[1]:.3f} "
                        f"{focus.amplitude:.6f}\n"
                    )
            if timing_file is not None:
                if timing_keys is None:
                    timing_keys = list(result.timings)
                    timing_file.write("frame\t" + "\t".join(timing_keys) + "\n")
                cells = "\t".join(f"{result.timings[k] * 1e3:.3f}"
                                  for k in timing_keys)
                timing_file.write(f"{result.frame_index}\t{cells}\n")
            count += 1
    finally:
        if foci_file:
            foci_file.close()
        if timing_file:
            timing_file.close()
    return count


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


def load_fixations_text(path: str | Path) -> dict[int, np.ndarray]:
    """Parse ``frame x y`` lines into per-frame (N, 2) point arrays."""
    per_frame: dict[int, list] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise IOError(f"{path}:{lineno}: expected 'frame x y'")
        frame, x, y = (int(float(v)) for v in parts)
        per_frame.setdefault(frame, []).append((x, y))
    return {f: np.asarray(pts, dtype=np.int64) for f, pts in per_frame.items()}


def load_fixation_maps(directory: str | Path) -> dict[int, np.ndarray]:
    """Binary fixation-map images (nonzero = fixated) -> per-frame points."""
    per_frame = {}
    for index, path in enumerate(list_frame_files(directory)):
        img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
        if img is None:
            raise IOError(f"unreadable fixation map: {path}")
        ys, xs = np.nonzero(img)
        per_frame[index] = np.stack([xs, ys], axis=1).astype(np.int64)
    return per_frame


def load_fixations(path: str | Path) -> dict[int, np.ndarray]:
    """Auto-detect the ground-truth form: text file or image directory."""
    p = Path(path)
    if p.is_dir():
        return load_fixation_maps(p)
    return load_fixations_text(p)


def load_density_dir(directory: str | Path) -> dict[int, np.ndarray]:
    """Ground-truth density images, each normalized to sum 1."""
    per_frame = {}
    for index, path in enumerate(list_frame_files(directory)):
        img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
        if img is None:
            raise IOError(f"unreadable density map: {path}")
        d = img.astype(np.float64)
        total = d.sum()
        per_frame[index] = d / total if total > 0 else d
    return per_frame
