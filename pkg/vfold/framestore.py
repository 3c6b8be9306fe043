# vfold/framestore.py
"""
VFOLD Frame Store

Loads, validates and writes grayscale frame sequences. Owns the pixel and
index conventions every downstream stage relies on:

- ``x`` grows rightward along columns, ``y`` grows downward along rows
- frame ``data`` is a read-only ``uint8`` array of shape ``(height, width)``
- frame indices are 0-based and follow ascending temporal order

Two sources are supported:

- ``image-dir``: a directory of ``.pgm`` (P5) or 8-bit ``.png`` frames,
  sorted by filename
- ``raw-planar``: ``"FOLD" | u32 width | u32 height | u32 frame_count |
  u32 fps_milli`` (little-endian) followed by ``frame_count`` planes
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np
from PIL import Image

from .config import Config
from .exceptions import (
    EmptySequenceError,
    MalformedHeaderError,
    MixedDimensionsError,
    VFoldIOError,
    VFoldValidationError,
)
from .utils import ensure_dir, get_logger, read_bytes, write_bytes

logger = get_logger(__name__)

FORMAT_IMAGE_DIR = "image-dir"
FORMAT_RAW_PLANAR = "raw-planar"
FORMATS = (FORMAT_IMAGE_DIR, FORMAT_RAW_PLANAR)

_HEADER = struct.Struct(Config.RAW_HEADER_FORMAT)


# =========================================================================
# DOMAIN TYPES
# =========================================================================

@dataclass(frozen=True, eq=False)
class Frame:
    """
    One grayscale frame.

    Attributes:
        data: ``uint8`` intensities, shape ``(height, width)``, read-only
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, copy=True)
        if data.ndim != 2:
            raise VFoldValidationError(
                "Frame data must be 2-D", context={"shape": tuple(data.shape)}
            )
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise VFoldValidationError(
                    "Frame intensities must lie in [0, 255]",
                    context={"min": float(data.min()), "max": float(data.max())},
                )
            data = data.astype(np.uint8)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        """``(height, width)``"""
        return self.height, self.width

    @classmethod
    def from_bytes(cls, payload: bytes, width: int, height: int) -> "Frame":
        """Build a frame from ``width * height`` row-major bytes."""
        if len(payload) != width * height:
            raise VFoldValidationError(
                f"Expected {width * height} bytes, got {len(payload)}"
            )
        return cls(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


@dataclass(eq=False)
class VideoSequence:
    """
    Ordered frames of one video.

    Attributes:
        frames: Frames in temporal order, all of one size
        fps: Frames per second (> 0)
        id: Video identifier (source file or directory name)
    """

    frames: List[Frame]
    fps: float = Config.DEFAULT_FPS
    id: str = ""
    _stack: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.frames = list(self.frames)
        if not self.frames:
            raise EmptySequenceError("Video sequence has no frames")
        shapes = sorted({frame.shape for frame in self.frames})
        if len(shapes) > 1:
            raise MixedDimensionsError(
                "Frames disagree on size",
                errors=[f"{w}x{h}" for h, w in shapes],
            )
        if not self.fps > 0:
            raise VFoldValidationError(f"fps must be > 0, got {self.fps}")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, index: int) -> Frame:
        return self.frames[index]

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def stack(self) -> np.ndarray:
        """All frames as one read-only ``(m, height, width)`` array."""
        if self._stack is None:
            stacked = np.stack([frame.data for frame in self.frames])
            stacked.setflags(write=False)
            self._stack = stacked
        return self._stack

    def require_min_frames(self, minimum: int = Config.MIN_FRAMES) -> "VideoSequence":
        """Raise EmptySequenceError when shorter than ``minimum`` frames."""
        if self.frame_count < minimum:
            raise EmptySequenceError(
                f"Sequence has {self.frame_count} frame(s), need at least {minimum}"
            )
        return self


# =========================================================================
# COLOUR REDUCTION
# =========================================================================

def luma(rgb: np.ndarray) -> np.ndarray:
    """
    Collapse an ``(h, w, 3)`` RGB array to 8-bit luma

    Integer arithmetic with round-half-up, so the result never depends on
    floating-point rounding.

    Example:
        >>> luma(np.array([[[255, 255, 255]]], dtype=np.uint8))
        array([[255]], dtype=uint8)
    """
    weights = [int(round(w * 1000)) for w in Config.LUMA_WEIGHTS]
    channels = rgb[..., :3].astype(np.int64)
    total = (
        weights[0] * channels[..., 0]
        + weights[1] * channels[..., 1]
        + weights[2] * channels[..., 2]
    )
    return ((total + 500) // 1000).astype(np.uint8)


def _read_image(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8)
            if img.mode in ("1", "LA"):
                return np.asarray(img.convert("L"), dtype=np.uint8)
            if img.mode in ("RGB", "RGBA", "P"):
                return luma(np.asarray(img.convert("RGB"), dtype=np.uint8))
            mode = img.mode
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="decode")
    raise VFoldValidationError(
        f"Unsupported image mode '{mode}' (need 8-bit grayscale or RGB)",
        context={"file": str(path)},
    )


# =========================================================================
# LOADING
# =========================================================================

def detect_format(path: Union[str, Path]) -> str:
    """
    Guess the source format of ``path``

    Files and directories holding ``frames.raw`` are raw-planar; any other
    directory is an image directory.
    """
    path = Path(path)
    if path.is_file() or (path / Config.RAW_FILENAME).is_file():
        return FORMAT_RAW_PLANAR
    return FORMAT_IMAGE_DIR


def _raw_file(path: Path) -> Path:
    return path / Config.RAW_FILENAME if path.is_dir() else path


def _sequence_id(path: Path) -> str:
    if path.name == Config.RAW_FILENAME:
        return path.parent.name
    return path.stem if path.is_file() else path.name


def load_raw(path: Union[str, Path]) -> VideoSequence:
    """
    Read a raw-planar file

    Raises:
        MalformedHeaderError: Bad magic, zero dimensions or wrong payload size
        EmptySequenceError: Fewer than two frames
        VFoldIOError: File cannot be read
    """
    path = _raw_file(Path(path))
    payload = read_bytes(path)

    if len(payload) < _HEADER.size:
        raise MalformedHeaderError(
            f"File shorter than the {_HEADER.size}-byte header", filepath=str(path)
        )
    magic, width, height, count, fps_milli = _HEADER.unpack_from(payload)
    if magic != Config.RAW_MAGIC:
        raise MalformedHeaderError(f"Bad magic {magic!r}", filepath=str(path))
    if width == 0 or height == 0:
        raise MalformedHeaderError(
            f"Zero frame dimension {width}x{height}", filepath=str(path)
        )
    if count < Config.MIN_FRAMES:
        raise EmptySequenceError(
            f"Header declares {count} frame(s), need at least {Config.MIN_FRAMES}",
            context={"file": str(path)},
        )

    plane = width * height
    expected = _HEADER.size + count * plane
    if len(payload) != expected:
        raise MalformedHeaderError(
            f"Payload is {len(payload)} bytes, header implies {expected}",
            filepath=str(path),
        )

    planes = np.frombuffer(payload, dtype=np.uint8, offset=_HEADER.size)
    planes = planes.reshape(count, height, width)
    fps = fps_milli / 1000.0 if fps_milli else Config.DEFAULT_FPS

    logger.debug("loaded %s: %d frames %dx%d @ %.3f fps", path, count, width, height, fps)
    return VideoSequence([Frame(p) for p in planes], fps=fps, id=_sequence_id(path))


def load_image_dir(path: Union[str, Path]) -> VideoSequence:
    """
    Read a directory of PGM / PNG frames in filename order

    Raises:
        MixedDimensionsError: Frames disagree on size
        EmptySequenceError: Fewer than two frames
        VFoldIOError: Directory or image cannot be read
    """
    path = Path(path)
    try:
        files = sorted(
            (p for p in path.iterdir()
             if p.is_file() and p.suffix.lower() in Config.IMAGE_SUFFIXES),
            key=lambda p: p.name,
        )
    except OSError as e:
        raise VFoldIOError(str(e), filepath=str(path), operation="list")

    if len(files) < Config.MIN_FRAMES:
        raise EmptySequenceError(
            f"Found {len(files)} frame image(s) in {path}, need at least {Config.MIN_FRAMES}"
        )

    frames = [Frame(_read_image(p)) for p in files]
    logger.debug("loaded %s: %d image frames", path, len(frames))
    return VideoSequence(frames, fps=Config.DEFAULT_FPS, id=path.name)


def load_sequence(path: Union[str, Path], format: str = None) -> VideoSequence:
    """
    Load a frame sequence

    Args:
        path: Raw-planar file, directory holding ``frames.raw``, or image directory
        format: ``image-dir`` or ``raw-planar``; detected from ``path`` when omitted

    Returns:
        VideoSequence with at least two frames

    Example:
        >>> video = load_sequence("scene_000/")
        >>> video.frame_count, video.width, video.height
        (40, 698, 528)
    """
    path = Path(path)
    if not path.exists():
        raise VFoldIOError("Path does not exist", filepath=str(path), operation="read")

    format = format or detect_format(path)
    if format == FORMAT_RAW_PLANAR:
        return load_raw(path)
    if format == FORMAT_IMAGE_DIR:
        return load_image_dir(path)
    raise VFoldValidationError(f"Unknown frame format '{format}'", errors=list(FORMATS))


# =========================================================================
# WRITING
# =========================================================================

def encode_raw(video: VideoSequence) -> bytes:
    """Raw-planar bytes for ``video``."""
    header = _HEADER.pack(
        Config.RAW_MAGIC,
        video.width,
        video.height,
        video.frame_count,
        int(round(video.fps * 1000)),
    )
    return header + video.stack().tobytes()


def write_sequence(video: VideoSequence, path: Union[str, Path]) -> Path:
    """
    Write ``video`` as raw-planar

    A directory target receives ``frames.raw``. Pixel payloads round-trip
    byte-for-byte through ``load_sequence``.
    """
    path = Path(path)
    if path.is_dir():
        path = path / Config.RAW_FILENAME
    write_bytes(path, encode_raw(video))
    return path


def write_image_dir(video: VideoSequence, path: Union[str, Path]) -> List[Path]:
    """Write one P5 PGM per frame, named ``frame_0000.pgm`` onwards."""
    # Import here to avoid circular dependency
    from .serializers.pnm import encode_pgm

    directory = ensure_dir(path)
    digits = max(4, len(str(video.frame_count - 1)))
    written = []
    for index, frame in enumerate(video.frames):
        target = directory / f"frame_{index:0{digits}d}.pgm"
        write_bytes(target, encode_pgm(frame.data, maxval=255))
        written.append(target)
    return written


def frames_from_array(stack: np.ndarray, fps: float = Config.DEFAULT_FPS,
                      id: str = "") -> VideoSequence:
    """Wrap an ``(m, height, width)`` array as a VideoSequence."""
    return VideoSequence([Frame(plane) for plane in stack], fps=fps, id=id)

