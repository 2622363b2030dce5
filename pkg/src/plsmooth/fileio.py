"""PNG (8/16-bit) and PFM reading and writing."""
from __future__ import annotations

import os
import re
from pathlib import Path

import cv2
import numpy as np

from .errors import FormatError, IoError
from .image import ImageBuffer

KINDS = ("png8", "png16", "pfm")

_PNG_MAX = {"png8": 255.0, "png16": 65535.0}
_PNG_DTYPE = {"png8": np.uint8, "png16": np.uint16}


def kind_from_path(path, bits: int = 8) -> str:
    ext = Path(path).suffix.lower()
    if ext == ".pfm":
        return "pfm"
    if ext == ".png":
        return "png16" if bits == 16 else "png8"
    raise FormatError(f"cannot infer image kind from extension {ext!r}")


def load_image(path, kind: str | None = None) -> ImageBuffer:
    """Read ``path``; with ``kind=None`` the kind comes from the extension and PNG depth from the file."""
    path = Path(path)
    if kind is None:
        kind = kind_from_path(path)
        if kind == "png8":
            kind = None
    if kind not in KINDS and kind is not None:
        raise ValueError(f"unknown image kind {kind!r}")
    if not path.is_file() or not os.access(path, os.R_OK):
        raise IoError(f"cannot read {path}")
    if kind == "pfm":
        return _read_pfm(path)
    return _read_png(path, kind)


def save_image(img: ImageBuffer, path, kind: str | None = None) -> None:
    path = Path(path)
    if kind is None:
        kind = kind_from_path(path)
    if kind not in KINDS:
        raise ValueError(f"unknown image kind {kind!r}")
    if kind == "pfm":
        _write_pfm(img, path)
    else:
        _write_png(img, path, kind)


def quantize(data: np.ndarray, kind: str) -> np.ndarray:
    """Clamp to [0, 1] and round half away from zero to the integer code range."""
    top = _PNG_MAX[kind]
    codes = np.floor(np.clip(data, 0.0, 1.0) * top + 0.5)
    return codes.astype(_PNG_DTYPE[kind])


def png_kind(path) -> str:
    """``"png8"`` or ``"png16"`` according to the sample depth stored in the file."""
    raw = _imread(Path(path))
    for kind, dtype in _PNG_DTYPE.items():
        if raw.dtype == dtype:
            return kind
    raise FormatError(f"{path}: unsupported PNG sample type {raw.dtype}")


def _imread(path: Path) -> np.ndarray:
    if not path.is_file() or not os.access(path, os.R_OK):
        raise IoError(f"cannot read {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FormatError(f"{path} is not a readable PNG")
    return raw


def _read_png(path: Path, kind: str | None) -> ImageBuffer:
    raw = _imread(path)
    if kind is None:
        kind = next((k for k, d in _PNG_DTYPE.items() if raw.dtype == d), None)
        if kind is None:
            raise FormatError(f"{path}: unsupported PNG sample type {raw.dtype}")
    if raw.dtype != _PNG_DTYPE[kind]:
        raise FormatError(f"{path} has sample type {raw.dtype}, expected {kind}")
    if raw.ndim == 3:
        if raw.shape[2] == 2:
            raw = raw[:, :, 0]
        else:
            raw = cv2.cvtColor(raw[:, :, :3], cv2.COLOR_BGR2RGB)
    return ImageBuffer.from_array(raw.astype(np.float64) / _PNG_MAX[kind], (0.0, 1.0))


def _write_png(img: ImageBuffer, path: Path, kind: str) -> None:
    codes = quantize(img.hwc(), kind)
    if codes.shape[2] == 3:
        codes = cv2.cvtColor(codes, cv2.COLOR_RGB2BGR)
    else:
        codes = codes[:, :, 0]
    try:
        ok = cv2.imwrite(str(path), np.ascontiguousarray(codes))
    except cv2.error as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    if not ok:
        raise IoError(f"cannot write {path}")


def _read_pfm(path: Path) -> ImageBuffer:
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    m = re.match(rb"(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s", blob)
    if m is None:
        raise FormatError(f"{path}: malformed PFM header")
    channels = 3 if m.group(1) == b"PF" else 1
    width, height = int(m.group(2)), int(m.group(3))
    try:
        scale = float(m.group(4))
    except ValueError as exc:
        raise FormatError(f"{path}: bad PFM scale {m.group(4)!r}") from exc
    if width < 1 or height < 1 or scale == 0:
        raise FormatError(f"{path}: bad PFM dimensions or scale")
    dtype = np.dtype("<f4" if scale < 0 else ">f4")
    count = width * height * channels
    body = blob[m.end():]
    if len(body) < count * 4:
        raise FormatError(f"{path}: truncated PFM data")
    samples = np.frombuffer(body, dtype=dtype, count=count).astype(np.float64)
    if not np.all(np.isfinite(samples)):
        raise FormatError(f"{path}: PFM contains non-finite samples")
    # PFM rows run bottom to top.
    hwc = samples.reshape(height, width, channels)[::-1]
    lo, hi = float(samples.min()), float(samples.max())
    if hi <= lo:
        hi = lo + max(abs(lo), 1.0) * 1e-6
    return ImageBuffer.from_array(hwc, (lo, hi))


def _write_pfm(img: ImageBuffer, path: Path) -> None:
    tag = b"PF" if img.channels == 3 else b"Pf"
    header = tag + b"\n%d %d\n-1.0\n" % (img.width, img.height)
    body = np.ascontiguousarray(img.hwc()[::-1], dtype="<f4").tobytes()
    try:
        path.write_bytes(header + body)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
