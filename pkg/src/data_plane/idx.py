"""
IDX (MNIST-family) file loader.

Image files: big-endian int32 magic 0x00000803, count, rows, cols, then
count*rows*cols unsigned bytes. Label files: magic 0x00000801, count, then
count unsigned bytes.
"""

import struct
from pathlib import Path

import numpy as np

from src.data_plane.dataset import Dataset
from src.shared.exceptions import (
    DataError,
    IdxCountMismatchError,
    IdxMagicError,
    IdxTruncatedError,
)
from src.shared.logging import setup_logging
from src.tensor_core import as_tensor

logger = setup_logging("data_plane.idx", level="INFO")

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


def _read_header(data: bytes, path: Path, fields: int) -> tuple[int, ...]:
    size = 4 * fields
    if len(data) < size:
        raise IdxTruncatedError(f"{path}: header needs {size} bytes, file has {len(data)}")
    return struct.unpack(f">{fields}I", data[:size])


def _read_images(path: Path) -> np.ndarray:
    data = path.read_bytes()
    magic, count, rows, cols = _read_header(data, path, 4)
    if magic != IDX_IMAGE_MAGIC:
        raise IdxMagicError(f"{path}: magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}")
    expected = count * rows * cols
    payload = data[16:]
    if len(payload) < expected:
        raise IdxTruncatedError(f"{path}: expected {expected} pixel bytes, found {len(payload)}")
    pixels = np.frombuffer(payload, dtype=np.uint8, count=expected)
    return pixels.reshape(count, rows * cols)


def _read_labels(path: Path) -> np.ndarray:
    data = path.read_bytes()
    magic, count = _read_header(data, path, 2)
    if magic != IDX_LABEL_MAGIC:
        raise IdxMagicError(f"{path}: magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}")
    payload = data[8:]
    if len(payload) < count:
        raise IdxTruncatedError(f"{path}: expected {count} label bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8, count=count)


def load_idx(images_path: str | Path, labels_path: str | Path) -> Dataset:
    """
    Load an IDX image/label file pair.

    Pixels are flattened per image and scaled to [0, 1].

    Raises:
        IdxMagicError, IdxTruncatedError, IdxCountMismatchError: On malformed input.
        DataError: If a file does not exist.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    for p in (images_path, labels_path):
        if not p.is_file():
            raise DataError(f"IDX file not found: {p}")

    images = _read_images(images_path)
    labels = _read_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxCountMismatchError(
            f"{images_path} holds {images.shape[0]} images but "
            f"{labels_path} holds {labels.shape[0]} labels"
        )
    logger.info("Loaded %d IDX samples of dimension %d", images.shape[0], images.shape[1])
    return Dataset(as_tensor(images / 255.0), labels.astype(np.int64))
