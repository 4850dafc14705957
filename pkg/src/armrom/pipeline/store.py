"""On-disk snapshot store: ``.arms`` matrices plus a JSON manifest.

``.arms`` layout (little-endian): magic ``ARMS``, uint32 format version,
uint64 rows, uint64 cols, then rows*cols float64 values in column-major order.
"""
import hashlib
import json
import os
import struct

import numpy as np

from ..errors import ConfigError, InvalidInput

MAGIC = b"ARMS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
RNG_ALGORITHM = "numpy.random.PCG64"


def write_arms(path, matrix):
    a = np.asarray(matrix, dtype="<f8")
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidInput("only matrices can be stored")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, a.shape[0], a.shape[1]))
        fh.write(np.asfortranarray(a).tobytes(order="F"))


def read_arms(path, mmap=False):
    """Matrix stored at ``path``; ``mmap`` returns a read-only memory map instead of a copy."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise InvalidInput(f"{path}: truncated header")
        magic, version, rows, cols = _HEADER.unpack(head)
        if magic != MAGIC:
            raise InvalidInput(f"{path}: not an ARMS file")
        if version != FORMAT_VERSION:
            raise InvalidInput(f"{path}: unsupported ARMS version {version}")
        if mmap:
            size = os.fstat(fh.fileno()).st_size - _HEADER.size
            if size != 8 * rows * cols:
                raise InvalidInput(f"{path}: expected {rows * cols} values, found {size // 8}")
            if rows * cols == 0:
                return np.zeros((rows, cols))
            return np.memmap(path, dtype="<f8", mode="r", offset=_HEADER.size,
                             shape=(rows, cols), order="F")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != rows * cols:
        raise InvalidInput(f"{path}: expected {rows * cols} values, found {data.size}")
    return data.reshape((rows, cols), order="F").astype(float)


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class SnapshotStore:
    """Directory holding named matrices and a manifest describing them."""

    def __init__(self, root):
        self.root = root

    def path(self, name):
        return os.path.join(self.root, name + ".arms")

    @property
    def manifest_path(self):
        return os.path.join(self.root, "manifest.json")

    def put(self, name, matrix):
        """Write one matrix and return its checksum."""
        os.makedirs(self.root, exist_ok=True)
        write_arms(self.path(name), matrix)
        return sha256(self.path(name))

    def write(self, arrays, meta, files=None):
        """Write every matrix in ``arrays`` (name -> array) and the manifest.

        ``files`` lists checksums of matrices already written with :meth:`put`.
        """
        os.makedirs(self.root, exist_ok=True)
        files = dict(files or {})
        for name in sorted(arrays):
            files[name] = self.put(name, arrays[name])
        manifest = dict(meta)
        manifest["format"] = {"magic": "ARMS", "version": FORMAT_VERSION}
        manifest["files"] = files
        with open(self.manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return manifest

    def manifest(self):
        try:
            with open(self.manifest_path) as fh:
                return json.load(fh)
        except OSError as exc:
            raise ConfigError(f"no snapshot store at {self.root}") from exc

    def load(self, verify=True, mmap=False):
        """(arrays, manifest); checksums are verified unless ``verify`` is false.

        With ``mmap`` the matrices are read-only memory maps.
        """
        man = self.manifest()
        arrays = {}
        for name, digest in man["files"].items():
            if verify and sha256(self.path(name)) != digest:
                raise InvalidInput(f"checksum mismatch for {name}")
            arrays[name] = read_arms(self.path(name), mmap)
        return arrays, man
