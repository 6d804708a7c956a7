import hashlib
from typing import Iterable

_CHUNK = 4096


def window_digest(header: str, *windows: Iterable[int]) -> str:
    """SHA-256 over a header line and comma-separated decimal coefficient windows."""
    h = hashlib.sha256(header.encode())
    for window in windows:
        h.update(b"\n")
        buf = []
        for v in window:
            buf.append(str(int(v)))
            if len(buf) >= _CHUNK:
                h.update((",".join(buf) + ",").encode())
                buf = []
        h.update(",".join(buf).encode())
    return "sha256:" + h.hexdigest()
