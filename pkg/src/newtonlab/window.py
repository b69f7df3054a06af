"""Rectangular viewing windows and the pixel-center map."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class Window:
    center: complex
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (self.width > 0 and self.height > 0):
            raise ValueError("window dimensions must be positive")
        if not (np.isfinite(self.width) and np.isfinite(self.height) and np.isfinite(self.center)):
            raise ValueError("window must be finite")

    @classmethod
    def from_bounds(cls, xmin: float, xmax: float, ymin: float, ymax: float) -> "Window":
        return cls(complex((xmin + xmax) / 2, (ymin + ymax) / 2), xmax - xmin, ymax - ymin)

    @classmethod
    def square(cls, half: float, center: complex = 0j) -> "Window":
        return cls(center, 2 * half, 2 * half)

    @classmethod
    def around(cls, points, margin: float = 0.0) -> "Window":
        """Bounding window of ``points`` enlarged by ``margin`` (fraction of the size)."""
        pts = np.asarray(points, dtype=np.complex128).ravel()
        xmin, xmax = pts.real.min(), pts.real.max()
        ymin, ymax = pts.imag.min(), pts.imag.max()
        w = max(xmax - xmin, 1e-12)
        h = max(ymax - ymin, 1e-12)
        return cls(complex((xmin + xmax) / 2, (ymin + ymax) / 2), w * (1 + margin), h * (1 + margin))

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        c = self.center
        return (c.real - self.width / 2, c.real + self.width / 2, c.imag - self.height / 2, c.imag + self.height / 2)

    def scaled(self, factor: float) -> "Window":
        return Window(self.center, self.width * factor, self.height * factor)

    def contains(self, zs) -> np.ndarray:
        xmin, xmax, ymin, ymax = self.bounds
        zs = np.asarray(zs)
        return (zs.real >= xmin) & (zs.real <= xmax) & (zs.imag >= ymin) & (zs.imag <= ymax)

    def pixel_centers(self, nx: int, ny: int) -> np.ndarray:
        """Array of shape (ny, nx); column i, row j (row 0 at the top)."""
        i = np.arange(nx)
        j = np.arange(ny)
        x = self.center.real + ((i + 0.5) / nx - 0.5) * self.width
        y = self.center.imag + (0.5 - (j + 0.5) / ny) * self.height
        return x[None, :] + 1j * y[:, None]

    def pixel_of(self, point: complex, nx: int, ny: int) -> Optional[Tuple[int, int]]:
        """(column, row) of the cell containing ``point``, or None when outside."""
        u = (point.real - self.center.real) / self.width + 0.5
        v = 0.5 - (point.imag - self.center.imag) / self.height
        if not (0 <= u <= 1 and 0 <= v <= 1):
            return None
        return min(int(u * nx), nx - 1), min(int(v * ny), ny - 1)

    def to_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        c = d["center"]
        return cls(complex(c[0], c[1]), float(d["width"]), float(d["height"]))
