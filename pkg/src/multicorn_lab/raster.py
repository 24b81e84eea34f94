"""Parameter-plane rasters for multibrot, multicorn and real-cubic loci."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .errors import ContractViolation


@dataclass(frozen=True)
class Family:
    name: str  # "multibrot", "multicorn" or "real_cubic"
    d: int = 3

    @property
    def code(self) -> int:
        return {"multibrot": K.HOLO, "multicorn": K.ANTI, "real_cubic": K.CUBIC}[self.name]

    def __str__(self) -> str:
        return "real_cubic" if self.name == "real_cubic" else f"{self.name}({self.d})"


def multibrot(d: int = 2) -> Family:
    return Family("multibrot", d)


def multicorn(d: int = 2) -> Family:
    return Family("multicorn", d)


def real_cubic() -> Family:
    return Family("real_cubic", 3)


def parse_family(text: str) -> Family:
    """Accepts ``multibrot``, ``multicorn:3``, ``multicorn(3)``, ``real_cubic``, ``tricorn``."""
    t = text.strip().lower().replace("(", ":").replace(")", "")
    name, _, deg = t.partition(":")
    if name == "tricorn":
        return multicorn(2)
    if name in ("real_cubic", "cubic"):
        return real_cubic()
    if name in ("multibrot", "multicorn"):
        d = int(deg) if deg else 2
        if d < 2:
            raise ContractViolation("degree must be at least 2")
        return Family(name, d)
    raise ContractViolation(f"unknown family {text!r}")


@dataclass(frozen=True)
class Window:
    """Axis-aligned parameter window; ``center`` packs ``a + ib`` for real cubics."""

    center: complex
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ContractViolation("window extents must be positive")
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def from_bounds(cls, x0: float, x1: float, y0: float, y1: float) -> "Window":
        return cls(complex((x0 + x1) / 2, (y0 + y1) / 2), x1 - x0, y1 - y0)

    @property
    def left(self) -> float:
        return self.center.real - self.width / 2

    @property
    def top(self) -> float:
        return self.center.imag + self.height / 2

    def pixel_center(self, px: int, py: int, width_px: int, height_px: int) -> complex:
        """Row 0 is the top edge (largest imaginary part).

        Offsets are measured from the center so that mirrored pixels get
        exactly negated offsets.
        """
        dx = self.width / width_px
        dy = self.height / height_px
        return complex(
            self.center.real + (2 * px + 1 - width_px) * 0.5 * dx,
            self.center.imag - (2 * py + 1 - height_px) * 0.5 * dy,
        )


@dataclass(frozen=True)
class CellClass:
    tag: str  # "exterior", "interior", "unknown"; "captured" only in renormalization rasters
    value: int = 0

    @classmethod
    def exterior(cls, escape_time: int) -> "CellClass":
        return cls("exterior", int(escape_time))

    @classmethod
    def interior(cls, period: int) -> "CellClass":
        return cls("interior", int(period))

    @classmethod
    def unknown(cls) -> "CellClass":
        return cls("unknown", 0)

    @classmethod
    def from_code(cls, kind: int, value: int) -> "CellClass":
        if kind == K.EXTERIOR:
            return cls.exterior(value)
        if kind == K.INTERIOR:
            return cls.interior(value)
        if kind == K.CAPTURED:
            return cls("captured", 0)
        return cls.unknown()


_TAG_NAMES = {
    K.EXTERIOR: "exterior", K.INTERIOR: "interior", K.UNKNOWN: "unknown", K.CAPTURED: "captured",
}


@dataclass(frozen=True, eq=False)
class Raster:
    width_px: int
    height_px: int
    window: Window
    kinds: np.ndarray  # int8, shape (height_px, width_px)
    values: np.ndarray  # int32, same shape
    label: str = ""

    def cell(self, px: int, py: int) -> CellClass:
        return CellClass.from_code(int(self.kinds[py, px]), int(self.values[py, px]))

    @property
    def cells(self) -> list:
        """Row-major list of :class:`CellClass` (materialised on demand)."""
        return [self.cell(px, py) for py in range(self.height_px) for px in range(self.width_px)]

    def interior_mask(self, period: int) -> np.ndarray:
        return (self.kinds == K.INTERIOR) & (self.values == period)

    def parameter(self, px: int, py: int) -> complex:
        return self.window.pixel_center(px, py, self.width_px, self.height_px)

    def to_ppm(self) -> bytes:
        return ppm_bytes(self)

    def to_csv(self, coords: str = "re,im") -> str:
        return csv_text(self, coords)


def classify_parameter(family: Family, point: Union[complex, tuple], max_iter: int) -> CellClass:
    """Critical-orbit classification of one parameter (``(a, b)`` for real cubics)."""
    if max_iter < 1:
        raise ContractViolation("max_iter must be >= 1")
    if isinstance(point, tuple):
        point = complex(point[0], point[1])
    kind, value = K.classify(family.code, family.d, complex(point), 1, int(max_iter))
    return CellClass.from_code(kind, value)


def render_locus(
    family: Family,
    window: Window,
    width_px: int,
    height_px: int,
    max_iter: int,
    threads: Optional[int] = None,
) -> Raster:
    if width_px < 1 or height_px < 1:
        raise ContractViolation("resolution must be at least 1x1")
    if max_iter < 1:
        raise ContractViolation("max_iter must be >= 1")
    kinds = np.empty((height_px, width_px), dtype=np.int8)
    values = np.empty((height_px, width_px), dtype=np.int32)
    K.set_threads(threads)
    K.render(
        family.code, family.d, 1,
        window.center.real, window.center.imag,
        window.width / width_px, window.height / height_px,
        width_px, height_px, int(max_iter), kinds, values,
    )
    return Raster(width_px, height_px, window, kinds, values, str(family))


def _structure(connectivity: int) -> np.ndarray:
    if connectivity not in (4, 8):
        raise ContractViolation("connectivity must be 4 or 8")
    return ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)


def component_census(raster: Raster, period: int, connectivity: int = 8) -> int:
    """Number of connected components of ``Interior(period)`` cells.

    Cusp spikes are one pixel wide along diagonals, so 4-connectivity splits
    them off as separate components; ``connectivity=8`` keeps them attached.
    """
    _, count = ndimage.label(raster.interior_mask(period), structure=_structure(connectivity))
    return int(count)


def component_labels(raster: Raster, period: int, connectivity: int = 8) -> tuple:
    return ndimage.label(raster.interior_mask(period), structure=_structure(connectivity))


# ---------------------------------------------------------------------------
# output

PALETTE = np.array(
    [
        (0, 0, 0), (230, 25, 75), (60, 180, 75), (255, 225, 25),
        (0, 130, 200), (245, 130, 48), (145, 30, 180), (70, 240, 240),
        (240, 50, 230), (210, 245, 60), (250, 190, 212), (0, 128, 128),
        (220, 190, 255), (170, 110, 40), (255, 250, 200), (128, 0, 0),
    ],
    dtype=np.uint8,
)


def rgb_image(raster: Raster) -> np.ndarray:
    img = np.zeros((raster.height_px, raster.width_px, 3), dtype=np.uint8)
    ext = raster.kinds == K.EXTERIOR
    gray = (raster.values % 256).astype(np.uint8)
    img[ext] = gray[ext][:, None]
    inter = raster.kinds == K.INTERIOR
    img[inter] = PALETTE[raster.values[inter] % 16]
    img[raster.kinds == K.CAPTURED] = (96, 96, 96)
    return img


def ppm_bytes(raster: Raster) -> bytes:
    header = f"P6\n{raster.width_px} {raster.height_px}\n255\n".encode("ascii")
    return header + rgb_image(raster).tobytes()


def write_ppm(raster: Raster, path) -> None:
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(raster))


def csv_text(raster: Raster, coords: str = "re,im") -> str:
    out = io.StringIO()
    out.write(f"px,py,{coords},class,value\n")
    for py in range(raster.height_px):
        for px in range(raster.width_px):
            p = raster.parameter(px, py)
            kind = int(raster.kinds[py, px])
            out.write(
                f"{px},{py},{p.real!r},{p.imag!r},{_TAG_NAMES[kind]},{int(raster.values[py, px])}\n"
            )
    return out.getvalue()


def write_csv(raster: Raster, path, coords: str = "re,im") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(raster, coords))
