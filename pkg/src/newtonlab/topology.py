"""Connected components, holes and basin audits on rendered basin grids.

Basin cells are connected under 4-connectivity; complements under
8-connectivity, so a diagonal pixel chain can never both connect and
separate. Hit-pole and undecided cells form the Julia proxy and never
belong to a basin component.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dynamics import HIT_POLE, UNDECIDED, BasinGrid, ppm_bytes, rgb_array
from .poly import RootSet
from .window import Window

FOUR = ndimage.generate_binary_structure(2, 1)
EIGHT = ndimage.generate_binary_structure(2, 2)
MIN_CELLS = 64
PROXY_LABELS = (HIT_POLE, UNDECIDED)
OUTLINE = (255, 0, 255)


@dataclass
class ComponentReport:
    id: int
    label: int
    cell_count: int
    touches_border: bool
    hole_count: int
    contains_root_index: Optional[int] = None
    bbox: tuple = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "cell_count": self.cell_count,
            "touches_border": self.touches_border,
            "hole_count": self.hole_count,
            "contains_root_index": self.contains_root_index,
        }


@dataclass
class Components:
    """Component-id image (``-1`` on the Julia proxy) and per-component reports."""

    image: np.ndarray
    reports: List[ComponentReport]

    def __len__(self) -> int:
        return len(self.reports)

    def mask(self, cid: int) -> np.ndarray:
        return self.image == cid

    def large(self, min_cells: int = MIN_CELLS) -> List[ComponentReport]:
        return [r for r in self.reports if r.cell_count >= min_cells]


def _labels(grid) -> np.ndarray:
    return np.asarray(grid.labels if isinstance(grid, BasinGrid) else grid)


def count_holes(mask: np.ndarray) -> int:
    """Complement blobs (8-connected) of ``mask`` not reachable from the frame."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return 0
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    crop = mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    comp = ~np.pad(crop, 1)
    lab, n = ndimage.label(comp, structure=EIGHT)
    # the padded frame is one connected blob, labelled 1 by raster order
    return n - 1


def euler_holes(mask: np.ndarray) -> int:
    """Hole count of a single 4-connected blob via bit-quad (Euler number) counting."""
    m = np.pad(np.asarray(mask, dtype=np.int8), 1)
    a, b = m[:-1, :-1], m[:-1, 1:]
    c, d = m[1:, :-1], m[1:, 1:]
    s = a + b + c + d
    q1 = int(np.sum(s == 1))
    q3 = int(np.sum(s == 3))
    qd = int(np.sum((s == 2) & (a == d)))
    euler = (q1 - q3 + 2 * qd) // 4
    return 1 - euler


def label_components(grid, roots: Optional[RootSet] = None, window: Optional[Window] = None,
                     with_holes: bool = True) -> Components:
    """Connected components of equal-label basin cells, ids in raster-scan order.

    Parameters
    ----------
    grid : BasinGrid or 2-D int array
    roots, window : optional
        Taken from the grid when omitted. Used to mark the component
        containing each root's pixel.
    with_holes : bool
        Compute ``hole_count`` for every component (the expensive part).
    """
    labels = _labels(grid)
    if isinstance(grid, BasinGrid):
        roots = grid.roots if roots is None else roots
        window = grid.window if window is None else window
    ny, nx = labels.shape
    basin = ~np.isin(labels, PROXY_LABELS)
    tmp = np.zeros(labels.shape, dtype=np.int64)
    offset = 0
    for lab in np.unique(labels[basin]):
        sub, n = ndimage.label(labels == lab, structure=FOUR)
        tmp[sub > 0] = sub[sub > 0] + offset
        offset += n
    flat = tmp.ravel()
    ids, first = np.unique(flat, return_index=True)
    keep = ids > 0
    ids, first = ids[keep], first[keep]
    order = ids[np.argsort(first)]
    remap = np.full(offset + 1, -1, dtype=np.int64)
    remap[order] = np.arange(order.size)
    image = remap[tmp].astype(np.int32)

    counts = np.bincount(image[image >= 0].ravel(), minlength=order.size)
    border = np.zeros(order.size, dtype=bool)
    edge = np.concatenate([image[0], image[-1], image[:, 0], image[:, -1]])
    border[np.unique(edge[edge >= 0])] = True
    slices = ndimage.find_objects(image + 1)
    reports = []
    for cid in range(order.size):
        sl = slices[cid]
        sub = image[sl] == cid
        r, c = np.unravel_index(np.argmax(sub), sub.shape)
        holes = count_holes(sub) if with_holes else 0
        reports.append(ComponentReport(cid, int(labels[sl][r, c]), int(counts[cid]), bool(border[cid]), holes,
                                       None, (sl[0].start, sl[0].stop, sl[1].start, sl[1].stop)))
    if roots is not None and window is not None:
        for k, (root, _) in enumerate(roots):
            pix = window.pixel_of(root, nx, ny)
            if pix is not None and image[pix[1], pix[0]] >= 0:
                rep = reports[image[pix[1], pix[0]]]
                if rep.contains_root_index is None:
                    rep.contains_root_index = k
    return Components(image, reports)


# --------------------------------------------------------------------------
# Audits


@dataclass
class AuditReport:
    components: List[ComponentReport]
    passed: bool
    notes: List[str] = field(default_factory=list)
    holey: List[int] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"components": [c.to_dict() for c in self.components], "pass": bool(self.passed),
               "notes": list(self.notes)}
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def hole_mask(mask: np.ndarray) -> np.ndarray:
    """Cells enclosed by ``mask`` (its 8-connected complement blobs cut off from the frame)."""
    lab, _ = ndimage.label(~np.pad(np.asarray(mask, dtype=bool), 1), structure=EIGHT)
    return lab[1:-1, 1:-1] > 1


def _enclosed(comps: Components, ids) -> np.ndarray:
    out = np.zeros(comps.image.shape, dtype=bool)
    for cid in ids:
        r0, r1, c0, c1 = comps.reports[cid].bbox
        out[r0:r1, c0:c1] |= hole_mask(comps.image[r0:r1, c0:c1] == cid)
    return out


def persisting_holes(coarse: Components, ids, fine: Components) -> List[int]:
    """Ids of coarse components whose holes are still enclosed at twice the resolution.

    A coarse hole persists when some of its upsampled cells lie in a hole of
    a fine component carrying the same basin label.
    """
    fy, fx = fine.image.shape
    cy, cx = coarse.image.shape
    if (fy, fx) != (2 * cy, 2 * cx):
        raise ValueError(f"re-rendered grid must be 2x: got {fx}x{fy} for {cx}x{cy}")
    out = []
    for cid in ids:
        label = coarse.reports[cid].label
        holes = np.kron(_enclosed(coarse, [cid]), np.ones((2, 2), dtype=bool))
        same = [r.id for r in fine.reports if r.label == label and r.hole_count > 0]
        if (holes & _enclosed(fine, same)).any():
            out.append(cid)
    return out


def audit_connectivity(grid, roots: Optional[RootSet] = None, min_cells: int = MIN_CELLS,
                       rerender: Optional[Callable[[], BasinGrid]] = None,
                       components: Optional[Components] = None) -> AuditReport:
    """PASS iff every component with at least ``min_cells`` cells is hole-free.

    Parameters
    ----------
    grid : BasinGrid or 2-D int array
    roots : RootSet, optional
    min_cells : int
        Smaller components are pixel dust and are not judged.
    rerender : callable, optional
        Returns the same view at twice the resolution. Called at most once,
        only when holey components are found. Holes that are no longer
        enclosed at the finer scale are classed as resolution artifacts and
        do not fail the audit.
    components : Components, optional
        Precomputed labelling of ``grid``.

    Returns
    -------
    AuditReport
        ``holey`` lists the ids judged genuinely holey; ``extra`` carries the
        raw single-resolution hole list and any artifacts.
    """
    comps = components or label_components(grid, roots)
    large = comps.large(min_cells)
    raw = [r.id for r in large if r.hole_count > 0]
    notes = [f"{len(comps)} components, {len(large)} with >= {min_cells} cells"]
    listed = sorted({r.id for r in large} | {r.id for r in comps.reports if r.hole_count > 0})
    extra = {"n_components": len(comps), "n_large": len(large), "min_cells": min_cells, "raw_holey": raw}
    holey = list(raw)
    if raw:
        notes.append(f"{len(raw)} holey component(s) at this resolution: " + ", ".join(map(str, raw)))
        if rerender is not None:
            fine = label_components(rerender())
            holey = persisting_holes(comps, raw, fine)
            artifacts = [i for i in raw if i not in holey]
            extra["artifacts"] = artifacts
            extra["rerendered"] = True
            notes.append(f"re-rendered at 2x: {len(artifacts)} resolution artifact(s), "
                         f"{len(holey)} persisting hole(s)")
        else:
            notes.append("holes may be resolution artifacts; re-render at 2x resolution to confirm")
    if not holey:
        notes.append("consistent with simply connected basin components at this resolution")
    return AuditReport([comps.reports[i] for i in listed], not holey, notes, holey, extra)


def audit_unboundedness(grid, roots: Optional[RootSet] = None, window: Optional[Window] = None,
                        components: Optional[Components] = None) -> AuditReport:
    """PASS iff the component holding each root's pixel touches the grid border.

    Raises
    ------
    ValueError
        If a root lies outside the window.
    """
    if isinstance(grid, BasinGrid):
        roots = grid.roots if roots is None else roots
        window = grid.window if window is None else window
    if roots is None or window is None:
        raise ValueError("roots and window are required")
    labels = _labels(grid)
    ny, nx = labels.shape
    pixels = []
    for k, (root, _) in enumerate(roots):
        pix = window.pixel_of(root, nx, ny)
        if pix is None:
            raise ValueError(f"root {k} at {root} lies outside the window")
        pixels.append(pix)
    comps = components or label_components(grid, roots, window, with_holes=False)
    per_root = []
    notes = []
    ok = True
    used = []
    for k, (root, _) in enumerate(roots):
        col, row = pixels[k]
        cid = int(comps.image[row, col])
        if cid < 0:
            good = False
            detail = "root pixel lies in the Julia proxy"
        else:
            rep = comps.reports[cid]
            good = rep.touches_border
            detail = f"component {cid} ({rep.cell_count} cells)"
            used.append(cid)
        per_root.append({"root_index": k, "re": root.real, "im": root.imag, "pass": good, "detail": detail})
        ok &= good
        if not good:
            notes.append(f"root {k}: immediate basin looks bounded; enlarge the window 2x and re-check")
    return AuditReport([comps.reports[i] for i in sorted(set(used))], ok, notes, extra={"roots": per_root})


# --------------------------------------------------------------------------
# Images


def outline_mask(mask: np.ndarray) -> np.ndarray:
    """Cells of ``mask`` with a 4-neighbour outside it."""
    return mask & ~ndimage.binary_erosion(mask, structure=FOUR, border_value=0)


def annotated_image(grid: BasinGrid, palette: Sequence, components: Components, ids: Sequence[int],
                    special_colors: Optional[dict] = None, color=OUTLINE) -> bytes:
    """PPM of the grid with the listed components outlined."""
    rgb = rgb_array(grid, palette, special_colors)
    for cid in ids:
        rgb[outline_mask(components.mask(cid))] = color
    return ppm_bytes(rgb)


# --------------------------------------------------------------------------
# Estimator


class BasinAuditor(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the grid audits.

    Parameters
    ----------
    min_cells : int
        Components smaller than this are ignored by the connectivity audit.
    check_unbounded : bool
        Also run the unboundedness audit (needs roots and a window).
    rerender : callable, optional
        Zero-argument callable returning the fitted view at 2x resolution;
        used once to sort genuine holes from resolution artifacts.

    Attributes
    ----------
    components_ : Components
    connectivity_ : AuditReport
    unboundedness_ : AuditReport or None
    passed_ : bool
    """

    def __init__(self, min_cells: int = MIN_CELLS, check_unbounded: bool = True, rerender=None):
        self.min_cells = min_cells
        self.check_unbounded = check_unbounded
        self.rerender = rerender

    def fit(self, X, y=None):
        if not isinstance(X, BasinGrid):
            X = BasinGrid.from_dict({"labels": np.asarray(X).tolist()})
        self.components_ = label_components(X)
        self.connectivity_ = audit_connectivity(X, min_cells=self.min_cells, rerender=self.rerender,
                                               components=self.components_)
        self.unboundedness_ = None
        if self.check_unbounded and len(X.roots):
            self.unboundedness_ = audit_unboundedness(X, components=self.components_)
        self.passed_ = self.connectivity_.passed and (self.unboundedness_ is None or self.unboundedness_.passed)
        return self

    def transform(self, X) -> np.ndarray:
        """Component-id image of ``X`` (``-1`` on the Julia proxy)."""
        check_is_fitted(self, "components_")
        return label_components(X, with_holes=False).image

    def report(self) -> dict:
        check_is_fitted(self, "components_")
        out = {"connectivity": self.connectivity_.to_dict(), "pass": bool(self.passed_)}
        if self.unboundedness_ is not None:
            out["unboundedness"] = self.unboundedness_.to_dict()
        return out


__all__ = [
    "ComponentReport",
    "Components",
    "AuditReport",
    "BasinAuditor",
    "label_components",
    "count_holes",
    "hole_mask",
    "persisting_holes",
    "euler_holes",
    "audit_connectivity",
    "audit_unboundedness",
    "annotated_image",
    "outline_mask",
]
