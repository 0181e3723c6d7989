"""Free-space propagation of sampled scalar fields and obstruction masks.

Propagation uses the band-limited angular-spectrum method: FFT the field,
advance every propagating plane-wave component by exp(j*dz*kz), zero the
evanescent components, and clip the transfer function beyond the
anti-aliasing band limit tied to the step size and grid extent.  Long hops
should be split into sub-steps (see ``propagate_to``) so the band limit
stays generous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, OutOfExtentError, PlaneMismatchError, SamplingError
from .field import ScalarField


def _spatial_frequencies(f: ScalarField):
    fx = np.fft.fftfreq(f.side, d=f.spacing)
    return np.meshgrid(fx, fx)  # FX varies along columns, FY along rows


def band_limit_frequency(f: ScalarField, dz: float) -> float:
    """Anti-aliasing limit on |fx| (and |fy|) for one step of length dz."""
    dfreq = 1.0 / f.extent
    return 1.0 / (math.sqrt((2.0 * dfreq * dz) ** 2 + 1.0) * f.wavelength)


def propagate(field: ScalarField, dz: float, band_limited: bool = True,
              max_truncation: float | None = None) -> ScalarField:
    """Field at z + dz via the (band-limited) angular-spectrum method.

    ``max_truncation``, if given, raises SamplingError when more than that
    fraction of the spectral power falls outside the retained band.
    """
    if dz <= 0:
        raise GeometryError("dz must be positive")
    FX, FY = _spatial_frequencies(field)
    inv_lam2 = 1.0 / field.wavelength ** 2
    kz_sq = inv_lam2 - FX ** 2 - FY ** 2
    propagating = kz_sq > 0

    keep = propagating
    if band_limited:
        f_lim = band_limit_frequency(field, dz)
        keep = keep & (np.abs(FX) <= f_lim) & (np.abs(FY) <= f_lim)

    spectrum = np.fft.fft2(field.samples)
    if max_truncation is not None:
        total = float(np.sum(np.abs(spectrum) ** 2))
        kept = float(np.sum(np.abs(spectrum[keep]) ** 2))
        if total > 0 and 1.0 - kept / total > max_truncation:
            raise SamplingError(
                "field angular bandwidth exceeds the grid's representable range")

    transfer = np.zeros_like(spectrum)
    kz = 2.0 * np.pi * np.sqrt(np.where(keep, kz_sq, 0.0))
    transfer[keep] = np.exp(1j * dz * kz[keep])
    out = np.fft.ifft2(spectrum * transfer)
    return field.with_samples(out, z=field.z_position + dz)


def propagate_to(field: ScalarField, z_target: float, max_step: float = 10.0,
                 edge_margin: float = 0.0) -> ScalarField:
    """Propagate to an absolute plane, splitting into steps of at most
    ``max_step``.  ``edge_margin`` > 0 applies a soft absorbing taper over
    that outer fraction of the grid after every step (suppresses wrap-around
    on long hops at the cost of strict power conservation)."""
    dz_total = z_target - field.z_position
    if dz_total <= 0:
        raise GeometryError("target plane must lie beyond the current plane")
    n_steps = max(1, math.ceil(dz_total / max_step))
    step = dz_total / n_steps
    out = field
    for _ in range(n_steps):
        out = propagate(out, step)
        if edge_margin > 0:
            out = _absorb_edges(out, edge_margin)
    return out


def _absorb_edges(field: ScalarField, margin: float) -> ScalarField:
    n = field.side
    m = max(2, int(margin * n))
    w = np.ones(n)
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(m) / m))
    w[:m] = ramp
    w[n - m:] = ramp[::-1]
    return field.with_samples(field.samples * np.outer(w, w))


def angular_bandlimit(field: ScalarField, theta_max: float) -> ScalarField:
    """Zero all plane-wave components steeper than ``theta_max`` (rad).

    Used to keep ring sources, which splat energy across the whole grid
    band, inside the paraxial cone the simulation cares about.
    """
    if not 0 < theta_max < np.pi / 2:
        raise GeometryError("theta_max must lie in (0, pi/2)")
    FX, FY = _spatial_frequencies(field)
    f_max = math.sin(theta_max) / field.wavelength
    keep = FX ** 2 + FY ** 2 <= f_max ** 2
    spectrum = np.fft.fft2(field.samples) * keep
    return field.with_samples(np.fft.ifft2(spectrum))


@dataclass(frozen=True)
class ObstructionMask:
    """Amplitude mask at one z-plane: ``transmittance`` inside the shape,
    unity outside."""

    shape: str                      # "disk" or "rectangle"
    center_x: float
    center_y: float
    size: tuple                     # (diameter,) or (width, height), m
    z_position: float
    transmittance: float = 0.0

    def __post_init__(self):
        if self.shape not in ("disk", "rectangle"):
            raise GeometryError(f"unknown mask shape '{self.shape}'")
        if any(s <= 0 for s in self.size):
            raise GeometryError("mask size must be positive")
        if self.shape == "disk" and len(self.size) != 1:
            raise GeometryError("disk mask takes (diameter,)")
        if self.shape == "rectangle" and len(self.size) != 2:
            raise GeometryError("rectangle mask takes (width, height)")
        if not 0.0 <= self.transmittance <= 1.0:
            raise GeometryError("transmittance must lie in [0, 1]")

    def transmittance_map(self, field: ScalarField) -> np.ndarray:
        X, Y = field.meshgrid()
        dx = X - self.center_x
        dy = Y - self.center_y
        if self.shape == "disk":
            inside = dx ** 2 + dy ** 2 <= (self.size[0] / 2.0) ** 2
        else:
            w, h = self.size
            inside = (np.abs(dx) <= w / 2.0) & (np.abs(dy) <= h / 2.0)
        tmap = np.ones_like(X)
        tmap[inside] = self.transmittance
        return tmap


def apply_mask(field: ScalarField, mask: ObstructionMask,
               atol: float = 1e-9) -> ScalarField:
    """Pointwise multiply the field by the mask's transmittance map."""
    if abs(mask.z_position - field.z_position) > atol:
        raise PlaneMismatchError(
            f"mask at z={mask.z_position} but field at z={field.z_position}")
    return field.with_samples(field.samples * mask.transmittance_map(field))


def sample_points(field: ScalarField, points) -> np.ndarray:
    """Bilinear interpolation of the complex grid at (x, y) positions."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    n = field.side
    half = n // 2
    fc = pts[:, 0] / field.spacing + half
    fr = pts[:, 1] / field.spacing + half
    if np.any(fc < 0) or np.any(fr < 0) or np.any(fc > n - 1) or np.any(fr > n - 1):
        raise OutOfExtentError("sample point outside the grid extent")
    c0 = np.minimum(np.floor(fc).astype(int), n - 2)
    r0 = np.minimum(np.floor(fr).astype(int), n - 2)
    wc = fc - c0
    wr = fr - r0
    u = field.samples
    return ((1 - wr) * (1 - wc) * u[r0, c0]
            + (1 - wr) * wc * u[r0, c0 + 1]
            + wr * (1 - wc) * u[r0 + 1, c0]
            + wr * wc * u[r0 + 1, c0 + 1])
