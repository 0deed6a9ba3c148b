"""Radial interaction potentials and their pointwise gradients.

All potentials are radial, vanish at the origin, and have a bounded, possibly
discontinuous gradient.  The solver never needs the gradient at the origin
itself; following the usual convention for pointy potentials we define a
"hatted" gradient that is exactly zero there, which is what ``grad_hat``
returns.  Supported kinds:

``zero``
    No interaction, ``W = 0``.
``newtonian``
    ``W(x) = c|x|``.  Constant attraction of strength ``c``.
``exponential``
    ``W(x) = c(1 - exp(-|x|))``.  Attraction decaying with distance.
``fly_and_regroup``
    ``W(x) = c(1 - (|x|+1) exp(-|x|))``.  Repels at short range relative to
    the other kinds (the gradient vanishes at the origin smoothly) while still
    attracting at long range; the gradient magnitude peaks at ``|x| = 1``.

Points are passed as arrays whose last axis is the spatial dimension; a bare
scalar is treated as a one-dimensional point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError

KINDS = ("zero", "newtonian", "exponential", "fly_and_regroup")


@dataclass(frozen=True)
class Potential:
    """A radial potential of one of the supported kinds with strength ``scale``."""

    kind: str
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}, expected one of {KINDS}")
        scale = float(self.scale)
        if self.kind == "zero":
            scale = 0.0
        elif not np.isfinite(scale) or scale <= 0.0:
            raise ValueError(f"potential scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "scale", scale)

    def __str__(self) -> str:
        return f"{self.kind}(scale={self.scale})"

    @property
    def lipschitz_bound(self) -> float:
        """Supremum of the gradient magnitude over all of space.

        ``zero``: 0, ``newtonian``: c, ``exponential``: c (approached at the
        origin), ``fly_and_regroup``: c/e (attained at radius 1).
        """
        c = self.scale
        if self.kind == "zero":
            return 0.0
        if self.kind in ("newtonian", "exponential"):
            return c
        return c * math.exp(-1.0)

    @property
    def convexity_lower_bound(self) -> float:
        """Lower bound on the Hessian eigenvalues away from the origin.

        Diagnostic metadata only; the solver does not use it.  For the radial
        profiles here the eigenvalues are ``w''(r)`` and ``w'(r)/r``, giving
        0 for ``zero`` and ``newtonian``, ``-c`` for ``exponential`` (at the
        origin) and ``-c exp(-2)`` for ``fly_and_regroup`` (at radius 2).
        """
        c = self.scale
        if self.kind in ("zero", "newtonian"):
            return 0.0
        if self.kind == "exponential":
            return -c
        return -c * math.exp(-2.0)

    def _radii(self, points: np.ndarray) -> np.ndarray:
        if points.ndim == 0:
            return np.abs(points)
        if points.shape[-1] == 1:
            # abs is exact where sqrt(x*x) can be off by an ulp.
            return np.abs(points[..., 0])
        return np.sqrt(np.sum(points * points, axis=-1))

    def radial_profile(self, r) -> np.ndarray:
        """Potential value as a function of radius ``r >= 0``."""
        r = np.asarray(r, dtype=float)
        c = self.scale
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "newtonian":
            return c * r
        if self.kind == "exponential":
            return c * (1.0 - np.exp(-r))
        return c * (1.0 - (r + 1.0) * np.exp(-r))

    def gradient_magnitude_profile(self, r) -> np.ndarray:
        """Gradient magnitude as a function of radius ``r > 0``."""
        r = np.asarray(r, dtype=float)
        c = self.scale
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "newtonian":
            return np.full_like(r, c)
        if self.kind == "exponential":
            return c * np.exp(-r)
        return c * r * np.exp(-r)

    def evaluate(self, points) -> np.ndarray:
        """Potential value at each point; shape is ``points.shape[:-1]``."""
        pts = np.asarray(points, dtype=float)
        return self.radial_profile(self._radii(pts))

    def grad_hat(self, points) -> np.ndarray:
        """Gradient at each point, with the origin mapped to the zero vector.

        The returned array has the same shape as ``points``.  The hatted
        convention keeps the gradient odd and bounded even for kinds whose
        true gradient jumps at the origin.
        """
        pts = np.asarray(points, dtype=float)
        r = self._radii(pts)
        if self.kind == "zero":
            return np.zeros_like(pts)
        # Unit direction times the radial magnitude, rather than
        # pts * (magnitude / r): along an axis the direction is exactly
        # +-1, so opposite pulls of equal strength cancel without residue.
        safe_r = np.where(r > 0.0, r, 1.0)
        magnitude = np.where(r > 0.0, self.gradient_magnitude_profile(safe_r), 0.0)
        if pts.ndim == 0:
            return (pts / safe_r) * magnitude
        return (pts / safe_r[..., np.newaxis]) * magnitude[..., np.newaxis]

    def certify_lipschitz_bound(self, samples: int = 20000, max_radius: float = 50.0) -> float:
        """Return the analytic gradient bound after validating it by sampling.

        The gradient magnitude is evaluated on ``samples`` radii spread over
        ``(0, max_radius]``; if any sample exceeds the stored analytic bound
        the stored constant is wrong and an InternalConsistencyError is
        raised.  The CFL budget is derived from this bound, so a silent
        mismatch here would undermine the stability guarantee.
        """
        if samples < 10000:
            raise ValueError(f"need at least 10000 samples for certification, got {samples}")
        bound = self.lipschitz_bound
        radii = np.linspace(max_radius / samples, max_radius, samples)
        measured = float(np.max(self.gradient_magnitude_profile(radii)))
        if measured > bound * (1.0 + 1e-12) + 1e-300:
            raise InternalConsistencyError(
                f"sampled gradient magnitude {measured} exceeds stored bound {bound} "
                f"for potential {self}"
            )
        return bound


def zero() -> Potential:
    return Potential("zero")


def newtonian(scale: float) -> Potential:
    return Potential("newtonian", scale)


def exponential(scale: float) -> Potential:
    return Potential("exponential", scale)


def fly_and_regroup(scale: float) -> Potential:
    return Potential("fly_and_regroup", scale)
