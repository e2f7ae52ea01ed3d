"""Knee-joint frames from bone vertex clouds and their geodesic trend over KL grade."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bigeo.experiments import stage_rng
from bigeo.lie import SO3, GroupPoint, compose, exp_mat, geodesic, inverse, se3, skew, so3
from bigeo.regression import Dataset, FitResult, Sample, SolverConfig, fit_biinvariant

KL_GRADES = (0, 1, 2, 3, 4)


class DegenerateFrameError(ValueError):
    """Principal directions of a vertex cloud are not uniquely defined."""


@dataclass(frozen=True, eq=False)
class Frame:
    rotation: GroupPoint
    origin: np.ndarray  # mm

    def as_point(self) -> GroupPoint:
        return se3(self.rotation.mat, self.origin)


@dataclass(frozen=True, eq=False)
class KneeRecord:
    subject_id: str
    kl_grade: int
    femur_frame: Frame
    tibia_frame: Frame

    def __post_init__(self):
        if self.kl_grade not in KL_GRADES:
            raise ValueError(f"{self.subject_id}: KL grade must be 0-4, got {self.kl_grade}")

    @property
    def t(self) -> float:
        return grade_time(self.kl_grade)


def grade_time(grade: int) -> float:
    return grade / 4.0


def frame_from_vertices(vertices, rel_gap: float = 1e-9) -> Frame:
    """Centroid plus positively oriented principal axes of a vertex cloud.

    Axes are sorted by decreasing variance. The first two are signed so their
    largest-magnitude entry is positive; the third is their cross product.
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2 or V.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) vertex array, got shape {V.shape}")
    if len(V) < 4:
        raise ValueError(f"need at least 4 vertices, got {len(V)}")
    origin = V.mean(axis=0)
    C = (V - origin).T @ (V - origin) / len(V)
    evals, evecs = np.linalg.eigh(C)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    scale = max(evals[0], np.finfo(float).tiny)
    if evals[2] <= rel_gap * scale:
        raise DegenerateFrameError("vertices are coplanar")
    if evals[0] - evals[1] <= rel_gap * scale or evals[1] - evals[2] <= rel_gap * scale:
        raise DegenerateFrameError("repeated covariance eigenvalues; principal axes are ambiguous")
    axes = evecs.copy()
    for k in (0, 1):
        j = int(np.argmax(np.abs(axes[:, k])))
        if axes[j, k] < 0:
            axes[:, k] = -axes[:, k]
    axes[:, 2] = np.cross(axes[:, 0], axes[:, 1])
    return Frame(so3(axes), origin)


def relative_motion(femur: Frame, tibia: Frame) -> GroupPoint:
    """M = F_femur F_tibia^-1, which carries the tibia frame onto the femur frame."""
    return compose(femur.as_point(), inverse(tibia.as_point()))


def knee_dataset(records) -> Dataset:
    return Dataset(tuple(Sample(relative_motion(r.femur_frame, r.tibia_frame), r.t) for r in records))


@dataclass(frozen=True)
class KneeRow:
    grade: int
    t: float
    translational_norm: float


def knee_regression(records, cfg: SolverConfig = SolverConfig.knee()) -> tuple[list[KneeRow], FitResult]:
    """Fit the bi-invariant geodesic over grade and read off |x| per grade."""
    result = fit_biinvariant(knee_dataset(records), cfg)
    rows = []
    for g in KL_GRADES:
        M = geodesic(grade_time(g), result.params)
        rows.append(KneeRow(g, grade_time(g), float(np.linalg.norm(M.translation))))
    return rows, result


# ---------------------------------------------------------------------------
# synthetic knees with implanted joint-space narrowing

FEMUR_HALF_SIDES = (40.0, 25.0, 15.0)  # mm
TIBIA_HALF_SIDES = (35.0, 20.0, 10.0)


@dataclass(frozen=True)
class SyntheticKneeConfig:
    seed: int = 0
    per_grade: int = 10
    n_vertices: int = 200
    base_gap: float = 60.0  # centroid separation at grade 0, mm
    narrowing: float = 1.5  # mm lost per KL grade
    gap_noise: float = 0.5
    pose_noise: float = 0.03  # rad

    def gap(self, grade: int) -> float:
        return self.base_gap - self.narrowing * grade


def _box_cloud(rng, half_sides, n):
    return rng.uniform(-1.0, 1.0, size=(n, 3)) * np.asarray(half_sides)


def _small_rotation(rng, sigma):
    return exp_mat(SO3, skew(rng.normal(scale=sigma, size=3)))


def synthetic_knee_clouds(cfg: SyntheticKneeConfig, rng: np.random.Generator):
    """Yield (subject_id, grade, femur_vertices, tibia_vertices) tuples.

    The tibia sits near the scanner origin; the femur centroid lies
    ``cfg.gap(grade)`` mm (plus noise) along the tibia's third axis.
    """
    for grade in KL_GRADES:
        for k in range(cfg.per_grade):
            R_t = _small_rotation(rng, cfg.pose_noise)
            x_t = rng.normal(scale=1.0, size=3)
            R_f = R_t @ _small_rotation(rng, cfg.pose_noise)
            gap = cfg.gap(grade) + rng.normal(scale=cfg.gap_noise)
            x_f = x_t + R_t @ np.array([0.0, 0.0, gap])
            tibia = _box_cloud(rng, TIBIA_HALF_SIDES, cfg.n_vertices) @ R_t.T + x_t
            femur = _box_cloud(rng, FEMUR_HALF_SIDES, cfg.n_vertices) @ R_f.T + x_f
            yield f"S{grade}{k:02d}", grade, femur, tibia


def synthetic_knee_records(cfg: SyntheticKneeConfig = SyntheticKneeConfig()) -> list[KneeRecord]:
    return [
        KneeRecord(sid, grade, frame_from_vertices(fem), frame_from_vertices(tib))
        for sid, grade, fem, tib in synthetic_knee_clouds(cfg, stage_rng(cfg.seed, "knee"))
    ]

