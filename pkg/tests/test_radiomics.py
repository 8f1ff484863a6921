"""Tests for the radiomics families, checked against brute-force reference loops."""

import itertools
import math
import os

import numpy as np
import pytest

from lungfuse import InvasivenessLabel, Mask, NoduleSample, Volume
from lungfuse.config import RadiomicsConfig
from lungfuse.errors import FeatureError, VolumeError
from lungfuse.phantom import PhantomSpec, generate_phantom
from lungfuse.radiomics import (
    DiscretizedVolume,
    FeatureVector,
    discretize,
    expected_feature_count,
    extract_all,
    first_order_features,
    glcm_features,
    glrlm_features,
    haar3d,
    haar3d_inverse,
    shape_features,
)
from lungfuse.radiomics import glrlm
from lungfuse.radiomics.directions import DIRECTIONS_13
from lungfuse.radiomics.glcm import glcm_matrix
from lungfuse.radiomics.glrlm import glrlm_matrix
from lungfuse.radiomics.wavelet import BAND_NAMES, downsample_mask


def random_levels(rng: np.random.Generator, n: int, n_levels: int, p_mask: float = 0.7) -> DiscretizedVolume:
    mask = rng.random((n, n, n)) < p_mask
    mask[n // 2, n // 2, n // 2] = True
    levels = np.where(mask, rng.integers(1, n_levels + 1, size=(n, n, n)), 0)
    return DiscretizedVolume(levels, n_levels, 1.0)


def fuzz_levels(rng: np.random.Generator) -> DiscretizedVolume:
    """Random region up to 8³ with 2–6 gray levels; the center and its -x neighbour are always inside."""
    n, n_levels = int(rng.integers(3, 9)), int(rng.integers(2, 7))
    levels = random_levels(rng, n, n_levels).levels
    c = n // 2
    if levels[c - 1, c, c] == 0:
        levels[c - 1, c, c] = 1
    return DiscretizedVolume(levels, n_levels, 1.0)


def ellipsoid(n: int, axes: tuple[float, float, float]) -> Mask:
    c = (n - 1) / 2.0
    x, y, z = np.indices((n, n, n)) - c
    return Mask((x / axes[0]) ** 2 + (y / axes[1]) ** 2 + (z / axes[2]) ** 2 <= 1.0)


def phantom(seed: int = 4, size: int = 16) -> NoduleSample:
    return generate_phantom(PhantomSpec(
        label=InvasivenessLabel.AIS, patch_size=size, radius_range=(3.0, 4.0), solid_fraction=0.4, seed=seed,
    ))


# ── reference loops ──


def ref_percentile(values: list[float], q: float) -> float:
    s = sorted(values)
    pos = (len(s) - 1) * q / 100.0
    lo = math.floor(pos)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (s[hi] - s[lo]) * (pos - lo)


def ref_first_order(values: list[float], bin_width: float) -> dict[str, float]:
    n = len(values)
    mean = sum(values) / n
    m2 = sum((v - mean) ** 2 for v in values) / n
    m3 = sum((v - mean) ** 3 for v in values) / n
    m4 = sum((v - mean) ** 4 for v in values) / n
    lo = min(values)
    counts: dict[int, int] = {}
    for v in values:
        level = math.floor((v - lo) / bin_width) + 1
        counts[level] = counts.get(level, 0) + 1
    probs = [c / n for c in counts.values()]
    p10, p90 = ref_percentile(values, 10), ref_percentile(values, 90)
    robust = [v for v in values if p10 <= v <= p90]
    robust_mean = sum(robust) / len(robust)
    return {
        "mean": mean,
        "median": ref_percentile(values, 50),
        "minimum": lo,
        "maximum": max(values),
        "range": max(values) - lo,
        "variance": m2,
        "standard_deviation": math.sqrt(m2),
        "skewness": m3 / m2**1.5 if m2 > 0 else 0.0,
        "kurtosis": m4 / m2**2 if m2 > 0 else 0.0,
        "energy": sum(v * v for v in values),
        "root_mean_squared": math.sqrt(sum(v * v for v in values) / n),
        "entropy": -sum(p * math.log2(p) for p in probs),
        "uniformity": sum(p * p for p in probs),
        "mean_absolute_deviation": sum(abs(v - mean) for v in values) / n,
        "robust_mean_absolute_deviation": sum(abs(v - robust_mean) for v in robust) / len(robust),
        "percentile10": p10,
        "percentile90": p90,
        "interquartile_range": ref_percentile(values, 75) - ref_percentile(values, 25),
    }


def ref_glcm_counts(levels: np.ndarray, ng: int, offset: tuple[int, int, int]) -> np.ndarray:
    counts = np.zeros((ng, ng))
    nx, ny, nz = levels.shape
    for x, y, z in itertools.product(range(nx), range(ny), range(nz)):
        qx, qy, qz = x + offset[0], y + offset[1], z + offset[2]
        if not (0 <= qx < nx and 0 <= qy < ny and 0 <= qz < nz):
            continue
        a, b = levels[x, y, z], levels[qx, qy, qz]
        if a > 0 and b > 0:
            counts[a - 1, b - 1] += 1
            counts[b - 1, a - 1] += 1
    return counts


def ref_glcm_single(p: np.ndarray) -> list[float]:
    ng = p.shape[0]
    px = [sum(p[i, j] for j in range(ng)) for i in range(ng)]
    py = [sum(p[i, j] for i in range(ng)) for j in range(ng)]
    mux = sum((i + 1) * px[i] for i in range(ng))
    muy = sum((j + 1) * py[j] for j in range(ng))
    sdx = math.sqrt(sum((i + 1 - mux) ** 2 * px[i] for i in range(ng)))
    sdy = math.sqrt(sum((j + 1 - muy) ** 2 * py[j] for j in range(ng)))
    out = [0.0] * 9
    cross = 0.0
    for i in range(ng):
        for j in range(ng):
            v = p[i, j]
            d = i - j
            c = (i + 1) + (j + 1) - mux - muy
            out[0] += d * d * v
            out[1] += abs(d) * v
            out[2] += v / (1 + d * d)
            out[3] += v * v
            if v > 0:
                out[4] -= v * math.log2(v)
            cross += (i + 1) * (j + 1) * v
            out[6] += c**3 * v
            out[7] += c**4 * v
            out[8] = max(out[8], v)
    out[5] = (cross - mux * muy) / (sdx * sdy) if sdx > 0 and sdy > 0 else 0.0
    return out


def ref_glcm(levels: np.ndarray, ng: int) -> np.ndarray:
    rows = []
    for d in DIRECTIONS_13:
        counts = ref_glcm_counts(levels, ng, d)
        if counts.sum() > 0:
            rows.append(ref_glcm_single(counts / counts.sum()))
    return np.mean(rows, axis=0)


def ref_runs(levels: np.ndarray, direction: tuple[int, int, int]) -> list[tuple[int, int]]:
    """(level, length) of every maximal run, found by walking rays from run starts."""
    shape = levels.shape

    def inside(p):
        return all(0 <= p[k] < shape[k] for k in range(3))

    runs = []
    for p in itertools.product(*(range(n) for n in shape)):
        level = levels[p]
        if level == 0:
            continue
        prev = tuple(p[k] - direction[k] for k in range(3))
        if inside(prev) and levels[prev] == level:
            continue
        length = 1
        q = tuple(p[k] + direction[k] for k in range(3))
        while inside(q) and levels[q] == level:
            length += 1
            q = tuple(q[k] + direction[k] for k in range(3))
        runs.append((int(level), length))
    return runs


def ref_glrlm(levels: np.ndarray) -> np.ndarray:
    n_voxels = int((levels > 0).sum())
    rows = []
    for d in DIRECTIONS_13:
        runs = ref_runs(levels, d)
        n = len(runs)
        by_level: dict[int, int] = {}
        by_length: dict[int, int] = {}
        for lv, ln in runs:
            by_level[lv] = by_level.get(lv, 0) + 1
            by_length[ln] = by_length.get(ln, 0) + 1
        rows.append([
            sum(1 / ln**2 for _, ln in runs) / n,
            sum(ln**2 for _, ln in runs) / n,
            sum(c * c for c in by_level.values()) / n,
            sum(c * c for c in by_length.values()) / n,
            n / n_voxels,
            sum(1 / lv**2 for lv, _ in runs) / n,
            sum(lv**2 for lv, _ in runs) / n,
        ])
    return np.mean(rows, axis=0)


# ── FeatureVector ──


class TestFeatureVector:
    def test_rejects_duplicates(self):
        with pytest.raises(FeatureError):
            FeatureVector(["a", "a"], [1.0, 2.0])

    def test_rejects_non_finite(self):
        with pytest.raises(FeatureError) as exc:
            FeatureVector(["a", "b"], [1.0, np.inf])
        assert exc.value.code == "non_finite_feature"
        assert exc.value.details == {"names": ["b"]}

    def test_prefix_and_lookup(self):
        v = FeatureVector.concat([FeatureVector(["x"], [1.0]), FeatureVector(["y"], [2.0])]).prefixed("orig")
        assert v.names == ["orig_x", "orig_y"]
        assert v["orig_y"] == 2.0
        with pytest.raises(KeyError):
            v["x"]


# ── discretize ──


class TestDiscretize:
    def test_constant_region(self):
        disc = discretize(Volume(np.full((3, 3, 3), 40.0)), Mask(np.ones((3, 3, 3))), 25.0)
        assert disc.n_levels == 1
        assert np.all(disc.levels == 1)

    def test_unit_steps(self):
        vol = Volume(np.array([0.0, 1.0, 2.0, 3.0]).reshape((4, 1, 1)))
        disc = discretize(vol, Mask(np.ones((4, 1, 1))), 1.0)
        assert disc.levels.ravel().tolist() == [1, 2, 3, 4]
        assert disc.n_levels == 4

    def test_uniform_values_match_scalar_binning(self):
        rng = np.random.default_rng(0)
        data = rng.uniform(0.0, 25.0, size=(10, 10, 10))
        mask = np.ones((10, 10, 10), dtype=bool)
        disc = discretize(Volume(data), Mask(mask), 5.0)
        assert disc.n_levels == 5
        lo = data.min()
        expected: dict[int, int] = {}
        for v in data.ravel():
            level = math.floor((v - lo) / 5.0) + 1
            expected[level] = expected.get(level, 0) + 1
        got = dict(zip(*np.unique(disc.levels, return_counts=True)))
        assert {int(k): int(v) for k, v in got.items()} == expected

    def test_outside_mask_is_zero(self):
        mask = np.zeros((3, 3, 3), dtype=bool)
        mask[1, 1, 1] = True
        disc = discretize(Volume(np.ones((3, 3, 3))), Mask(mask), 1.0)
        assert disc.levels.sum() == 1

    def test_errors(self):
        vol = Volume(np.ones((2, 2, 2)))
        with pytest.raises(FeatureError):
            discretize(vol, Mask(np.ones((2, 2, 2))), 0.0)
        with pytest.raises(FeatureError) as exc:
            discretize(vol, Mask(np.zeros((2, 2, 2))), 1.0)
        assert exc.value.code == "empty_mask"


# ── first_order_features ──


class TestFirstOrder:
    def test_eighteen_features(self):
        f = first_order_features(Volume(np.ones((2, 2, 2))), Mask(np.ones((2, 2, 2))), 25.0)
        assert len(f) == 18

    def test_constant_region(self):
        f = first_order_features(Volume(np.full((3, 3, 3), 12.5)), Mask(np.ones((3, 3, 3))), 25.0)
        assert f["mean"] == 12.5
        assert f["variance"] == 0.0
        assert f["entropy"] == 0.0
        assert f["uniformity"] == 1.0

    def test_hand_arithmetic(self):
        vol = Volume(np.array([1.0, 2.0, 3.0, 4.0]).reshape((4, 1, 1)))
        f = first_order_features(vol, Mask(np.ones((4, 1, 1))), 1.0)
        assert f["mean"] == 2.5
        assert f["variance"] == pytest.approx(1.25)
        assert f["range"] == 3.0
        assert f["entropy"] == pytest.approx(2.0)

    @pytest.mark.parametrize("seed", range(50))
    def test_random_region_matches_reference(self, seed):
        rng = np.random.default_rng([1, seed])
        n = int(rng.integers(3, 9))
        data = rng.normal(-300.0, 120.0, size=(n, n, n))
        mask = rng.random((n, n, n)) < 0.6
        mask[0, 0, 0] = True
        f = first_order_features(Volume(data), Mask(mask), 25.0)
        expected = ref_first_order(data[mask].tolist(), 25.0)
        for name, value in expected.items():
            assert f[name] == pytest.approx(value, rel=1e-9, abs=1e-9), name

    def test_gaussian_kurtosis_is_uncorrected(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(30, 30, 30))
        f = first_order_features(Volume(data), Mask(np.ones((30, 30, 30))), 0.1)
        assert f["kurtosis"] == pytest.approx(3.0, abs=0.1)

    def test_empty_mask(self):
        with pytest.raises(FeatureError):
            first_order_features(Volume(np.ones((2, 2, 2))), Mask(np.zeros((2, 2, 2))), 1.0)


# ── shape_features ──


class TestShape:
    def test_sphere_sphericity(self):
        f = shape_features(ellipsoid(26, (10.0, 10.0, 10.0)), (1.0, 1.0, 1.0))
        assert 0.97 <= f["sphericity"] <= 1.03
        assert f["surface_area"] == pytest.approx(4 * math.pi * 10.0**2, rel=0.03)
        assert f["max_3d_diameter"] == pytest.approx(20.0, abs=1.0)

    def test_single_voxel(self):
        mask = np.zeros((3, 3, 3), dtype=bool)
        mask[1, 1, 1] = True
        f = shape_features(Mask(mask), (1.0, 1.0, 1.0))
        assert f["voxel_volume"] == 1.0
        assert f["max_3d_diameter"] == 0.0
        assert f["elongation"] == 0.0
        assert f["flatness"] == 0.0

    def test_voxel_volume_uses_spacing(self):
        f = shape_features(Mask(np.ones((2, 2, 2))), (0.5, 1.0, 2.0))
        assert f["voxel_volume"] == pytest.approx(8.0)

    def test_prolate_ellipsoid_axes(self):
        f = shape_features(ellipsoid(30, (12.0, 6.0, 6.0)), (1.0, 1.0, 1.0))
        assert f["elongation"] == pytest.approx(0.5, rel=0.05)
        assert f["flatness"] == pytest.approx(0.5, rel=0.05)

    def test_oblate_ellipsoid_axes(self):
        f = shape_features(ellipsoid(30, (12.0, 12.0, 6.0)), (1.0, 1.0, 1.0))
        assert f["elongation"] == pytest.approx(1.0, rel=0.05)
        assert f["flatness"] == pytest.approx(0.5, rel=0.05)

    def test_empty_mask(self):
        with pytest.raises(FeatureError):
            shape_features(Mask(np.zeros((3, 3, 3))), (1.0, 1.0, 1.0))


# ── glcm_features ──


class TestGLCM:
    def test_constant_region(self):
        disc = DiscretizedVolume(np.ones((4, 4, 4), dtype=np.int64), 1, 1.0)
        f = glcm_features(disc)
        assert f["energy"] == 1.0
        assert f["contrast"] == 0.0
        assert f["entropy"] == 0.0
        assert f["correlation"] == 0.0

    def test_checkerboard_axial_contrast(self):
        x, y = np.indices((6, 6))
        levels = ((x + y) % 2 + 1).reshape((6, 6, 1)).astype(np.int64)
        m = glcm_matrix(levels, 2, (1, 0, 0))
        p = m.normalized()
        i, j = np.indices(p.shape)
        assert float(np.sum((i - j) ** 2 * p)) == 1.0
        np.testing.assert_array_equal(ref_glcm_counts(levels, 2, (1, 0, 0)), m.matrix)

    def test_matrices_normalized_and_symmetric(self):
        disc = random_levels(np.random.default_rng(3), 6, 4)
        for d in DIRECTIONS_13:
            m = glcm_matrix(disc.levels, 4, d)
            np.testing.assert_array_equal(m.matrix, m.matrix.T)
            assert abs(m.normalized().sum() - 1.0) < 1e-12

    @pytest.mark.parametrize("seed", range(50))
    def test_random_region_matches_reference(self, seed):
        disc = fuzz_levels(np.random.default_rng([4, seed]))
        f = glcm_features(disc)
        np.testing.assert_allclose(f.values, ref_glcm(disc.levels, disc.n_levels), rtol=0, atol=1e-10)

    def test_rotation_invariance(self):
        disc = random_levels(np.random.default_rng(5), 6, 3)
        base = glcm_features(disc).values
        for axes in ((0, 1), (1, 2), (0, 2)):
            rotated = DiscretizedVolume(np.ascontiguousarray(np.rot90(disc.levels, axes=axes)), 3, 1.0)
            np.testing.assert_allclose(glcm_features(rotated).values, base, rtol=1e-9, atol=1e-9)

    def test_empty_mask(self):
        disc = DiscretizedVolume(np.ones((2, 2, 2), dtype=np.int64), 1, 1.0)
        with pytest.raises(FeatureError):
            glcm_features(disc, Mask(np.zeros((2, 2, 2))))


# ── glrlm_features ──


class TestGLRLM:
    def test_line_single_run(self):
        levels = np.ones((1, 1, 7), dtype=np.int64)
        m = glrlm_matrix(levels, 1, (0, 0, 1))
        assert m.matrix.shape == (1, 7)
        assert m.matrix[0, 6] == 1.0
        assert m.matrix.sum() == 1.0
        assert glrlm.matrix_features(m.matrix, 7)[4] == pytest.approx(1 / 7)

    def test_alternating_levels(self):
        levels = np.array([1, 2, 1, 2, 1, 2], dtype=np.int64).reshape((6, 1, 1))
        f = glrlm_features(DiscretizedVolume(levels, 2, 1.0))
        assert f["short_run_emphasis"] == 1.0
        assert f["run_percentage"] == 1.0

    def test_coverage_equals_voxel_count(self):
        disc = random_levels(np.random.default_rng(6), 6, 3)
        n = int((disc.levels > 0).sum())
        for d in DIRECTIONS_13:
            assert glrlm_matrix(disc.levels, 3, d).coverage() == n

    @pytest.mark.parametrize("seed", range(50))
    def test_random_region_matches_reference(self, seed):
        disc = fuzz_levels(np.random.default_rng([7, seed]))
        f = glrlm_features(disc)
        np.testing.assert_allclose(f.values, ref_glrlm(disc.levels), rtol=0, atol=1e-10)

    def test_rotation_invariance(self):
        disc = random_levels(np.random.default_rng(8), 5, 2)
        base = glrlm_features(disc).values
        rotated = DiscretizedVolume(np.ascontiguousarray(np.rot90(disc.levels, axes=(0, 2))), 2, 1.0)
        np.testing.assert_allclose(glrlm_features(rotated).values, base, rtol=1e-9, atol=1e-9)


# ── haar3d ──


class TestHaar:
    def test_constant_volume(self):
        bands = haar3d(Volume(np.full((4, 4, 4), 3.0)))
        np.testing.assert_allclose(bands["LLL"].voxels, 3.0 * 2**1.5, atol=1e-12)
        for name in BAND_NAMES[1:]:
            np.testing.assert_allclose(bands[name].voxels, 0.0, atol=1e-12)

    def test_inverse_reconstructs(self):
        data = np.random.default_rng(9).normal(size=(6, 8, 4))
        back = haar3d_inverse(haar3d(Volume(data)))
        assert np.max(np.abs(back.voxels - data)) < 1e-10

    def test_odd_dims_reconstruct_padded_input(self):
        data = np.random.default_rng(10).normal(size=(5, 4, 3))
        bands = haar3d(Volume(data))
        assert bands["LLL"].dims == (3, 2, 2)
        back = haar3d_inverse(bands)
        assert back.dims == (6, 4, 4)
        np.testing.assert_allclose(back.voxels[:5, :, :3], data, atol=1e-10)
        np.testing.assert_allclose(back.voxels[5, :, :3], data[4], atol=1e-10)

    def test_energy_conserved(self):
        rng = np.random.default_rng(11)
        for _ in range(3):
            data = rng.normal(size=(8, 6, 4)) * 100.0
            assert abs(haar3d(Volume(data)).energy() - np.sum(data**2)) < 1e-9 * max(1.0, np.sum(data**2))

    def test_mask_downsample_majority(self):
        mask = np.zeros((4, 4, 4), dtype=bool)
        mask[:2, :2, :2] = True
        mask[2, 2, 2] = True
        down = downsample_mask(Mask(mask))
        assert down.dims == (2, 2, 2)
        assert down.voxels[0, 0, 0]
        assert down.count == 1

    def test_mask_downsample_keeps_small_region(self):
        mask = np.zeros((4, 4, 4), dtype=bool)
        mask[1, 1, 1] = True
        assert downsample_mask(Mask(mask)).count == 1


# ── extract_all ──


class TestExtractAll:
    def test_default_count_and_names(self):
        cfg = RadiomicsConfig()
        vector = extract_all(phantom(), cfg)
        assert expected_feature_count(cfg) == 320
        assert len(vector) == 320
        assert len(set(vector.names)) == 320
        assert vector.names[0] == "orig_shape_voxel_volume"
        assert "HHH_glrlm_run_percentage" in vector.names
        assert sum(n.startswith("orig_firstorder_") for n in vector.names) == 18

    def test_pure(self):
        assert extract_all(phantom(), RadiomicsConfig()) == extract_all(phantom(), RadiomicsConfig())

    def test_translation_invariance(self):
        sample = phantom()
        shifted = NoduleSample(
            "shifted",
            Volume(np.roll(sample.patch.voxels, 2, axis=0), sample.patch.spacing),
            Mask(np.roll(sample.mask.voxels, 2, axis=0)),
            sample.label,
        )
        cfg = RadiomicsConfig(shape=False)
        a, b = extract_all(sample, cfg), extract_all(shifted, cfg)
        assert a.names == b.names
        np.testing.assert_allclose(a.values, b.values, rtol=1e-9, atol=1e-9)

    def test_configurable_families(self):
        cfg = RadiomicsConfig(wavelet=False, extra_bin_widths=[10.0], glcm_distances=[1, 2])
        vector = extract_all(phantom(), cfg)
        assert len(vector) == expected_feature_count(cfg) == 14 + 18 + 9 * 4 + 7 * 2
        assert "orig_glcm_bw10_d2_contrast" in vector.names

    def test_all_finite_over_many_phantoms(self):
        cfg = RadiomicsConfig()
        for seed in range(12):
            vector = extract_all(phantom(seed=seed, size=12), cfg)
            assert np.all(np.isfinite(vector.values))

    @pytest.mark.skipif(not os.environ.get("LUNGFUSE_BENCH"), reason="LUNGFUSE_BENCH not set")
    def test_all_finite_fuzz(self):
        cfg = RadiomicsConfig()
        for seed in range(1000):
            rng = np.random.default_rng([17, seed])
            r_min = float(rng.uniform(2.5, 4.5))
            sample = generate_phantom(PhantomSpec(
                label=InvasivenessLabel(int(rng.integers(0, 4))),
                patch_size=12,
                radius_range=(r_min, float(rng.uniform(r_min, 5.0))),
                solid_fraction=float(rng.uniform(0.0, 1.0)),
                seed=seed,
            ))
            vector = extract_all(sample, cfg)
            assert np.all(np.isfinite(vector.values)), seed

    def test_empty_mask_rejected(self):
        sample = NoduleSample("empty", Volume(np.ones((4, 4, 4))), Mask(np.zeros((4, 4, 4))), 0)
        with pytest.raises(VolumeError):
            extract_all(sample, RadiomicsConfig())
