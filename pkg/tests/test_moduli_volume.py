import math

import numpy as np
import pytest
from pytest_mock import MockerFixture

from lumpvol.core.exceptions import (
    BradlowViolationException,
    SingularFieldException,
    ValidationException,
)
from lumpvol.models.volume import SampleRecord, VolumeEstimate
from lumpvol.services.l2_metric import GuardedValue
from lumpvol.services.moduli_volume import (
    calibrate_cpq,
    convention_audit,
    fs_volume,
    mc_volume_l2,
    mc_volume_vortex,
    sample_parameter,
    trimmed_mean,
)
from lumpvol.tasks.sampling import sample_stream


def _estimate(mean: float, rel: float = 1e-3) -> VolumeEstimate:
    return VolumeEstimate(
        mean=mean,
        stderr=rel * mean,
        n_samples=1000,
        seed=0,
        boundary_fraction=0.0,
        failures=0,
        grid_L=0,
    )


def test_sample_parameter_lands_in_largest_entry_chart() -> None:
    rng = sample_stream(3, 0)
    for _ in range(200):
        point = sample_parameter(4, rng)
        assert point.w.shape == (4,)
        assert 0 <= point.fixed <= 4
        assert np.all(np.abs(point.w) <= 1.0 + 1e-15)


def test_sample_parameter_rejects_empty_space() -> None:
    with pytest.raises(ValidationException):
        sample_parameter(0, sample_stream(0, 0))


def test_sample_parameter_is_fubini_study_uniform() -> None:
    q = 3
    n = 20000
    rng = sample_stream(11, 0)
    values = np.empty(n)
    for i in range(n):
        point = sample_parameter(q, rng)
        full = np.insert(point.w, point.fixed, 1.0)
        values[i] = abs(full[0]) ** 2 / float(np.sum(np.abs(full) ** 2))
    # |z_0|^2 / |z|^2 is Beta(1, q) under the Fubini-Study measure
    sigma = math.sqrt(q / ((q + 1) ** 2 * (q + 2)) / n)
    assert abs(values.mean() - 1.0 / (q + 1)) < 4.0 * sigma


def test_fs_volume_values() -> None:
    assert fs_volume(1) == pytest.approx(math.pi)
    assert fs_volume(3) == pytest.approx(math.pi**3 / 6.0)


@pytest.mark.parametrize("q", [1, 2, 3, 5])
def test_calibrate_ratio_mode_is_exact(q: int) -> None:
    estimate = calibrate_cpq(q, n=50, seed=1, mode="ratio")
    assert estimate.mean == pytest.approx(fs_volume(q), rel=1e-12)
    assert estimate.stderr < 1e-12 * estimate.mean
    assert estimate.failures == 0


def test_calibrate_polydisc_mode_recovers_projective_line() -> None:
    estimate = calibrate_cpq(1, n=4000, seed=2, mode="polydisc")
    assert abs(estimate.mean - math.pi) < 4.0 * estimate.stderr
    assert estimate.stderr > 0.0


def test_calibrate_rejects_bad_arguments() -> None:
    with pytest.raises(ValidationException):
        calibrate_cpq(0, n=10, seed=0)
    with pytest.raises(ValidationException):
        calibrate_cpq(2, n=10, seed=0, mode="stratified")


def test_calibration_independent_of_thread_count() -> None:
    serial = calibrate_cpq(2, n=40, seed=9, mode="polydisc", threads=1)
    pooled = calibrate_cpq(2, n=40, seed=9, mode="polydisc", threads=4)
    assert serial.mean == pooled.mean
    assert [s.ratio for s in serial.samples] == [s.ratio for s in pooled.samples]


def test_l2_volume_independent_of_thread_count() -> None:
    serial = mc_volume_l2(1, 1, n=12, seed=5, L=16, threads=1)
    pooled = mc_volume_l2(1, 1, n=12, seed=5, L=16, threads=3)
    assert serial.mean == pooled.mean
    assert serial.stderr == pooled.stderr
    assert [s.ratio for s in serial.samples] == [s.ratio for s in pooled.samples]


def test_l2_volume_smoke_run() -> None:
    estimate = mc_volume_l2(1, 1, n=16, seed=0, L=16)
    assert math.isfinite(estimate.mean)
    assert estimate.mean > 0.0
    assert estimate.n_samples + estimate.failures == 16
    assert estimate.config["q"] == 3
    assert estimate.config["prefactor"] == pytest.approx(fs_volume(3))
    assert estimate.valid
    assert [s.index for s in estimate.samples] == list(range(16))


def test_l2_volume_rejects_constant_maps() -> None:
    with pytest.raises(ValidationException):
        mc_volume_l2(0, 1, n=4, seed=0, L=16)


def test_failed_samples_are_counted_and_skipped(mocker: MockerFixture) -> None:
    calls = {"n": 0}

    def fake(P: object, L: int, evaluate: object) -> GuardedValue:
        calls["n"] += 1
        if calls["n"] == 1:
            raise SingularFieldException(0.0, 1e-12)
        return GuardedValue(1.0, 1.0, L, 0, None)

    mocker.patch("lumpvol.services.moduli_volume.guarded_evaluation", side_effect=fake)
    estimate = mc_volume_l2(1, 1, n=10, seed=0, L=16, threads=1)

    assert estimate.failures == 1
    assert estimate.n_samples == 9
    assert estimate.failure_fraction == pytest.approx(0.1)
    assert estimate.mean == pytest.approx(fs_volume(3))
    assert estimate.samples[0].error == "SINGULAR_FIELD"
    assert not estimate.valid


def test_vortex_volume_rejects_subcritical_coupling() -> None:
    with pytest.raises(BradlowViolationException):
        mc_volume_vortex(1, 1, s2=2 * math.pi, n=4, seed=0, L=16)


def test_trimmed_mean_without_trimming_is_the_mean() -> None:
    estimate = calibrate_cpq(2, n=30, seed=4, mode="polydisc")
    assert trimmed_mean(estimate, 0.0) == pytest.approx(estimate.mean, rel=1e-14)


def test_trimmed_mean_drops_closest_to_boundary() -> None:
    estimate = VolumeEstimate(
        mean=6.0,
        stderr=1.0,
        n_samples=3,
        seed=0,
        boundary_fraction=1.0 / 3.0,
        failures=0,
        grid_L=16,
        config={"prefactor": 2.0},
        samples=(
            SampleRecord(0, 1.0, proximity=1e-5, refinements=1),
            SampleRecord(1, 3.0, proximity=0.5),
            SampleRecord(2, 5.0, proximity=0.9),
        ),
    )
    assert trimmed_mean(estimate, 0.34) == pytest.approx(8.0)


def test_convention_audit_detects_common_scale() -> None:
    entries = [
        (q, _estimate(fs_volume(q) * math.pi**q), fs_volume(q)) for q in (1, 2, 3)
    ]
    audit = convention_audit(entries)
    assert audit.consistent
    assert audit.mis_pinned
    assert audit.common == pytest.approx(math.pi, rel=1e-12)


def test_convention_audit_accepts_correct_scale() -> None:
    entries = [(q, _estimate(fs_volume(q)), fs_volume(q)) for q in (1, 3)]
    audit = convention_audit(entries)
    assert audit.consistent
    assert not audit.mis_pinned
    assert audit.factors[3] == pytest.approx(1.0)


def test_convention_audit_flags_inconsistent_factors() -> None:
    entries = [
        (1, _estimate(2.0 * fs_volume(1)), fs_volume(1)),
        (2, _estimate(fs_volume(2)), fs_volume(2)),
    ]
    assert not convention_audit(entries).consistent


@pytest.mark.acceptance
def test_l2_volume_of_degree_one_maps() -> None:
    estimate = mc_volume_l2(1, 1, n=4000, seed=0, L=24, threads=4)
    assert abs(estimate.mean - 1.0 / 6.0) < 3.0 * estimate.stderr
    assert estimate.relative_error <= 0.02
    assert estimate.failure_fraction <= 0.005


@pytest.mark.acceptance
def test_l2_volume_of_degree_one_maps_into_the_plane() -> None:
    estimate = mc_volume_l2(1, 2, n=6000, seed=0, L=24, threads=4)
    assert abs(estimate.mean - 1.0 / 120.0) < 3.0 * estimate.stderr
    assert estimate.relative_error <= 0.02
    assert estimate.failure_fraction <= 0.005


@pytest.mark.acceptance
def test_vortex_volume_of_degree_one_maps() -> None:
    estimate = mc_volume_vortex(1, 1, s2=16 * math.pi, n=300, seed=0, L=24, threads=4)
    assert abs(estimate.mean - 27.0 / 384.0) < 3.0 * estimate.stderr
    assert estimate.failure_fraction <= 0.005
    assert estimate.valid


@pytest.mark.acceptance
@pytest.mark.parametrize("factor", [64, 512])
def test_vortex_volume_at_strong_coupling(factor: int) -> None:
    s2 = factor * math.pi
    estimate = mc_volume_vortex(1, 1, s2=s2, n=2000, seed=0, L=24, threads=4)
    expected = (1.0 / 6.0) * (1.0 - 4.0 * math.pi / s2) ** 3
    assert abs(estimate.mean - expected) < 3.0 * estimate.stderr
    assert estimate.failure_fraction <= 0.005
    assert estimate.valid


@pytest.mark.acceptance
def test_calibration_of_projective_three_space() -> None:
    estimate = calibrate_cpq(3, n=20000, seed=0, mode="polydisc", threads=4)
    assert abs(estimate.mean - fs_volume(3)) < 3.0 * estimate.stderr
