"""
Tests for metrics, the session-holdout protocol, sweeps, synthetic cohorts and report files.
"""

import math
import tempfile
from concurrent.futures import ThreadPoolExecutor
import sys
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from nrcid.core.errors import InvalidDatasetError, InvalidInputError, InvalidSpecError
from nrcid.eval import (
    CONFUSION_FILE,
    DEFAULT_NOISE_CUTOFF_HZ,
    METRICS_FILE,
    PER_SEGMENT_FILE,
    SWEEP_FILE,
    ConfusionMatrix,
    EvalProtocol,
    ParticipantSignature,
    SweepRow,
    SyntheticSpec,
    default_synthetic_spec,
    evaluate,
    generate_synthetic,
    load_synthetic_spec,
    metrics,
    noise_std_for_snr,
    read_completed_cells,
    save_synthetic_spec,
    sweep,
    synthetic_spec_from_dict,
    synthetic_spec_to_dict,
    unit_noise,
    write_report,
    write_sweep,
)
from nrcid.quantizer import QuantizerSpec
from nrcid.signal import FilterSpec, RawRecording
from nrcid.xafcm import ModelParams

FILTER = FilterSpec(sample_rate_hz=1000.0)


def _protocol(k=4, d=2, segment_seconds=4.0, train=("day1", "day2"), test="day3") -> EvalProtocol:
    return EvalProtocol(
        train_sessions=train,
        test_session=test,
        params=ModelParams(k=k, d=d, alphabet_size=17),
        filter=FILTER,
        segment_seconds=segment_seconds,
    )


class TestMetrics:
    """Tests for ConfusionMatrix and metrics()."""

    def test_perfect_identification(self):
        """Test an identity matrix scores 1 everywhere."""
        m = metrics(ConfusionMatrix(("a", "b", "c"), np.eye(3, dtype=int) * 4))
        assert m.accuracy == 1.0
        assert m.macro_f1 == 1.0
        assert m.micro_f1 == 1.0

    def test_uniform_confusion(self):
        """Test a uniform 3x3 matrix gives accuracy 1/3."""
        m = metrics(ConfusionMatrix(("a", "b", "c"), np.ones((3, 3), dtype=int)))
        assert m.accuracy == pytest.approx(1 / 3)
        assert m.macro_f1 == pytest.approx(1 / 3)

    def test_two_class_example(self):
        """Test per-class and macro F1 on a hand-worked 2x2 matrix."""
        m = metrics(ConfusionMatrix(("a", "b"), np.array([[9, 1], [2, 8]])))
        assert m.accuracy == pytest.approx(0.85)
        assert m.per_class["a"].f1 == pytest.approx(0.857, abs=1e-3)
        assert m.per_class["b"].f1 == pytest.approx(0.842, abs=1e-3)
        assert m.per_class["a"].precision == pytest.approx(9 / 11)
        assert m.per_class["b"].recall == pytest.approx(0.8)
        assert m.macro_f1 == pytest.approx(0.85, abs=1e-3)
        assert m.micro_f1 == pytest.approx(0.85)

    def test_unsupported_class_left_out_of_macro(self):
        """Test a class with no true samples does not drag the macro average down."""
        m = metrics(ConfusionMatrix(("a", "b"), np.array([[2, 0], [0, 0]])))
        assert m.macro_f1 == 1.0
        assert m.per_class["b"].support == 0

    def test_empty_matrix(self):
        """Test metrics of an empty matrix are rejected."""
        with pytest.raises(InvalidInputError):
            metrics(ConfusionMatrix(("a", "b"), np.zeros((2, 2), dtype=int)))
        with pytest.raises(InvalidInputError):
            metrics(ConfusionMatrix((), np.zeros((0, 0), dtype=int)))

    def test_from_predictions(self):
        """Test label order fixes rows and columns."""
        cm = ConfusionMatrix.from_predictions(["x", "y"], ["y", "y", "x"], ["y", "x", "x"])
        np.testing.assert_array_equal(cm.counts, [[1, 0], [1, 1]])
        assert cm.row_sums() == {"x": 1, "y": 2}
        assert cm.trace == 2

    def test_invalid_shapes(self):
        """Test non-square or negative matrices are rejected."""
        with pytest.raises(InvalidInputError):
            ConfusionMatrix(("a",), np.zeros((1, 2), dtype=int))
        with pytest.raises(InvalidInputError):
            ConfusionMatrix(("a",), np.array([[-1]]))


class TestProtocol:
    """Tests for EvalProtocol validation and evaluate()."""

    def test_test_session_in_training(self):
        """Test the held-out session cannot also train."""
        with pytest.raises(InvalidSpecError):
            _protocol(train=("day1", "day3"), test="day3")

    def test_alphabet_mismatch(self):
        """Test quantizer and model alphabets must agree."""
        with pytest.raises(InvalidSpecError):
            EvalProtocol(
                train_sessions=("day1",),
                test_session="day2",
                params=ModelParams(k=4, d=1, alphabet_size=17),
                filter=FILTER,
                qspec=QuantizerSpec(alphabet_size=8),
            )

    def test_missing_session(self, small_cohort):
        """Test a protocol naming an absent session is a dataset error."""
        with pytest.raises(InvalidDatasetError, match="day9"):
            evaluate(small_cohort, _protocol(test="day9"))

    def test_empty_dataset(self):
        """Test evaluation needs recordings."""
        with pytest.raises(InvalidDatasetError):
            evaluate([], _protocol())

    def test_rate_mismatch(self, small_cohort):
        """Test the protocol filter must match the dataset rate."""
        protocol = EvalProtocol(
            train_sessions=("day1", "day2"),
            test_session="day3",
            params=ModelParams(k=4, d=2, alphabet_size=17),
            filter=FilterSpec(sample_rate_hz=500.0),
        )
        with pytest.raises(InvalidDatasetError):
            evaluate(small_cohort, protocol)

    def test_segments_per_participant(self, small_cohort):
        """Test confusion rows count every complete test segment."""
        report = evaluate(small_cohort, _protocol(segment_seconds=4.0))
        assert report.confusion.labels == ("p1", "p2", "p3")
        assert report.confusion.row_sums() == {"p1": 3, "p2": 3, "p3": 3}
        assert report.segments == 9
        assert report.confusion.total == 9
        assert 0.0 <= report.accuracy <= 1.0
        assert report.accuracy == pytest.approx(report.confusion.trace / 9)

    def test_identical_train_and_test(self, small_cohort):
        """Test a test session that repeats a training session bit for bit is identified perfectly."""
        dataset = list(small_cohort)
        for rec in small_cohort:
            if rec.session_id == "day1":
                dataset.append(RawRecording(rec.participant_id, "copy", rec.sample_rate_hz, rec.samples.copy()))
        report = evaluate(dataset, _protocol(k=8, train=("day1",), test="copy", segment_seconds=10.0))
        assert report.accuracy == 1.0

    def test_single_participant(self, small_cohort):
        """Test a one-participant registry always predicts that participant."""
        dataset = [r for r in small_cohort if r.participant_id == "p2"]
        report = evaluate(dataset, _protocol())
        assert report.accuracy == 1.0
        assert report.confusion.labels == ("p2",)

    def test_threads_do_not_change_report(self, small_cohort):
        """Test a thread pool gives the serial confusion matrix and segment results."""
        serial = evaluate(small_cohort, _protocol())
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = evaluate(small_cohort, _protocol(), executor=pool)
        assert threaded.confusion == serial.confusion
        assert threaded.per_segment == serial.per_segment

    def test_dataset_order_does_not_matter(self, small_cohort):
        """Test shuffling the recordings leaves the report unchanged."""
        forward = evaluate(small_cohort, _protocol())
        backward = evaluate(list(reversed(small_cohort)), _protocol())
        assert backward.confusion == forward.confusion
        assert backward.per_segment == forward.per_segment

    def test_failed_enrollment_is_recorded(self, small_cohort):
        """Test a participant with flat training data is excluded and reported."""
        flat = [RawRecording("flat", s, 1000.0, np.zeros(12_000)) for s in ("day1", "day2", "day3")]
        report = evaluate(list(small_cohort) + flat, _protocol())
        assert "flat" in report.failed_enrollments
        assert "flat" not in report.confusion.labels

    def test_nobody_enrollable(self):
        """Test evaluation fails when no participant can be enrolled."""
        flat = [RawRecording("flat", s, 1000.0, np.zeros(12_000)) for s in ("day1", "day2", "day3")]
        with pytest.raises(InvalidDatasetError):
            evaluate(flat, _protocol())

    def test_test_session_too_short(self, small_cohort):
        """Test a segment length beyond the test session leaves nothing to score."""
        with pytest.raises(InvalidDatasetError):
            evaluate(small_cohort, _protocol(segment_seconds=20.0))

    @pytest.mark.slow
    def test_standard_cohort_accuracy(self, cohort):
        """Test the standard cohort reaches at least 90% accuracy at k=8, d=2, L=17."""
        report = evaluate(cohort, _protocol(k=8, d=2, segment_seconds=10.0))
        assert report.segments == 30
        assert report.failed_enrollments == {}
        # TODO: pin the first passing run's exact accuracy here as a bit-exact regression value
        assert report.accuracy >= 0.9
        assert report.confusion.row_sums() == {p: 6 for p in ("p1", "p2", "p3", "p4", "p5")}

    @pytest.mark.slow
    def test_indistinguishable_pair_near_chance(self):
        """Test two participants sharing one generator are confused about half the time."""
        base = default_synthetic_spec(participants=1, duration_seconds=60.0, seed=11).participants[0]
        twins = SyntheticSpec(
            participants=(
                ParticipantSignature("a", base.base_period_s, base.harmonics, base.noise_std),
                ParticipantSignature("b", base.base_period_s, base.harmonics, base.noise_std),
            ),
            sessions=3,
            duration_seconds=60.0,
            seed=11,
        )
        report = evaluate(generate_synthetic(twins), _protocol(k=4, segment_seconds=2.0))
        assert report.segments == 60
        assert 0.3 <= report.accuracy <= 0.7


class TestSweep:
    """Tests for sweep() and its cell markers."""

    def test_single_cell(self, small_cohort):
        """Test a 1x1 grid gives one row."""
        rows = sweep(small_cohort, _protocol(), [1], [1])
        assert len(rows) == 1
        assert rows[0].cell == (1, 1)
        assert rows[0].ok
        assert 0.0 <= rows[0].accuracy <= 1.0

    def test_matches_direct_evaluation(self, small_cohort):
        """Test a sweep cell reports what evaluate() reports for the same parameters."""
        row = sweep(small_cohort, _protocol(), [3], [2])[0]
        report = evaluate(small_cohort, _protocol(k=3, d=2))
        assert row.accuracy == report.accuracy
        assert row.macro_f1 == report.macro_f1

    def test_duplicated_cells(self, small_cohort):
        """Test repeated values give repeated, identical rows in request order."""
        rows = sweep(small_cohort, _protocol(), [2, 1, 2], [1])
        assert [r.cell for r in rows] == [(2, 1), (1, 1), (2, 1)]
        assert rows[0] == rows[2]

    def test_k_major_order(self, small_cohort):
        """Test rows iterate d fastest."""
        rows = sweep(small_cohort, _protocol(), [1, 2], [1, 2])
        assert [r.cell for r in rows] == [(1, 1), (1, 2), (2, 1), (2, 2)]

    def test_threads_do_not_change_rows(self, small_cohort):
        """Test a parallel sweep matches the serial one apart from wall time."""
        serial = sweep(small_cohort, _protocol(), [1, 2], [1])
        with ThreadPoolExecutor(max_workers=3) as pool:
            threaded = sweep(small_cohort, _protocol(), [1, 2], [1], executor=pool)
        assert [(r.cell, r.accuracy, r.macro_f1) for r in threaded] == [
            (r.cell, r.accuracy, r.macro_f1) for r in serial
        ]

    def test_failed_cell_is_recorded(self, small_cohort):
        """Test an infeasible cell is marked failed and the sweep continues."""
        rows = sweep(small_cohort, _protocol(), [1], [1, 16])
        assert rows[0].ok
        assert rows[1].status == "failed"
        assert math.isnan(rows[1].accuracy)
        assert rows[1].error

    def test_empty_values(self, small_cohort):
        """Test empty k or d lists are rejected."""
        with pytest.raises(InvalidInputError):
            sweep(small_cohort, _protocol(), [], [1])

    def test_resume_skips_completed_cells(self, small_cohort):
        """Test a resumed sweep reuses markers instead of evaluating again."""
        with tempfile.TemporaryDirectory() as tmpdir:
            first = sweep(small_cohort, _protocol(), [1, 2], [1], checkpoint_dir=tmpdir)
            assert sorted(read_completed_cells(tmpdir)) == [(1, 1), (2, 1)]
            with patch.object(sys.modules["nrcid.eval.sweep"], "evaluate", side_effect=AssertionError("recomputed")):
                again = sweep(small_cohort, _protocol(), [1, 2], [1], checkpoint_dir=tmpdir, resume=True)
        assert [(r.cell, r.accuracy, r.macro_f1) for r in again] == [
            (r.cell, r.accuracy, r.macro_f1) for r in first
        ]

    def test_failed_cells_are_rerun(self, small_cohort):
        """Test failed markers do not count as completed."""
        with tempfile.TemporaryDirectory() as tmpdir:
            sweep(small_cohort, _protocol(), [1], [16], checkpoint_dir=tmpdir)
            assert (Path(tmpdir) / "cells" / "k1_d16.done").is_file()
            assert read_completed_cells(tmpdir) == {}

    @pytest.mark.slow
    def test_longer_context_helps(self, cohort):
        """Test k=8 identifies the standard cohort and is at least as accurate as k=1."""
        rows = sweep(cohort, _protocol(segment_seconds=10.0), [1, 8], [2])
        assert [r.cell for r in rows] == [(1, 2), (8, 2)]
        assert all(r.ok for r in rows)
        assert rows[1].accuracy >= 0.9
        assert rows[1].accuracy >= rows[0].accuracy
        assert rows[1].accuracy == evaluate(cohort, _protocol(k=8, d=2, segment_seconds=10.0)).accuracy


class TestSynthetic:
    """Tests for synthetic cohort generation and its YAML form."""

    def test_deterministic(self, small_spec):
        """Test equal specs generate identical recordings."""
        a = generate_synthetic(small_spec)
        b = generate_synthetic(small_spec)
        assert [(r.participant_id, r.session_id) for r in a] == [(r.participant_id, r.session_id) for r in b]
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.samples, y.samples)

    def test_sessions_differ_by_noise(self, small_cohort):
        """Test sessions of one participant draw independent noise."""
        day1, day2 = small_cohort[0], small_cohort[1]
        assert day1.participant_id == day2.participant_id
        assert not np.array_equal(day1.samples, day2.samples)

    def test_pure_sinusoid(self):
        """Test a noiseless single-harmonic signature is sin(2 pi t / T)."""
        spec = SyntheticSpec(
            participants=(ParticipantSignature("s", 1.0, (1.0,)),),
            sessions=1,
            duration_seconds=2.0,
            sample_rate_hz=100.0,
        )
        (rec,) = generate_synthetic(spec)
        t = np.arange(200) / 100.0
        np.testing.assert_allclose(rec.samples, np.sin(2 * np.pi * t), atol=1e-12)
        assert rec.session_id == "day1"

    def test_default_cohort_shape(self, cohort_spec):
        """Test the standard cohort: 5 participants over 0.7-1.2 s periods at SNR 10 dB."""
        assert [p.participant_id for p in cohort_spec.participants] == ["p1", "p2", "p3", "p4", "p5"]
        assert cohort_spec.participants[0].base_period_s == 0.7
        assert cohort_spec.participants[-1].base_period_s == 1.2
        for p in cohort_spec.participants:
            assert p.noise_std == pytest.approx(noise_std_for_snr(p.rms, 10.0), rel=1e-6)
        assert cohort_spec.noise_cutoff_hz == DEFAULT_NOISE_CUTOFF_HZ

    def _noise(self, noise_cutoff_hz):
        noisy = SyntheticSpec(
            participants=(ParticipantSignature("s", 1.0, (1.0,), noise_std=0.25),),
            sessions=1,
            duration_seconds=30.0,
            noise_cutoff_hz=noise_cutoff_hz,
        )
        clean = SyntheticSpec(
            participants=(ParticipantSignature("s", 1.0, (1.0,)),), sessions=1, duration_seconds=30.0
        )
        return generate_synthetic(noisy)[0].samples - generate_synthetic(clean)[0].samples

    def test_wander_noise(self):
        """Test baseline wander has the requested RMS and moves slowly from sample to sample."""
        noise = self._noise(DEFAULT_NOISE_CUTOFF_HZ)
        assert np.sqrt(np.mean(np.square(noise))) == pytest.approx(0.25, rel=1e-9)
        assert np.std(np.diff(noise)) < 0.01 * 0.25

    def test_white_noise(self):
        """Test a spec without a noise cutoff adds white noise."""
        noise = self._noise(None)
        assert np.std(noise) == pytest.approx(0.25, rel=0.05)
        assert np.std(np.diff(noise)) == pytest.approx(0.25 * np.sqrt(2), rel=0.05)

    def test_unit_noise(self):
        """Test unit_noise is zero-mean with RMS 1 and seeded."""
        first = unit_noise(np.random.default_rng(1), 5000, 1000.0, 0.5)
        again = unit_noise(np.random.default_rng(1), 5000, 1000.0, 0.5)
        np.testing.assert_array_equal(first, again)
        assert abs(np.mean(first)) < 1e-12
        assert np.mean(np.square(first)) == pytest.approx(1.0, rel=1e-12)

    def test_noise_cutoff_validation(self):
        """Test the noise cutoff must lie below Nyquist and round-trips through YAML, None included."""
        sig = ParticipantSignature("s", 1.0, (1.0,))
        with pytest.raises(InvalidSpecError):
            SyntheticSpec(participants=(sig,), sample_rate_hz=100.0, noise_cutoff_hz=50.0)
        white = synthetic_spec_from_dict(
            {
                "participants": [{"id": "s", "base_period_s": 1.0, "harmonics": [1.0]}],
                "noise_cutoff_hz": None,
            }
        )
        assert white.noise_cutoff_hz is None
        assert synthetic_spec_from_dict(synthetic_spec_to_dict(white)) == white

    def test_noise_for_snr(self):
        """Test 20 dB means noise at one tenth of the signal RMS."""
        assert noise_std_for_snr(1.0, 20.0) == pytest.approx(0.1)

    def test_yaml_round_trip(self, small_spec):
        """Test a saved spec loads back equal."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = save_synthetic_spec(Path(tmpdir) / "spec.yaml", small_spec)
            assert load_synthetic_spec(path) == small_spec

    def test_participant_count_shorthand(self):
        """Test an integer participant count expands to the standard cohort."""
        spec = synthetic_spec_from_dict({"participants": 4, "seed": 7})
        assert spec == default_synthetic_spec(participants=4, seed=7)

    def test_empty_spec(self):
        """Test a spec without participants is rejected."""
        with pytest.raises(InvalidSpecError):
            synthetic_spec_from_dict({"participants": []})
        with pytest.raises(InvalidSpecError):
            SyntheticSpec(participants=())

    def test_malformed_signature(self):
        """Test missing signature fields are spec errors."""
        with pytest.raises(InvalidSpecError):
            synthetic_spec_from_dict({"participants": [{"id": "a"}]})


class TestReports:
    """Tests for results-directory files."""

    def test_write_report(self, small_cohort):
        """Test the three report files and their headers."""
        report = evaluate(small_cohort, _protocol())
        with tempfile.TemporaryDirectory() as tmpdir:
            written = write_report(report, tmpdir)
            assert sorted(written) == sorted([CONFUSION_FILE, METRICS_FILE, PER_SEGMENT_FILE])
            confusion = (Path(tmpdir) / CONFUSION_FILE).read_text().splitlines()
            per_segment = (Path(tmpdir) / PER_SEGMENT_FILE).read_text().splitlines()
            metrics_text = (Path(tmpdir) / METRICS_FILE).read_text()
        assert confusion[0] == "true,p1,p2,p3"
        assert len(confusion) == 4
        assert per_segment[0] == "true,predicted,rank1,nrc1,rank2,nrc2,rank3,nrc3"
        assert len(per_segment) == 1 + report.segments
        assert "accuracy=" in metrics_text
        assert "k=4\n" in metrics_text
        assert "p1_support=3\n" in metrics_text

    def test_report_is_byte_identical_on_rerun(self, small_cohort):
        """Test two runs of the same evaluation write the same bytes."""
        with tempfile.TemporaryDirectory() as tmpdir:
            first, second = Path(tmpdir) / "a", Path(tmpdir) / "b"
            write_report(evaluate(small_cohort, _protocol()), first)
            write_report(evaluate(small_cohort, _protocol()), second)
            for name in (CONFUSION_FILE, METRICS_FILE, PER_SEGMENT_FILE):
                assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_write_sweep(self):
        """Test sweep.csv columns and blank metrics for failed cells."""
        rows = [
            SweepRow(1, 2, 0.5, 0.25, 1.23456),
            SweepRow(1, 16, math.nan, math.nan, 0.0, status="failed", error="too big"),
        ]
        with tempfile.TemporaryDirectory() as tmpdir:
            path = write_sweep(rows, tmpdir)
            assert path.name == SWEEP_FILE
            lines = path.read_text().splitlines()
        assert lines[0] == "k,d,accuracy,macro_f1,seconds,status"
        assert lines[1] == "1,2,0.5,0.25,1.235,ok"
        assert lines[2] == "1,16,,,0.000,failed"
