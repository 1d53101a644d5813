import numpy as np
import pytest

from pipeline.recordings import Recording, RecordingSet, load_recordings, resample, save_recordings
from utils.error_handler import ConfigError, DataError
from tests.helpers import make_recording, make_set


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadRecordings:
    def test_groups_rows_by_subject(self, tmp_path):
        csv = _write(tmp_path / "a.csv", (
            "subject,timestamp,ax,ay,label\n"
            "s1,0.0,1.0,2.0,0\n"
            "s1,0.5,1.5,2.5,1\n"
            "s2,0.0,3.0,4.0,2\n"
            "s2,0.5,3.5,4.5,2\n"
        ))
        rs = load_recordings(csv)
        assert rs.subject_ids == ["s1", "s2"]
        assert rs.channels == ["ax", "ay"]
        assert rs.sample_rate_hz == pytest.approx(2.0)
        np.testing.assert_array_equal(rs.recordings[0].labels, [0, 1])
        np.testing.assert_allclose(rs.recordings[1].samples, [[3.0, 4.0], [3.5, 4.5]])

    def test_reads_every_csv_in_a_directory(self, tmp_path):
        for name, subject in (("x.csv", "1"), ("y.csv", "2")):
            _write(tmp_path / name, f"subject,timestamp,a,label\n{subject},0,1,0\n{subject},1,2,0\n")
        assert load_recordings(tmp_path).subject_ids == ["1", "2"]

    def test_bad_header(self, tmp_path):
        csv = _write(tmp_path / "bad.csv", "who,when,a,label\n1,0,1,0\n")
        with pytest.raises(DataError, match="header"):
            load_recordings(csv)

    def test_unparseable_value_names_the_row(self, tmp_path):
        csv = _write(tmp_path / "nan.csv", "subject,timestamp,a,label\n1,0,1,0\n1,1,oops,0\n")
        with pytest.raises(DataError, match="row 1"):
            load_recordings(csv)

    def test_missing_value(self, tmp_path):
        csv = _write(tmp_path / "gap.csv", "subject,timestamp,a,label\n1,0,,0\n")
        with pytest.raises(DataError, match="row 0"):
            load_recordings(csv)

    def test_non_monotonic_timestamps(self, tmp_path):
        csv = _write(tmp_path / "order.csv", "subject,timestamp,a,label\n1,0,1,0\n1,2,1,0\n1,1,1,0\n")
        with pytest.raises(DataError, match="non-monotonic"):
            load_recordings(csv)

    def test_channel_count_mismatch_between_files(self, tmp_path):
        _write(tmp_path / "a.csv", "subject,timestamp,a,label\n1,0,1,0\n1,1,1,0\n")
        _write(tmp_path / "b.csv", "subject,timestamp,a,b,label\n2,0,1,1,0\n2,1,1,1,0\n")
        with pytest.raises(DataError, match="channels"):
            load_recordings(tmp_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_recordings(tmp_path / "absent.csv")

    def test_empty_input(self, tmp_path):
        csv = _write(tmp_path / "empty.csv", "")
        with pytest.raises(DataError, match="no recordings"):
            load_recordings(csv)

    def test_written_set_reads_back(self, tmp_path, small_recordings):
        path = save_recordings(small_recordings, tmp_path / "out.csv")
        loaded = load_recordings(path)
        assert loaded.subject_ids == small_recordings.subject_ids
        assert loaded.channels == small_recordings.channels
        for a, b in zip(loaded, small_recordings):
            np.testing.assert_array_equal(a.labels, b.labels)
            np.testing.assert_allclose(a.samples, b.samples, rtol=1e-8, atol=1e-9)


class TestRecordingSet:
    def test_empty_set(self):
        with pytest.raises(DataError, match="no recordings"):
            RecordingSet([])

    def test_channel_lists_must_agree(self):
        with pytest.raises(DataError):
            make_set(make_recording("1", channels=2), make_recording("2", channels=3))

    def test_mixed_rates_need_resampling(self):
        rs = make_set(make_recording("1", rate=30.0), make_recording("2", rate=50.0))
        with pytest.raises(DataError, match="resample"):
            rs.sample_rate_hz

    def test_label_length_mismatch(self):
        with pytest.raises(DataError):
            Recording("1", 30.0, ["a"], np.zeros((5, 1)), np.zeros(4))


class TestResample:
    def test_grid_and_interpolation(self):
        t = np.linspace(0.0, 1.0, 61)
        rec = Recording("1", 60.0, ["a"], t[:, None] * 2.0, np.zeros(61, dtype=np.int64), timestamps=t)
        out = resample(make_set(rec), 30.0).recordings[0]
        assert len(out) == 31
        assert out.sample_rate_hz == 30.0
        np.testing.assert_allclose(out.timestamps, np.arange(31) / 30.0)
        np.testing.assert_allclose(out.samples[:, 0], 2.0 * out.timestamps, atol=1e-12)

    def test_labels_take_nearest_sample_and_ties_go_earlier(self):
        t = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        rec = Recording("1", 4.0, ["a"], t[:, None], np.arange(5), timestamps=t)
        out = resample(make_set(rec), 8.0).recordings[0]
        np.testing.assert_array_equal(out.labels, [0, 0, 1, 1, 2, 2, 3, 3, 4])

    def test_same_rate_keeps_values(self):
        rec = make_recording("1", n=45)
        out = resample(make_set(rec), 30.0).recordings[0]
        np.testing.assert_allclose(out.samples, rec.samples, atol=1e-12)
        np.testing.assert_array_equal(out.labels, rec.labels)

    @pytest.mark.parametrize("rate", [0.0, -5.0])
    def test_rate_must_be_positive(self, rate):
        with pytest.raises(ConfigError):
            resample(make_set(make_recording()), rate)
