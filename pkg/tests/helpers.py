import numpy as np

from pipeline.recordings import Recording, RecordingSet


def make_recording(subject="1", n=60, channels=2, rate=30.0, labels=None, seed=0):
    rng = np.random.default_rng(seed)
    return Recording(
        subject_id=subject,
        sample_rate_hz=rate,
        channels=[f"c{i}" for i in range(channels)],
        samples=rng.normal(size=(n, channels)),
        labels=np.zeros(n, dtype=np.int64) if labels is None else labels,
    )


def make_set(*recordings):
    return RecordingSet(list(recordings))
