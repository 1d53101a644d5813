# Data pipeline: recordings -> resampled, split, normalized windows
from .recordings import Recording, RecordingSet, load_recordings, save_recordings, resample
from .splits import SplitAssignment, SplitPolicy, split_by_subject
from .normalization import NormalizationStats, fit_normalization, apply_normalization
from .windows import WindowDataset, segment_windows, sample_labeled_subset
from .synthetic import SyntheticConfig, generate_synthetic
from .datasets import PROFILES, DatasetProfile, PreparedData, get_profile, prepare_dataset
