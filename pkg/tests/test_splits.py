import pytest

from config.config import USC_HAD_SPLIT
from pipeline.splits import SplitPolicy, round_half_up, split_by_subject
from utils.error_handler import DataError


def _ids(n):
    return [str(i) for i in range(1, n + 1)]


class TestFractionalSplit:
    @pytest.mark.parametrize("n, sizes", [
        (4, (2, 1, 1)),
        (10, (6, 2, 2)),
        (30, (19, 5, 6)),
        (61, (39, 10, 12)),
    ])
    def test_sizes(self, n, sizes):
        split = split_by_subject(_ids(n), seed=0)
        assert (len(split.train), len(split.val), len(split.test)) == sizes

    def test_partition_is_disjoint_and_complete(self):
        subjects = _ids(24)
        split = split_by_subject(subjects, seed=5)
        parts = [set(split.train), set(split.val), set(split.test)]
        assert set.union(*parts) == set(subjects)
        assert sum(len(p) for p in parts) == len(subjects)

    def test_same_seed_same_split(self):
        assert split_by_subject(_ids(20), seed=7) == split_by_subject(_ids(20), seed=7)

    def test_input_order_does_not_matter(self):
        forward = split_by_subject(_ids(12), seed=1)
        backward = split_by_subject(list(reversed(_ids(12))), seed=1)
        assert forward == backward

    def test_different_seeds_usually_differ(self):
        splits = {split_by_subject(_ids(20), seed=s).test for s in range(5)}
        assert len(splits) > 1

    def test_numeric_ids_sort_numerically(self):
        split = split_by_subject(_ids(12), seed=0)
        assert list(split.train) == sorted(split.train, key=int)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_too_few_subjects(self, n):
        with pytest.raises(DataError):
            split_by_subject(_ids(n))


class TestFixedListSplit:
    def test_usc_had_protocol_by_default(self):
        split = split_by_subject(_ids(14), SplitPolicy.FIXED_LIST)
        assert list(split.train) == USC_HAD_SPLIT["train"]
        assert list(split.val) == ["11", "12"]
        assert list(split.test) == ["13", "14"]

    def test_explicit_lists(self):
        lists = {"train": ["a", "b"], "val": ["c"], "test": ["d"]}
        split = split_by_subject(["d", "c", "b", "a"], "fixed_list", fixed_lists=lists)
        assert (split.train, split.val, split.test) == (("a", "b"), ("c",), ("d",))

    def test_unassigned_subject(self):
        with pytest.raises(DataError, match="not assigned"):
            split_by_subject(_ids(15), SplitPolicy.FIXED_LIST)


def test_round_half_up():
    assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 1.49)] == [1, 2, 3, 1]
