import io

import numpy as np
import pytest
from conftest import make_groups, make_set
from hypothesis import given
from hypothesis import strategies as st

from editvec import (
    DEFAULT_BIN_EDGES,
    BinEdges,
    DegenerateBinning,
    DimensionMismatch,
    DuplicateId,
    InvalidConfig,
    LabeledLatentSet,
    LabelOutOfRange,
    ParseError,
    bin_labels,
    binary_groups,
    group_stats,
    load_labeled_latents,
    save_labeled_latents,
    serialize_labeled_latents,
    split_bipolar,
)


def parse(text: str) -> LabeledLatentSet:
    return load_labeled_latents(io.StringIO(text))


class TestLabeledLatentSet:
    def test_basic_construction(self):
        ds = make_set([[1.0, 2.0], [3.0, 4.0]], [0.1, 0.9])
        assert ds.dim == 2
        assert len(ds) == 2
        assert not ds.is_binary

    def test_binary_detection_is_exact(self):
        assert make_set([[1.0], [2.0]], [0.0, 1.0]).is_binary
        assert not make_set([[1.0], [2.0]], [0.0, 0.999999]).is_binary

    def test_label_out_of_range(self):
        with pytest.raises(LabelOutOfRange):
            make_set([[1.0]], [1.3])

    def test_duplicate_ids(self):
        with pytest.raises(DuplicateId):
            make_set([[1.0], [2.0]], [0.1, 0.2], ids=("a", "a"))

    def test_non_finite_latent(self):
        from editvec import NonFiniteInput

        with pytest.raises(NonFiniteInput):
            make_set([[np.inf]], [0.5])

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            LabeledLatentSet(ids=("a",), latents=np.ones((2, 3)), labels=np.array([0.5]))

    def test_subset_keeps_order_and_values(self):
        ds = make_set([[1.0], [2.0], [3.0]], [0.1, 0.5, 0.9])
        sub = ds.subset([2, 0])
        assert sub.ids == ("r2", "r0")
        assert np.array_equal(sub.latents[:, 0], [3.0, 1.0])

    def test_immutability(self):
        ds = make_set([[1.0]], [0.5])
        with pytest.raises(ValueError):
            ds.latents[0, 0] = 2.0


class TestCsvParsing:
    def test_minimal_file(self):
        ds = parse("id,label,z0,z1\na,0.5,1.0,2.0\n")
        assert ds.dim == 2
        assert ds.ids == ("a",)
        assert ds.labels[0] == 0.5
        assert np.array_equal(ds.latents[0], [1.0, 2.0])

    def test_scientific_notation(self):
        ds = parse("id,label,z0\na,5e-1,-1.5e2\n")
        assert ds.labels[0] == 0.5
        assert ds.latents[0, 0] == -150.0

    def test_label_out_of_range(self):
        with pytest.raises(LabelOutOfRange):
            parse("id,label,z0\na,1.3,1.0\n")

    def test_bad_header(self):
        with pytest.raises(ParseError):
            parse("identifier,label,z0\na,0.5,1.0\n")

    def test_misnamed_latent_columns(self):
        with pytest.raises(ParseError):
            parse("id,label,w0,w1\na,0.5,1.0,2.0\n")

    def test_wrong_field_count(self):
        with pytest.raises(DimensionMismatch):
            parse("id,label,z0,z1\na,0.5,1.0\n")

    def test_unparseable_number_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse("id,label,z0\na,0.5,1.0\nb,x,2.0\n")
        assert err.value.line == 3

    def test_duplicate_id(self):
        with pytest.raises(DuplicateId):
            parse("id,label,z0\na,0.5,1.0\na,0.6,2.0\n")

    def test_id_charset(self):
        with pytest.raises(ParseError):
            parse("id,label,z0\na b,0.5,1.0\n")
        ds = parse("id,label,z0\nAb-9_z,0.5,1.0\n")
        assert ds.ids == ("Ab-9_z",)

    def test_empty_file(self):
        with pytest.raises(ParseError):
            parse("")

    def test_header_only(self):
        with pytest.raises(ParseError):
            parse("id,label,z0\n")

    def test_non_finite_value_rejected(self):
        with pytest.raises(ParseError):
            parse("id,label,z0\na,0.5,inf\n")


class TestRoundTrip:
    def test_write_then_load_is_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        ds = make_set(rng.standard_normal((50, 7)), rng.uniform(0, 1, 50))
        path = tmp_path / "ds.csv"
        save_labeled_latents(ds, path)
        back = load_labeled_latents(path)
        assert back.ids == ds.ids
        assert np.array_equal(back.latents, ds.latents)
        assert np.array_equal(back.labels, ds.labels)

    def test_serialization_is_stable(self):
        ds = make_set([[0.1, -2.5]], [0.25])
        text = serialize_labeled_latents(ds)
        again = serialize_labeled_latents(load_labeled_latents(io.StringIO(text)))
        assert text == again

    @given(
        st.lists(
            st.floats(
                min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False
            ),
            min_size=1,
            max_size=8,
        )
    )
    def test_any_finite_values_round_trip(self, values):
        ds = make_set([values], [0.5])
        back = load_labeled_latents(io.StringIO(serialize_labeled_latents(ds)))
        assert np.array_equal(back.latents, ds.latents)


class TestBinEdges:
    def test_default_edges(self):
        assert DEFAULT_BIN_EDGES.edges == (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
        assert DEFAULT_BIN_EDGES.n_bins == 5

    def test_must_span_unit_interval(self):
        with pytest.raises(InvalidConfig):
            BinEdges((0.1, 0.5, 1.0))
        with pytest.raises(InvalidConfig):
            BinEdges((0.0, 0.5, 0.9))

    def test_must_increase(self):
        with pytest.raises(InvalidConfig):
            BinEdges((0.0, 0.5, 0.5, 1.0))

    def test_needs_two_bins(self):
        with pytest.raises(InvalidConfig):
            BinEdges((0.0, 1.0))

    def test_last_bin_closed(self):
        assert DEFAULT_BIN_EDGES.bin_of(1.0) == 4
        assert DEFAULT_BIN_EDGES.bin_of(0.8) == 4
        assert DEFAULT_BIN_EDGES.bin_of(0.2) == 1

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_bin_of_respects_half_open_rule(self, label):
        i = DEFAULT_BIN_EDGES.bin_of(label)
        edges = DEFAULT_BIN_EDGES.edges
        assert edges[i] <= label
        if i < DEFAULT_BIN_EDGES.n_bins - 1:
            assert label < edges[i + 1]
        else:
            assert label <= edges[i + 1]


class TestBinLabels:
    def test_one_record_per_bin(self):
        ds = make_set([[i * 1.0] for i in range(5)], [0.05, 0.25, 0.5, 0.7, 0.95])
        grouped = bin_labels(ds)
        assert grouped.n_groups == 5
        assert grouped.counts() == (1, 1, 1, 1, 1)
        assert [g.index for g in grouped.groups] == [0, 1, 2, 3, 4]

    def test_empty_bins_dropped_with_note(self):
        ds = make_set([[1.0], [2.0], [3.0]], [0.05, 0.5, 0.95])
        grouped = bin_labels(ds)
        assert grouped.n_groups == 3
        assert len(grouped.notes) == 2
        assert any("dropped" in n for n in grouped.notes)

    def test_single_bin_degenerate(self):
        ds = make_set([[1.0], [2.0]], [0.5, 0.5])
        with pytest.raises(DegenerateBinning):
            bin_labels(ds)

    def test_partition_covers_all_records(self):
        rng = np.random.default_rng(4)
        ds = make_set(rng.standard_normal((40, 3)), rng.uniform(0, 1, 40))
        grouped = bin_labels(ds)
        assert sum(grouped.counts()) == len(ds)

    def test_merged_mean_matches_whole_dataset(self):
        rng = np.random.default_rng(15)
        ds = make_set(rng.standard_normal((60, 4)), rng.uniform(0, 1, 60))
        grouped = bin_labels(ds)
        stats = group_stats(grouped)
        assert np.allclose(stats.global_mean, ds.latents.mean(axis=0), atol=1e-12)


class TestSplitBipolar:
    def test_tercile_hand_example(self):
        labels = [i / 10 for i in range(10)]
        ds = make_set([[float(i)] for i in range(10)], labels)
        grouped = split_bipolar(ds)
        low, high = grouped.groups
        assert sorted(low.members[:, 0]) == [0.0, 1.0, 2.0, 3.0]
        assert sorted(high.members[:, 0]) == [6.0, 7.0, 8.0, 9.0]

    def test_invalid_quantiles(self):
        ds = make_set([[1.0], [2.0]], [0.1, 0.9])
        with pytest.raises(InvalidConfig):
            split_bipolar(ds, 0.5, 0.5)
        with pytest.raises(InvalidConfig):
            split_bipolar(ds, 0.0, 0.5)

    def test_coincident_cuts_prefer_class0(self):
        ds = make_set([[1.0], [2.0], [3.0], [4.0]], [0.4, 0.4, 0.4, 0.8])
        grouped = split_bipolar(ds)
        assert grouped.counts() == (3, 1)

    def test_all_identical_labels_degenerate(self):
        ds = make_set([[1.0], [2.0], [3.0]], [0.5, 0.5, 0.5])
        with pytest.raises(DegenerateBinning):
            split_bipolar(ds)

    def test_classes_are_ordered_when_cuts_distinct(self):
        rng = np.random.default_rng(16)
        labels = rng.uniform(0, 1, 30)
        # latent coordinate 0 identifies the record, so group members map
        # back to their labels directly
        ds = make_set([[float(i)] for i in range(30)], labels)
        grouped = split_bipolar(ds)
        low_labels = [labels[int(z)] for z in grouped.groups[0].members[:, 0]]
        high_labels = [labels[int(z)] for z in grouped.groups[1].members[:, 0]]
        assert max(low_labels) < min(high_labels)


class TestBinaryGroups:
    def test_class_order(self):
        ds = make_set([[5.0], [1.0], [3.0]], [1.0, 0.0, 1.0])
        grouped = binary_groups(ds)
        assert grouped.counts() == (1, 2)
        assert grouped.groups[0].members[0, 0] == 1.0

    def test_rejects_continuous(self):
        ds = make_set([[1.0], [2.0]], [0.2, 0.8])
        with pytest.raises(DegenerateBinning):
            binary_groups(ds)

    def test_rejects_single_class(self):
        ds = make_set([[1.0], [2.0]], [1.0, 1.0])
        with pytest.raises(DegenerateBinning):
            binary_groups(ds)


class TestGroupStats:
    def test_mean_of_two_points(self):
        stats = group_stats(make_groups([[(0, 0), (2, 0)]]))
        assert np.array_equal(stats.means[0], [1.0, 0.0])

    def test_global_mean_is_member_weighted(self):
        stats = group_stats(make_groups([[(0.0,), (0.0,)], [(3.0,)]]))
        # member-weighted: (0+0+3)/3, not the mean of group means 1.5
        assert stats.global_mean[0] == pytest.approx(1.0)

    def test_singleton_group(self):
        stats = group_stats(make_groups([[(4.0, 5.0)], [(0.0, 0.0)]]))
        assert np.array_equal(stats.means[0], [4.0, 5.0])

    def test_counts(self):
        stats = group_stats(make_groups([[(0.0,)] * 3, [(1.0,)] * 5]))
        assert stats.counts == (3, 5)
