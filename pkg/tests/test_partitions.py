import pytest

from hermcok.partitions import (
    Partition,
    dominated_by,
    partitions_in_box,
    partitions_of,
    partitions_up_to,
)


def test_normalization_and_basic_properties():
    g = Partition((1, 2, 0, 1))
    assert g.parts == (2, 1, 1)
    assert (g.rank, g.size, g.order(3)) == (3, 4, 81)
    assert Partition().rank == 0 and str(Partition()) == "0"


def test_clamping():
    g = Partition.clamped((3, 1, 2), 2)
    assert g.parts == (2, 2, 1) and g.clamp == 2
    assert not g.exact()
    assert Partition.clamped((1, 1), 2).exact()
    assert g.reclamp(1) == Partition((1, 1, 1), 1)
    with pytest.raises(ValueError):
        Partition((3,), 2)
    with pytest.raises(ValueError):
        Partition((1,), 0)


def test_conjugate():
    assert Partition((3, 1)).conjugate() == Partition((2, 1, 1))
    assert Partition((2, 2)).conj_list(4) == [2, 2, 0, 0]
    for parts in partitions_of(7):
        g = Partition(parts)
        assert g.conjugate().conjugate() == g


@pytest.mark.parametrize("text", ["2.1@2", "1.1", "0", "3@3", "2.2.1"])
def test_text_round_trip(text):
    g = Partition.parse(text)
    assert str(g) == text
    assert Partition.from_json(g.to_json()) == g


def test_partition_counts():
    assert [sum(1 for _ in partitions_of(n)) for n in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]
    assert len(partitions_up_to(3)) == 1 + 1 + 2 + 3
    assert len(partitions_up_to(4, max_rank=1)) == 5
    box = partitions_in_box(2, 2)
    assert sorted(str(b) for b in box) == sorted(["0", "1", "2", "1.1", "2.1", "2.2"])


def test_dominance():
    assert dominated_by(Partition((1,)), Partition((2,)))
    assert dominated_by(Partition((1, 1)), Partition((2, 1)))
    assert not dominated_by(Partition((1, 1)), Partition((2,)))
    assert not dominated_by(Partition((3,)), Partition((2, 2)))
