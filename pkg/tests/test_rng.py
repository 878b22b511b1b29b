import numpy as np

from plantedlab.rng import RandomStream, blocked_mc


def test_same_stream_same_draws():
    a = RandomStream(7, 3).generator().standard_normal(100)
    b = RandomStream(7, 3).generator().standard_normal(100)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = RandomStream(7, 0).generator().standard_normal(100)
    b = RandomStream(7, 1).generator().standard_normal(100)
    c = RandomStream(8, 0).generator().standard_normal(100)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_generator_path_children_independent():
    rs = RandomStream(5)
    a = rs.generator(1, 0).standard_normal(50)
    b = rs.generator(1, 1).standard_normal(50)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, rs.generator(1, 0).standard_normal(50))


def test_blocked_mc_partition_and_determinism():
    sizes = [size for _, size, _ in blocked_mc(10_000, 1024, RandomStream(1))]
    assert sum(sizes) == 10_000
    assert all(s == 1024 for s in sizes[:-1])
    first = [g.standard_normal(3) for _, _, g in blocked_mc(3000, 1000, RandomStream(2))]
    second = [g.standard_normal(3) for _, _, g in blocked_mc(3000, 1000, RandomStream(2))]
    for x, y in zip(first, second):
        assert np.array_equal(x, y)
