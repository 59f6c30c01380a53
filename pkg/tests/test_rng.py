import numpy as np

from hestonsim.rng import RngStream


def test_same_key_reproduces():
    a = RngStream(42, (3, 1)).gen.standard_normal(100)
    b = RngStream(42, (3, 1)).gen.standard_normal(100)
    np.testing.assert_array_equal(a, b)


def test_distinct_keys_differ():
    a = RngStream(42, (0,)).gen.standard_normal(100)
    b = RngStream(42, (1,)).gen.standard_normal(100)
    assert not np.array_equal(a, b)


def test_substream_is_pure_function_of_key():
    root = RngStream(7)
    s1 = root.substream(2, 5)
    s2 = RngStream(7).substream(2).substream(5)
    direct = RngStream(7, (2, 5))
    x1 = s1.gen.uniform(size=50)
    x2 = s2.gen.uniform(size=50)
    x3 = direct.gen.uniform(size=50)
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(x1, x3)


def test_substream_independent_of_sibling_order():
    a_first = RngStream(9).substream(0).gen.uniform(size=10)
    root = RngStream(9)
    _ = root.substream(1).gen.uniform(size=10)
    a_second = root.substream(0).gen.uniform(size=10)
    np.testing.assert_array_equal(a_first, a_second)
