from deflab.union_find import UnionFind


def test_singletons():
    uf = UnionFind("abc")
    assert uf.class_count() == 3
    assert uf.classes() == [["a"], ["b"], ["c"]]


def test_union_and_find():
    uf = UnionFind(range(6))
    assert uf.union(0, 1)
    assert uf.union(2, 3)
    assert uf.union(1, 3)
    assert not uf.union(0, 2)
    assert uf.connected(0, 3)
    assert not uf.connected(0, 4)
    assert uf.class_count() == 3


def test_classes_follow_registration_order():
    uf = UnionFind([(2, 2), (1, 1), (1, 2)])
    uf.union((1, 2), (2, 2))
    assert uf.classes() == [[(2, 2), (1, 2)], [(1, 1)]]


def test_add_is_idempotent():
    uf = UnionFind()
    uf.add("x")
    uf.add("x")
    assert len(uf) == 1
    assert "x" in uf
    assert "y" not in uf


def test_long_chain_compresses():
    uf = UnionFind(range(1000))
    for i in range(999):
        uf.union(i, i + 1)
    assert uf.class_count() == 1
    assert all(uf.find(i) == uf.find(0) for i in range(1000))
