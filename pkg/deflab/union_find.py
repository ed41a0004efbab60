"""Disjoint-set forest with union by rank and path compression."""

from typing import Dict, Hashable, Iterable, List


class UnionFind:
    """Dictionary-based union-find over registered hashable items.

    Unlike a lazy forest, every item is registered up front so that
    singleton classes are reported by classes().
    """

    def __init__(self, items: Iterable[Hashable] = ()):
        self._parents: Dict[Hashable, Hashable] = {}
        self._ranks: Dict[Hashable, int] = {}
        self._order: List[Hashable] = []
        for item in items:
            self.add(item)

    def __contains__(self, item) -> bool:
        return item in self._parents

    def __len__(self) -> int:
        return len(self._parents)

    def add(self, item: Hashable) -> None:
        if item not in self._parents:
            self._parents[item] = item
            self._ranks[item] = 1
            self._order.append(item)

    def find(self, item: Hashable) -> Hashable:
        """Representative of item's class."""
        path = [item]
        root = self._parents[item]
        while root != path[-1]:
            path.append(root)
            root = self._parents[root]
        for ancestor in path:
            self._parents[ancestor] = root
        return root

    def union(self, a: Hashable, b: Hashable) -> bool:
        """Merge the classes of a and b; False when they were already merged."""
        root_a = self.find(a)
        root_b = self.find(b)
        if root_a == root_b:
            return False
        rank_a = self._ranks[root_a]
        rank_b = self._ranks[root_b]
        if rank_a < rank_b:
            self._parents[root_a] = root_b
        elif rank_a > rank_b:
            self._parents[root_b] = root_a
        else:
            self._parents[root_b] = root_a
            self._ranks[root_a] += 1
        return True

    def connected(self, a: Hashable, b: Hashable) -> bool:
        return self.find(a) == self.find(b)

    def classes(self) -> List[List[Hashable]]:
        """All classes, each in registration order, ordered by first member."""
        grouped: Dict[Hashable, List[Hashable]] = {}
        for item in self._order:
            grouped.setdefault(self.find(item), []).append(item)
        return list(grouped.values())

    def class_count(self) -> int:
        return len({self.find(item) for item in self._order})
