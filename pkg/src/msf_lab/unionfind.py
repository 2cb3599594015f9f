class UnionFind:
    def __init__(self, num):
        self.parents = list(range(num))
        self.rank = [0] * num

    def find(self, x):
        root = x
        while self.parents[root] != root:
            root = self.parents[root]
        while self.parents[x] != root:
            self.parents[x], x = root, self.parents[x]
        return root

    def union(self, x, y):
        """Merge the classes of x and y; return False if already merged."""
        x = self.find(x)
        y = self.find(y)
        if x == y:
            return False
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        self.parents[y] = x
        if self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        return True

    def n_classes(self):
        return sum(1 for i, p in enumerate(self.parents) if i == p)
