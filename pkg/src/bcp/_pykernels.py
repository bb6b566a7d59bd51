"""Pure-Python exploration kernels.

Mirror of ``_kernels.pyx``; selected automatically when the compiled
module is unavailable or ``BCP_PURE=1`` is set.  A configuration is a
sorted tuple of state indices, one entry per agent.
"""

from collections import deque


class Kernel:
    def __init__(self, nstates, rv, bc_sender, bc_post, bc_transfer):
        # rv: list of (p, q, p2, q2); transition ids 0..len(rv)-1
        # broadcasts get ids len(rv)..len(rv)+len(bc)-1
        self.nstates = nstates
        self.nrv = len(rv)
        self.rv = [tuple(t) for t in rv]
        self.bc_sender = list(bc_sender)
        self.bc_post = list(bc_post)
        self.bc_transfer = [tuple(f) for f in bc_transfer]
        self.rv_by_first = [[] for _ in range(nstates)]
        for tid, (p, q, p2, q2) in enumerate(self.rv):
            self.rv_by_first[p].append(tid)
        self.bc_by_sender = [[] for _ in range(nstates)]
        for i, s in enumerate(self.bc_sender):
            self.bc_by_sender[s].append(i)

    def pack(self, agents):
        return tuple(sorted(agents))

    def unpack(self, key):
        return key

    def successors(self, conf):
        counts = {}
        for s in conf:
            counts[s] = counts.get(s, 0) + 1
        out = []
        for p in counts:
            for tid in self.rv_by_first[p]:
                _, q, p2, q2 = self.rv[tid]
                if counts.get(q, 0) < (2 if q == p else 1):
                    continue
                agents = list(conf)
                agents.remove(p)
                agents.remove(q)
                agents.append(p2)
                agents.append(q2)
                agents.sort()
                out.append((tid, tuple(agents)))
            for i in self.bc_by_sender[p]:
                f = self.bc_transfer[i]
                agents = list(conf)
                agents.remove(p)
                agents = [f[s] for s in agents]
                agents.append(self.bc_post[i])
                agents.sort()
                out.append((self.nrv + i, tuple(agents)))
        out.sort(key=lambda e: e[0])
        return out

    def explore(self, c0, budget):
        """Breadth-first exploration from ``c0``.

        Returns ``(nodes, offsets, targets, tids, parent, parent_tid,
        complete)``.  Edges of node ``u`` are ``targets[offsets[u]:
        offsets[u+1]]``.  ``complete`` is False when more than ``budget``
        nodes were discovered; the other values are then partial.
        """
        index = {c0: 0}
        nodes = [c0]
        offsets = [0]
        targets = []
        tids = []
        parent = [-1]
        parent_tid = [-1]
        u = 0
        while u < len(nodes):
            for tid, succ in self.successors(nodes[u]):
                v = index.get(succ)
                if v is None:
                    if len(nodes) >= budget:
                        return nodes, offsets, targets, tids, parent, parent_tid, False
                    v = len(nodes)
                    index[succ] = v
                    nodes.append(succ)
                    parent.append(u)
                    parent_tid.append(tid)
                targets.append(v)
                tids.append(tid)
            offsets.append(len(targets))
            u += 1
        return nodes, offsets, targets, tids, parent, parent_tid, True


def tarjan(n, offsets, targets):
    """Iterative Tarjan SCC.  Returns ``(comp, ncomp)`` with components
    numbered in reverse topological order (sinks first)."""
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    comp = [-1] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, offsets[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = True
        while work:
            v, ei = work[-1]
            end = offsets[v + 1]
            descended = False
            while ei < end:
                w = targets[ei]
                ei += 1
                if index[w] == -1:
                    work[-1] = (v, ei)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = True
                    work.append((w, offsets[w]))
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comp, ncomp


def bottom_components(n, offsets, targets, comp, ncomp):
    bottom = [True] * ncomp
    for u in range(n):
        cu = comp[u]
        if not bottom[cu]:
            continue
        for e in range(offsets[u], offsets[u + 1]):
            if comp[targets[e]] != cu:
                bottom[cu] = False
                break
    return bottom


def backward_reach(n, offsets, targets, seeds):
    """Nodes that can reach some node in ``seeds``."""
    preds = [[] for _ in range(n)]
    for u in range(n):
        for e in range(offsets[u], offsets[u + 1]):
            preds[targets[e]].append(u)
    seen = [False] * n
    queue = deque()
    for s in seeds:
        if not seen[s]:
            seen[s] = True
            queue.append(s)
    while queue:
        v = queue.popleft()
        for u in preds[v]:
            if not seen[u]:
                seen[u] = True
                queue.append(u)
    return seen
