# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled exploration kernels.

Same interface as ``_pykernels``.  Configurations are packed as bytes
holding one little-endian uint16 state index per agent, sorted.
"""

from libcpp.vector cimport vector
from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING
from cpython cimport array
import array as _array

ctypedef unsigned short st_t


cdef inline void _isort(st_t* a, int n) nogil:
    cdef int i, j
    cdef st_t x
    for i in range(1, n):
        x = a[i]
        j = i - 1
        while j >= 0 and a[j] > x:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = x


cdef array.array _to_array(vector[int]& v):
    cdef array.array out = array.clone(_array.array("i"), v.size(), zero=False)
    cdef size_t i
    for i in range(v.size()):
        out.data.as_ints[i] = v[i]
    return out


cdef class Kernel:
    cdef public int nstates, nrv, nbc
    cdef vector[int] rv_q, rv_p2, rv_q2
    cdef vector[int] rvf_off, rvf_ids
    cdef vector[int] bc_post
    cdef vector[int] bc_fid
    cdef vector[int] bcs_off, bcs_ids
    cdef vector[st_t] bc_f
    cdef vector[int] cnt
    cdef vector[st_t] buf
    cdef vector[int] out_tids
    cdef vector[st_t] out_confs

    def __init__(self, int nstates, rv, bc_sender, bc_post, bc_transfer):
        if nstates >= 65536:
            raise ValueError("compiled kernel supports at most 65535 states")
        self.nstates = nstates
        self.nrv = len(rv)
        self.nbc = len(bc_sender)
        cdef int i, s
        self.rvf_off.assign(nstates + 1, 0)
        for t in rv:
            self.rvf_off[t[0] + 1] += 1
        for i in range(nstates):
            self.rvf_off[i + 1] += self.rvf_off[i]
        self.rvf_ids.assign(self.nrv, 0)
        cdef vector[int] fill = self.rvf_off
        for i, t in enumerate(rv):
            self.rvf_ids[fill[t[0]]] = i
            fill[t[0]] += 1
            self.rv_q.push_back(t[1])
            self.rv_p2.push_back(t[2])
            self.rv_q2.push_back(t[3])
        self.bcs_off.assign(nstates + 1, 0)
        for s in bc_sender:
            self.bcs_off[s + 1] += 1
        for i in range(nstates):
            self.bcs_off[i + 1] += self.bcs_off[i]
        self.bcs_ids.assign(self.nbc, 0)
        fill = self.bcs_off
        for i, s in enumerate(bc_sender):
            self.bcs_ids[fill[s]] = i
            fill[s] += 1
        for s in bc_post:
            self.bc_post.push_back(s)
        # broadcasts sharing one transfer object share one table
        tables = {}
        for f in bc_transfer:
            fid = tables.get(id(f))
            if fid is None:
                fid = len(tables)
                tables[id(f)] = fid
                for s in f:
                    self.bc_f.push_back(s)
            self.bc_fid.push_back(fid)
        self.cnt.assign(nstates, 0)

    def pack(self, agents):
        cdef int n = len(agents)
        cdef bytes key = PyBytes_FromStringAndSize(NULL, 2 * n)
        cdef st_t* p = <st_t*> PyBytes_AS_STRING(key)
        cdef int i = 0
        for a in sorted(agents):
            p[i] = a
            i += 1
        return key

    def unpack(self, bytes key):
        cdef int n = len(key) // 2
        cdef const st_t* p = <const st_t*> PyBytes_AS_STRING(key)
        return tuple([p[i] for i in range(n)])

    cdef int _succ(self, const st_t* conf, int n):
        """Fill out_tids/out_confs with successors sorted by transition id."""
        cdef int i, j, k, e, p, q, tid, b, m
        cdef st_t* w
        self.out_tids.clear()
        self.out_confs.clear()
        self.buf.resize(n)
        for i in range(n):
            self.cnt[conf[i]] += 1
        i = 0
        while i < n:
            p = conf[i]
            for e in range(self.rvf_off[p], self.rvf_off[p + 1]):
                tid = self.rvf_ids[e]
                q = self.rv_q[tid]
                if self.cnt[q] < (2 if q == p else 1):
                    continue
                # drop one p and one q, then add the post states
                k = 0
                m = 0
                for j in range(n):
                    if m == 0 and conf[j] == p:
                        m = 1
                        continue
                    self.buf[k] = conf[j]
                    k += 1
                m = 0
                for j in range(n - 1):
                    if m == 0 and self.buf[j] == q:
                        m = 1
                        continue
                    self.buf[j - m] = self.buf[j]
                self.buf[n - 2] = self.rv_p2[tid]
                self.buf[n - 1] = self.rv_q2[tid]
                w = &self.buf[0]
                _isort(w, n)
                self.out_tids.push_back(tid)
                for j in range(n):
                    self.out_confs.push_back(self.buf[j])
            for e in range(self.bcs_off[p], self.bcs_off[p + 1]):
                b = self.bcs_ids[e]
                k = 0
                m = 0
                for j in range(n):
                    if m == 0 and conf[j] == p:
                        m = 1
                        continue
                    self.buf[k] = self.bc_f[self.bc_fid[b] * self.nstates + conf[j]]
                    k += 1
                self.buf[n - 1] = self.bc_post[b]
                w = &self.buf[0]
                _isort(w, n)
                self.out_tids.push_back(self.nrv + b)
                for j in range(n):
                    self.out_confs.push_back(self.buf[j])
            while i < n and conf[i] == p:
                i += 1
        for i in range(n):
            self.cnt[conf[i]] = 0
        # order by transition id (insertion sort on the small result set)
        cdef int total = self.out_tids.size()
        cdef int a, t2
        cdef vector[st_t] tmp
        for a in range(1, total):
            t2 = self.out_tids[a]
            j = a - 1
            while j >= 0 and self.out_tids[j] > t2:
                j -= 1
            if j == a - 1:
                continue
            tmp.assign(self.out_confs.begin() + a * n, self.out_confs.begin() + (a + 1) * n)
            for k in range(a, j + 1, -1):
                self.out_tids[k] = self.out_tids[k - 1]
                for i in range(n):
                    self.out_confs[k * n + i] = self.out_confs[(k - 1) * n + i]
            self.out_tids[j + 1] = t2
            for i in range(n):
                self.out_confs[(j + 1) * n + i] = tmp[i]
        return total

    def successors(self, bytes key):
        cdef int n = len(key) // 2
        cdef int m = self._succ(<const st_t*> PyBytes_AS_STRING(key), n)
        cdef int j
        out = []
        for j in range(m):
            out.append((self.out_tids[j],
                        PyBytes_FromStringAndSize(<char*> &self.out_confs[j * n], 2 * n)))
        return out

    def explore(self, bytes c0, long budget):
        cdef dict index = {c0: 0}
        cdef list nodes = [c0]
        cdef vector[int] offsets, targets, tids, parent, parent_tid
        cdef int n = len(c0) // 2
        cdef Py_ssize_t u = 0
        cdef int m, j, v
        cdef bytes key, succ
        offsets.push_back(0)
        parent.push_back(-1)
        parent_tid.push_back(-1)
        complete = True
        while u < len(nodes):
            key = nodes[u]
            m = self._succ(<const st_t*> PyBytes_AS_STRING(key), n)
            for j in range(m):
                succ = PyBytes_FromStringAndSize(<char*> &self.out_confs[j * n], 2 * n)
                found = index.get(succ)
                if found is None:
                    if len(nodes) >= budget:
                        complete = False
                        break
                    v = len(nodes)
                    index[succ] = v
                    nodes.append(succ)
                    parent.push_back(u)
                    parent_tid.push_back(self.out_tids[j])
                else:
                    v = found
                targets.push_back(v)
                tids.push_back(self.out_tids[j])
            if not complete:
                break
            offsets.push_back(targets.size())
            u += 1
        return (nodes, _to_array(offsets), _to_array(targets), _to_array(tids),
                _to_array(parent), _to_array(parent_tid), complete)


def tarjan(int n, offsets, targets):
    cdef const int[:] off = offsets
    cdef const int[:] tg = targets
    cdef vector[int] index, low, comp, stack, work_v, work_e
    cdef vector[char] onstack
    index.assign(n, -1)
    low.assign(n, 0)
    comp.assign(n, -1)
    onstack.assign(n, 0)
    cdef int counter = 0, ncomp = 0, root, v, w, ei, end, u
    cdef bint descended
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack.push_back(root)
        onstack[root] = 1
        work_v.push_back(root)
        work_e.push_back(off[root])
        while work_v.size() > 0:
            v = work_v.back()
            ei = work_e.back()
            end = off[v + 1]
            descended = False
            while ei < end:
                w = tg[ei]
                ei += 1
                if index[w] == -1:
                    work_e[work_e.size() - 1] = ei
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack.push_back(w)
                    onstack[w] = 1
                    work_v.push_back(w)
                    work_e.push_back(off[w])
                    descended = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            work_v.pop_back()
            work_e.pop_back()
            if low[v] == index[v]:
                while True:
                    w = stack.back()
                    stack.pop_back()
                    onstack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work_v.size() > 0:
                u = work_v.back()
                if low[v] < low[u]:
                    low[u] = low[v]
    return _to_array(comp), ncomp


def bottom_components(int n, offsets, targets, comp, int ncomp):
    cdef const int[:] off = offsets
    cdef const int[:] tg = targets
    cdef const int[:] cm = comp
    cdef vector[char] bottom
    bottom.assign(ncomp, 1)
    cdef int u, e, cu
    for u in range(n):
        cu = cm[u]
        if not bottom[cu]:
            continue
        for e in range(off[u], off[u + 1]):
            if cm[tg[e]] != cu:
                bottom[cu] = 0
                break
    return [bool(bottom[i]) for i in range(ncomp)]


def backward_reach(int n, offsets, targets, seeds):
    cdef const int[:] off = offsets
    cdef const int[:] tg = targets
    cdef vector[int] poff, pred, fill, queue
    cdef vector[char] seen
    cdef int u, e, v, head = 0
    poff.assign(n + 1, 0)
    for e in range(off[n]):
        poff[tg[e] + 1] += 1
    for u in range(n):
        poff[u + 1] += poff[u]
    pred.assign(off[n], 0)
    fill = poff
    for u in range(n):
        for e in range(off[u], off[u + 1]):
            v = tg[e]
            pred[fill[v]] = u
            fill[v] += 1
    seen.assign(n, 0)
    for s in seeds:
        if not seen[s]:
            seen[s] = 1
            queue.push_back(s)
    while head < <int> queue.size():
        v = queue[head]
        head += 1
        for e in range(poff[v], poff[v + 1]):
            u = pred[e]
            if not seen[u]:
                seen[u] = 1
                queue.push_back(u)
    return [bool(seen[i]) for i in range(n)]
