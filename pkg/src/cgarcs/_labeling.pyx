# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled label-setting kernel; mirrors ``_labeling_py.label_setting`` step for step."""

from libcpp.vector cimport vector
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair

ctypedef long long i64
ctypedef pair[double, i64] hkey

def label_setting(
    const long long[::1] out_ptr,
    const long long[::1] out_arcs,
    const long long[::1] arc_head,
    const double[::1] arc_mcost,
    const double[::1] arc_time,
    const double[::1] arc_load,
    const double[::1] lo_t,
    const double[::1] hi_t,
    const double[::1] lo_q,
    const double[::1] hi_q,
    long long source,
    long long sink,
    double neg_eps,
    bint dominance=True,
):
    cdef Py_ssize_t n_nodes = lo_t.shape[0]
    cdef vector[double] rc, tm, ld
    cdef vector[long long] pred, pnode, parc
    cdef vector[char] alive
    cdef vector[vector[i64]] buckets
    cdef vector[i64] survivors
    # max-heap on (-time, -id) pops the smallest time, then the smallest id
    cdef priority_queue[hkey] heap
    cdef vector[double] sink_rc
    cdef vector[long long] sink_lid, sink_arc
    cdef long long created = 0, dominated = 0
    cdef double thresh = -neg_eps
    cdef double t0, r0, q0, nt, nq, nr
    cdef long long lid, a_in, i, p, k, a, j, e, d, pe, first, new
    cdef Py_ssize_t bi, di
    cdef bint discard, covered
    cdef hkey top
    cdef Py_ssize_t s
    cdef long long cur

    buckets.resize(n_nodes)
    rc.push_back(0.0)
    tm.push_back(lo_t[source])
    ld.push_back(lo_q[source])
    pred.push_back(-1)
    pnode.push_back(-1)
    parc.push_back(-1)
    alive.push_back(1)
    heap.push(hkey(-tm[0], 0))

    while not heap.empty():
        top = heap.top()
        heap.pop()
        t0 = -top.first
        lid = -top.second
        if not alive[lid]:
            continue
        a_in = parc[lid]
        i = source if a_in < 0 else arc_head[a_in]
        p = pnode[lid]
        r0 = rc[lid]
        q0 = ld[lid]
        for k in range(out_ptr[i], out_ptr[i + 1]):
            a = out_arcs[k]
            j = arc_head[a]
            if j == p:
                continue
            nt = t0 + arc_time[a]
            if nt < lo_t[j]:
                nt = lo_t[j]
            if nt > hi_t[j]:
                continue
            nq = q0 + arc_load[a]
            if nq < lo_q[j]:
                nq = lo_q[j]
            if nq > hi_q[j]:
                continue
            nr = r0 + arc_mcost[a]
            created += 1
            if j == sink:
                if nr < thresh:
                    sink_rc.push_back(nr)
                    sink_lid.push_back(lid)
                    sink_arc.push_back(a)
                continue
            if dominance:
                first = -2
                discard = False
                for bi in range(<Py_ssize_t>buckets[j].size()):
                    e = buckets[j][bi]
                    if rc[e] <= nr and tm[e] <= nt and ld[e] <= nq:
                        pe = pnode[e]
                        if pe == i:
                            discard = True
                            break
                        if first == -2:
                            first = pe
                        elif pe != first:
                            discard = True
                            break
                if discard:
                    dominated += 1
                    continue
            new = <long long>rc.size()
            rc.push_back(nr)
            tm.push_back(nt)
            ld.push_back(nq)
            pred.push_back(lid)
            pnode.push_back(i)
            parc.push_back(a)
            alive.push_back(1)
            if dominance and buckets[j].size() > 0:
                survivors.clear()
                for bi in range(<Py_ssize_t>buckets[j].size()):
                    e = buckets[j][bi]
                    if nr <= rc[e] and nt <= tm[e] and nq <= ld[e]:
                        if pnode[e] == i:
                            alive[e] = 0
                            dominated += 1
                            continue
                        covered = False
                        for di in range(<Py_ssize_t>buckets[j].size()):
                            d = buckets[j][di]
                            if (
                                d != e
                                and alive[d]
                                and pnode[d] != i
                                and rc[d] <= rc[e]
                                and tm[d] <= tm[e]
                                and ld[d] <= ld[e]
                            ):
                                covered = True
                                break
                        if covered:
                            alive[e] = 0
                            dominated += 1
                            continue
                    survivors.push_back(e)
                survivors.push_back(new)
                buckets[j].swap(survivors)
            else:
                buckets[j].push_back(new)
            heap.push(hkey(-nt, -new))

    paths = []
    for s in range(<Py_ssize_t>sink_rc.size()):
        arcs = [sink_arc[s]]
        cur = sink_lid[s]
        while parc[cur] >= 0:
            arcs.append(parc[cur])
            cur = pred[cur]
        arcs.reverse()
        paths.append((sink_rc[s], arcs))
    return paths, created, dominated
