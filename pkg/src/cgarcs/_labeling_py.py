"""Pure-Python label-setting kernel (fallback for the compiled ``_labeling``).

Both kernels must walk labels in the same order and perform the same float
operations so that results are bit-identical across backends.
"""

from heapq import heappop, heappush


def label_setting(
    out_ptr,
    out_arcs,
    arc_head,
    arc_mcost,
    arc_time,
    arc_load,
    lo_t,
    hi_t,
    lo_q,
    hi_q,
    source,
    sink,
    neg_eps,
    dominance=True,
):
    """SPPRC with 2-cycle elimination, labels processed by nondecreasing time.

    Returns ``(paths, created, dominated)`` where ``paths`` lists
    ``(rcost, arc_ids)`` for every sink label with ``rcost < -neg_eps``.
    """
    out_ptr = out_ptr.tolist()
    out_arcs = out_arcs.tolist()
    arc_head = arc_head.tolist()
    arc_mcost = arc_mcost.tolist()
    arc_time = arc_time.tolist()
    arc_load = arc_load.tolist()
    lo_t = lo_t.tolist()
    hi_t = hi_t.tolist()
    lo_q = lo_q.tolist()
    hi_q = hi_q.tolist()
    n_nodes = len(lo_t)

    rc = [0.0]
    tm = [lo_t[source]]
    ld = [lo_q[source]]
    pred = [-1]
    pnode = [-1]
    parc = [-1]
    alive = [True]
    buckets = [[] for _ in range(n_nodes)]
    heap = [(tm[0], 0)]
    sink_labels = []
    created = 0
    dominated = 0
    thresh = -neg_eps

    while heap:
        t0, lid = heappop(heap)
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
                    sink_labels.append((nr, lid, a))
                continue
            bucket = buckets[j]
            if dominance:
                first = -2
                discard = False
                for e in bucket:
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
            new = len(rc)
            rc.append(nr)
            tm.append(nt)
            ld.append(nq)
            pred.append(lid)
            pnode.append(i)
            parc.append(a)
            alive.append(True)
            if dominance and bucket:
                survivors = []
                for e in bucket:
                    if nr <= rc[e] and nt <= tm[e] and nq <= ld[e]:
                        if pnode[e] == i:
                            alive[e] = False
                            dominated += 1
                            continue
                        covered = False
                        for d in bucket:
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
                            alive[e] = False
                            dominated += 1
                            continue
                    survivors.append(e)
                survivors.append(new)
                buckets[j] = survivors
            else:
                bucket.append(new)
            heappush(heap, (nt, new))

    paths = []
    for nr, lid, a in sink_labels:
        arcs = [a]
        cur = lid
        while parc[cur] >= 0:
            arcs.append(parc[cur])
            cur = pred[cur]
        arcs.reverse()
        paths.append((nr, arcs))
    return paths, created, dominated
