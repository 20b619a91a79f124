"""Compiled inner loop of the double-edge-swap chain."""

from __future__ import annotations

import numba


@numba.njit(cache=True, nogil=True)
def run_chain(edges, adj, e1, e2, orient):
    accepted = 0
    for s in range(e1.shape[0]):
        a = e1[s]
        b = e2[s]
        if a == b:
            continue
        i = edges[a, 0]
        j = edges[a, 1]
        if orient[s] & 1:
            i, j = j, i
        k = edges[b, 0]
        l = edges[b, 1]  # noqa: E741
        if orient[s] & 2:
            k, l = l, k
        if i == k or i == l or j == k or j == l:
            continue
        if adj[i, k] or adj[j, l]:
            continue
        adj[i, j] = 0
        adj[j, i] = 0
        adj[k, l] = 0
        adj[l, k] = 0
        adj[i, k] = 1
        adj[k, i] = 1
        adj[j, l] = 1
        adj[l, j] = 1
        edges[a, 0] = i
        edges[a, 1] = k
        edges[b, 0] = j
        edges[b, 1] = l
        accepted += 1
    return accepted


__all__ = ["run_chain"]
