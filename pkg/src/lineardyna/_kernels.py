"""Compiled inner loops for model learning, value updates and sweeps.

Models store ``F`` densely over *slots*: the features seen so far, in order
of first appearance. ``feat[s]`` is the feature held by slot ``s``, ``slot[i]``
the slot of feature ``i`` (or -1), and ``order`` lists slots by increasing
feature index. Only the leading ``k`` slots are live. Absent entries are
exact zeros.

Sweep queues are priority arrays over feature indices where 0 means "not
queued"; ``size`` is a one-element counter. Popping takes the first argmax,
so ties go to the lowest index.

Functions that move ``theta`` return the index of the first coordinate
that left ``[-THETA_LIMIT, THETA_LIMIT]`` (or went NaN), or -1.
"""
from __future__ import annotations

import numpy as np
from numba import njit

THETA_LIMIT = 1e12


@njit(cache=True)
def _ok(v):
    return -THETA_LIMIT <= v <= THETA_LIMIT


@njit(cache=True)
def sparse_dot(theta, idx, val):
    total = 0.0
    for n in range(idx.shape[0]):
        total += theta[idx[n]] * val[n]
    return total


@njit(cache=True)
def td0(theta, idx, val, idx2, val2, r, gamma, alpha):
    delta = r + gamma * sparse_dot(theta, idx2, val2) - sparse_dot(theta, idx, val)
    bad = -1
    if alpha != 0.0:
        a = alpha * delta
        for n in range(idx.shape[0]):
            theta[idx[n]] += a * val[n]
        for n in range(idx.shape[0]):
            if not _ok(theta[idx[n]]):
                bad = idx[n]
                break
    return delta, bad


@njit(cache=True)
def rg(theta, idx, val, idx2, val2, r, gamma, alpha):
    delta = r + gamma * sparse_dot(theta, idx2, val2) - sparse_dot(theta, idx, val)
    bad = -1
    if alpha != 0.0:
        a = alpha * delta
        ga = gamma * a
        for n in range(idx.shape[0]):
            theta[idx[n]] += a * val[n]
        for n in range(idx2.shape[0]):
            theta[idx2[n]] -= ga * val2[n]
        for n in range(idx.shape[0]):
            if not _ok(theta[idx[n]]):
                return delta, idx[n]
        for n in range(idx2.shape[0]):
            if not _ok(theta[idx2[n]]):
                return delta, idx2[n]
    return delta, bad


@njit(cache=True)
def col_value(F, feat, k, theta, sj):
    """``theta . F e_j`` for the feature in slot ``sj``.

    Summed in slot order with four interleaved partial sums, which lets the
    loop vectorize without fastmath. Absent entries are exact zeros.
    """
    s0 = s1 = s2 = s3 = 0.0
    m = k - k % 4
    for t in range(0, m, 4):
        s0 += theta[feat[t]] * F[t, sj]
        s1 += theta[feat[t + 1]] * F[t + 1, sj]
        s2 += theta[feat[t + 2]] * F[t + 2, sj]
        s3 += theta[feat[t + 3]] * F[t + 3, sj]
    for t in range(m, k):
        s0 += theta[feat[t]] * F[t, sj]
    return (s0 + s1) + (s2 + s3)


@njit(cache=True)
def basis_error(F, feat, k, slot, b, theta, gamma, j):
    sj = slot[j]
    v = b[j]
    if sj >= 0:
        v += gamma * col_value(F, feat, k, theta, sj)
    return v - theta[j]


@njit(cache=True)
def apply(F, k, slot, idx, val, out):
    """``out[:k] = F phi`` in slot coordinates."""
    for t in range(k):
        out[t] = 0.0
    for n in range(idx.shape[0]):
        sj = slot[idx[n]]
        if sj < 0:
            continue
        x = val[n]
        for t in range(k):
            out[t] += F[t, sj] * x


@njit(cache=True)
def model_update(F, k, slot, b, idx, val, idx2, val2, r, alpha, tol):
    """``F += alpha (phi' - F phi) phi^T`` and ``b += alpha (r - b.phi) phi`` with pruning."""
    err = np.zeros(k)
    for n in range(idx.shape[0]):
        sj = slot[idx[n]]
        x = val[n]
        for t in range(k):
            err[t] -= F[t, sj] * x
    for n in range(idx2.shape[0]):
        err[slot[idx2[n]]] += val2[n]
    pred = 0.0
    for n in range(idx.shape[0]):
        pred += b[idx[n]] * val[n]
    berr = alpha * (r - pred)
    for n in range(idx.shape[0]):
        j = idx[n]
        sj = slot[j]
        s = alpha * val[n]
        for t in range(k):
            e = err[t]
            if e != 0.0:
                v = F[t, sj] + s * e
                if -tol <= v <= tol:
                    v = 0.0
                F[t, sj] = v
        b[j] += berr * val[n]


@njit(cache=True)
def q_push(prio, size, i, p, floor):
    if p > floor and p > prio[i]:
        if prio[i] == 0.0:
            size[0] += 1
        prio[i] = p
        return True
    return False


@njit(cache=True)
def q_pop(prio, size):
    i = np.argmax(prio)
    p = prio[i]
    prio[i] = 0.0
    size[0] -= 1
    return i, p


@njit(cache=True)
def basis_backups(F, feat, k, slot, b, theta, gamma, alpha, js):
    """TD(0) backups on the unit-basis samples ``js`` in sequence."""
    for n in range(js.shape[0]):
        j = js[n]
        delta = basis_error(F, feat, k, slot, b, theta, gamma, j)
        theta[j] += alpha * delta
        if not _ok(theta[j]):
            return n + 1, j
    return js.shape[0], -1


@njit(cache=True)
def rg_basis_backups(F, feat, k, slot, b, theta, gamma, alpha, js):
    """Residual-gradient backups on unit-basis samples: direction ``e_j - gamma F e_j``."""
    for n in range(js.shape[0]):
        j = js[n]
        delta = basis_error(F, feat, k, slot, b, theta, gamma, j)
        a = alpha * delta
        ga = gamma * a
        theta[j] += a
        sj = slot[j]
        if sj >= 0:
            for t in range(k):
                f = F[t, sj]
                if f != 0.0:
                    theta[feat[t]] -= ga * f
        if not _ok(theta[j]):
            return n + 1, j
        if sj >= 0:
            for t in range(k):
                if F[t, sj] != 0.0 and not _ok(theta[feat[t]]):
                    return n + 1, feat[t]
    return js.shape[0], -1


@njit(cache=True)
def pwma_seed(F, feat, k, slot, order, idx, val, delta, prio, size, floor):
    for n in range(idx.shape[0]):
        si = slot[idx[n]]
        if si < 0:
            continue
        dx = delta * val[n]
        for o in range(k):
            s = order[o]
            f = F[si, s]
            if f != 0.0:
                q_push(prio, size, feat[s], abs(f * dx), floor)


@njit(cache=True)
def pwma_sweep(F, feat, k, slot, order, b, theta, gamma, alpha, prio, size, floor, max_pops):
    """Pop ``i``, back it up, and queue its predecessors ``j`` at ``|F[i, j] delta|``."""
    pops = 0
    backups = 0
    while pops < max_pops and size[0] > 0:
        i, _ = q_pop(prio, size)
        pops += 1
        delta = basis_error(F, feat, k, slot, b, theta, gamma, i)
        theta[i] += alpha * delta
        backups += 1
        if not _ok(theta[i]):
            return pops, backups, i
        si = slot[i]
        if si < 0:
            continue
        for o in range(k):
            s = order[o]
            f = F[si, s]
            if f != 0.0:
                q_push(prio, size, feat[s], abs(f * delta), floor)
    return pops, backups, -1


@njit(cache=True)
def mg_sweep(F, feat, k, slot, order, b, theta, gamma, alpha, prio, size, floor, max_pops):
    """Pop ``i`` and back up every predecessor ``j`` (``F[i, j] != 0``), queueing each at ``|delta|``."""
    pops = 0
    backups = 0
    while pops < max_pops and size[0] > 0:
        i, _ = q_pop(prio, size)
        pops += 1
        si = slot[i]
        if si < 0:
            continue
        for o in range(k):
            s = order[o]
            if F[si, s] == 0.0:
                continue
            j = feat[s]
            delta = b[j] + gamma * col_value(F, feat, k, theta, s) - theta[j]
            theta[j] += alpha * delta
            backups += 1
            if not _ok(theta[j]):
                return pops, backups, j
            q_push(prio, size, j, abs(delta), floor)
    return pops, backups, -1


@njit(cache=True)
def lookahead(Fs, bs, feat, k, slot, theta, gamma, idx, val, out):
    """``out[a] = b_a . phi + gamma theta . F_a phi`` for every action."""
    for a in range(len(Fs)):
        F = Fs[a]
        b = bs[a]
        total = 0.0
        for n in range(idx.shape[0]):
            j = idx[n]
            v = b[j]
            sj = slot[j]
            if sj >= 0:
                v += gamma * col_value(F, feat, k, theta, sj)
            total += val[n] * v
        out[a] = total


@njit(cache=True)
def max_backup_error(Fs, bs, feat, k, slot, theta, gamma, j):
    sj = slot[j]
    best = -np.inf
    for a in range(len(Fs)):
        v = bs[a][j]
        if sj >= 0:
            v += gamma * col_value(Fs[a], feat, k, theta, sj)
        if v > best:
            best = v
    return best - theta[j]


@njit(cache=True)
def control_sweep(Fs, bs, feat, k, slot, order, theta, gamma, alpha, prio, size, floor, max_pops):
    """MG sweep with the max-over-actions backup; predecessors are unioned across actions."""
    pops = 0
    backups = 0
    while pops < max_pops and size[0] > 0:
        i, _ = q_pop(prio, size)
        pops += 1
        si = slot[i]
        if si < 0:
            continue
        for o in range(k):
            s = order[o]
            pred = False
            for a in range(len(Fs)):
                if Fs[a][si, s] != 0.0:
                    pred = True
                    break
            if not pred:
                continue
            j = feat[s]
            delta = max_backup_error(Fs, bs, feat, k, slot, theta, gamma, j)
            theta[j] += alpha * delta
            backups += 1
            if not _ok(theta[j]):
                return pops, backups, j
            q_push(prio, size, j, abs(delta), floor)
    return pops, backups, -1
