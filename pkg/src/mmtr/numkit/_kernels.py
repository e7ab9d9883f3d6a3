"""Compiled LSTM recurrences; the per-step numpy overhead dominates at desk-scale widths."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _sig(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def lstm_forward(pre, w_h, h0, c0):
    steps, four_h = pre.shape
    n_h = four_h // 4
    gates = np.empty((steps, four_h))
    cells = np.empty((steps + 1, n_h))
    hidden = np.empty((steps + 1, n_h))
    cells[0] = c0
    hidden[0] = h0
    for t in range(steps):
        for r in range(four_h):
            acc = pre[t, r]
            for k in range(n_h):
                acc += w_h[r, k] * hidden[t, k]
            if r < 3 * n_h:
                gates[t, r] = _sig(acc)
            else:
                gates[t, r] = math.tanh(acc)
        for j in range(n_h):
            c = gates[t, n_h + j] * cells[t, j] + gates[t, j] * gates[t, 3 * n_h + j]
            cells[t + 1, j] = c
            hidden[t + 1, j] = gates[t, 2 * n_h + j] * math.tanh(c)
    return gates, cells, hidden


@njit(cache=True)
def lstm_backward(g_out, gates, cells, w_h):
    steps, four_h = gates.shape
    n_h = four_h // 4
    d_pre = np.empty((steps, four_h))
    dh_next = np.zeros(n_h)
    dc_next = np.zeros(n_h)
    for t in range(steps - 1, -1, -1):
        for j in range(n_h):
            i = gates[t, j]
            f = gates[t, n_h + j]
            o = gates[t, 2 * n_h + j]
            g = gates[t, 3 * n_h + j]
            tc = math.tanh(cells[t + 1, j])
            dh = g_out[t, j] + dh_next[j]
            dc = dh * o * (1.0 - tc * tc) + dc_next[j]
            d_pre[t, j] = dc * g * i * (1.0 - i)
            d_pre[t, n_h + j] = dc * cells[t, j] * f * (1.0 - f)
            d_pre[t, 2 * n_h + j] = dh * tc * o * (1.0 - o)
            d_pre[t, 3 * n_h + j] = dc * i * (1.0 - g * g)
            dc_next[j] = dc * f
        for k in range(n_h):
            acc = 0.0
            for r in range(four_h):
                acc += w_h[r, k] * d_pre[t, r]
            dh_next[k] = acc
    return d_pre, dh_next, dc_next
