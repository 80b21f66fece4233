"""Pure-Python adaptive Simpson kernel (reference and fallback backend).

Integrates the vector of phase functions ``amps[j] * exp(-1j * freqs[j] * mu)``
over ``[a, b]`` with one shared subdivision and an entrywise absolute-error
target. The compiled backend in ``_simpson_ext.pyx`` follows the same
traversal order panel by panel.
"""

import math

import numpy as np

OK = 0
TOO_MANY_INTERVALS = 1
DEPTH_EXCEEDED = 2

MAX_DEPTH = 60


def initial_panels(freqs, width):
    wmax = float(np.max(np.abs(freqs))) if len(freqs) else 0.0
    return max(4, int(math.ceil(wmax * width)))


def adaptive_simpson_phases(amps, freqs, a, b, tol, max_intervals):
    """Return ``(integral, error_estimate, n_intervals, status)``."""
    amps = np.ascontiguousarray(amps, dtype=complex)
    freqs = np.ascontiguousarray(freqs, dtype=float)
    n = amps.shape[0]
    total = np.zeros(n, dtype=complex)
    errv = np.zeros(n)
    width = b - a
    if n == 0 or width == 0.0:
        return total, 0.0, 0, OK

    def f(x):
        return amps * np.exp(-1j * freqs * x)

    panels = initial_panels(freqs, width)
    leaves = 0
    per_unit = tol / width
    for p in range(panels):
        pa = a + width * p / panels
        pb = a + width * (p + 1) / panels
        fa = f(pa)
        fb = f(pb)
        fm = f(0.5 * (pa + pb))
        stack = [(pa, pb, fa, fm, fb, (pb - pa) / 6.0 * (fa + 4.0 * fm + fb))]
        while stack:
            sa, sb, fa, fm, fb, whole = stack[-1]
            h = sb - sa
            m = 0.5 * (sa + sb)
            flm = f(0.5 * (sa + m))
            frm = f(0.5 * (m + sb))
            left = h / 12.0 * (fa + 4.0 * flm + fm)
            right = h / 12.0 * (fm + 4.0 * frm + fb)
            diff = left + right - whole
            adiff = np.abs(diff)
            if np.max(adiff) / 15.0 <= per_unit * h:
                total += left + right + diff / 15.0
                errv += adiff / 15.0
                leaves += 1
                stack.pop()
                if leaves > max_intervals:
                    return total, float(np.max(errv)), leaves, TOO_MANY_INTERVALS
            else:
                if len(stack) > MAX_DEPTH:
                    return total, float(np.max(errv)), leaves, DEPTH_EXCEEDED
                stack[-1] = (m, sb, fm, frm, fb, right)
                stack.append((sa, m, fa, flm, fm, left))
    return total, float(np.max(errv)), leaves, OK
