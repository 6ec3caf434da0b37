"""Shared oracles and the acceptance summary hook.

The oracles deliberately avoid the package's own kernels: the full-space
Hamiltonian is built from Kronecker products of 2x2 operators and evolved with
``scipy.linalg.expm``.
"""
from __future__ import annotations

from functools import reduce

import numpy as np
import pytest
import scipy.linalg

from dtqc.basis import named_pattern

P_GROUND = np.diag([1.0, 0.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
N_EXC = np.diag([0.0, 1.0])
ID2 = np.eye(2)


def brute_force_legal(n):
    """All n-bit masks without two adjacent set bits, by filtering 2^n."""
    return [s for s in range(1 << n) if not any((s >> i) & 3 == 3 for i in range(n - 1))]


def site_operator(n, ops: dict):
    """Kronecker product with ``ops[i]`` on site i; bit i of the full index is
    site i (the rightmost factor is site 0)."""
    return reduce(np.kron, [ops.get(i, ID2) for i in reversed(range(n))])


def full_pxp(n, n_left, omega_left, omega_right):
    dim = 1 << n
    h = np.zeros((dim, dim))
    for i in range(n):
        ops = {i: X}
        if i > 0:
            ops[i - 1] = P_GROUND
        if i < n - 1:
            ops[i + 1] = P_GROUND
        h += 0.5 * (omega_left if i < n_left else omega_right) * site_operator(n, ops)
    return h


def full_kick(n, lo, hi, theta):
    count = sum(site_operator(n, {i: N_EXC}) for i in range(lo, hi))
    return np.exp(-1j * theta * np.diag(count))


def full_space_trajectory(params, sample_times):
    """Amplitudes in the 2^N space at each sample time (sample before kick)."""
    n, nl = params.n_sites, params.n_left
    h = full_pxp(n, nl, params.omega_left, params.omega_right)
    kl = full_kick(n, 0, nl, params.theta_left)
    kr = full_kick(n, nl, n, params.theta_right)
    t_end = max(sample_times)
    kicks = []
    for period, table in ((params.period_left, kl), (params.period_right, kr)):
        kicks += [(k * period, table) for k in range(1, int(t_end / period) + 1)]
    events = [(t, 0, None) for t in sample_times] + [(t, 1, tab) for t, tab in kicks]
    events.sort(key=lambda e: (e[0], e[1]))
    psi = np.zeros(1 << n, dtype=complex)
    psi[named_pattern(params.initial_state, n)] = 1.0
    t_now, out = 0.0, []
    for t, kind, table in events:
        if t > t_now:
            psi = scipy.linalg.expm(-1j * h * (t - t_now)) @ psi
            t_now = t
        if kind == 0:
            out.append(psi.copy())
        else:
            psi = table * psi
    return np.array(out)


@pytest.fixture(scope="session")
def acceptance_log(request):
    log = []
    request.config._acceptance_log = log
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(log):
        terminalreporter.write_line(line)
