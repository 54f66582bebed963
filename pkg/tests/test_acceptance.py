"""Acceptance gate: one test per criterion, at the stated tolerances.

A summary line per criterion is printed at the end of the pytest run.
"""

import math
import time

import numpy as np
import pytest

from twomode import experiments as ex
from twomode.dynamics import Pulse, SplitProtocol, constant_schedule, propagate, run_attractive_protocol, run_repulsive_protocol
from twomode.expansion import (
    ExpansionGeometry,
    default_grid,
    density,
    fringe_profile,
    g1_closed_form,
    profile_visibility,
)
from twomode.hamiltonian import TwoModeParams, ground_state, spectral_gap
from twomode.hilbert import JX, JY, JZ, SpinState, expectation, second_moment
from twomode.observables import (
    phase_resolution,
    phase_state_decomposition,
    predicted_rotated_resolution,
    squeezing_xi,
    uncertainty_report,
    visibility,
)
from twomode.oracle import oracle_equivalence


@pytest.fixture
def criterion(record_property):
    def tag(number, title):
        record_property("criterion", (number, title))

    return tag


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def gs(n, g_param):
    return ground_state(TwoModeParams.from_g_param(n, g_param), warn=False).state


def test_c01_oracle_equivalence(criterion):
    criterion(1, "oracle equivalence N<=12, 20 draws, 1e-10, < 5 s")
    with Timer() as tm:
        rep = oracle_equivalence(n_max=12, draws=20, seed=20240601)
    assert rep.cases == 12 * 20
    assert rep.max_energy_error <= 1e-10, rep
    assert rep.max_amplitude_error <= 1e-10, rep
    assert tm.elapsed < 5.0


def test_c02_cat_state_limit(criterion):
    criterion(2, "cat limit N=100 G=-100: <Jz^2> = N^2/4 (1%), V < 0.05, < 1 s")
    with Timer() as tm:
        s = gs(100, -100.0)
        jz2 = second_moment(s, JZ)
        v = visibility(s)
    assert jz2 == pytest.approx(2500.0, rel=0.01)
    assert v < 0.05
    assert tm.elapsed < 1.0


def test_c03_mott_asymptotics(criterion):
    criterion(3, "Mott G=1e6: V(11)=0.5+-0.02, V(10)<0.02, N^2 rot = 4 (11) / 2 (10) +-5%, < 1 s")
    with Timer() as tm:
        odd, even = gs(11, 1e6), gs(10, 1e6)
        v_odd, v_even = visibility(odd), visibility(even)
        r_odd = 11**2 * predicted_rotated_resolution(odd)
        r_even = 10**2 * predicted_rotated_resolution(even)
    failures = []
    if not abs(v_odd - 0.5) <= 0.02:
        failures.append(f"V(N=11) = {v_odd:.4f}")
    if not v_even < 0.02:
        failures.append(f"V(N=10) = {v_even:.3g}")
    if not abs(r_odd / 4 - 1) <= 0.05:
        failures.append(f"N^2 rot (N=11) = {r_odd:.4f}")
    if not abs(r_even / 2 - 1) <= 0.05:
        failures.append(f"N^2 rot (N=10) = {r_even:.4f}")
    assert tm.elapsed < 1.0
    assert not failures, "; ".join(failures)


def test_c04_scaling_exponents(criterion):
    criterion(4, "scaling N in [10,200]: repulsive -2.00+-0.05, attractive -1.38+-0.10, SQL/HL bracket, < 60 s")
    ns = list(range(10, 201))
    with Timer() as tm:
        rep_rows, rep_exp, _ = ex.scaling_study(ex.ScalingSpec(ns, "repulsive", (10, 200)))
        att_rows, att_exp, _ = ex.scaling_study(ex.ScalingSpec(ns, "attractive", (10, 200)))
    assert rep_exp == pytest.approx(-2.0, abs=0.05)
    assert att_exp == pytest.approx(-1.38, abs=0.10)
    for r in rep_rows + att_rows:
        assert r["hl"] <= r["dtheta2"] <= r["sql"], r
    assert tm.elapsed < 60.0


def test_c05_crossover_location(criterion):
    criterion(5, "crossover N=100: global min of dTheta^2 and a gap minimum in G in [-1.3,-0.9], < 30 s")
    with Timer() as tm:
        fine = np.round(np.arange(-2.0, 0.0 + 1e-12, 0.005), 12)
        grid = np.unique(np.concatenate([ex.default_g_grid(), fine]))
        dth = []
        for g in grid:
            s = gs(100, float(g))
            jx = expectation(s, JX)
            dth.append(second_moment(s, JY) / jx**2 if abs(jx) > 1e-10 else np.inf)
        g_star = grid[int(np.argmin(dth))]
        # excitation gap inside the ground state's exchange sector
        gaps = np.array([spectral_gap(TwoModeParams.from_g_param(100, float(g)), same_parity=True) for g in fine])
        inner = np.arange(1, fine.size - 1)
        local_min = fine[inner[(gaps[inner] < gaps[inner - 1]) & (gaps[inner] < gaps[inner + 1])]]
        plain = [spectral_gap(TwoModeParams.from_g_param(100, g)) for g in (-0.9, -1.3)]
    assert -1.3 <= g_star <= -0.9, g_star
    assert np.any((local_min >= -1.3) & (local_min <= -0.9)), local_min
    # the ground doublet closes across the same window
    assert plain[0] > 0.1 and plain[1] < 1e-3 * plain[0]
    assert tm.elapsed < 30.0


def test_c06_superfluid_window(criterion):
    criterion(6, "superfluid N=100, G in [-0.5,100]: product/bound in [1,1.2], xi_y in [0.5,1.5], < 10 s")
    grid = np.unique(np.concatenate([np.linspace(-0.5, 1.0, 31), np.logspace(0, 2, 41)]))
    with Timer() as tm:
        ratios, xis = [], []
        for g in grid:
            s = gs(100, float(g))
            _, _, prod, bound = uncertainty_report(s)
            ratios.append(prod / bound)
            xis.append(squeezing_xi(s))
    ratios, xis = np.array(ratios), np.array(xis)
    failures = []
    if not np.all((ratios >= 1.0 - 1e-12) & (ratios <= 1.2)):
        failures.append(f"product/bound range [{ratios.min():.4f}, {ratios.max():.4f}]")
    bad = grid[(xis < 0.5) | (xis > 1.5)]
    if bad.size:
        failures.append(
            f"xi_y outside [0.5, 1.5] for {bad.size}/{grid.size} G values "
            f"(G >= {bad.min():.3g}; xi_y(G=100) = {xis[-1]:.3f})"
        )
    assert tm.elapsed < 10.0
    assert not failures, "; ".join(failures)


def test_c07_expansion_consistency(criterion):
    criterion(7, "expansion: closed form 1e-10 on 100 draws, integral N (1e-6 N), visibility 1e-8, < 10 s")
    rng = np.random.default_rng(7)
    with Timer() as tm:
        for _ in range(100):
            n = int(rng.integers(1, 120))
            v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
            s = SpinState(n, v + v[::-1]).normalized()
            g = ExpansionGeometry(d=rng.uniform(2, 10), t=rng.uniform(0, 20), theta=rng.uniform(-math.pi, math.pi))
            y = rng.uniform(-(g.d + 3 * g.width), g.d + 3 * g.width)
            ref = g1_closed_form(y, g, n, expectation(s, JX), expectation(s, JY))
            assert abs(density(s, y, g) - ref) <= 1e-10 * max(1.0, abs(ref))
        for g_param in (-1.0, 0.0, 2.0, 50.0):
            s = gs(100, g_param)
            g = ExpansionGeometry()
            prof = fringe_profile(s, default_grid(g), g)
            assert abs(prof.integral() - 100) <= 1e-6 * 100
            assert abs(profile_visibility(s, g) - visibility(s)) <= 1e-8
    assert tm.elapsed < 10.0


def test_c08_rotation_identity(criterion):
    criterion(8, "g=0 pulses: pi/2 maps <Jz^2> to <Jy^2>, pi restores variances, 1e-6 relative")
    rng = np.random.default_rng(8)
    states = [gs(50, 50**2 / 2), gs(51, 30.0), gs(40, -1.0)]
    v = rng.normal(size=31)
    states.append(SpinState(30, v + v[::-1]).normalized())
    for s in states:
        y0, z0 = second_moment(s, JY), second_moment(s, JZ)
        for exact in (False, True):
            half = propagate(s, constant_schedule(0.0, 1.0, 0.0, math.pi / 2), 0.0, 1.0, 1e-4, exact_free=exact).final
            full = propagate(s, constant_schedule(0.0, 2.0, 0.0, math.pi / 2), 0.0, 2.0, 1e-4, exact_free=exact).final
            assert second_moment(half, JY) == pytest.approx(z0, rel=1e-6)
            assert second_moment(full, JY) == pytest.approx(y0, rel=1e-6)
            assert second_moment(full, JZ) == pytest.approx(z0, rel=1e-6)


def test_c09_adiabaticity_ladder(criterion):
    criterion(9, "ladder N=50, tau 5:20:80: monotone for both signs, slow run fidelity >= 0.99, norm 1e-9, < 120 s")
    n, d_min = 50, 0.5
    g0 = 0.1 * math.exp(-d_min**2) / (2 * n)  # |G(0)| = 0.1
    taus = (5.0, 20.0, 80.0)

    def attractive(tau):
        p = SplitProtocol.for_target(n, d_min, tau, -g0, -1.0, post_gamma=5.0)
        return run_attractive_protocol(n, p)

    def repulsive(tau):
        p = SplitProtocol.for_target(n, d_min, tau, g0, n**2 / 2, pulse=Pulse(math.pi / 2, tau, 1.0))
        return run_repulsive_protocol(n, p)

    with Timer() as tm:
        att = [attractive(t) for t in taus]
        rep = [repulsive(t) for t in taus]
        slow = attractive(640.0)
    for runs in (att, rep):
        finals = [tr.final_report.phase_variance for tr in runs]
        assert finals[0] > finals[1] > finals[2], finals
    assert min(tr.final_report.phase_variance for tr in rep) < min(tr.final_report.phase_variance for tr in att)
    fid = slow.column("fidelity")
    assert np.nanmin(fid) >= 0.99
    for tr in att + rep + [slow]:
        assert np.max(np.abs(tr.column("norm") - 1.0)) <= 1e-9
    assert tm.elapsed < 120.0


def test_c10_phase_states(criterion):
    criterion(10, "phase states: Parseval 1e-12, cat amplitudes cos(J theta)/sqrt(J+1/2) 1e-10")
    rng = np.random.default_rng(10)
    for n in list(range(1, 40)) + [99, 100, 255]:
        v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        s = SpinState(n, v).normalized()
        assert abs(phase_state_decomposition(s).probabilities.sum() - 1.0) <= 1e-12
    for n in (2, 7, 10, 11, 50, 101):
        j = n / 2
        d = phase_state_decomposition(SpinState.cat(n))
        np.testing.assert_allclose(d.amplitudes, np.cos(j * d.theta_values) / math.sqrt(j + 0.5), atol=1e-10)
