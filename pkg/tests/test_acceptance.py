"""Acceptance suite: every criterion as one test, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own verdicts.
"""

from __future__ import annotations

import contextlib
import sys
import time

import numpy as np
import pytest

from conftest import FIG2_ADJACENCY, ScriptedStream
from exhaustive import enumerate_chain, enumerate_decoder_branches, gf2_rank
from ltinact.analysis import expected_inactivations, iterate_states
from ltinact.decoder import assemble_permuted, decode, triangularize, zero_below
from ltinact.degree import preset, validate
from ltinact.distribution import inactivation_distribution, iterate_states3
from ltinact.graph import BipartiteGraph, encode, payload_encode
from ltinact.sim import ExperimentPlan, compare, run

FIG3_EPS = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)
FIG3_SEED = 1
FIG4_EPS = 0.02  # the reproduction overhead is a free choice; fixed here
FIG4_SEED = 2


@contextlib.contextmanager
def criterion(num: int, desc: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {num} [{desc}]: FAIL", flush=True)
        raise
    print(f"ACCEPTANCE {num} [{desc}]: PASS", flush=True)


@pytest.fixture(scope="session")
def fig3_analysis():
    sec3 = preset("mbms-sec3")
    results = {}
    per_eps_seconds = []
    for eps in FIG3_EPS:
        m = int(round(1000 * (1 + eps)))
        t0 = time.monotonic()
        results[eps] = expected_inactivations(1000, m, sec3)
        per_eps_seconds.append(time.monotonic() - t0)
    return results, per_eps_seconds


@pytest.fixture(scope="session")
def fig3_sim():
    sec3 = preset("mbms-sec3")
    plan = ExperimentPlan(
        k=1000, dist=sec3, trials=2000, master_seed=FIG3_SEED, eps_values=FIG3_EPS
    )
    t0 = time.monotonic()
    stats = run(plan)
    return stats, time.monotonic() - t0


def test_criterion_1_exhaustive_oracle_equivalence(mix_dist):
    dists = [validate([(1, 1.0)]), validate([(2, 1.0)]), mix_dist]
    t0 = time.monotonic()
    with criterion(1, "exhaustive-oracle equivalence, k<=3 m<=3"):
        for k in (1, 2, 3):
            for m in (0, 1, 2, 3):
                for dist in dists:
                    if dist.d_max > k:
                        continue
                    oracle = enumerate_chain(k, m, dist)
                    for pmf in iterate_states(k, m, dist, prune=0.0):
                        want = oracle.joint_cr(pmf.u)
                        for key in set(want) | set(pmf.mass):
                            assert abs(want.get(key, 0.0) - pmf.get(*key)) <= 1e-10
                    mean = expected_inactivations(k, m, dist, prune=0.0)
                    assert abs(mean.expected - oracle.expected) <= 1e-10
                    fr = inactivation_distribution(k, m, dist, prune=0.0)
                    for n in range(k + 1):
                        assert abs(fr.pmf[n] - oracle.f_n.get(n, 0.0)) <= 1e-10
        assert time.monotonic() - t0 < 10.0


def test_criterion_2_fig3_reproduction(fig3_analysis, fig3_sim):
    results, per_eps_seconds = fig3_analysis
    stats, sim_seconds = fig3_sim
    with criterion(2, "k=1000 mean vs 2000-trial simulation within 3 stderr"):
        report = compare(stats, [results[eps] for eps in FIG3_EPS], sigma_tol=3.0)
        for row in report.rows:
            assert row.z <= 3.0, f"eps={row.epsilon}: z={row.z:.2f}"
        assert report.passed
        assert max(per_eps_seconds) <= 120.0
        assert sim_seconds <= 300.0


def test_criterion_3_fig4_reproduction():
    sec4 = preset("mbms-sec4")
    m = int(round(300 * (1 + FIG4_EPS)))
    with criterion(3, "k=300 distribution vs 1e5-trial empirical PMF, TV<=0.02"):
        # prune tighter than the default: pruned states enter the mean
        # weighted by n, so the plain `1e-9 + pruned mass` tolerance only
        # makes sense once pruned mass sits far below 1e-9 / k
        dist_res = inactivation_distribution(300, m, sec4, prune=1e-18)
        plan = ExperimentPlan(
            k=300, dist=sec4, trials=10**5, master_seed=FIG4_SEED,
            eps_values=(FIG4_EPS,),
        )
        stats = run(plan)
        report = compare(stats, [dist_res], tv_tol=0.02)
        assert report.rows[0].tv_distance <= 0.02
        mean_res = expected_inactivations(300, m, sec4, prune=1e-18)
        slack = 1e-9 + dist_res.pruned_mass + mean_res.pruned_mass
        assert abs(dist_res.expected - mean_res.expected) <= slack


def test_criterion_4_kernel_consistency():
    toy = validate([(1, 0.1), (2, 0.6), (3, 0.3)])
    configs = [
        (10, 11, toy),
        (50, 52, preset("mbms-sec3")),
        (300, 306, preset("mbms-sec4")),
    ]
    with criterion(4, "marginalizing the extended chain reproduces the first-order chain"):
        for k, m, dist in configs:
            # prune=1e-30 keeps both frontiers wide enough that pruning
            # asymmetry stays orders of magnitude below the 1e-12 tolerance
            for p2, p3 in zip(
                iterate_states(k, m, dist, prune=1e-30),
                iterate_states3(k, m, dist, prune=1e-30),
            ):
                proj = p3.marginal_cr()
                for key in set(p2.mass) | set(proj.mass):
                    assert abs(p2.get(*key) - proj.get(*key)) <= 1e-12


def test_criterion_5_mass_conservation():
    sec3 = preset("mbms-sec3")
    with criterion(5, "retained + pruned mass within 1e-9 at every step, k=1000"):
        final = None
        for pmf in iterate_states(1000, 1020, sec3, prune=1e-15):
            total = pmf.total() + pmf.pruned_mass
            assert abs(total - 1.0) <= 1e-9, f"u={pmf.u}: {total}"
            final = pmf
        assert final.pruned_mass >= 0.0  # reported, not hidden
        print(f"  (k=1000 eps=0.02 final pruned mass: {final.pruned_mass:.3e})")


def test_criterion_6_decoder_round_trip():
    sec3 = preset("mbms-sec3")
    with criterion(6, "500 decode round-trips at k=32 m=40; success iff full rank"):
        successes = 0
        for seed in range(500):
            rng = np.random.default_rng([60, seed])
            g = encode(32, 40, sec3, rng, cap_degree=True)
            payload = (
                np.random.default_rng([61, seed])
                .integers(0, 256, size=(32, 8))
                .astype(np.uint8)
            )
            received = payload_encode(g, payload)
            source, report = decode(g, received, rng)

            g.reset_states()
            check_rng = np.random.default_rng([60, seed])
            g2 = encode(32, 40, sec3, check_rng, cap_degree=True)
            report2 = triangularize(g2, check_rng)
            system = assemble_permuted(g2, report2)
            cprime, _ = zero_below(system)
            rank = gf2_rank(cprime.to_dense()) if cprime.rows else 0
            assert report.success == (rank == system.n_inactive)

            if report.success:
                successes += 1
                assert np.array_equal(source, payload)
                g.reset_states()
                assert np.array_equal(payload_encode(g, source), received)
        assert successes > 0
        print(f"  ({successes}/500 instances decoded successfully)")


def test_criterion_7_fig2_fixture():
    with criterion(7, "fixed example graph: N in {2,3} only; narrated path gives N=2"):
        oracle = enumerate_decoder_branches(4, FIG2_ADJACENCY)
        assert set(oracle.f_n) <= {2, 3}
        graph = BipartiteGraph(4, FIG2_ADJACENCY)
        # resolve v1, inactivate v2, resolve v3, inactivate v4
        report = triangularize(graph, ScriptedStream(ints=[0, 1, 0, 0]))
        assert report.n_inactivations == 2
        assert report.inactive_order == [1, 3]


def test_criterion_8_simulation_determinism(tmp_path):
    from ltinact.cli import main

    sec3_file = tmp_path / "sweep_args.txt"  # unused marker file
    args = [
        "simulate", "--k", "50", "--eps", "0.0,0.02", "--dist", "mbms-sec3",
        "--trials", "300", "--seed", "99",
    ]
    with criterion(8, "simulate: byte-identical CSV across runs and worker counts"):
        outs = [tmp_path / f"run{i}.csv" for i in range(3)]
        assert main(args + ["--out", str(outs[0])]) == 0
        assert main(args + ["--out", str(outs[1])]) == 0
        assert main(args + ["--out", str(outs[2]), "--jobs", "3"]) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        assert outs[0].read_bytes() == outs[2].read_bytes()
