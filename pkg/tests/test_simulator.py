import math

import numpy as np
import pytest

from localadaseg import (
    BilinearSpec,
    ConfigurationError,
    SolverKind,
    Topology,
    generate_bilinear,
    init_worker,
    AdaptiveState,
    RngStream,
    extragradient_step,
    run,
    sweep,
)

from helpers import InvariantChecker


@pytest.fixture
def problem():
    return generate_bilinear(4, 0.1, 3)


def checked_run(topology, problem, **kw):
    chk = InvariantChecker(problem, adaptive=topology.solver.adaptive)
    traj = run(topology, problem, **chk.hooks(), **kw)
    assert chk.violations == []
    return traj, chk


class TestTopology:
    def test_schedule(self):
        t = Topology(M=2, K=5, R=3)
        assert t.T == 15
        assert t.communication_times == [0, 5, 10, 15]
        assert t.synchronous

    def test_async(self):
        t = Topology(M=4, K=None, per_worker_K=(50, 45, 40, 35), R=2)
        assert t.local_steps == (50, 45, 40, 35) and t.T == 100 and not t.synchronous

    def test_errors_are_collected(self):
        t = Topology(M=0, R=0, K=0, G0=-1.0, alpha_mode="odd")
        assert len(t.errors()) == 5
        with pytest.raises(ConfigurationError):
            t.validate()

    def test_per_worker_length(self):
        assert any("per_worker_K" in e for e in Topology(M=3, per_worker_K=(1, 2)).errors())

    def test_segda_needs_one_worker(self):
        assert Topology(M=2, solver=SolverKind("segda", 0.1)).errors()
        assert not Topology(M=1, solver=SolverKind("segda", 0.1)).errors()

    def test_alpha(self):
        assert Topology(M=4, alpha_mode="smooth").alpha() == 0.5


class TestRun:
    def test_single_worker_equals_serial_steps(self, problem):
        traj, _ = checked_run(Topology(M=1, K=1, R=30), problem)
        w = init_worker(np.zeros(8), AdaptiveState(math.sqrt(4), 1.0, 1.0), RngStream(0, 0))
        for _ in range(30):
            w = extragradient_step(w, problem)
        np.testing.assert_array_equal(traj.final_output.flat, w.half_sum / 30)
        np.testing.assert_array_equal(traj.final_anchor.flat, w.last_full)
        assert traj.records[-1].eta_min == w.eta

    @pytest.mark.parametrize(
        "topology",
        [
            Topology(M=3, K=7, R=5),
            Topology(M=4, K=None, per_worker_K=(5, 4, 3, 2), R=4),
            Topology(M=2, K=4, R=3, alpha_mode="smooth"),
            Topology(M=2, K=4, R=3, alpha_mode="smooth_eps", eps=0.2),
            Topology(M=3, K=3, R=3, solver=SolverKind("local_sgda")),
            Topology(M=3, K=3, R=3, solver=SolverKind("local_segda", 0.2)),
            Topology(M=1, K=3, R=3, solver=SolverKind("segda")),
        ],
        ids=["sync", "async", "smooth", "smooth_eps", "sgda", "segda_local", "segda"],
    )
    def test_invariants_and_accounting(self, problem, topology):
        traj, chk = checked_run(topology, problem, record_every="iteration")
        per_step = 1 if topology.solver.name == "local_sgda" else 2
        assert traj.oracle_calls == per_step * sum(topology.local_steps) * topology.R
        assert chk.steps == sum(topology.local_steps) * topology.R
        assert chk.comms == topology.communication_times == traj.communications
        v = traj.column("v_max")
        assert np.all(np.diff(v) >= 0) and np.all(np.isfinite(v))
        assert np.all(traj.column("residual") >= 0) and np.all(traj.column("dualgap") >= -1e-12)
        assert np.all(np.diff(traj.column("iteration")) > 0)

    def test_round_records(self, problem):
        traj = run(Topology(M=2, K=5, R=6), problem)
        assert [r.round for r in traj.records] == list(range(1, 7))
        assert [r.iteration for r in traj.records] == [5, 10, 15, 20, 25, 30]
        assert traj.records[-1].samples == 2 * 2 * 5 * 6

    def test_iteration_records(self, problem):
        traj = run(Topology(M=2, K=5, R=3), problem, record_every="iteration")
        assert [r.iteration for r in traj.records] == list(range(1, 16))
        assert [r.round for r in traj.round_rows()] == [1, 2, 3]
        assert traj.round_rows()[-1].iteration == 15

    def test_output_is_feasible_average(self, problem):
        traj = run(Topology(M=3, K=4, R=5), problem)
        assert problem.feasible_set.contains(traj.final_output.flat)
        assert traj.final_residual == problem.residual(traj.final_output.flat)

    def test_threads_match_sequential(self, problem):
        t = Topology(M=4, K=10, R=5)
        a = run(t, problem)
        b = run(t, problem, n_threads=4)
        assert [r[:-1] for r in a.rows()] == [r[:-1] for r in b.rows()]
        assert a.final_output == b.final_output

    def test_converges_fig2_regime(self):
        p = generate_bilinear(10, 0.1, 0)
        traj = run(Topology(M=4, K=50, R=40), p)
        assert traj.final_residual < traj.records[0].residual
        assert traj.final_residual < 0.1 * traj.initial_residual

    def test_minibatch(self, problem):
        t = Topology(M=4, K=5, R=6, solver=SolverKind("minibatch_eg"))
        traj, chk = checked_run(t, problem)
        assert traj.oracle_calls == 2 * 6 and traj.samples == 2 * 4 * 5 * 6
        assert chk.comms == t.communication_times

    def test_gamma_is_diagnostic(self, problem):
        traj = run(Topology(M=2, K=5, R=2, G0=1.0), problem)
        assert traj.gamma_observed >= 1.0

    def test_rejects_bad_inputs(self, problem):
        with pytest.raises(ConfigurationError):
            run(Topology(M=0), problem)
        with pytest.raises(ConfigurationError):
            run(Topology(M=1, K=1, R=1), problem, z0=np.zeros(3))
        with pytest.raises(ConfigurationError):
            run(Topology(M=1, K=1, R=1), problem, z0=np.full(8, 2.0))
        with pytest.raises(ConfigurationError):
            run(Topology(M=1, K=1, R=1), problem, record_every="step")

    def test_rounds_to_reach(self, problem):
        traj = run(Topology(M=2, K=5, R=10), problem)
        assert traj.rounds_to_reach(np.inf) == 1
        assert traj.rounds_to_reach(-1.0) is None


class TestSweep:
    def test_cardinality_and_order(self):
        res = sweep(Topology(M=2, R=2), {"K": [1, 5, 10]}, seeds=[0, 1, 2], problem=BilinearSpec(n=3))
        assert len(res) == 9
        assert [(r.params["K"], r.seed) for r in res] == [(k, s) for k in (1, 5, 10) for s in (0, 1, 2)]

    def test_problem_keys_and_seed_use(self):
        res = sweep(Topology(M=1, K=2, R=2), {"sigma": [0.0], "n": [2]}, seeds=[4])
        direct = run(Topology(M=1, K=2, R=2, master_seed=4), generate_bilinear(2, 0.0, 4))
        assert res[0].trajectory.rows()[0][:-1] == direct.rows()[0][:-1]

    def test_parallel_matches_serial(self):
        args = (Topology(M=2, K=5, R=3), {"K": [2, 5], "solver": ["local_adaseg", "local_sgda"]}, [0, 1])
        a = sweep(*args, problem=BilinearSpec(n=3))
        b = sweep(*args, problem=BilinearSpec(n=3), n_jobs=2)
        for x, y in zip(a, b):
            assert x.params == y.params and x.seed == y.seed
            assert [r[:-1] for r in x.trajectory.rows()] == [r[:-1] for r in y.trajectory.rows()]

    def test_async_key(self):
        res = sweep(Topology(M=2, R=2), {"per_worker_K": [(3, 2)]}, seeds=[0], problem=BilinearSpec(n=2))
        assert res[0].trajectory.records[-1].iteration == 6

    def test_errors(self):
        with pytest.raises(ConfigurationError):
            sweep(Topology(), {"bogus": [1]}, seeds=[0])
        with pytest.raises(ConfigurationError):
            sweep(Topology(), {"K": []}, seeds=[0])
        with pytest.raises(ConfigurationError):
            sweep(Topology(), {"K": [1]}, seeds=[])
