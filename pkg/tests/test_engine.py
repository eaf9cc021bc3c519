import numpy as np
import pytest

from dynde.core import Evaluation, Individual, make_rng
from dynde.engine import (
    Clock,
    DEParams,
    Diversity,
    DiversityKind,
    HyperState,
    Reaction,
    RunConfig,
    crossover_binomial,
    de_generation,
    detect_change,
    hyper_params_current,
    mutant_rand_1,
    react,
    run_dynamic,
    sentinel_indices,
)
from dynde.predictor import OptimumPredictor, PredictorConfig
from dynde.problems import (
    EnvironmentState,
    Experiment,
    ExperimentSpec,
    Landscape,
    build_trajectory,
    generate_best_known,
)


def ind(x, f=None, v=0.0, t=0):
    x = np.asarray(x, dtype=float)
    ev = None if f is None else Evaluation(f, v, t)
    return Individual(x, ev)


class TestParamValidation:
    def test_population_floor(self):
        with pytest.raises(ValueError):
            DEParams(population_size=3)

    def test_cr_range(self):
        with pytest.raises(ValueError):
            DEParams(cr=1.5)

    def test_f_range(self):
        with pytest.raises(ValueError):
            DEParams(f_range=(0.0, 0.5))
        with pytest.raises(ValueError):
            DEParams(f_range=(0.8, 0.2))

    def test_diversity_validation(self):
        with pytest.raises(ValueError):
            Diversity(n_closest=0)
        with pytest.raises(ValueError):
            Diversity(rate=-1)


class TestClock:
    def test_virtual_charges_per_eval(self):
        clock = Clock(tau=1.0, cost_eval=0.25)
        clock.start()
        for _ in range(3):
            clock.eval_tick()
        assert clock.now() == pytest.approx(0.75)
        assert clock.eval_count == 3

    def test_time_index_floor(self):
        clock = Clock(tau=0.5, cost_eval=0.2)
        clock.start()
        assert clock.time_index() == 0
        for _ in range(3):
            clock.eval_tick()
        assert clock.time_index() == 1

    def test_nn_blocks_charge_flat_costs(self):
        clock = Clock(tau=1.0, cost_eval=0.1, cost_nn_train=2.0,
                      cost_nn_predict=0.5)
        clock.start()
        with clock.nn_train_block():
            pass
        with clock.nn_predict_block():
            pass
        assert clock.now() == pytest.approx(2.5)
        assert clock.nn_seconds == pytest.approx(2.5)

    def test_wall_mode_measures(self):
        clock = Clock(tau=1.0, mode="wall")
        with pytest.raises(RuntimeError):
            clock.now()
        clock.start()
        with clock.nn_train_block():
            sum(range(1000))
        assert clock.nn_seconds > 0.0
        assert clock.now() > 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            Clock(tau=0.0)
        with pytest.raises(ValueError):
            Clock(tau=1.0, mode="cpu")


class ScriptedRng:
    """Replays fixed integer and uniform draws for deterministic mutation."""

    def __init__(self, integer_draws, uniform_value=0.5):
        self.integer_draws = list(integer_draws)
        self.uniform_value = uniform_value

    def integers(self, n):
        return self.integer_draws.pop(0)

    def uniform(self, low, high):
        return self.uniform_value

    def random(self, n):
        return np.zeros(n)


class TestMutant:
    def test_needs_four_members(self):
        pop = [ind([0.0], 1.0) for _ in range(3)]
        with pytest.raises(ValueError):
            mutant_rand_1(pop, 0, 0.5, np.random.default_rng(0), -5, 5)

    def test_duplicate_difference_vector_collapses(self):
        p = [1.0, 2.0]
        pop = [ind(p, 1.0), ind(p, 1.0), ind(p, 1.0), ind([4.0, 4.0], 9.0)]
        out = mutant_rand_1(pop, 3, 0.7, np.random.default_rng(0), -5, 5)
        assert np.allclose(out, p)

    def test_formula(self):
        pop = [ind([0.0, 0.0]), ind([2.0, 0.0]), ind([0.0, 0.0]), ind([9.0, 9.0])]
        rng = ScriptedRng([0, 1, 2])
        out = mutant_rand_1(pop, 3, 0.5, rng, -50, 50)
        assert np.allclose(out, [1.0, 0.0])

    def test_f_zero_lands_on_a_member(self):
        rng = np.random.default_rng(1)
        pop = [ind(rng.uniform(-5, 5, 3)) for _ in range(6)]
        out = mutant_rand_1(pop, 2, 0.0, np.random.default_rng(2), -5, 5)
        assert any(np.allclose(out, pop[j].x) for j in range(6) if j != 2)

    def test_indices_distinct_and_exclude_target(self):
        # per-coordinate identity encoding makes the chosen indices readable
        pop = [ind(np.eye(8)[j] * (j + 1)) for j in range(8)]
        for seed in range(40):
            out = mutant_rand_1(pop, 3, 0.0, np.random.default_rng(seed), -9, 9)
            assert not np.allclose(out, pop[3].x)

    def test_clamped(self):
        pop = [ind([4.9]), ind([4.9]), ind([-4.9]), ind([0.0])]
        for seed in range(20):
            out = mutant_rand_1(pop, 3, 2.0, np.random.default_rng(seed), -5, 5)
            assert -5.0 <= out[0] <= 5.0


class TestCrossover:
    def test_cr_one_takes_mutant(self):
        rng = np.random.default_rng(0)
        target, mutant = np.zeros(10), np.ones(10)
        assert np.array_equal(crossover_binomial(target, mutant, 1.0, rng), mutant)

    def test_cr_zero_forces_single_coordinate(self):
        rng = np.random.default_rng(1)
        target, mutant = np.zeros(10), np.ones(10)
        for _ in range(50):
            trial = crossover_binomial(target, mutant, 0.0, rng)
            assert trial.sum() == 1.0

    def test_expected_mutant_count_d30(self):
        rng = np.random.default_rng(2)
        target, mutant = np.zeros(30), np.ones(30)
        total = 0.0
        trials = 100_000
        for _ in range(trials):
            total += crossover_binomial(target, mutant, 0.3, rng).sum()
        assert total / trials == pytest.approx(9.7, abs=0.1)


def static_sphere_evaluate(t=0):
    def evaluate(x):
        return Evaluation(float(x @ x), 0.0, t)
    return evaluate


def fresh_pop(rng, np_size, d, evaluate):
    pop = []
    for _ in range(np_size):
        x = rng.uniform(-5, 5, d)
        pop.append(Individual(x, evaluate(x)))
    return pop


class TestDeGeneration:
    def test_all_trials_worse_keeps_population(self):
        # cached values are better than anything evaluate can return
        pop = [ind(np.full(2, float(i)), f=-10.0 + i) for i in range(6)]
        before = [(p.x.copy(), p.ev) for p in pop]
        def evaluate(x):
            return Evaluation(99.0, 0.0, 0)
        de_generation(pop, DEParams(population_size=6), evaluate, Diversity(),
                      HyperState(), np.random.default_rng(0), -5, 5)
        for (x, ev), p in zip(before, pop):
            assert np.array_equal(x, p.x) and p.ev is ev

    def test_static_sphere_converges(self):
        finals = []
        for seed in range(10):
            rng = make_rng(seed, 0)
            evaluate = static_sphere_evaluate()
            pop = fresh_pop(rng, 20, 5, evaluate)
            best_hist = []
            for _ in range(200):
                de_generation(pop, DEParams(), evaluate, Diversity(),
                              HyperState(), rng, -5, 5)
                best_hist.append(min(p.ev.objective for p in pop))
            assert all(b <= a + 1e-15 for a, b in zip(best_hist, best_hist[1:]))
            finals.append(best_hist[-1])
        assert sorted(finals)[5] < 1e-2

    def test_population_size_conserved(self):
        rng = np.random.default_rng(3)
        for kind in DiversityKind:
            evaluate = static_sphere_evaluate()
            pop = fresh_pop(rng, 12, 3, evaluate)
            out = de_generation(pop, DEParams(population_size=12), evaluate,
                                Diversity(kind=kind), HyperState(), rng, -5, 5)
            assert len(out) == 12

    def test_exactly_np_evaluations_per_generation(self):
        calls = 0
        def evaluate(x):
            nonlocal calls
            calls += 1
            return Evaluation(float(x @ x), 0.0, 0)
        rng = np.random.default_rng(4)
        pop = fresh_pop(rng, 9, 2, evaluate)
        calls = 0
        de_generation(pop, DEParams(population_size=9), evaluate, Diversity(),
                      HyperState(), rng, -5, 5)
        assert calls == 9


class SingleWinnerEvaluator:
    """All trials lose except the chosen call index, which beats everything."""

    def __init__(self, winner_call):
        self.winner_call = winner_call
        self.calls = 0
        self.winner_x = None

    def __call__(self, x):
        i = self.calls
        self.calls += 1
        if i == self.winner_call:
            self.winner_x = np.array(x, copy=True)
            return Evaluation(-1.0, 0.0, 0)
        return Evaluation(100.0, 0.0, 0)


class TestCrowding:
    def test_winner_replaces_a_nearby_member(self):
        rng = np.random.default_rng(5)
        for trial_round in range(30):
            pop = [ind(rng.uniform(-5, 5, 3), f=float(i)) for i in range(8)]
            X_before = np.stack([p.x for p in pop])
            winner = int(rng.integers(8))
            evaluator = SingleWinnerEvaluator(winner)
            de_generation(pop, DEParams(population_size=8), evaluator,
                          Diversity(kind=DiversityKind.CROWDING, n_closest=3),
                          HyperState(), rng, -5, 5)
            changed = [j for j in range(8)
                       if not np.array_equal(pop[j].x, X_before[j])]
            assert len(changed) == 1
            j = changed[0]
            assert np.array_equal(pop[j].x, evaluator.winner_x)
            dists = np.sum((X_before - evaluator.winner_x) ** 2, axis=1)
            assert j in np.argsort(dists, kind="stable")[:3]

    def test_standard_selection_replaces_own_slot(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            pop = [ind(rng.uniform(-5, 5, 3), f=float(i)) for i in range(8)]
            winner = int(rng.integers(8))
            evaluator = SingleWinnerEvaluator(winner)
            X_before = np.stack([p.x for p in pop])
            de_generation(pop, DEParams(population_size=8), evaluator,
                          Diversity(), HyperState(), rng, -5, 5)
            changed = [j for j in range(8)
                       if not np.array_equal(pop[j].x, X_before[j])]
            assert changed == [winner]

    def test_duplicate_offspring_replaces_its_twin(self):
        # member 0 carries a stale cached value; a trial landing exactly on
        # its position (distance 0) must compete against it first
        p = np.array([1.0, 1.0])
        q = np.array([-3.0, 2.0])
        pop = [Individual(p.copy(), Evaluation(10.0, 0.0, 0)),
               ind(q, f=1.0), ind(q.copy(), f=2.0), ind([4.0, -4.0], f=3.0)]
        def evaluate(x):
            if np.allclose(x, p):
                return Evaluation(3.0, 0.0, 0)
            return Evaluation(100.0, 0.0, 0)
        rng = np.random.default_rng(7)
        for _ in range(25):
            de_generation(pop, DEParams(population_size=4, cr=0.95), evaluate,
                          Diversity(kind=DiversityKind.CROWDING, n_closest=3),
                          HyperState(), rng, -5, 5)
            if pop[0].ev.objective == 3.0:
                break
        assert pop[0].ev.objective == 3.0
        assert np.array_equal(pop[0].x, p)


class TestHyperState:
    def test_activation_and_countdown(self):
        params = DEParams()
        div = Diversity(kind=DiversityKind.HYPERMUTATION)
        hyper = HyperState()
        assert hyper_params_current(params, div, hyper) == ((0.2, 0.8), 0.3)
        hyper.activate(2)
        assert hyper_params_current(params, div, hyper) == ((0.6, 0.8), 0.7)
        hyper.tick()
        assert hyper.active
        hyper.tick()
        assert not hyper.active
        assert hyper_params_current(params, div, hyper) == ((0.2, 0.8), 0.3)


class TestDetectChange:
    def make_pop(self, state, landscape, rng, np_size=6, d=3):
        from dynde.problems import evaluate as ev_fn
        pop = []
        for _ in range(np_size):
            x = rng.uniform(-5, 5, d)
            pop.append(Individual(x, ev_fn(state, landscape, x)))
        return pop

    def test_frozen_environment_no_detection(self):
        from dynde.problems import evaluate as ev_fn
        state = EnvironmentState(0, np.zeros(3), 10.0, np.ones(3))
        rng = np.random.default_rng(8)
        pop = self.make_pop(state, Landscape.SPHERE, rng)
        calls = 0
        def evaluate(x):
            nonlocal calls
            calls += 1
            return ev_fn(state, Landscape.SPHERE, x)
        assert detect_change(pop, evaluate) is False
        assert calls == 2

    def test_feasibility_flip_detected(self):
        from dynde.problems import evaluate as ev_fn
        state = EnvironmentState(0, np.zeros(3), 10.0, np.ones(3))
        rng = np.random.default_rng(9)
        pop = self.make_pop(state, Landscape.SPHERE, rng)
        shifted = EnvironmentState(1, np.zeros(3), -100.0, np.ones(3))
        assert detect_change(pop, lambda x: ev_fn(shifted, Landscape.SPHERE, x))

    def test_boundary_moving_away_from_feasible_sentinels_detected(self):
        # everyone stays feasible with zero violation, so only the signed
        # slack reveals that the boundary moved
        from dynde.problems import evaluate as ev_fn
        state = EnvironmentState(0, np.zeros(3), 100.0, np.ones(3))
        rng = np.random.default_rng(11)
        pop = self.make_pop(state, Landscape.SPHERE, rng)
        for ind in pop:
            assert ind.ev.violation == 0.0
        relaxed = EnvironmentState(1, np.zeros(3), 150.0, np.ones(3))
        assert detect_change(pop, lambda x: ev_fn(relaxed, Landscape.SPHERE, x))

    def test_caches_refreshed_in_place(self):
        from dynde.problems import evaluate as ev_fn
        state = EnvironmentState(0, np.zeros(3), 10.0, np.ones(3))
        rng = np.random.default_rng(10)
        pop = self.make_pop(state, Landscape.SPHERE, rng)
        shifted = EnvironmentState(4, np.ones(3) * 2.0, 10.0, np.ones(3))
        detect_change(pop, lambda x: ev_fn(shifted, Landscape.SPHERE, x))
        s0, s1 = sentinel_indices(len(pop))
        assert pop[s0].ev.time_index == 4
        assert pop[s1].ev.time_index == 4

    def test_symmetric_offset_move_invisible(self):
        # both sentinels sit orthogonal to the offset flip, so their
        # objectives and violations are bit-identical before and after
        from dynde.problems import evaluate as ev_fn
        d = 2
        before = EnvironmentState(0, np.array([0.0, 1.0]), 100.0, np.ones(d))
        after = EnvironmentState(1, np.array([0.0, -1.0]), 100.0, np.ones(d))
        pop = [Individual(np.array([float(i), 0.0]),
                          ev_fn(before, Landscape.SPHERE, np.array([float(i), 0.0])))
               for i in range(4)]
        assert detect_change(pop, lambda x: ev_fn(after, Landscape.SPHERE, x)) is False


def constant_time_evaluate(t):
    def evaluate(x):
        return Evaluation(float(x @ x), 0.0, t)
    return evaluate


def trained_predictor(d=2, n_p=5, sigma=0.0):
    cfg = PredictorConfig(n_p=n_p, noise_sigma=sigma)
    pred = OptimumPredictor(d, cfg, -5.0, 5.0, make_rng(0, 3))
    rng = np.random.default_rng(11)
    for t in range(5):
        pred.observe(t, [ind(rng.uniform(-5, 5, d), f=float(i), t=t)
                         for i in range(4)])
    pred.trained = True
    return pred


class TestReact:
    def stale_pop(self, np_size=20, d=2):
        rng = np.random.default_rng(12)
        return [ind(rng.uniform(-5, 5, d), f=float(i), t=0)
                for i in range(np_size)]

    def clock(self):
        c = Clock(tau=1.0)
        c.start()
        return c

    def test_restart_replaces_everything(self):
        pop = self.stale_pop()
        before = np.stack([p.x for p in pop])
        react(pop, Reaction(), Diversity(kind=DiversityKind.RESTART),
              constant_time_evaluate(1), None, HyperState(), self.clock(),
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        after = np.stack([p.x for p in pop])
        assert not np.any(np.all(before == after, axis=1))
        assert all(p.ev.time_index == 1 for p in pop)
        assert len(pop) == 20

    def test_random_immigrants_replace_worst(self):
        pop = self.stale_pop()
        before = np.stack([p.x for p in pop])
        react(pop, Reaction(), Diversity(kind=DiversityKind.RANDOM_IMMIGRANTS,
                                         rate=7),
              constant_time_evaluate(1), None, HyperState(), self.clock(),
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        after = np.stack([p.x for p in pop])
        changed = {i for i in range(20)
                   if not np.array_equal(before[i], after[i])}
        # cached objectives were 0..19, so the worst seven are 13..19
        assert changed == {13, 14, 15, 16, 17, 18, 19}
        assert all(p.ev.time_index == 1 for p in pop)

    def test_nn_with_immigrants_partitions_population(self):
        pop = self.stale_pop()
        before = np.stack([p.x for p in pop])
        pred = trained_predictor()
        react(pop, Reaction(use_predictor=True, n_p=5),
              Diversity(kind=DiversityKind.RANDOM_IMMIGRANTS, rate=2),
              constant_time_evaluate(1), pred, HyperState(), self.clock(),
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        after = np.stack([p.x for p in pop])
        changed = {i for i in range(20)
                   if not np.array_equal(before[i], after[i])}
        assert len(changed) == 7
        assert len(pop) == 20
        # immigrants take the two worst, predictions the next five worst
        assert {18, 19} <= changed
        assert {13, 14, 15, 16, 17} <= changed
        base = pred.predict_neighbors()[0]
        predicted_slots = [i for i in changed if np.array_equal(after[i], base)]
        assert len(predicted_slots) == 5

    def test_untrained_predictor_falls_back(self):
        pop = self.stale_pop()
        before = np.stack([p.x for p in pop])
        pred = trained_predictor()
        pred.trained = False
        react(pop, Reaction(use_predictor=True, n_p=5),
              Diversity(kind=DiversityKind.RANDOM_IMMIGRANTS, rate=2),
              constant_time_evaluate(1), pred, HyperState(), self.clock(),
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        after = np.stack([p.x for p in pop])
        changed = {i for i in range(20)
                   if not np.array_equal(before[i], after[i])}
        assert len(changed) == 2

    def test_nn_with_restart_uses_replaced_slots(self):
        pop = self.stale_pop()
        pred = trained_predictor()
        react(pop, Reaction(use_predictor=True, n_p=5),
              Diversity(kind=DiversityKind.RESTART),
              constant_time_evaluate(1), pred, HyperState(), self.clock(),
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        base = pred.predict_neighbors()[0]
        landed = [i for i in range(20) if np.array_equal(pop[i].x, base)]
        assert len(landed) == 5
        assert len(pop) == 20

    def test_hypermutation_activates_window(self):
        pop = self.stale_pop()
        hyper = HyperState()
        clock = Clock(tau=10.0)
        clock.start()
        react(pop, Reaction(), Diversity(kind=DiversityKind.HYPERMUTATION,
                                         rate=7),
              constant_time_evaluate(1), None, hyper, clock,
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        assert hyper.generations_remaining == 60

    def test_hypermutation_short_tau_floor(self):
        pop = self.stale_pop()
        hyper = HyperState()
        clock = Clock(tau=0.05)
        clock.start()
        react(pop, Reaction(), Diversity(kind=DiversityKind.HYPERMUTATION,
                                         rate=7),
              constant_time_evaluate(1), None, hyper, clock,
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        assert hyper.generations_remaining == 1

    def test_explicit_hyper_duration_wins(self):
        pop = self.stale_pop()
        hyper = HyperState()
        react(pop, Reaction(), Diversity(kind=DiversityKind.HYPERMUTATION,
                                         rate=7, hyper_generations=17),
              constant_time_evaluate(1), None, hyper, self.clock(),
              make_rng(1, 2), -5.0, 5.0, current_t=1)
        assert hyper.generations_remaining == 17


def desk_run_config(**overrides):
    defaults = dict(
        landscape=Landscape.SPHERE,
        experiment=ExperimentSpec(Experiment.EXP1),
        d=3,
        num_changes=5,
        tau=1.0,
        cost_eval=5e-3,
        seed=0,
    )
    defaults.update(overrides)
    return RunConfig(**defaults)


class TestRunDynamic:
    def test_evaluations_per_period_match_budget(self):
        cfg = desk_run_config(cost_eval=5e-4, num_changes=3)
        trace = run_dynamic(cfg)
        in_first_period = [r for r in trace.records if r.elapsed_s < 1.0]
        assert 1940 <= in_first_period[-1].evals_cum <= 2010

    def test_total_virtual_time_bracket(self):
        cfg = desk_run_config()
        trace = run_dynamic(cfg)
        assert 5.0 <= trace.total_seconds < 5.0 + 0.2

    def test_bitwise_determinism(self, tmp_path):
        a = run_dynamic(desk_run_config(seed=7))
        b = run_dynamic(desk_run_config(seed=7))
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        a.write_csv(pa)
        b.write_csv(pb)
        assert pa.read_bytes() == pb.read_bytes()
        assert a.eval_count == b.eval_count
        assert a.nn_seconds == b.nn_seconds

    def test_seed_changes_run(self):
        a = run_dynamic(desk_run_config(seed=1))
        b = run_dynamic(desk_run_config(seed=2))
        assert a.records != b.records

    def test_best_so_far_monotone_within_period(self):
        trace = run_dynamic(desk_run_config(num_changes=6))
        for t in trace.times():
            rows = trace.rows_for(t)
            for a, b in zip(rows, rows[1:]):
                assert b.best_f <= a.best_f + 1e-15

    def test_untrained_nn_identical_to_nonn(self, tmp_path):
        div = Diversity(kind=DiversityKind.RANDOM_IMMIGRANTS, rate=2)
        base = desk_run_config(diversity=div, num_changes=4)
        nn = desk_run_config(diversity=div, num_changes=4,
                             reaction=Reaction(use_predictor=True))
        ta, tb = run_dynamic(base), run_dynamic(nn)
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        ta.write_csv(pa)
        tb.write_csv(pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_nn_time_accounted(self):
        div = Diversity(kind=DiversityKind.RANDOM_IMMIGRANTS, rate=2)
        cfg = desk_run_config(
            experiment=ExperimentSpec(Experiment.EXP3),
            diversity=div, reaction=Reaction(use_predictor=True),
            num_changes=12, cost_eval=2e-3, d=2,
            cost_nn_train=0.05, cost_nn_predict=0.01)
        trace = run_dynamic(cfg)
        assert trace.nn_seconds > 0.0
        assert trace.total_seconds == pytest.approx(
            trace.eval_count * 2e-3 + trace.nn_seconds, abs=1e-9)

    def test_virtual_accounting_without_nn(self):
        trace = run_dynamic(desk_run_config())
        assert trace.nn_seconds == 0.0
        assert trace.total_seconds == pytest.approx(
            trace.eval_count * 5e-3, abs=1e-9)

    def test_f_star_column_against_table(self):
        spec = ExperimentSpec(Experiment.EXP1)
        traj = build_trajectory(spec, Landscape.SPHERE, 3, 4, make_rng(5, 1))
        table = generate_best_known(traj, Landscape.SPHERE, 3, -5.0, 5.0,
                                    seed=5, restarts=2, budget_per_time=4000)
        cfg = desk_run_config(num_changes=4, trajectory=traj, best_known=table)
        trace = run_dynamic(cfg)
        for r in trace.records:
            assert r.f_star == table.f_star(r.t)
            assert r.error == pytest.approx(abs(r.f_star - r.best_f))

    def test_missing_table_gives_nan(self):
        trace = run_dynamic(desk_run_config(num_changes=3))
        assert all(np.isnan(r.f_star) for r in trace.records)

    def test_short_trajectory_rejected(self):
        spec = ExperimentSpec(Experiment.EXP1)
        traj = build_trajectory(spec, Landscape.SPHERE, 3, 2, make_rng(5, 1))
        with pytest.raises(ValueError):
            run_dynamic(desk_run_config(num_changes=5, trajectory=traj))

    def test_wall_clock_smoke(self):
        cfg = desk_run_config(clock_mode="wall", tau=0.02, num_changes=2)
        trace = run_dynamic(cfg)
        assert trace.total_seconds >= 0.04
        assert trace.records

    def test_all_method_shapes_run(self):
        for kind in DiversityKind:
            for use_nn in (False, True):
                cfg = desk_run_config(
                    diversity=Diversity(kind=kind, rate=2),
                    reaction=Reaction(use_predictor=use_nn),
                    num_changes=3)
                trace = run_dynamic(cfg)
                assert trace.records
                assert trace.eval_count > 0
