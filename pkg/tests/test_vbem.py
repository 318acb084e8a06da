import numpy as np
import pytest

from faultsbl.datagen import ScenarioSpec, generate_instance
from faultsbl.errors import BlockIndexError
from faultsbl.metrics import score_failure
from faultsbl.model import BlockSparseProblem, PriorKnowledgeSet
from faultsbl.solver import SolverConfig, rank_blocks, ranking_for_k, solve, top_k

from helpers import dense_design, random_problem


def dense_iterations(problem: BlockSparseProblem, prior: set[int], config: SolverConfig, iters: int):
    """Reference VBEM with every matrix materialized."""
    D = dense_design(problem)
    y = problem.y_stacked
    n, l, m = problem.num_errors, problem.num_samples, problem.num_sensors
    blocks = [slice(i * l, (i + 1) * l) for i in range(n)]
    known = np.array([i + 1 in prior for i in range(n)])

    alpha = np.ones(n)
    b = np.where(known, config.b_init_known, config.b_small)
    B = np.eye(l)
    lam = 1.0
    for _ in range(iters):
        prior_precision = np.kron(np.diag(alpha), B)
        sigma = np.linalg.inv(D.T @ D / lam + prior_precision)
        mu = sigma @ D.T @ y / lam
        moments = [sigma[s, s] + np.outer(mu[s], mu[s]) for s in blocks]

        new_alpha = np.array(
            [(config.a + l / 2) / (np.trace(S @ B) / 2 + b[i]) for i, S in enumerate(moments)]
        )
        new_b = np.where(known, (config.p_shape + config.a) / (config.q_rate + new_alpha), config.b_small)
        new_B = np.linalg.inv(sum(a * S for a, S in zip(new_alpha, moments)) / n)
        new_B *= l / np.trace(new_B)
        residual = y - D @ mu
        new_lam = (residual @ residual + lam * (n * l - np.trace(sigma @ prior_precision))) / (m * l)

        alpha, b, B, lam = new_alpha, new_b, new_B, new_lam
        yield mu, sigma, alpha, b, B, lam


def rel_err(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(np.asarray(b))


def test_iterates_match_dense_reference(rng):
    problem = random_problem(rng, m=5, n=8, l=3, k=2, noise=0.05)
    prior = {1, 3}
    config = SolverConfig(spd_jitter=0.0, gamma_tol=1e-12, max_iters=5)

    states = []
    solve(problem, prior, config, on_iteration=states.append)
    assert len(states) == 5

    for state, (mu, sigma, alpha, b, B, lam) in zip(states, dense_iterations(problem, prior, config, 5)):
        assert rel_err(state.mu_x, mu) <= 1e-10
        assert rel_err(state.sigma_x, sigma) <= 1e-10
        assert rel_err(state.alpha_mean, alpha) <= 1e-10
        assert rel_err(state.b_mean, b) <= 1e-10
        assert rel_err(state.B, B) <= 1e-10
        assert state.lambda_ == pytest.approx(lam, rel=1e-10)


def test_state_stays_valid_every_iteration(rng):
    config = SolverConfig(max_iters=25)
    for _ in range(100):
        problem = random_problem(rng, m=5, n=10, l=2, k=2, noise=0.1)
        prior = set(rng.choice(np.arange(1, 11), size=2, replace=False).tolist())

        def check(state):
            assert state.violations() == []

        solve(problem, prior, config, on_iteration=check)


def test_recovers_single_planted_block():
    X = np.zeros((4, 3))
    X[1] = [1.0, 1.5, 0.5]
    problem = BlockSparseProblem.from_measurements(np.eye(4), X)

    result = solve(problem)
    assert result.mean_deviations[1] == pytest.approx(1.0, abs=1e-3)
    assert np.all(np.abs(np.delete(result.mean_deviations, 1)) <= 1e-3)
    assert result.ranking[0] == 2


def test_zero_data_converges_to_zero(rng):
    problem = BlockSparseProblem(rng.standard_normal((3, 6)), np.zeros(6), 3, 6, 2)
    result = solve(problem)
    assert result.converged
    assert result.iterations_run == 1
    np.testing.assert_array_equal(result.mean_deviations, 0.0)


def test_result_shapes_and_invariants(rng):
    problem = random_problem(rng, m=6, n=9, l=3, k=2, noise=0.05)
    result = solve(problem, [2, 5])
    np.testing.assert_allclose(result.mean_deviations, result.block_means.mean(axis=1))
    assert result.block_means.shape == (9, 3)
    assert sorted(result.ranking) == list(range(1, 10))
    assert result.final_state.iteration == result.iterations_run


def test_inactive_blocks_get_larger_precision(rng):
    phi = rng.standard_normal((12, 16))
    X = np.zeros((16, 3))
    active = [3, 11]
    X[active] = rng.standard_normal((2, 3)) + 2.0
    problem = BlockSparseProblem.from_measurements(phi, phi @ X)

    alpha = solve(problem).final_state.alpha_mean
    inactive = np.delete(alpha, active)
    assert inactive.min() > alpha[active].max()


def test_learned_B_keeps_trace_of_block_length(rng):
    problem = random_problem(rng, m=6, n=10, l=3, k=2, noise=0.05)
    traces = []
    solve(problem, [2], SolverConfig(max_iters=200), on_iteration=lambda s: traces.append(np.trace(s.B)))
    np.testing.assert_allclose(traces, 3.0, rtol=1e-10)


def test_unnormalized_B_drifts_in_scale(rng):
    problem = random_problem(rng, m=6, n=10, l=3, k=2, noise=0.05)
    result = solve(problem, [2], SolverConfig(max_iters=200, normalize_B=False))
    assert np.trace(result.final_state.B) != pytest.approx(3.0, rel=1e-3)


def test_data_overrides_erroneous_knowledge_small():
    overridden = 0
    for seed in range(10):
        spec = ScenarioSpec(m=8, n=20, k=3, l=3, beta=0.9, snr_db=35.0, seed=seed)
        instance = generate_instance(spec, np.random.default_rng(seed))
        wrong = min(set(range(1, 21)) - instance.support_true)
        config = SolverConfig()
        result = solve(instance.problem, [wrong], config)
        overridden += result.final_state.b_mean[wrong - 1] < config.b_init_known / 10
    assert overridden >= 8


def test_history_and_stopping_rule(rng):
    problem = random_problem(rng, m=6, n=10, l=3, k=2, noise=0.05)
    config = SolverConfig(gamma_tol=1e-6, max_iters=2000)
    result = solve(problem, config=config, history=True)

    deltas = result.trace.delta_mu
    assert len(deltas) == result.iterations_run == len(result.trace.lambdas)
    assert result.trace.lambdas[-1] == result.final_state.lambda_
    if result.converged:
        assert deltas[-1] < config.gamma_tol
    # the loop stops in the first iteration that meets the tolerance
    assert all(d >= config.gamma_tol for d in deltas[:-1])


def test_no_history_by_default(rng):
    result = solve(random_problem(rng, m=4, n=6, l=2, k=1))
    assert result.trace.delta_mu == ()


def test_non_convergence_is_reported_not_raised(rng, caplog):
    problem = random_problem(rng, m=4, n=8, l=2, k=2)
    with caplog.at_level("INFO", logger="faultsbl"):
        result = solve(problem, config=SolverConfig(max_iters=1))
    assert not result.converged
    assert result.iterations_run == 1
    assert "without reaching" in caplog.text


def test_knowledge_switch_ignores_prior_set(rng):
    problem = random_problem(rng, m=5, n=10, l=3, k=2, noise=0.05)
    config = SolverConfig(use_prior_knowledge=False, max_iters=50)
    with_prior = solve(problem, PriorKnowledgeSet.of([1, 2, 3]), config)
    without = solve(problem, None, config)
    np.testing.assert_array_equal(with_prior.mean_deviations, without.mean_deviations)


def test_prior_knowledge_changes_the_estimate(rng):
    problem = random_problem(rng, m=5, n=10, l=3, k=2, noise=0.05)
    config = SolverConfig(max_iters=50)
    assert not np.array_equal(
        solve(problem, [1, 2, 3], config).mean_deviations,
        solve(problem, None, config).mean_deviations,
    )


def test_prior_out_of_range(rng):
    with pytest.raises(BlockIndexError):
        solve(random_problem(rng, m=3, n=4, l=2), [5])


def test_top_k_examples():
    assert top_k(np.array([0.0, 3.0, -5.0, 1.0]), 2) == {3, 2}
    assert top_k(np.array([0.0, 3.0, -5.0, 1.0]), 4) == {1, 2, 3, 4}
    assert top_k(np.array([2.0, 2.0, 0.0]), 1) == {1}
    assert rank_blocks(np.array([1.0, -1.0, 3.0])) == (3, 1, 2)


@pytest.mark.parametrize("k", [0, 5])
def test_top_k_range(k):
    with pytest.raises(BlockIndexError):
        top_k(np.zeros(4), k)


def test_ranking_for_k_uses_mean_deviations(rng):
    result = solve(random_problem(rng, m=6, n=8, l=2, k=2, noise=0.01))
    assert ranking_for_k(result, 3) == frozenset(result.ranking[:3])
    assert ranking_for_k(result, 3) == top_k(result.mean_deviations, 3)


@pytest.mark.slow
def test_data_overrides_erroneous_knowledge():
    overridden = 0
    for seed in range(100):
        spec = ScenarioSpec(m=8, n=20, k=3, l=3, beta=0.9, snr_db=35.0, seed=seed)
        instance = generate_instance(spec, np.random.default_rng(seed))
        wrong = min(set(range(1, 21)) - instance.support_true)
        config = SolverConfig()
        result = solve(instance.problem, [wrong], config)
        overridden += result.final_state.b_mean[wrong - 1] < config.b_init_known / 10
    assert overridden >= 90


@pytest.mark.slow
def test_recovers_planted_support_noiseless():
    recovered = 0
    spec = ScenarioSpec(m=8, n=40, k=2, l=3, beta=0.9, snr_db=None)
    for seed in range(100):
        instance = generate_instance(spec, np.random.default_rng(seed))
        result = solve(instance.problem, [], SolverConfig())
        recovered += not score_failure(result.mean_deviations, instance.support_true, instance.k)
    assert recovered >= 95
