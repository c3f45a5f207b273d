import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from binrec.analysis import ConeSpec, check_kernel_cone
from binrec.optim import (LpProblem, SolverFailure, TOL_FEAS, _lipschitz,
                          lp_feasible, solve_box_ls, solve_lp)

from oracles import enumerate_lp_optimum, random_bounded_lp


def test_min_single_variable_on_unit_interval():
    sol = solve_lp(LpProblem(c=[1.0], lower=[0.0], upper=[1.0]))
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(0.0, abs=1e-12)
    assert sol.objective == pytest.approx(0.0, abs=1e-12)


def test_forced_objective_on_simplex_face():
    # min x1+x2 s.t. x1+x2 = 1 on the unit box: every feasible point is optimal
    sol = solve_lp(LpProblem(c=[1.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[1.0],
                             lower=[0.0, 0.0], upper=[1.0, 1.0]))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-9)


def test_unbounded_detection():
    sol = solve_lp(LpProblem(c=[-1.0], lower=[0.0], upper=[np.inf]))
    assert sol.status == "unbounded"


def test_infeasible_interval():
    feasible, _ = lp_feasible(LpProblem(c=[0.0], A_ineq=[[1.0], [-1.0]],
                                        b_ineq=[-1.0, -1.0]))
    assert not feasible


def test_feasible_interval_witness():
    feasible, w = lp_feasible(LpProblem(c=[0.0], A_ineq=[[-1.0], [1.0]],
                                        b_ineq=[-1.0, 2.0]))
    assert feasible
    assert 1.0 - TOL_FEAS <= w[0] <= 2.0 + TOL_FEAS


def test_hkplus_system_by_hand():
    # A = [1 -1], K = {0}: A^T v = (v, -v) needs v <= -1 under the unit margin
    feasible, v = lp_feasible(LpProblem(c=[0.0], A_ineq=[[1.0], [-(-1.0)]],
                                        b_ineq=[-1.0, -1.0]))
    assert feasible and v[0] < 0


def test_oracle_equivalence_500_instances():
    rng = np.random.default_rng(20240811)
    mismatches = []
    for trial in range(500):
        c, A, b, lower, upper = random_bounded_lp(rng)
        status, obj = enumerate_lp_optimum(c, A, b, lower, upper)
        sol = solve_lp(LpProblem(c=c, A_eq=A if A.size else None,
                                 b_eq=b if A.size else None,
                                 lower=lower, upper=upper))
        if sol.status != status:
            mismatches.append((trial, status, sol.status))
        elif status == "optimal" and abs(sol.objective - obj) > 1e-7 * max(1.0, abs(obj)):
            mismatches.append((trial, obj, sol.objective))
    assert not mismatches, mismatches[:5]


def test_optimal_point_is_feasible():
    rng = np.random.default_rng(7)
    for _ in range(100):
        c, A, b, lower, upper = random_bounded_lp(rng)
        sol = solve_lp(LpProblem(c=c, A_eq=A if A.size else None,
                                 b_eq=b if A.size else None,
                                 lower=lower, upper=upper))
        if sol.status != "optimal":
            continue
        scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
        assert np.all(sol.x >= lower - 1e-8)
        assert np.all(sol.x <= upper + 1e-8)
        if A.size:
            assert np.linalg.norm(A @ sol.x - b) <= 1e-7 * scale


def test_weak_duality_at_optimum():
    # Lagrangian dual value at the reported multipliers:
    # g(y) = y.b + sum_i min(r_i l_i, r_i u_i) with r = c - A^T y.
    # Strong duality makes it equal the primal objective at the optimum.
    rng = np.random.default_rng(13)
    checked = 0
    for _ in range(200):
        c, A, b, lower, upper = random_bounded_lp(rng)
        if not A.size:
            continue
        sol = solve_lp(LpProblem(c=c, A_eq=A, b_eq=b, lower=lower, upper=upper))
        if sol.status != "optimal":
            continue
        r = c - A.T @ sol.dual_eq
        g = float(sol.dual_eq @ b) + float(np.sum(np.minimum(r * lower, r * upper)))
        assert abs(sol.objective - g) <= 1e-6 * (1.0 + abs(sol.objective))
        checked += 1
    assert checked >= 50


def test_lp_determinism():
    rng = np.random.default_rng(99)
    c, A, b, lower, upper = random_bounded_lp(rng)
    p1 = LpProblem(c=c, A_eq=A, b_eq=b, lower=lower, upper=upper)
    p2 = LpProblem(c=c.copy(), A_eq=A.copy(), b_eq=b.copy(),
                   lower=lower.copy(), upper=upper.copy())
    s1, s2 = solve_lp(p1), solve_lp(p2)
    assert s1.status == s2.status
    if s1.status == "optimal":
        assert np.array_equal(s1.x, s2.x)


def test_degenerate_bernoulli_bp_does_not_cycle():
    # fully degenerate at k=0: b=0 and x=0 is optimal, yet phase 1 starts at
    # a vertex with many zero basics; must not hit the iteration limit
    rng = np.random.default_rng(5)
    A = rng.integers(0, 2, size=(30, 60)).astype(float)
    sol = solve_lp(LpProblem(c=np.ones(60), A_eq=A, b_eq=np.zeros(30),
                             lower=np.zeros(60), upper=np.ones(60)))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(0.0, abs=1e-9)


def test_redundant_rows_handled():
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    sol = solve_lp(LpProblem(c=[1.0, 0.0], A_eq=A, b_eq=[1.0, 2.0],
                             lower=[0.0, 0.0], upper=[1.0, 1.0]))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(0.0, abs=1e-9)


def test_inconsistent_dimensions_rejected():
    with pytest.raises(ValueError):
        LpProblem(c=[1.0, 2.0], A_eq=[[1.0]], b_eq=[1.0])
    with pytest.raises(ValueError):
        LpProblem(c=[1.0], lower=[1.0], upper=[0.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_lp_optimum_matches_oracle_property(seed):
    rng = np.random.default_rng(seed)
    c, A, b, lower, upper = random_bounded_lp(rng, max_n=6, max_p=3)
    status, obj = enumerate_lp_optimum(c, A, b, lower, upper)
    sol = solve_lp(LpProblem(c=c, A_eq=A if A.size else None,
                             b_eq=b if A.size else None,
                             lower=lower, upper=upper))
    assert sol.status == status
    if status == "optimal":
        assert sol.objective == pytest.approx(obj, abs=1e-7, rel=1e-7)


# --- box-constrained least squares ---------------------------------------

def test_box_ls_identity_interior():
    b = np.array([0.2, 0.5, 0.9])
    res = solve_box_ls(np.eye(3), b, 0.0, 1.0)
    assert res.converged
    assert np.allclose(res.x, b, atol=1e-9)


def test_box_ls_identity_projects_onto_box():
    res = solve_box_ls(np.eye(4), 2.0 * np.ones(4), 0.0, 1.0)
    assert np.allclose(res.x, np.ones(4), atol=1e-9)


def test_box_ls_objective_monotone_and_fixed_point():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((15, 25))
    b = rng.standard_normal(15)
    res = solve_box_ls(A, b, 0.0, 1.0, tol=1e-10)
    hist = np.array(res.objective_history)
    assert np.all(np.diff(hist) <= 1e-12)
    gamma = 1.0 / (np.linalg.norm(A, 2) ** 2)
    fp = res.x - np.clip(res.x - gamma * (A.T @ (A @ res.x - b)), 0.0, 1.0)
    assert np.linalg.norm(fp) <= 1e-8


def test_box_ls_unique_feasible_point_recovered():
    # with ker(A) meeting the sign cone of K trivially, {x in box: Ax = A 1_K}
    # is the singleton {1_K}, so least squares must land exactly there
    rng = np.random.default_rng(17)
    for _ in range(20):
        A = rng.standard_normal((20, 40))
        K = rng.permutation(40)[:8]
        if not check_kernel_cone(A, ConeSpec.sign_cone(40, K)).holds:
            continue
        x0 = np.zeros(40)
        x0[K] = 1.0
        res = solve_box_ls(A, A @ x0, 0.0, 1.0, tol=1e-12)
        assert np.linalg.norm(res.x - x0) <= 1e-9
        return
    pytest.fail("no instance with trivial kernel-cone intersection found")


def test_box_ls_max_iter_flagged_not_raised():
    rng = np.random.default_rng(8)
    A = rng.standard_normal((10, 30))
    b = rng.standard_normal(10)
    res = solve_box_ls(A, b, 0.0, 1.0, max_iter=2)
    assert res.x.shape == (30,)
    assert np.all((res.x >= 0) & (res.x <= 1))
    # converged must truthfully report the fixed-point criterion
    gamma = 1.0 / _lipschitz(A)
    fp = np.linalg.norm(res.x - np.clip(res.x - gamma * A.T @ (A @ res.x - b), 0.0, 1.0))
    assert res.converged == (fp <= 1e-10)
