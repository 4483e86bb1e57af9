import numpy as np
import pytest
from scipy import integrate

import passivemin.minvalue as mv
from passivemin.kernel import evaluate, make_kernel
from passivemin.locpoly import gradient_estimate, local_fit, value_estimate
from passivemin.minvalue import OddSampleSize, SplitPlan, StageTwoSchedule, estimate_min_value
from passivemin.optimizer import Domain, Schedule
from passivemin.polybasis import build_basis


def _data(n, seed, sigma=0.0, offset=0.0, center=0.0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(n, 1))
    y = (X[:, 0] - center) ** 2 + offset + sigma * rng.normal(size=n)
    return X, y


SCHED = Schedule(2.0, 2.0, 1)
DOM = Domain.box(-1, 1, d=1)


def test_split_plan():
    p = SplitPlan(10)
    idx = np.arange(10)
    assert p.m == 5
    assert list(idx[p.first_half]) == [0, 1, 2, 3, 4]
    assert list(idx[p.second_half]) == [5, 6, 7, 8, 9]
    with pytest.raises(OddSampleSize):
        SplitPlan(7)


def test_stage_two_schedule_in_unit_interval():
    for n in (1, 2, 100, 10**6):
        s = StageTwoSchedule(n, 2.0, 1)
        assert 0 < s.bandwidth <= 1 and 0 < s.ridge <= 1


def test_odd_sample_rejected():
    X, y = _data(11, 0)
    with pytest.raises(OddSampleSize):
        estimate_min_value(X, y, SCHED, DOM)


def test_minimal_input_is_finite():
    est = estimate_min_value(np.array([[0.1], [0.0]]), np.array([1.0, 3.0]), SCHED, DOM, z1=[0.0])
    assert np.isfinite(est.f_hat)
    assert est.n == 2 and est.m == 1


def test_noiseless_shifted_minimum_matches_population_ridge_solve():
    X, y = _data(8000, 1, offset=1.0, center=0.2)
    est = estimate_min_value(X, y, SCHED, DOM)
    z, h, lam = est.z_stage1[0], est.bandwidth, est.ridge
    k = make_kernel("quartic", 1)
    p = 0.25

    def moment(g):
        return integrate.quad(lambda u: p * evaluate(k, u) * g(u), -1, 1, epsabs=1e-13)[0]

    E = np.array([[moment(lambda u: 1.0), moment(lambda u: u)],
                  [moment(lambda u: u), moment(lambda u: u * u)]])
    f = lambda u: (z + h * u - 0.2) ** 2 + 1.0
    C = np.array([moment(f), moment(lambda u: u * f(u))])
    oracle = np.linalg.solve(E + lam * np.eye(2), C)[0]
    # about 330 points fall in the window, so B itself fluctuates by a few percent
    assert est.f_hat == pytest.approx(oracle, abs=2e-2)
    assert abs(oracle - 1.0) > 5e-2


def test_noiseless_shifted_minimum_without_ridge():
    X, y = _data(8000, 1, offset=1.0, center=0.2)
    est = estimate_min_value(X, y, SCHED, DOM)
    theta = local_fit(X[4000:], y[4000:], est.z_stage1, est.bandwidth, 0.0, make_kernel("quartic", 1),
                      build_basis(1, 1), normalization_count=4000)
    assert value_estimate(theta) == pytest.approx(1.0, abs=1e-2)


def test_noiseless_error_shrinks_with_n():
    errs = [abs(estimate_min_value(*_data(n, 1, offset=1.0, center=0.2), SCHED, DOM).f_hat - 1.0)
            for n in (1000, 8000, 64000)]
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.xfail(strict=True, reason="positive ridge biases the constant coefficient by about 9% at n=8000")
def test_noiseless_shifted_minimum_literal_tolerance():
    X, y = _data(8000, 1, offset=1.0, center=0.2)
    assert estimate_min_value(X, y, SCHED, DOM).f_hat == pytest.approx(1.0, abs=1e-2)


def test_linear_in_responses_at_fixed_center():
    X, y = _data(2000, 2, sigma=0.3)
    kern, basis = make_kernel("quartic", 1), build_basis(1, 1)
    z = np.array([0.05])
    base = mv.value_at(X[1000:], y[1000:], z, 2000, 2.0, kern, basis)
    ones = mv.value_at(X[1000:], np.ones(1000), z, 2000, 2.0, kern, basis)
    shifted = mv.value_at(X[1000:], y[1000:] + 5.0, z, 2000, 2.0, kern, basis)
    assert shifted == pytest.approx(base + 5.0 * ones, abs=1e-12)


def test_shift_equivariance_without_ridge():
    X, y = _data(2000, 2, sigma=0.3)
    kern, basis = make_kernel("quartic", 1), build_basis(1, 2)
    a = local_fit(X, y, [0.1], 0.3, 0.0, kern, basis)
    b = local_fit(X, y + 5.0, [0.1], 0.3, 0.0, kern, basis)
    assert value_estimate(b) - value_estimate(a) == pytest.approx(5.0, abs=1e-10)
    assert np.allclose(gradient_estimate(a), gradient_estimate(b), atol=1e-9)


@pytest.mark.xfail(strict=True, reason="with a positive ridge a constant shift leaks into every coefficient")
def test_shift_equivariance_literal():
    X, y = _data(2000, 2, sigma=0.3)
    a = estimate_min_value(X, y, SCHED, DOM)
    b = estimate_min_value(X, y + 5.0, SCHED, DOM)
    assert b.f_hat - a.f_hat == pytest.approx(5.0, abs=1e-10)


def test_stage_one_last_option():
    X, y = _data(1000, 3, sigma=0.3)
    a = estimate_min_value(X, y, SCHED, DOM, stage1="average")
    b = estimate_min_value(X, y, SCHED, DOM, stage1="last")
    assert not np.array_equal(a.z_stage1, b.z_stage1)
    with pytest.raises(ValueError):
        estimate_min_value(X, y, SCHED, DOM, stage1="median")


def test_stage_two_reads_only_second_half(monkeypatch):
    X, y = _data(1000, 4, sigma=0.3)
    m = 500
    seen = {}
    real_run, real_value = mv.run, mv.value_at

    def spy_run(X1, y1, *a, **k):
        seen["run"] = (X1.copy(), y1.copy())
        return real_run(X1, y1, *a, **k)

    def spy_value(X2, y2, *a, **k):
        seen["value"] = (X2.copy(), y2.copy())
        return real_value(X2, y2, *a, **k)

    monkeypatch.setattr(mv, "run", spy_run)
    monkeypatch.setattr(mv, "value_at", spy_value)
    est = estimate_min_value(X, y, SCHED, DOM)
    assert np.array_equal(seen["run"][1], y[:m])
    assert np.array_equal(seen["value"][0], X[m:])
    assert np.array_equal(seen["value"][1], y[m:])

    # changing first-half responses only moves the stage-one center
    y2 = y.copy()
    y2[m:] += 1.0
    shifted = estimate_min_value(X, y2, SCHED, DOM)
    assert np.array_equal(shifted.z_stage1, est.z_stage1)


def test_more_data_helps():
    err = {}
    for n in (500, 4000):
        err[n] = np.median([abs(estimate_min_value(*_data(n, 100 + r), SCHED, DOM).f_hat)
                            for r in range(50)])
    assert err[4000] < err[500]


def test_explicit_kernel_and_basis():
    X, y = _data(1000, 5, sigma=0.1)
    est = estimate_min_value(X, y, Schedule(3.0, 2.0, 1), DOM, kernel=make_kernel("triweight", 1),
                             basis=build_basis(1, 2))
    assert abs(est.f_hat) < 0.2
