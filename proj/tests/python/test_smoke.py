import cmath
import math

import pytest

import weylsum as ws


def test_gauss_sum_at_origin_is_N():
    assert ws.gauss_sum(0.0, 0.0, 37) == pytest.approx(37.0)


def test_gauss_sum_matches_direct_loop():
    x, y, N = 0.3141, 0.2718, 200
    direct = sum(cmath.exp(2j * math.pi * (x * n + y * n * n)) for n in range(1, N + 1))
    assert abs(ws.gauss_sum(x, y, N) - direct) < 1e-9


def test_weyl_sum_uses_family_split():
    fam = ws.SplitFamily([1], [2])
    assert fam == ws.SplitFamily.gauss_linear_x()
    assert abs(ws.weyl_sum(fam, [0.2], [0.45], 150) - ws.gauss_sum(0.2, 0.45, 150)) < 1e-9


def test_complete_sum_crt_matches_direct():
    for q, b in [(105, [1, 2, 3]), (64, [3, 5]), (99, [0, 0, 1])]:
        assert abs(ws.complete_sum(q, b, crt=True) - ws.complete_sum(q, b, crt=False)) < 1e-8 * q


def test_quadratic_prime_sum_has_modulus_sqrt_p():
    assert abs(ws.complete_sum(101, [0, 7])) == pytest.approx(math.sqrt(101))


def test_sup_over_y_dominates_origin():
    value, argmax = ws.sup_over_y(ws.SplitFamily.gauss_linear_x(), [0.0], 64)
    assert value == pytest.approx(64.0)
    assert len(argmax) == 1


def test_norm_estimate_is_deterministic():
    a = ws.gauss_K_norm(2.0, 128, 32, seed=3)
    b = ws.gauss_K_norm(2.0, 128, 32, seed=3, threads=2)
    assert a.estimate == b.estimate
    assert 128 ** 0.5 <= a.estimate <= 128


def test_sumsets():
    assert ws.sumset_cardinality(100, 0, 1) == 100
    assert ws.sumset_cardinality(100, 1, 1) == 199
    assert ws.sumset_cardinality(100, 1, 2) == 298


def test_predictions_and_fit():
    p = ws.predicted_exponents(ws.SplitFamily.gauss_linear_x(), 4.0)
    assert (p.a_rho, p.b_rho) == (0.75, 0.25)
    assert "d=3 k=2 T,T^2" in ws.improvement_table()
    pts = [(2.0 ** e, (2.0 ** e) ** 0.75) for e in range(8, 14)]
    assert ws.fit_exponent(pts, 0.0).alpha == pytest.approx(0.75, abs=1e-9)


def test_contract_violation_maps_to_value_error():
    with pytest.raises(ValueError):
        ws.SplitFamily([1, 1], [2])
    with pytest.raises(ValueError):
        ws.fit_exponent([(16.0, 1.0), (32.0, 2.0)])


def test_run_experiment_writes_files(tmp_path):
    cfg = f"""
experiment = k_norm
rho = 2
N_min = 64
N_max = 256
samples = 16
out_dir = {tmp_path}
"""
    csv, js, _ = ws.run_experiment(cfg)
    lines = open(csv).read().splitlines()
    assert lines[0].startswith("N,rho,estimate")
    assert len(lines) == 4
    assert js.exists()
