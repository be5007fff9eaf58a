import itertools
import math

import numpy as np
import pytest

from circulaw import DomainError, EnsembleConfig, EntryDistribution
from circulaw.invertibility import (
    classify_vector,
    concentration_Q,
    largest_sv_tail,
    min_sv_tail,
    small_ball,
    spread_set,
)

GAUSS = EntryDistribution("RealGaussian")
RADEMACHER = EntryDistribution("Rademacher")
SHIPPED = [
    EntryDistribution("RealGaussian"),
    EntryDistribution("ComplexGaussian"),
    EntryDistribution("Rademacher"),
    EntryDistribution("ComplexRademacher"),
    EntryDistribution("UniformSymmetric"),
]


def brute_force_sparse_distance(x, delta):
    """Minimum over all supports of size floor(delta*n) of the off-support norm."""
    n = len(x)
    keep = int(math.floor(delta * n))
    sq = np.abs(x) ** 2
    best = None
    for support in itertools.combinations(range(n), keep):
        excluded = [i for i in range(n) if i not in support]
        value = math.sqrt(float(np.sum(np.sort(sq[excluded]))))
        if best is None or value < best:
            best = value
    return best


class TestClassifyVector:
    def test_basis_vector_sparse(self):
        e1 = np.zeros(10)
        e1[0] = 1.0
        cls = classify_vector(e1, delta=0.2, rho=0.1)
        assert cls.tag == "Sparse" and cls.residual == 0.0

    def test_uniform_vector_incompressible(self):
        n = 100
        x = np.full(n, 1.0 / math.sqrt(n))
        cls = classify_vector(x, delta=0.5, rho=0.1)
        assert cls.residual == pytest.approx(math.sqrt(0.5), abs=1e-12)
        assert cls.tag == "Incompressible"

    def test_delta_one_always_sparse(self, oracle_rng):
        x = oracle_rng.normal(size=13)
        x /= np.linalg.norm(x)
        assert classify_vector(x, delta=1.0, rho=0.5).tag == "Sparse"

    def test_compressible_band(self):
        # keep = 2 coordinates; the third carries mass 0.1 <= rho
        x = np.zeros(10)
        x[0] = x[1] = math.sqrt((1 - 0.01) / 2)
        x[5] = 0.1
        cls = classify_vector(x, delta=0.2, rho=0.5)
        assert cls.tag == "Compressible"
        assert cls.residual == pytest.approx(0.1, abs=1e-15)

    def test_non_unit_rejected(self):
        with pytest.raises(DomainError):
            classify_vector(np.ones(4), delta=0.5, rho=0.1)

    def test_bad_parameters_rejected(self):
        e1 = np.zeros(4)
        e1[0] = 1.0
        with pytest.raises(DomainError):
            classify_vector(e1, delta=0.0, rho=0.1)
        with pytest.raises(DomainError):
            classify_vector(e1, delta=0.5, rho=1.0)

    @pytest.mark.parametrize("n,delta", [(6, 0.5), (9, 1.0 / 3.0), (12, 0.25), (11, 0.6)])
    def test_residual_matches_brute_force_exactly(self, oracle_rng, n, delta):
        for _ in range(5):
            x = oracle_rng.normal(size=n)
            x /= np.linalg.norm(x)
            got = classify_vector(x, delta=delta, rho=0.2).residual
            assert got == brute_force_sparse_distance(x, delta)


class TestSpreadSet:
    def test_uniform_vector_full_set(self):
        n = 64
        x = np.full(n, 1.0 / math.sqrt(n))
        sigma = spread_set(x, delta=0.5, rho=0.5)
        assert len(sigma) == n

    def test_sparse_input_rejected(self):
        e1 = np.zeros(16)
        e1[0] = 1.0
        with pytest.raises(DomainError):
            spread_set(e1, delta=0.25, rho=0.3)

    def test_conclusions_on_fuzz(self, oracle_rng):
        n, delta, rho = 64, 0.3, 0.2
        checked = 0
        for _ in range(1000):
            x = oracle_rng.normal(size=n)
            x /= np.linalg.norm(x)
            if classify_vector(x, delta, rho).tag != "Incompressible":
                continue
            sigma = spread_set(x, delta, rho)
            mags = np.abs(x[sigma])
            assert len(sigma) >= n * delta / 2.0
            assert float(np.sum(mags**2)) >= rho * rho / 2.0
            assert np.all(mags >= rho / math.sqrt(2 * n) - 1e-15)
            assert np.all(mags <= 1.0 / math.sqrt(n * delta / 2.0) + 1e-15)
            checked += 1
        assert checked > 900  # Gaussian unit vectors are almost always incompressible


class TestConcentrationQ:
    def test_rademacher_exact(self):
        assert concentration_Q(RADEMACHER, 0.5) == 0.5
        assert concentration_Q(RADEMACHER, 2.0) == 1.0
        assert concentration_Q(RADEMACHER, 0.0) == 0.5

    def test_zero_window_continuous(self):
        assert concentration_Q(GAUSS, 0.0) == 0.0

    def test_gaussian_against_cdf_oracle(self):
        got = concentration_Q(GAUSS, 0.5, budget=200_000)
        oracle = math.erf(0.5 / math.sqrt(2.0))  # P(|N(0,1)| <= 0.5), best center 0
        assert abs(oracle - 0.3829) < 1e-4
        assert abs(got - oracle) <= 0.01

    def test_monotone_in_eta(self):
        values = [concentration_Q(GAUSS, eta, budget=50_000) for eta in (0.1, 0.3, 0.6, 1.2)]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("dist", SHIPPED, ids=lambda d: d.tag)
    def test_witness_eta_half_r0_point_six(self, dist):
        # every shipped law concentrates at most 0.6 in any ball of radius 0.5
        assert concentration_Q(dist, 0.5, budget=200_000) <= 0.6

    def test_two_point_has_its_own_witness(self):
        d = EntryDistribution("TwoPoint", a=3.0, p=0.1)
        assert concentration_Q(d, 0.5) == 0.9  # mass of the -1/3 atom
        assert concentration_Q(d, 0.01) <= 0.95

    def test_complex_rademacher_small_window(self):
        d = EntryDistribution("ComplexRademacher")
        assert concentration_Q(d, 0.5) == 0.25  # atoms are sqrt(2) apart
        assert concentration_Q(d, 1.0) == 1.0  # origin covers all four


class TestSmallBall:
    def test_binomial_oracle(self):
        n = 10
        x = np.full(n, 1.0 / math.sqrt(n))
        # exact enumeration oracle: best window of width 2*eta around an atom
        eta = 0.01 / math.sqrt(n)
        sums = np.array([np.sum(signs) for signs in itertools.product([-1, 1], repeat=n)])
        atoms, counts = np.unique(sums, return_counts=True)
        oracle = counts.max() / 2.0**n
        assert oracle == pytest.approx(252.0 / 1024.0)
        got = small_ball(x, RADEMACHER, 1.0, eta, trials=100_000)
        assert abs(got - oracle) <= 0.02

    def test_window_larger_than_range(self):
        x = np.full(4, 0.5)
        assert small_ball(x, RADEMACHER, 1.0, eta=10.0, trials=10_000) == 1.0

    def test_basis_vector_reduces_to_concentration(self):
        x = np.zeros(8)
        x[0] = 1.0
        got = small_ball(x, GAUSS, 1.0, eta=0.5, trials=50_000)
        assert abs(got - concentration_Q(GAUSS, 0.5, budget=200_000)) <= 0.02

    def test_monotone_in_eta(self):
        x = np.full(16, 0.25)
        vals = [small_ball(x, GAUSS, 1.0, eta, trials=20_000) for eta in (0.05, 0.2, 0.8)]
        assert vals[0] <= vals[1] <= vals[2]

    def test_sign_flip_invariance(self, oracle_rng):
        x = oracle_rng.normal(size=12)
        x /= np.linalg.norm(x)
        flipped = x * np.where(oracle_rng.uniform(size=12) < 0.5, -1.0, 1.0)
        a = small_ball(x, RADEMACHER, 1.0, 0.1, trials=50_000)
        b = small_ball(flipped, RADEMACHER, 1.0, 0.1, trials=50_000, seed=17)
        assert abs(a - b) <= 0.02

    def test_minimum_trials_enforced(self):
        with pytest.raises(DomainError):
            small_ball(np.ones(4) / 2.0, GAUSS, 1.0, 0.1, trials=100)

    @pytest.mark.parametrize("dist", SHIPPED, ids=lambda d: d.tag)
    def test_incompressible_vectors_spread_mass(self, oracle_rng, dist):
        # weighted sums over incompressible directions cannot concentrate:
        # estimate stays clearly below 1
        n, delta, rho, eta0 = 100, 0.5, 0.2, 0.5
        x = oracle_rng.normal(size=n)
        x /= np.linalg.norm(x)
        assert classify_vector(x, delta, rho).tag == "Incompressible"
        eta = eta0 * rho / math.sqrt(2 * n)
        assert small_ball(x, dist, 0.5, eta, trials=20_000) <= 0.95


class TestMinSvTail:
    def test_bracketing_thresholds(self):
        cfg = EnsembleConfig(48, 1.0, GAUSS, 3110)
        table = min_sv_tail(cfg, 0.2 + 0.1j, trials=60, thresholds=[1e-12, 1e3])
        assert table.frequencies[0] == 0.0
        assert table.frequencies[1] == 1.0
        assert table.s1_violation_frequency == 0.0

    def test_monotone_in_threshold(self):
        cfg = EnsembleConfig(32, 1.0, GAUSS, 88)
        table = min_sv_tail(cfg, 0j, trials=60, thresholds=[1e-4, 1e-2, 1e-1, 1.0])
        assert np.all(np.diff(table.frequencies) >= 0)

    def test_rare_event_never_fires_at_desk_scale(self):
        cfg = EnsembleConfig(200, 1.0, GAUSS, 2717)
        table = min_sv_tail(cfg, 0j, trials=200, thresholds=[1e-9])
        assert table.frequencies[0] == 0.0

    def test_csv_serialization(self, tmp_path):
        cfg = EnsembleConfig(16, 1.0, GAUSS, 5)
        table = min_sv_tail(cfg, 0j, trials=50, thresholds=[1e-6, 1e-3])
        path = tmp_path / "tail.csv"
        table.to_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "threshold,frequency,trials,n,p_n,z_re,z_im"
        assert len(lines) == 3


class TestLargestSvTail:
    def test_dense_gaussian_never_reaches_bound(self):
        cfg = EnsembleConfig(256, 1.0, GAUSS, 42)
        assert largest_sv_tail(cfg, trials=200) == 0.0

    def test_one_by_one_rademacher_always_hits(self):
        # s1 = |X| = 1 >= 1 * sqrt(1) for every trial
        cfg = EnsembleConfig(1, 1.0, RADEMACHER, 9)
        assert largest_sv_tail(cfg, trials=50) == 1.0

    def test_threshold_monotonicity_on_same_data(self):
        from circulaw import sample_matrix, singular_values

        cfg = EnsembleConfig(64, 1.0, GAUSS, 13)
        s1 = np.array(
            [float(singular_values(sample_matrix(cfg, t)).values[0]) for t in range(50)]
        )
        bound = cfg.n * math.sqrt(cfg.p_n)
        assert np.mean(s1 >= bound) <= np.mean(s1 >= 2.0)
