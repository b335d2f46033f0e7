import math

import numpy as np
import pytest

from radixlab import experiments as ex
from radixlab import rand
from radixlab.experiments import BoundViolated, ExperimentConfig
from radixlab.numsys import round_ref, system_by_name
from radixlab.refarith import REF
from radixlab.simarith import FpContext, context_for
from radixlab.theory import delta_density, eps_worst

NAMES = ["S0", "S1", "S2", "S3", "S4", "S4T", "S5"]


def ctx(name):
    return context_for(system_by_name(name), name)


# -- statistics -----------------------------------------------------------

def test_rms_examples():
    assert ex.rms([3, 4]) == pytest.approx(math.sqrt(12.5))
    assert ex.standard_error_of_rms([2.5] * 10) == 0
    with pytest.raises(ValueError):
        ex.standard_error_of_rms([1.0])


def test_rms_standard_error_matches_bootstrap():
    rng = np.random.default_rng(0)
    v = rng.uniform(0, 1, 10**5)
    boot = [ex.rms(v[rng.integers(0, v.size, v.size)]) for _ in range(200)]
    assert ex.standard_error_of_rms(v) == pytest.approx(np.std(boot, ddof=1), rel=0.1)


def test_summarize_gamma_propagation():
    rng = np.random.default_rng(1)
    alphas = np.vstack([rng.normal(0, 1, 1000), rng.normal(0, 2, 1000)])
    s0, s1 = ex.summarize(["a", "b"], alphas)
    assert (s0.gamma, s0.se_gamma) == (1.0, 0.0)
    assert s1.gamma == s1.beta / s0.beta
    want = s1.gamma * math.hypot(s1.se_beta / s1.beta, s0.se_beta / s0.beta)
    assert s1.se_gamma == pytest.approx(want)


# -- configuration --------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(kind="sums", n=1, m=0),
    dict(kind="sums", n=0, m=10),
    dict(kind="eig", n=1, m=10),
    dict(kind="linsys", n=2, m=10, positive_only=True),
    dict(kind="sums", n=2, m=10, systems=[]),
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_default_systems_and_tag():
    cfg = ExperimentConfig("sums", 4, 10, positive_only=True)
    assert [c.name for c in cfg.systems] == NAMES
    assert cfg.tag == "sums/n=4/positive"
    assert cfg.describe()["systems"][0]["spec"].startswith("log:")


# -- kernels --------------------------------------------------------------

def test_representable_exact_sum_has_zero_error():
    x = np.array([[1.0, -3.0], [2.5, 0.25], [-0.5, 8.0]])
    for name in NAMES[1:]:
        assert np.all(ex.sums_alpha(ctx(name), x) == 0)
    # the log system holds powers of two, and these partial sums stay powers of two
    x = np.array([[1.0, 0.25, -4.0], [1.0, 0.25, 2.0]])
    assert np.all(ex.sums_alpha(ctx("S0"), x) == 0)


def test_sums_single_term_is_representation_error():
    spec = system_by_name("S4T")
    x = np.array([[0.1, -7.3, 200.0]])
    want = (x[0] - round_ref(spec, x[0].astype(REF)).astype(np.float64)) / np.abs(x[0])
    np.testing.assert_allclose(ex.sums_alpha(ctx("S4T"), x), want, rtol=1e-12)


def test_products_single_factor_within_eps():
    r = ex.run(ExperimentConfig("products", 1, 5000, master_seed=4))
    for j, name in enumerate(NAMES[1:], start=1):
        spec = system_by_name(name)
        eps = eps_worst(spec.k, spec.u, spec.mode)
        assert np.max(np.abs(r.alphas[j])) <= eps


def test_products_log_system_exact():
    r = ex.run(ExperimentConfig("products", 30, 2000, master_seed=5))
    assert np.all(r.alphas[0] == 0)
    assert all(s.beta > 0 for s in r.stats[1:])


def test_products_bound_violation_detected():
    class Sloppy(FpContext):
        def mul(self, a, b):
            return self.round(self.value(a) * self.value(b) * REF(1.001))

    bad = Sloppy(system_by_name("S1"), "bad")
    cfg = ExperimentConfig("products", 10, 50, systems=[ctx("S0"), bad])
    with pytest.raises(BoundViolated):
        ex.run(cfg)


def test_products_rms_grows_like_sqrt_n():
    ns = [4, 16, 64, 256]
    betas = np.array([[s.beta for s in ex.run(ExperimentConfig("products", n, 1500,
                                                              master_seed=3)).stats]
                      for n in ns])
    for j, name in enumerate(NAMES):
        if name in ("S0", "S4T"):
            continue
        slope = np.polyfit(np.log(ns), np.log(betas[:, j]), 1)[0]
        assert 0.4 <= slope <= 0.6, (name, slope)


# -- sums laws ------------------------------------------------------------

def test_sums_growth_law_slopes():
    ns = [4, 16, 64, 256]
    systems = {name: ctx(name) for name in ("S1", "S2", "S4", "S4T")}
    absolute = {name: [] for name in systems}
    for n in ns:
        s = rand.substream(1, f"growth/n={n}", np.arange(3000))
        Z = rand.scale_factor(s)
        x = np.stack([rand.uniform_sym(s, Z) for _ in range(n)])
        scale = np.abs(x).sum(axis=0) / Z
        for name, c in systems.items():
            # undo the normalisation by sum |x_i| to get the error in units of Z
            absolute[name].append(ex.rms(ex.sums_alpha(c, x) * scale))
    slopes = {k: np.polyfit(np.log(ns), np.log(v), 1)[0] for k, v in absolute.items()}
    assert abs(slopes["S4T"] - 1.5) <= 0.2, slopes
    for name in ("S1", "S2", "S4"):
        assert abs(slopes[name] - 1.0) <= 0.2, slopes


def test_positive_sums_gain_sqrt_n():
    ratio = {}
    for n in (4, 64):
        signed = ex.run(ExperimentConfig("sums", n, 4000, master_seed=2))
        positive = ex.run(ExperimentConfig("sums", n, 4000, master_seed=2, positive_only=True))
        ratio[n] = np.array([p.beta / s.beta for p, s in zip(positive.stats, signed.stats)])
    growth = np.log(ratio[64] / ratio[4]) / np.log(16)
    assert np.all((growth > 0.35) & (growth < 0.65)), growth


def test_implicit_bit_best_beyond_three_se():
    r = ex.run(ExperimentConfig("sums", 4, 20000, master_seed=8))
    s1 = r.by_name("S1")
    for name in ("S2", "S3", "S4", "S5"):
        other = r.by_name(name)
        assert other.gamma - s1.gamma > 3 * math.hypot(other.se_gamma, s1.se_gamma)


def test_gamma_zero_is_one():
    r = ex.run(ExperimentConfig("sums", 3, 100, master_seed=1))
    assert r.stats[0].gamma == 1.0 and r.stats[0].se_gamma == 0.0
    assert ex.gamma_ratios(r)["S0"] == 1.0
    assert all(s.beta >= 0 for s in r.stats)


# -- determinism ----------------------------------------------------------

def test_identical_config_identical_bits():
    cfg = ExperimentConfig("sums", 5, 3000, master_seed=77)
    a, b = ex.run(cfg), ex.run(cfg)
    assert a.alphas.tobytes() == b.alphas.tobytes()


def test_chunking_does_not_change_results():
    cfg = ExperimentConfig("products", 6, 1000, master_seed=6)
    a = ex.run(cfg, chunk_size=1000)
    b = ex.run(cfg, chunk_size=37)
    assert a.alphas.tobytes() == b.alphas.tobytes()


def test_parallel_equals_sequential():
    cfg = ExperimentConfig("linsys", 3, 40, master_seed=9)
    assert ex.run(cfg, jobs=1).alphas.tobytes() == ex.run(cfg, jobs=2).alphas.tobytes()


def test_different_seeds_differ():
    a = ex.run(ExperimentConfig("sums", 2, 100, master_seed=1))
    b = ex.run(ExperimentConfig("sums", 2, 100, master_seed=2))
    assert not np.array_equal(a.alphas, b.alphas)


# -- matrix experiments ---------------------------------------------------

def test_identity_hook_gives_representation_error():
    n, m, seed = 3, 30, 4
    cfg = ExperimentConfig("linsys", n, m, master_seed=seed)
    r = ex.run(cfg, hook=lambda A: np.eye(n))
    _, x = ex.draw_linsys(rand.substream(seed, cfg.tag, np.arange(m)), n)
    for j, c in enumerate(cfg.systems):
        for t in range(m):
            xt = x[:, t].astype(REF)
            y = np.array([c.value(v) for v in c.round(xt)], dtype=REF)
            want = float(np.sqrt(np.sum((y - xt) ** 2)) / (np.sqrt(REF(n)) * np.sqrt(np.sum(xt**2))))
            assert r.alphas[j, t] == pytest.approx(want, rel=1e-12, abs=1e-30)


def test_diagonal_hook_gives_representation_error():
    n, m, seed = 4, 20, 5
    cfg = ExperimentConfig("eig", n, m, master_seed=seed)
    r = ex.run(cfg, hook=lambda A: np.diag(np.diag(A)))
    A = ex.draw_symmetric(rand.substream(seed, cfg.tag, np.arange(m)), n)
    for j, c in enumerate(cfg.systems):
        for t in range(m):
            d = np.sort(np.diag(A[..., t])).astype(REF)
            fd = np.array([c.value(v) for v in c.round(d)], dtype=REF)
            want = float(np.sqrt(np.sum((d - fd) ** 2)) / np.sqrt(np.sum(d**2)))
            assert r.alphas[j, t] == pytest.approx(want, rel=1e-12, abs=1e-30)


def test_singular_trial_is_redrawn():
    calls = {"n": 0}

    def hook(A):
        calls["n"] += 1
        return np.zeros_like(A) if calls["n"] == 3 else A

    r = ex.run(ExperimentConfig("linsys", 2, 5, master_seed=1), hook=hook)
    assert r.redraws == 1 and r.metadata["redraws"] == 1
    assert np.all(np.isfinite(r.alphas)) and np.all(r.alphas[1:] > 0)


def test_persistently_singular_trial_fails():
    with pytest.raises(ArithmeticError):
        ex.run(ExperimentConfig("linsys", 2, 2, master_seed=1), hook=np.zeros_like)


def test_linsys_single_equation_row():
    r = ex.run(ExperimentConfig("linsys", 1, 5000, master_seed=12))
    published = (1.30, 2.06, 2.61, 2.99, 4.92, 17.0)
    for s, want in zip(r.stats[1:], published):
        assert s.gamma == pytest.approx(want, rel=0.1), (s.name, s.gamma)


@pytest.mark.slow
def test_eig_order_eight_base_256():
    r = ex.run(ExperimentConfig("eig", 8, 400, master_seed=21))
    assert r.by_name("S5").gamma == pytest.approx(29.6, rel=0.2)


def test_metadata_recorded():
    r = ex.run(ExperimentConfig("sums", 2, 10, master_seed=3))
    md = r.metadata
    assert md["generator"] == "splitmix64"
    assert md["config"]["master_seed"] == 3
    assert md["finished"] >= md["started"]


# -- representation-error density -----------------------------------------

def test_density_report_s2():
    spec = system_by_name("S2")
    rep = ex.density_report(spec, 10**6, 20, seed=1)
    assert rep.counts.sum() == 10**6
    assert np.max(np.abs(rep.z_scores)) < 3
    assert abs(rep.mean) < 3 * rep.se_mean
    assert rep.rms == pytest.approx(rep.rms_theory, rel=0.01)


def test_density_flat_centre_height():
    spec = system_by_name("S4")
    lo = 2.0 ** (-spec.u - 1)
    x = ex.log_uniform_significands(spec, 10**6, seed=2)
    d = ex.relative_errors(spec, x)
    inside = np.mean(np.abs(d) < lo) / (2 * lo)
    assert inside == pytest.approx(delta_density(spec.k, spec.u, 0.0), rel=0.03)
