// Annealer, free-energy estimator, and the exact enumeration oracle.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "qbmrl/free_energy.hpp"
#include "qbmrl/oracle.hpp"
#include "qbmrl/sampler.hpp"

using namespace qbmrl;

namespace {

// Random small system with N(0,1) fields and couplings on ~half the pairs.
EffectiveHamiltonian random_system(std::size_t n, std::uint64_t seed) {
    GaussianStream g(seed);
    Rng rng = make_rng(mix_seed(seed, 1));
    std::vector<double> fields(n);
    for (double& f : fields) f = g.next();
    std::vector<SpinCoupling> couplings;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng() & 1) couplings.push_back({i, j, g.next()});
    return EffectiveHamiltonian(n, std::move(fields), std::move(couplings), 0.25);
}

}  // namespace

TEST_CASE("anneal schedule validation") {
    CHECK_THROWS_AS((AnnealSchedule{0, 1.0, 0.1, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((AnnealSchedule{10, 1.0, 0.1, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((AnnealSchedule{10, 1.0, 0.1, -1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((AnnealSchedule{10, 0.1, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((AnnealSchedule{10, 1.0, -0.1, 1.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((AnnealSchedule{10, 1.0, 1.0, 1.0}.validate()));  // constant field ok
}

TEST_CASE("transverse field interpolates linearly and never increases") {
    const AnnealSchedule sched{5, 20.0, 0.01, 1.0};
    CHECK(gamma_at(sched, 0) == 20.0);
    CHECK(gamma_at(sched, 4) == 0.01);
    for (std::size_t s = 1; s < sched.num_sweeps; ++s)
        CHECK(gamma_at(sched, s) <= gamma_at(sched, s - 1));
    CHECK(gamma_at(sched, 2) == Catch::Approx(0.5 * (20.0 + 0.01)).margin(1e-12));
    const AnnealSchedule one{1, 20.0, 0.01, 1.0};
    CHECK(gamma_at(one, 0) == 0.01);
}

TEST_CASE("heat-bath flip probability") {
    CHECK(flip_probability(2.0, 1.0) == Catch::Approx(0.8808).margin(1e-4));
    CHECK(flip_probability(0.0, 1.0) == 0.5);
    CHECK(flip_probability(-2.0, 1.0) == Catch::Approx(1.0 - 0.8808).margin(1e-4));
    CHECK(flip_probability(1e6, 1.0) == 1.0);
    CHECK(flip_probability(-1e6, 1.0) == 0.0);
    CHECK(flip_probability(2.0, 2.0) == Catch::Approx(1.0 / (1.0 + std::exp(-1.0))).margin(1e-12));
    CHECK_THROWS_AS(flip_probability(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sampling is deterministic per seed and per read") {
    const auto h = random_system(6, 77);
    const AnnealSchedule sched{30, 3.0, 0.1, 1.0};
    const ReadSet a = sample(h, sched, 10, 123);
    const ReadSet b = sample(h, sched, 10, 123);
    CHECK(a.spins == b.spins);
    CHECK(a.energies == b.energies);
    const ReadSet c = sample(h, sched, 10, 124);
    CHECK(a.spins != c.spins);

    // read i depends only on (seed, i), not on how many reads were requested
    const ReadSet prefix = sample(h, sched, 4, 123);
    for (std::size_t r = 0; r < 4; ++r) {
        const auto full = a.read(r);
        const auto part = prefix.read(r);
        CHECK(std::equal(full.begin(), full.end(), part.begin()));
    }
}

TEST_CASE("stored read energies are recomputable from the hamiltonian") {
    const auto h = random_system(8, 5);
    const ReadSet reads = sample(h, {25, 2.0, 0.05, 1.0}, 50, 9);
    for (std::size_t r = 0; r < reads.n_reads(); ++r)
        CHECK(reads.energies[r] == h.energy(reads.read(r)));
}

TEST_CASE("strong ferromagnetic pair aligns") {
    const EffectiveHamiltonian h(2, {0.0, 0.0}, {SpinCoupling{0, 1, 10.0}});
    const ReadSet reads = sample(h, {20, 0.0, 0.0, 1.0}, 500, 31);
    int aligned = 0;
    for (std::size_t r = 0; r < reads.n_reads(); ++r) {
        const auto s = reads.read(r);
        aligned += (s[0] == s[1]);
    }
    CHECK(aligned >= 495);  // exact Boltzmann gives 1 - ~2e-9
}

TEST_CASE("fixed-field equilibrium matches exact Boltzmann") {
    // constant gamma: pure heat-bath dynamics must reach the Gibbs state
    const auto h = random_system(6, 202);
    const AnnealSchedule sched{40, 0.5, 0.5, 1.0};
    const ReadSet reads = sample(h, sched, 20000, 404);
    const auto dist = oracle::exact_distribution(h, 1.0);
    CHECK(oracle::total_variation(dist, reads) <= 0.05);
}

TEST_CASE("sampler rejects bad arguments") {
    const auto h = random_system(4, 1);
    CHECK_THROWS_AS(sample(h, {10, 1.0, 0.1, 1.0}, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(sample(h, {10, 0.1, 1.0, 1.0}, 5, 5), std::invalid_argument);
}

TEST_CASE("random sweep order still equilibrates") {
    const auto h = random_system(5, 8);
    SamplerOptions opt;
    opt.random_sweep_order = true;
    const ReadSet reads = sample(h, {40, 0.5, 0.5, 1.0}, 10000, 7, opt);
    const auto dist = oracle::exact_distribution(h, 1.0);
    CHECK(oracle::total_variation(dist, reads) <= 0.05);
}

// --- oracle ------------------------------------------------------------------

TEST_CASE("exact distribution normalizes and matches closed forms") {
    // single spin in a field: Z = 2 cosh(beta f)
    const double f = 0.7, beta = 1.3;
    const EffectiveHamiltonian h1(1, {f}, {});
    const auto dist = oracle::exact_distribution(h1, beta);
    double total = 0.0;
    for (double p : dist.probabilities) total += p;
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
    CHECK(oracle::exact_free_energy(h1, beta) ==
          Catch::Approx(-std::log(2.0 * std::cosh(beta * f)) / beta).margin(1e-12));
    const auto ex = oracle::exact_expectations(h1, beta);
    CHECK(ex.spin_mean[0] == Catch::Approx(std::tanh(beta * f)).margin(1e-12));

    // coupled pair without fields: <s0 s1> = tanh(beta J)
    const double J = 0.45;
    const EffectiveHamiltonian h2(2, {0.0, 0.0}, {SpinCoupling{0, 1, J}});
    const auto ex2 = oracle::exact_expectations(h2, beta);
    CHECK(ex2.coupling_mean[0] == Catch::Approx(std::tanh(beta * J)).margin(1e-12));
    CHECK(ex2.spin_mean[0] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("oracle offset shifts free energy, not probabilities") {
    const auto base = random_system(4, 60);
    const EffectiveHamiltonian shifted(4, {base.fields().begin(), base.fields().end()},
                                       base.couplings(), base.offset() + 5.0);
    const auto d0 = oracle::exact_distribution(base, 2.0);
    const auto d1 = oracle::exact_distribution(shifted, 2.0);
    for (std::size_t c = 0; c < d0.probabilities.size(); ++c)
        CHECK(d0.probabilities[c] == Catch::Approx(d1.probabilities[c]).margin(1e-12));
    CHECK(oracle::exact_free_energy(shifted, 2.0) ==
          Catch::Approx(oracle::exact_free_energy(base, 2.0) + 5.0).margin(1e-9));
}

TEST_CASE("oracle refuses oversized systems") {
    const EffectiveHamiltonian h(25, std::vector<double>(25, 0.0), {});
    CHECK_THROWS_AS(oracle::exact_distribution(h, 1.0), std::invalid_argument);
}

TEST_CASE("total variation of a distribution with itself is zero") {
    const auto h = random_system(5, 3);
    const auto dist = oracle::exact_distribution(h, 1.0);
    const ReadSet reads = oracle::exhaustive_readset(h, 1.0);
    CHECK(oracle::total_variation(dist, reads) <= 1e-12);
}

// --- estimator ---------------------------------------------------------------

TEST_CASE("free energy from a two-configuration read multiset") {
    // five reads of energy 1, five of energy 3 at beta 1:
    // F = 2 + (0.5 ln 0.5 + 0.5 ln 0.5) = 2 - ln 2
    const EffectiveHamiltonian h(1, {0.0}, {});
    ReadSet reads;
    reads.n_spins = 1;
    reads.n_hidden = 1;
    reads.n_replicas = 1;
    for (int i = 0; i < 10; ++i) {
        reads.spins.push_back(i < 5 ? Spin(1) : Spin(-1));
        reads.energies.push_back(i < 5 ? 1.0 : 3.0);
    }
    const auto est = estimate_free_energy(h, reads, 1.0);
    CHECK(est.mean_energy == Catch::Approx(2.0).margin(1e-12));
    CHECK(est.entropy_term == Catch::Approx(-std::log(2.0)).margin(1e-12));
    CHECK(est.free_energy == Catch::Approx(2.0 - std::log(2.0)).margin(1e-12));
    CHECK(est.mean_spin[0] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("free-energy estimate on the exhaustive ensemble is exact") {
    // the headline estimator/oracle agreement: 1e-9 on random systems
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t n = 2 + seed % 9;  // 2..10 spins
        const auto h = random_system(n, mix_seed(900, seed));
        const double beta = 0.5 + 0.1 * (seed % 7);
        const ReadSet ens = oracle::exhaustive_readset(h, beta);
        const auto est = estimate_free_energy(h, ens, beta);
        const auto exact = oracle::exact_estimate(h, beta);
        CHECK(std::abs(est.free_energy - oracle::exact_free_energy(h, beta)) <= 1e-9);
        CHECK(std::abs(est.free_energy - exact.free_energy) <= 1e-9);
        CHECK(std::abs(est.mean_energy - exact.mean_energy) <= 1e-9);
        for (std::size_t i = 0; i < est.mean_spin.size(); ++i)
            CHECK(std::abs(est.mean_spin[i] - exact.mean_spin[i]) <= 1e-9);
    }
}

TEST_CASE("replica-averaged statistics agree with the oracle") {
    Network net(Layout{2, 2, {2, 2}}, 11);
    const BitVec s{1, 0}, a{0, 1};
    const auto h = build_effective_hamiltonian(net, s, a, 2, 0.4, 1.0);
    const ReadSet ens = oracle::exhaustive_readset(h, 1.0);
    const auto est = estimate_free_energy(h, ens, 1.0);
    const auto exact = oracle::exact_estimate(h, 1.0);
    REQUIRE(est.mean_spin.size() == h.n_hidden());
    REQUIRE(est.mean_pair.size() == h.hidden_pairs().size());
    for (std::size_t i = 0; i < est.mean_spin.size(); ++i)
        CHECK(est.mean_spin[i] == Catch::Approx(exact.mean_spin[i]).margin(1e-9));
    for (std::size_t i = 0; i < est.mean_pair.size(); ++i)
        CHECK(est.mean_pair[i] == Catch::Approx(exact.mean_pair[i]).margin(1e-9));

    // cross-check one spin mean against the raw per-spin expectations
    const auto raw = oracle::exact_expectations(h, 1.0);
    CHECK(est.mean_spin[0] ==
          Catch::Approx(0.5 * (raw.spin_mean[0] + raw.spin_mean[h.n_hidden()])).margin(1e-9));
}

TEST_CASE("zero-weight network gives the pure entropy value") {
    Network net = Network::zeros(Layout{1, 1, {2}});
    const BitVec s{1}, a{1};
    const double beta = 2.0;
    const auto h = build_effective_hamiltonian(net, s, a, 1, 0.0, beta);
    const ReadSet ens = oracle::exhaustive_readset(h, beta);
    const auto est = estimate_free_energy(h, ens, beta);
    // F = -(n_hidden ln 2) / beta, so Q = +(n_hidden ln 2) / beta
    CHECK(est.free_energy == Catch::Approx(-2.0 * std::log(2.0) / beta).margin(1e-12));
    CHECK(est.mean_energy == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("read weights are scale invariant") {
    const auto h = random_system(4, 19);
    ReadSet ens = oracle::exhaustive_readset(h, 1.0);
    const auto before = estimate_free_energy(h, ens, 1.0);
    for (double& w : ens.weights) w *= 37.5;
    const auto after = estimate_free_energy(h, ens, 1.0);
    CHECK(before.free_energy == Catch::Approx(after.free_energy).margin(1e-12));
    CHECK(before.mean_spin[0] == Catch::Approx(after.mean_spin[0]).margin(1e-12));
}

TEST_CASE("estimated free energy never beats the exact one") {
    // variational bound: any empirical ensemble has F >= F_exact
    const auto h = random_system(6, 23);
    const auto exact_f = oracle::exact_free_energy(h, 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ReadSet reads = sample(h, {30, 1.0, 0.1, 1.0}, 200, seed);
        const auto est = estimate_free_energy(h, reads, 1.0);
        CHECK(est.free_energy >= exact_f - 1e-9);
        CHECK(est.entropy_term <= 1e-12);
        CHECK(est.free_energy <= est.mean_energy + 1e-12);
    }
}

TEST_CASE("estimator argument checks") {
    const auto h = random_system(3, 2);
    ReadSet empty;
    empty.n_spins = 3;
    CHECK_THROWS_AS(estimate_free_energy(h, empty, 1.0), std::invalid_argument);
    const ReadSet reads = sample(h, {10, 1.0, 0.1, 1.0}, 5, 1);
    CHECK_THROWS_AS(estimate_free_energy(h, reads, 0.0), std::invalid_argument);
    const auto other = random_system(4, 3);
    CHECK_THROWS_AS(estimate_free_energy(other, reads, 1.0), std::invalid_argument);
}

TEST_CASE("q_value is the negated free energy") {
    Network net(Layout{2, 2, {2}}, 14);
    const BitVec s{1, 0}, a{0, 1};
    SamplerParams params;
    params.schedule = {30, 2.0, 0.05, 1.0};
    params.n_reads = 40;
    const QEvaluation ev = evaluate_q(net, s, a, params, 99);
    CHECK(ev.q == -ev.estimate.free_energy);
    // identical seed, identical result
    CHECK(q_value(net, s, a, params, 99) == ev.q);
}
