#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <sstream>

#include "emoseq/correlations.hpp"
#include "emoseq/synth.hpp"
#include "test_support.hpp"

using namespace emoseq;

namespace {

GeneratorConfig config(std::size_t threads, double mean_len, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.thread_count = threads;
  cfg.length = {LengthLaw::Kind::geometric, mean_len};
  cfg.seed = Seed{seed};
  return cfg;
}

MarkovModel chain(std::vector<double> states, std::vector<double> transition) {
  MarkovModel m;
  m.states = std::move(states);
  m.transition = std::move(transition);
  return m;
}

// Brute-force path enumeration: P(x_{n-2}, x_{n-1} in A, x_n = c) / P(A, A) / pi_c.
std::vector<double> enumerate_threestep(const std::vector<double>& pi, const std::vector<double>& P,
                                        const std::vector<bool>& in_set) {
  const std::size_t n = pi.size();
  std::vector<double> num(n, 0.0);
  double den = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        const double w = pi[a] * P[a * n + b] * P[b * n + c];
        if (in_set[a] && in_set[b]) {
          num[c] += w;
          den += w;
        }
      }
    }
  }
  std::vector<double> out(n);
  for (std::size_t c = 0; c < n; ++c) out[c] = num[c] / den / pi[c];
  return out;
}

}  // namespace

TEST_CASE("model validation") {
  CHECK_THROWS_AS(chain({0.05, 0.95}, {0.9, 0.2, 0.1, 0.9}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(chain({0.05, 0.95}, {0.9, 0.1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(chain({0.05, 1.5}, {1, 0, 0, 1}).validate(), std::invalid_argument);
  MarkovModel bad_init = two_state_chain(0.9);
  bad_init.initial = std::vector<double>{0.7, 0.7};
  CHECK_THROWS_AS(bad_init.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate_markov(chain({0.05, 0.95}, {0.5, 0.6, 0.5, 0.5}), config(1, 5, 1)), std::invalid_argument);
  CHECK_NOTHROW(two_state_chain(0.9).validate());
}

TEST_CASE("stationary distribution of an asymmetric chain") {
  // leave 0 w.p. 0.2, leave 1 w.p. 0.3 -> pi = (0.6, 0.4)
  const MarkovModel m = chain({0.05, 0.95}, {0.8, 0.2, 0.3, 0.7});
  const auto pi = stationary_distribution(m);
  CHECK(pi[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(0.4).epsilon(1e-12));
  // periodic chains still have a stationary law
  const auto flip = stationary_distribution(chain({0.05, 0.95}, {0, 1, 1, 0}));
  CHECK(flip[0] == doctest::Approx(0.5));
}

TEST_CASE("mi_oracle closed forms") {
  CHECK(mi_oracle(chain({0.05, 0.95}, {0.5, 0.5, 0.5, 0.5})) == doctest::Approx(0.0));
  MarkovModel identity = chain({0.05, 0.95}, {1, 0, 0, 1});
  CHECK_THROWS_AS(mi_oracle(identity), OracleError);
  identity.initial = std::vector<double>{0.5, 0.5};
  CHECK(mi_oracle(identity) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(mi_oracle(identity, LogBase::two) == doctest::Approx(1.0).epsilon(1e-12));
  const double stay = 0.9;
  const double expected = 0.5 * stay * std::log(stay / 0.5) * 2 + 0.5 * (1 - stay) * std::log((1 - stay) / 0.5) * 2;
  CHECK(mi_oracle(two_state_chain(stay)) == doctest::Approx(expected).epsilon(1e-12));
  // an invariant initial must be invariant
  MarkovModel reducible = chain({0.05, 0.55, 0.95}, {1, 0, 0, 0, 0.5, 0.5, 0, 0.5, 0.5});
  reducible.initial = std::vector<double>{0.2, 0.5, 0.3};
  CHECK_THROWS_AS(mi_oracle(reducible), OracleError);
}

TEST_CASE("states sharing a bin are merged by the oracle") {
  // two states in bin 0 behave as one bin: the binned chain is IID uniform over bins 0 and 9
  const MarkovModel m = chain({0.01, 0.08, 0.95}, {0.25, 0.25, 0.5, 0.25, 0.25, 0.5, 0.25, 0.25, 0.5});
  CHECK(mi_oracle(m) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("threestep_oracle agrees with path enumeration") {
  const MarkovModel m = chain({0.05, 0.55, 0.95}, {0.7, 0.2, 0.1, 0.25, 0.5, 0.25, 0.05, 0.15, 0.8});
  const auto pi = stationary_distribution(m);
  const ThreeStepOracle o = threestep_oracle(m);
  const auto plus = enumerate_threestep(pi, m.transition, {false, false, true});
  const auto minus = enumerate_threestep(pi, m.transition, {true, false, false});
  CHECK(o.c_plus[0] == doctest::Approx(plus[0]).epsilon(1e-12));
  CHECK(o.c_plus[5] == doctest::Approx(plus[1]).epsilon(1e-12));
  CHECK(o.c_plus[9] == doctest::Approx(plus[2]).epsilon(1e-12));
  CHECK(o.c_minus[0] == doctest::Approx(minus[0]).epsilon(1e-12));
  CHECK(o.c_minus[9] == doctest::Approx(minus[2]).epsilon(1e-12));
  CHECK(std::isnan(o.c_plus[3]));
}

TEST_CASE("threestep_oracle special chains") {
  const ThreeStepOracle uniform = threestep_oracle(chain({0.05, 0.55, 0.95}, std::vector<double>(9, 1.0 / 3.0)));
  for (std::size_t b : {0, 5, 9}) {
    CHECK(uniform.c_plus[b] == doctest::Approx(1.0));
    CHECK(uniform.c_minus[b] == doctest::Approx(1.0));
  }
  MarkovModel identity = chain({0.05, 0.55, 0.95}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  identity.initial = std::vector<double>{0.25, 0.5, 0.25};
  const ThreeStepOracle o = threestep_oracle(identity);
  CHECK(o.c_plus[9] == doctest::Approx(4.0));
  CHECK(o.c_plus[0] == 0.0);
  CHECK(o.c_plus[5] == 0.0);
  // 0.85 jitters over [0.8, 0.9), wholly below the top cut
  const ThreeStepOracle low_only = threestep_oracle(chain({0.05, 0.85}, {0.5, 0.5, 0.5, 0.5}));
  CHECK(low_only.c_minus[8] == doctest::Approx(1.0));
  CHECK(std::isnan(low_only.c_plus[8]));
  CHECK_THROWS_AS(threestep_oracle(chain({0.12, 0.85}, {0.5, 0.5, 0.5, 0.5})), OracleError);
  MarkovModel straddle = chain({0.05, 0.95}, {0.5, 0.5, 0.5, 0.5});
  straddle.bins = BinSpec{0.25};  // bin [0.75, 1.0] straddles 0.9
  CHECK_THROWS_AS(threestep_oracle(straddle), OracleError);
}

TEST_CASE("generate_markov: identity and uniform transitions") {
  MarkovModel identity = chain({0.05, 0.55, 0.95}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  identity.initial = std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const Dataset ds = generate_markov(identity, config(100, 30, 3));
  for (const auto& t : ds.threads) {
    const std::size_t bin = identity.bins.bin_of(t.comments[0].p_pos);
    for (const auto& c : t.comments) CHECK(identity.bins.bin_of(c.p_pos) == bin);
  }
  identity.jitter = false;
  const Dataset flat = generate_markov(identity, config(50, 30, 3));
  for (const auto& t : flat.threads) {
    for (const auto& c : t.comments) CHECK(c.p_pos == t.comments[0].p_pos);
  }

  const MarkovModel uniform = chain({0.05, 0.95}, {0.5, 0.5, 0.5, 0.5});
  CHECK(mi_oracle(uniform) == 0.0);
  const Dataset u = generate_markov(uniform, config(1000, 200, 4));
  CHECK(estimate_mi(pair_counts(u, Field::positive, uniform.bins)).miller_madow < 0.001);
}

TEST_CASE("estimated MI approaches the oracle at a 1/sqrt(n) rate") {
  const MarkovModel m = chain({0.05, 0.55, 0.95}, {0.8, 0.15, 0.05, 0.1, 0.8, 0.1, 0.05, 0.15, 0.8});
  const double exact = mi_oracle(m);
  auto mean_error = [&](std::size_t threads) {
    double err = 0.0;
    for (std::uint64_t rep = 0; rep < 12; ++rep) {
      const Dataset ds = generate_markov(m, config(threads, 50, 1000 + rep * 7 + threads));
      err += std::abs(estimate_mi(pair_counts(ds, Field::positive, m.bins)).miller_madow - exact);
    }
    return err / 12.0;
  };
  const double small = mean_error(40);
  const double large = mean_error(640);  // 16x the data: error should shrink ~4x
  CHECK(large < small / 2.0);
  CHECK(large > small / 10.0);
}

TEST_CASE("generate_iid edge cases") {
  const Dataset d = generate_iid(AtomMarginal{{0.5}, {1.0}}, config(20, 10, 5));
  for (const auto& t : d.threads) {
    for (const auto& c : t.comments) {
      CHECK(c.p_pos == 0.5);
      CHECK(c.p_sub == 0.5);
    }
  }
  CHECK_THROWS_AS(generate_iid(AtomMarginal{{0.5}, {1.0}}, config(0, 10, 5)), std::invalid_argument);
  CHECK_THROWS_AS(generate_iid(AtomMarginal{{1.5}, {1.0}}, config(1, 10, 5)), std::invalid_argument);
  CHECK_THROWS_AS(generate_iid(PiecewiseMarginal{BinSpec{0.1}, {1, 2}}, config(1, 10, 5)), std::invalid_argument);
}

TEST_CASE("two-atom IID data has no mutual information") {
  const Dataset d = generate_iid(AtomMarginal{{0.0, 1.0}, {0.5, 0.5}}, config(5000, 200, 6));
  CHECK(d.comment_count() > 900000);
  CHECK(estimate_mi(pair_counts(d, Field::positive, BinSpec{0.1})).miller_madow < 1e-4);
}

TEST_CASE("coupling modes") {
  const Dataset shared = generate_markov(two_state_chain(0.9), [] {
    auto c = config(50, 20, 7);
    c.coupling = Coupling::shared;
    return c;
  }());
  for (const auto& t : shared.threads) {
    for (const auto& c : t.comments) CHECK(c.p_sub == c.p_pos);
  }
  const Dataset indep = generate_markov(two_state_chain(0.9), config(50, 20, 7));
  std::size_t differ = 0;
  for (const auto& t : indep.threads) {
    for (const auto& c : t.comments) differ += BinSpec{0.1}.bin_of(c.p_sub) != BinSpec{0.1}.bin_of(c.p_pos);
  }
  CHECK(differ > 0);
}

TEST_CASE("bin masses and survival functions") {
  const BetaMixture mix{{{0.5, 0.5, 2.0}, {0.5, 2.0, 0.5}}};
  const auto masses = bin_masses(mix, BinSpec{0.1});
  double sum = 0.0;
  for (double m : masses) sum += m;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(masses[0] == doctest::Approx(0.5 * boost::math::ibeta(0.5, 2.0, 0.1) + 0.5 * boost::math::ibeta(2.0, 0.5, 0.1)));
  CHECK(survival(mix, 0.5) == doctest::Approx(0.5));
  const PiecewiseMarginal pw{BinSpec{0.5}, {1.0, 3.0}};
  CHECK(survival(pw, 0.25) == doctest::Approx(0.875));
  CHECK(bin_masses(pw, BinSpec{0.25})[3] == doctest::Approx(0.375));
  CHECK(marginal_mean(pw) == doctest::Approx(0.25 * 0.25 + 0.75 * 0.75));
  CHECK(survival(AtomMarginal{{0.2, 0.8}, {1, 3}}, 0.5) == doctest::Approx(0.75));
}

TEST_CASE("gamma and beta samplers have the right moments") {
  Rng rng(Seed{10});
  for (auto [a, b] : {std::pair{2.0, 5.0}, std::pair{0.3, 0.3}, std::pair{0.5, 3.0}}) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_beta(a, b, rng);
      REQUIRE(x >= 0.0);
      REQUIRE(x <= 1.0);
      s += x;
      s2 += x * x;
    }
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    CHECK(std::abs(s / n - mean) < 4.0 * std::sqrt(var / n));
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(var).epsilon(0.03));
  }
  double g = 0.0;
  for (int i = 0; i < 100000; ++i) g += sample_gamma(0.5, rng);
  CHECK(g / 100000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("thread length laws") {
  GeneratorConfig cfg = config(20000, 50.0, 12);
  const auto lengths = draw_thread_lengths(cfg);
  std::vector<double> l(lengths.begin(), lengths.end());
  CHECK(*std::min_element(lengths.begin(), lengths.end()) >= 1);
  // geometric on {1,2,...} with mean 50: sd = sqrt(50 * 49)
  CHECK(std::abs(test::mean_of(l) - 50.0) < 4.0 * std::sqrt(50.0 * 49.0 / 20000));
  cfg.length = {LengthLaw::Kind::fixed, 7};
  for (auto n : draw_thread_lengths(cfg)) CHECK(n == 7);
  cfg.length = {LengthLaw::Kind::geometric, 1.0};
  for (auto n : draw_thread_lengths(cfg)) CHECK(n == 1);
  cfg.length = {LengthLaw::Kind::geometric, 0.5};
  CHECK_THROWS_AS(draw_thread_lengths(cfg), std::invalid_argument);
}

TEST_CASE("generation is deterministic in the seed and validates") {
  const Dataset a = generate_markov(two_state_chain(0.8), config(300, 40, 99));
  const Dataset b = generate_markov(two_state_chain(0.8), config(300, 40, 99));
  const Dataset c = generate_markov(two_state_chain(0.8), config(300, 40, 100));
  CHECK(a == b);
  CHECK(a != c);
  CHECK(validate(a).ok());
  CHECK(validate(generate_iid(BetaMixture{{{1, 0.3, 0.3}}}, config(300, 40, 1))).ok());
}

TEST_CASE("config files") {
  std::istringstream markov(R"(# persistent chain
model = markov
bin_width = 0.1
states = 0.05 0.55 0.95
transition = 0.8 0.15 0.05 ; 0.1 0.8 0.1 ; 0.05 0.15 0.8
jitter = true
threads = 10
length = fixed 5
coupling = shared
seed = 17
id_prefix = chain-
)");
  const SynthSpec s = parse_synth_config(markov);
  CHECK(s.kind == SynthSpec::Kind::markov);
  CHECK(s.model.size() == 3);
  CHECK(s.model.p(1, 2) == 0.1);
  CHECK(s.config.thread_count == 10);
  CHECK(s.config.coupling == Coupling::shared);
  CHECK(s.seed_given);
  const Dataset ds = generate(s);
  CHECK(ds.comment_count() == 50);
  CHECK(ds.threads[3].thread_id == "chain-3");

  std::istringstream iid("model = iid\nmarginal = beta 0.5 0.3 3 , 0.5 3 0.3\nthreads = 4\nlength = geometric 3\n");
  const SynthSpec t = parse_synth_config(iid);
  CHECK(std::get<BetaMixture>(t.marginal).components.size() == 2);
  CHECK_FALSE(t.seed_given);

  std::istringstream atoms("model = iid\nmarginal = atoms 0:0.5 1:0.5\n");
  CHECK(std::get<AtomMarginal>(parse_synth_config(atoms).marginal).values[1] == 1.0);

  for (const char* bad : {"model = markov\nstates = 0.1 0.9\ntransition = 0.5 0.6 ; 0.5 0.5\n",
                          "model = markov\nstates = 0.1\n", "colour = blue\n", "model = iid\n",
                          "model = iid\nmarginal = piecewise 1 2\n", "threads = many\n", "seed = -3\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(parse_synth_config(in), std::invalid_argument);
  }
}
