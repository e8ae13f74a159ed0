#pragma once

// Synthetic datasets with known structure, and the exact values every
// estimator should converge to on them.

#include <cstddef>
#include <iosfwd>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "emoseq/core.hpp"
#include "emoseq/correlations.hpp"
#include "emoseq/estimators.hpp"
#include "emoseq/rng.hpp"

namespace emoseq {

class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Marginals for IID generation

/// Mass `weights[b]` spread uniformly over bin b of `spec`.
struct PiecewiseMarginal {
  BinSpec spec;
  std::vector<double> weights;
};

struct BetaComponent {
  double weight = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
};

struct BetaMixture {
  std::vector<BetaComponent> components;
};

struct AtomMarginal {
  std::vector<double> values;
  std::vector<double> weights;
};

using Marginal = std::variant<PiecewiseMarginal, BetaMixture, AtomMarginal>;

PiecewiseMarginal marginal_from_histogram(const Histogram& h);

/// Throws std::invalid_argument unless weights are non-negative with a
/// positive sum, parameters positive and atoms inside [0,1].
void check_marginal(const Marginal& m);

/// Exact probability of each bin of `spec` under the normalized marginal.
std::vector<double> bin_masses(const Marginal& m, const BinSpec& spec);
/// P(X >= threshold).
double survival(const Marginal& m, double threshold);
double marginal_mean(const Marginal& m);

double sample(const Marginal& m, Rng& rng);
/// Marsaglia-Tsang gamma variate (shape boosted by U^(1/shape) below 1).
double sample_gamma(double shape, Rng& rng);
double sample_beta(double alpha, double beta, Rng& rng);

// ---------------------------------------------------------------------------
// Markov chains over binned states

/// A chain whose states are values in [0,1]. With `jitter`, an emitted value is
/// uniform over the bin of `bins` that holds the state value, so binned
/// statistics under `bins` see the chain exactly.
struct MarkovModel {
  std::vector<double> states;
  std::vector<double> transition;        // row-major, size() x size()
  std::optional<std::vector<double>> initial;  // stationary distribution when absent
  bool jitter = true;
  BinSpec bins{0.1};

  std::size_t size() const noexcept { return states.size(); }
  double p(std::size_t from, std::size_t to) const noexcept { return transition[from * size() + to]; }

  /// Throws std::invalid_argument on non-stochastic rows (tolerance 1e-12), a
  /// bad initial vector, or states outside [0,1].
  void validate() const;
};

/// Two states at the centers of the bottom and top bins, staying with `stay`.
MarkovModel two_state_chain(double stay, const BinSpec& bins = BinSpec{0.1});

bool is_irreducible(const MarkovModel& model);
/// Unique stationary distribution of an irreducible chain.
std::vector<double> stationary_distribution(const MarkovModel& model);
/// Distribution of the chain at stationarity used by the oracles: the
/// stationary law when irreducible, otherwise `initial` if it is invariant.
/// Throws OracleError otherwise.
std::vector<double> oracle_state_law(const MarkovModel& model);

// ---------------------------------------------------------------------------
// Generation

struct LengthLaw {
  enum class Kind { fixed, geometric };
  Kind kind = Kind::geometric;
  double value = 100.0;  // fixed length, or mean of the geometric law on {1, 2, ...}
};

enum class Coupling {
  independent,  // p_sub from a second, independent run of the same mechanism
  shared,       // p_sub = p_pos
};

struct GeneratorConfig {
  std::size_t thread_count = 1000;
  LengthLaw length{};
  Coupling coupling = Coupling::independent;
  Seed seed{};
  std::string id_prefix = "t";
};

/// Thread lengths use stream derive_seed(seed, 0); thread t uses derive_seed(seed, t + 1).
Dataset generate_iid(const Marginal& marginal, const GeneratorConfig& config);
Dataset generate_markov(const MarkovModel& model, const GeneratorConfig& config);

std::vector<std::size_t> draw_thread_lengths(const GeneratorConfig& config);

// ---------------------------------------------------------------------------
// Oracles (binned under model.bins)

/// p(bin_prev, bin_next) at stationarity, row-major.
std::vector<double> binned_joint(const MarkovModel& model);
/// Correlation ratio C(prev, next) per bin pair; NaN where undefined.
std::vector<double> correlation_ratio_oracle(const MarkovModel& model);
double mi_oracle(const MarkovModel& model, LogBase base = LogBase::natural);

struct ThreeStepOracle {
  std::vector<double> c_plus;   // NaN where the bin has zero stationary mass
  std::vector<double> c_minus;  // NaN also when the conditioning set has zero mass
};

/// Exact C+/C- from two transition steps at stationarity. Throws OracleError
/// when a state's emitted values straddle a cut, or when both conditioning
/// sets have zero stationary mass.
ThreeStepOracle threestep_oracle(const MarkovModel& model, double top_cut = 0.9, double bottom_cut = 0.1);

/// Pooled average cluster size E[clustered] / E[clusters] for IID comments,
/// each in a cluster with probability q, over threads of the given lengths:
/// sum L q / sum (q + (L - 1) q (1 - q)).
double iid_cluster_size(std::span<const std::size_t> lengths, double q);

// ---------------------------------------------------------------------------
// Plain-text configuration (key = value, '#' comments)
//
//   model      = markov | iid
//   bin_width  = 0.1
//   states     = 0.05 0.95
//   transition = 0.9 0.1 ; 0.1 0.9
//   initial    = 0.5 0.5             (optional)
//   jitter     = true | false
//   marginal   = piecewise w0 w1 ... | beta w a b , w a b | atoms v:w v:w
//   threads    = 5000
//   length     = geometric 100 | fixed 50
//   coupling   = independent | shared
//   seed       = 42                  (optional)
//   id_prefix  = t

struct SynthSpec {
  enum class Kind { iid, markov };
  Kind kind = Kind::markov;
  Marginal marginal = AtomMarginal{{0.5}, {1.0}};
  MarkovModel model;
  GeneratorConfig config;
  bool seed_given = false;
};

SynthSpec parse_synth_config(std::istream& in);
SynthSpec load_synth_config(const std::filesystem::path& path);

Dataset generate(const SynthSpec& spec);

}  // namespace emoseq
