#include "emoseq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include <boost/math/special_functions/beta.hpp>

namespace emoseq {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kCutSlack = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> normalized(std::span<const double> w) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> out(w.begin(), w.end());
  for (double& x : out) x /= sum;
  return out;
}

void check_weights(std::span<const double> w, const char* what) {
  if (w.empty()) throw std::invalid_argument(std::string(what) + ": no weights");
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": negative or non-finite weight");
    sum += x;
  }
  if (!(sum > 0.0)) throw std::invalid_argument(std::string(what) + ": weights sum to zero");
}

// Index drawn from a normalized probability vector by inversion.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the last partial sum
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

double sample_normal(Rng& rng) {
  const double u1 = rng.uniform_open_low();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Emitted-value range of a state: [lo, hi) with jitter, the point itself otherwise.
struct Emission {
  double lo;
  double hi;
};

Emission emission_of(const MarkovModel& model, std::size_t state) {
  const double s = model.states[state];
  if (!model.jitter) return {s, s};
  const std::size_t b = model.bins.bin_of(s);
  return {model.bins.lower_edge(b), model.bins.upper_edge(b)};
}

double emit(const MarkovModel& model, std::size_t state, Rng& rng) {
  if (!model.jitter) return model.states[state];
  const Emission e = emission_of(model, state);
  return e.lo + rng.uniform01() * (e.hi - e.lo);
}

}  // namespace

// ---------------------------------------------------------------------------

PiecewiseMarginal marginal_from_histogram(const Histogram& h) {
  PiecewiseMarginal m{h.spec, {}};
  m.weights.assign(h.counts.begin(), h.counts.end());
  return m;
}

void check_marginal(const Marginal& m) {
  std::visit(overloaded{
                 [](const PiecewiseMarginal& p) {
                   check_weights(p.weights, "piecewise marginal");
                   if (p.weights.size() != p.spec.bin_count()) {
                     throw std::invalid_argument("piecewise marginal: expected " +
                                                 std::to_string(p.spec.bin_count()) + " weights");
                   }
                 },
                 [](const BetaMixture& b) {
                   std::vector<double> w;
                   for (const auto& c : b.components) {
                     if (!(c.alpha > 0.0 && c.beta > 0.0)) {
                       throw std::invalid_argument("beta mixture: alpha and beta must be positive");
                     }
                     w.push_back(c.weight);
                   }
                   check_weights(w, "beta mixture");
                 },
                 [](const AtomMarginal& a) {
                   check_weights(a.weights, "atom marginal");
                   if (a.values.size() != a.weights.size()) {
                     throw std::invalid_argument("atom marginal: values and weights differ in length");
                   }
                   for (double v : a.values) {
                     if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("atom marginal: value outside [0,1]");
                   }
                 },
             },
             m);
}

std::vector<double> bin_masses(const Marginal& m, const BinSpec& spec) {
  check_marginal(m);
  const std::size_t nb = spec.bin_count();
  std::vector<double> mass(nb, 0.0);
  std::visit(overloaded{
                 [&](const PiecewiseMarginal& p) {
                   const auto w = normalized(p.weights);
                   for (std::size_t s = 0; s < w.size(); ++s) {
                     const double lo = p.spec.lower_edge(s), hi = p.spec.upper_edge(s);
                     for (std::size_t b = 0; b < nb; ++b) {
                       const double overlap = std::min(hi, spec.upper_edge(b)) - std::max(lo, spec.lower_edge(b));
                       if (overlap > 0.0) mass[b] += w[s] * overlap / (hi - lo);
                     }
                   }
                 },
                 [&](const BetaMixture& mix) {
                   std::vector<double> raw;
                   for (const auto& c : mix.components) raw.push_back(c.weight);
                   const auto w = normalized(raw);
                   for (std::size_t k = 0; k < w.size(); ++k) {
                     const auto& c = mix.components[k];
                     for (std::size_t b = 0; b < nb; ++b) {
                       const double hi = boost::math::ibeta(c.alpha, c.beta, spec.upper_edge(b));
                       const double lo = boost::math::ibeta(c.alpha, c.beta, spec.lower_edge(b));
                       mass[b] += w[k] * (hi - lo);
                     }
                   }
                 },
                 [&](const AtomMarginal& a) {
                   const auto w = normalized(a.weights);
                   for (std::size_t k = 0; k < w.size(); ++k) mass[spec.bin_of(a.values[k])] += w[k];
                 },
             },
             m);
  return mass;
}

double survival(const Marginal& m, double threshold) {
  check_marginal(m);
  return std::visit(overloaded{
                        [&](const PiecewiseMarginal& p) {
                          const auto w = normalized(p.weights);
                          double s = 0.0;
                          for (std::size_t b = 0; b < w.size(); ++b) {
                            const double lo = p.spec.lower_edge(b), hi = p.spec.upper_edge(b);
                            const double above = std::clamp((hi - std::max(lo, threshold)) / (hi - lo), 0.0, 1.0);
                            s += w[b] * above;
                          }
                          return s;
                        },
                        [&](const BetaMixture& mix) {
                          std::vector<double> raw;
                          for (const auto& c : mix.components) raw.push_back(c.weight);
                          const auto w = normalized(raw);
                          double s = 0.0;
                          for (std::size_t k = 0; k < w.size(); ++k) {
                            const auto& c = mix.components[k];
                            s += w[k] * boost::math::ibetac(c.alpha, c.beta, std::clamp(threshold, 0.0, 1.0));
                          }
                          return s;
                        },
                        [&](const AtomMarginal& a) {
                          const auto w = normalized(a.weights);
                          double s = 0.0;
                          for (std::size_t k = 0; k < w.size(); ++k) {
                            if (a.values[k] >= threshold) s += w[k];
                          }
                          return s;
                        },
                    },
                    m);
}

double marginal_mean(const Marginal& m) {
  check_marginal(m);
  return std::visit(overloaded{
                        [](const PiecewiseMarginal& p) {
                          const auto w = normalized(p.weights);
                          double mean = 0.0;
                          for (std::size_t b = 0; b < w.size(); ++b) mean += w[b] * p.spec.center(b);
                          return mean;
                        },
                        [](const BetaMixture& mix) {
                          std::vector<double> raw;
                          for (const auto& c : mix.components) raw.push_back(c.weight);
                          const auto w = normalized(raw);
                          double mean = 0.0;
                          for (std::size_t k = 0; k < w.size(); ++k) {
                            const auto& c = mix.components[k];
                            mean += w[k] * c.alpha / (c.alpha + c.beta);
                          }
                          return mean;
                        },
                        [](const AtomMarginal& a) {
                          const auto w = normalized(a.weights);
                          double mean = 0.0;
                          for (std::size_t k = 0; k < w.size(); ++k) mean += w[k] * a.values[k];
                          return mean;
                        },
                    },
                    m);
}

double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double boost = std::pow(rng.uniform_open_low(), 1.0 / shape);
    return sample_gamma(shape + 1.0, rng) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open_low();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double sample_beta(double alpha, double beta, Rng& rng) {
  const double x = sample_gamma(alpha, rng);
  const double y = sample_gamma(beta, rng);
  const double s = x + y;
  // both gamma draws can underflow to 0 for tiny shapes; fall back to the mean
  if (!(s > 0.0)) return alpha / (alpha + beta);
  return std::clamp(x / s, 0.0, 1.0);
}

namespace {

// Marginal with normalized weights, so the hot sampling loop skips renormalizing.
struct PreparedMarginal {
  const Marginal* source;
  std::vector<double> probs;
};

PreparedMarginal prepare(const Marginal& m) {
  check_marginal(m);
  PreparedMarginal p{&m, {}};
  std::visit(overloaded{
                 [&](const PiecewiseMarginal& pm) { p.probs = normalized(pm.weights); },
                 [&](const BetaMixture& mix) {
                   std::vector<double> raw;
                   for (const auto& c : mix.components) raw.push_back(c.weight);
                   p.probs = normalized(raw);
                 },
                 [&](const AtomMarginal& a) { p.probs = normalized(a.weights); },
             },
             m);
  return p;
}

double sample_prepared(const PreparedMarginal& p, Rng& rng) {
  const std::size_t k = sample_categorical(p.probs, rng);
  return std::visit(overloaded{
                        [&](const PiecewiseMarginal& pm) {
                          const double lo = pm.spec.lower_edge(k), hi = pm.spec.upper_edge(k);
                          return lo + rng.uniform01() * (hi - lo);
                        },
                        [&](const BetaMixture& mix) {
                          return sample_beta(mix.components[k].alpha, mix.components[k].beta, rng);
                        },
                        [&](const AtomMarginal& a) { return a.values[k]; },
                    },
                    *p.source);
}

}  // namespace

double sample(const Marginal& m, Rng& rng) { return sample_prepared(prepare(m), rng); }

// ---------------------------------------------------------------------------

void MarkovModel::validate() const {
  const std::size_t n = size();
  if (n == 0) throw std::invalid_argument("Markov model has no states");
  if (transition.size() != n * n) {
    throw std::invalid_argument("transition matrix must be " + std::to_string(n) + " x " + std::to_string(n));
  }
  for (double s : states) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("state value outside [0, 1]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("transition entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
      throw std::invalid_argument("transition row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
  if (initial) {
    if (initial->size() != n) throw std::invalid_argument("initial distribution has wrong length");
    double sum = 0.0;
    for (double v : *initial) {
      if (!(v >= 0.0)) throw std::invalid_argument("initial distribution has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) throw std::invalid_argument("initial distribution does not sum to 1");
  }
}

MarkovModel two_state_chain(double stay, const BinSpec& bins) {
  MarkovModel m;
  m.bins = bins;
  m.states = {bins.center(0), bins.center(bins.bin_count() - 1)};
  m.transition = {stay, 1.0 - stay, 1.0 - stay, stay};
  return m;
}

bool is_irreducible(const MarkovModel& model) {
  const std::size_t n = model.size();
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> todo;
    todo.push(start);
    seen[start] = true;
    std::size_t reached = 1;
    while (!todo.empty()) {
      const std::size_t i = todo.front();
      todo.pop();
      for (std::size_t j = 0; j < n; ++j) {
        if (!seen[j] && model.p(i, j) > 0.0) {
          seen[j] = true;
          ++reached;
          todo.push(j);
        }
      }
    }
    if (reached != n) return false;
  }
  return true;
}

std::vector<double> stationary_distribution(const MarkovModel& model) {
  model.validate();
  if (!is_irreducible(model)) throw OracleError("chain is reducible; stationary distribution is not unique");
  const std::size_t n = model.size();
  // Rows of (P^T - I), with the last replaced by the normalization sum(pi) = 1.
  std::vector<double> a(n * (n + 1), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r * (n + 1) + c] = model.p(c, r) - (r == c ? 1.0 : 0.0);
  }
  for (std::size_t c = 0; c < n; ++c) a[(n - 1) * (n + 1) + c] = 1.0;
  a[(n - 1) * (n + 1) + n] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * (n + 1) + col]) > std::abs(a[pivot * (n + 1) + col])) pivot = r;
    }
    if (pivot != col) {
      for (std::size_t c = 0; c <= n; ++c) std::swap(a[col * (n + 1) + c], a[pivot * (n + 1) + c]);
    }
    const double d = a[col * (n + 1) + col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * (n + 1) + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) a[r * (n + 1) + c] -= f * a[col * (n + 1) + c];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, a[i * (n + 1) + n] / a[i * (n + 1) + i]);
  const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= sum;
  return pi;
}

std::vector<double> oracle_state_law(const MarkovModel& model) {
  model.validate();
  if (is_irreducible(model)) return stationary_distribution(model);
  if (!model.initial) throw OracleError("reducible chain without an initial distribution has no unique marginal");
  const std::size_t n = model.size();
  const auto& init = *model.initial;
  for (std::size_t j = 0; j < n; ++j) {
    double next = 0.0;
    for (std::size_t i = 0; i < n; ++i) next += init[i] * model.p(i, j);
    if (std::abs(next - init[j]) > 1e-12) {
      throw OracleError("reducible chain: initial distribution is not invariant under the transition matrix");
    }
  }
  return init;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> draw_thread_lengths(const GeneratorConfig& config) {
  if (config.thread_count == 0) throw std::invalid_argument("generator needs at least one thread");
  std::vector<std::size_t> lengths(config.thread_count);
  if (config.length.kind == LengthLaw::Kind::fixed) {
    const double n = std::round(config.length.value);
    if (!(n >= 1.0)) throw std::invalid_argument("fixed thread length must be >= 1");
    std::fill(lengths.begin(), lengths.end(), static_cast<std::size_t>(n));
    return lengths;
  }
  const double mean = config.length.value;
  if (!(mean >= 1.0)) throw std::invalid_argument("geometric mean thread length must be >= 1");
  if (mean == 1.0) {
    std::fill(lengths.begin(), lengths.end(), 1);
    return lengths;
  }
  const double log_fail = std::log1p(-1.0 / mean);
  Rng rng(derive_seed(config.seed, 0));
  for (auto& len : lengths) {
    len = 1 + static_cast<std::size_t>(std::floor(std::log(rng.uniform_open_low()) / log_fail));
  }
  return lengths;
}

namespace {

template <typename FillThread>
Dataset generate_threads(const GeneratorConfig& config, FillThread&& fill) {
  const auto lengths = draw_thread_lengths(config);
  Dataset ds;
  ds.source_label = "synthetic";
  ds.threads.resize(lengths.size());
  const auto n = static_cast<std::ptrdiff_t>(lengths.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    Thread& thread = ds.threads[t];
    thread.thread_id = config.id_prefix + std::to_string(t);
    thread.comments.resize(lengths[t]);
    for (std::size_t i = 0; i < lengths[t]; ++i) thread.comments[i].index = i;
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t) + 1));
    fill(thread, rng);
  }
  return ds;
}

}  // namespace

Dataset generate_iid(const Marginal& marginal, const GeneratorConfig& config) {
  const PreparedMarginal prepared = prepare(marginal);
  return generate_threads(config, [&](Thread& thread, Rng& rng) {
    for (Comment& c : thread.comments) c.p_pos = sample_prepared(prepared, rng);
    for (Comment& c : thread.comments) {
      c.p_sub = config.coupling == Coupling::shared ? c.p_pos : sample_prepared(prepared, rng);
    }
  });
}

Dataset generate_markov(const MarkovModel& model, const GeneratorConfig& config) {
  model.validate();
  const std::size_t n = model.size();
  const std::vector<double> start = model.initial ? *model.initial : stationary_distribution(model);

  auto run_chain = [&](Thread& thread, Rng& rng, bool positive) {
    std::size_t state = sample_categorical(start, rng);
    for (std::size_t i = 0; i < thread.comments.size(); ++i) {
      if (i > 0) state = sample_categorical(std::span<const double>(model.transition.data() + state * n, n), rng);
      (positive ? thread.comments[i].p_pos : thread.comments[i].p_sub) = emit(model, state, rng);
    }
  };
  return generate_threads(config, [&](Thread& thread, Rng& rng) {
    run_chain(thread, rng, true);
    if (config.coupling == Coupling::shared) {
      for (Comment& c : thread.comments) c.p_sub = c.p_pos;
    } else {
      run_chain(thread, rng, false);
    }
  });
}

// ---------------------------------------------------------------------------

std::vector<double> binned_joint(const MarkovModel& model) {
  const auto pi = oracle_state_law(model);
  const std::size_t n = model.size();
  const std::size_t nb = model.bins.bin_count();
  std::vector<double> joint(nb * nb, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t ba = model.bins.bin_of(model.states[a]);
    for (std::size_t b = 0; b < n; ++b) {
      joint[ba * nb + model.bins.bin_of(model.states[b])] += pi[a] * model.p(a, b);
    }
  }
  return joint;
}

namespace {

void joint_marginals(const std::vector<double>& joint, std::size_t nb, std::vector<double>& rows,
                     std::vector<double>& cols) {
  rows.assign(nb, 0.0);
  cols.assign(nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      rows[i] += joint[i * nb + j];
      cols[j] += joint[i * nb + j];
    }
  }
}

}  // namespace

std::vector<double> correlation_ratio_oracle(const MarkovModel& model) {
  const auto joint = binned_joint(model);
  const std::size_t nb = model.bins.bin_count();
  std::vector<double> rows, cols;
  joint_marginals(joint, nb, rows, cols);
  std::vector<double> c(nb * nb, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (rows[i] > 0.0 && cols[j] > 0.0) c[i * nb + j] = joint[i * nb + j] / (rows[i] * cols[j]);
    }
  }
  return c;
}

double mi_oracle(const MarkovModel& model, LogBase base) {
  const auto joint = binned_joint(model);
  const std::size_t nb = model.bins.bin_count();
  std::vector<double> rows, cols;
  joint_marginals(joint, nb, rows, cols);
  double mi = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double p = joint[i * nb + j];
      if (p > 0.0) mi += p * std::log(p / (rows[i] * cols[j]));
    }
  }
  return std::max(0.0, mi) / ln_of_base(base);
}

ThreeStepOracle threestep_oracle(const MarkovModel& model, double top_cut, double bottom_cut) {
  const auto pi = oracle_state_law(model);
  const std::size_t n = model.size();
  const std::size_t nb = model.bins.bin_count();

  std::vector<bool> top(n), bottom(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Emission e = emission_of(model, s);
    if (e.lo >= top_cut - kCutSlack) {
      top[s] = true;
    } else if (!(e.hi <= top_cut + kCutSlack)) {
      throw OracleError("state " + std::to_string(s) + " emits values on both sides of the top cut");
    }
    if (e.hi <= bottom_cut + kCutSlack) {
      bottom[s] = true;
    } else if (!(e.lo >= bottom_cut - kCutSlack)) {
      throw OracleError("state " + std::to_string(s) + " emits values on both sides of the bottom cut");
    }
  }

  std::vector<double> bin_mass(nb, 0.0);
  for (std::size_t s = 0; s < n; ++s) bin_mass[model.bins.bin_of(model.states[s])] += pi[s];

  auto curve = [&](const std::vector<bool>& in_set) {
    std::vector<double> out(nb, std::numeric_limits<double>::quiet_NaN());
    double event_mass = 0.0;
    std::vector<double> next_mass(nb, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      if (!in_set[a]) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (!in_set[b]) continue;
        const double w = pi[a] * model.p(a, b);
        event_mass += w;
        for (std::size_t c = 0; c < n; ++c) next_mass[model.bins.bin_of(model.states[c])] += w * model.p(b, c);
      }
    }
    if (!(event_mass > 0.0)) return std::pair{out, false};
    for (std::size_t j = 0; j < nb; ++j) {
      if (bin_mass[j] > 0.0) out[j] = (next_mass[j] / event_mass) / bin_mass[j];
    }
    return std::pair{out, true};
  };

  auto [plus, plus_ok] = curve(top);
  auto [minus, minus_ok] = curve(bottom);
  if (!plus_ok && !minus_ok) throw OracleError("both conditioning sets have zero stationary mass");
  return {std::move(plus), std::move(minus)};
}

double iid_cluster_size(std::span<const std::size_t> lengths, double q) {
  double members = 0.0, runs = 0.0;
  for (std::size_t len : lengths) {
    if (len == 0) continue;
    const double l = static_cast<double>(len);
    members += l * q;
    runs += q + (l - 1.0) * q * (1.0 - q);
  }
  return runs > 0.0 ? members / runs : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace emoseq
