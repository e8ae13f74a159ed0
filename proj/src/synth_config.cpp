#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "emoseq/synth.hpp"

namespace emoseq {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void config_fail(std::size_t line, const std::string& msg) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& tok, std::size_t line) {
  double v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) config_fail(line, "not a number: '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<double> numbers(const std::string& s, std::size_t line) {
  std::vector<double> out;
  for (const auto& w : words(s)) out.push_back(to_double(w, line));
  return out;
}

bool to_bool(const std::string& s, std::size_t line) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  config_fail(line, "expected true or false, got '" + s + "'");
}

Marginal parse_marginal(const std::string& value, double bin_width, std::size_t line) {
  const auto pos = value.find_first_of(" \t");
  const std::string kind = value.substr(0, pos);
  const std::string rest = pos == std::string::npos ? std::string{} : trim(value.substr(pos));
  if (kind == "piecewise") {
    return PiecewiseMarginal{BinSpec{bin_width}, numbers(rest, line)};
  }
  if (kind == "beta") {
    BetaMixture mix;
    for (const auto& part : split(rest, ',')) {
      const auto v = numbers(part, line);
      if (v.size() != 3) config_fail(line, "beta component needs 'weight alpha beta'");
      mix.components.push_back({v[0], v[1], v[2]});
    }
    return mix;
  }
  if (kind == "atoms") {
    AtomMarginal atoms;
    for (const auto& w : words(rest)) {
      const auto colon = w.find(':');
      if (colon == std::string::npos) config_fail(line, "atom must be value:weight, got '" + w + "'");
      atoms.values.push_back(to_double(w.substr(0, colon), line));
      atoms.weights.push_back(to_double(w.substr(colon + 1), line));
    }
    return atoms;
  }
  config_fail(line, "unknown marginal kind '" + kind + "'");
}

}  // namespace

SynthSpec parse_synth_config(std::istream& in) {
  SynthSpec spec;
  double bin_width = 0.1;
  std::string marginal_text;
  std::size_t marginal_line = 0;
  bool have_transition = false;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) config_fail(line, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));

    if (key == "model") {
      if (value == "markov") spec.kind = SynthSpec::Kind::markov;
      else if (value == "iid") spec.kind = SynthSpec::Kind::iid;
      else config_fail(line, "model must be markov or iid");
    } else if (key == "bin_width") {
      bin_width = to_double(value, line);
    } else if (key == "states") {
      spec.model.states = numbers(value, line);
    } else if (key == "transition") {
      spec.model.transition.clear();
      for (const auto& row : split(value, ';')) {
        const auto v = numbers(row, line);
        spec.model.transition.insert(spec.model.transition.end(), v.begin(), v.end());
      }
      have_transition = true;
    } else if (key == "initial") {
      spec.model.initial = numbers(value, line);
    } else if (key == "jitter") {
      spec.model.jitter = to_bool(value, line);
    } else if (key == "marginal") {
      marginal_text = value;
      marginal_line = line;
    } else if (key == "threads") {
      const double n = to_double(value, line);
      if (!(n >= 1.0)) config_fail(line, "threads must be >= 1");
      spec.config.thread_count = static_cast<std::size_t>(n);
    } else if (key == "length") {
      const auto w = words(value);
      if (w.size() != 2) config_fail(line, "length must be 'geometric <mean>' or 'fixed <n>'");
      if (w[0] == "geometric") spec.config.length.kind = LengthLaw::Kind::geometric;
      else if (w[0] == "fixed") spec.config.length.kind = LengthLaw::Kind::fixed;
      else config_fail(line, "unknown length law '" + w[0] + "'");
      spec.config.length.value = to_double(w[1], line);
    } else if (key == "coupling") {
      if (value == "independent") spec.config.coupling = Coupling::independent;
      else if (value == "shared") spec.config.coupling = Coupling::shared;
      else config_fail(line, "coupling must be independent or shared");
    } else if (key == "seed") {
      std::uint64_t s{};
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
      if (ec != std::errc{} || ptr != value.data() + value.size()) config_fail(line, "seed must be an unsigned integer");
      spec.config.seed = Seed{s};
      spec.seed_given = true;
    } else if (key == "id_prefix") {
      spec.config.id_prefix = value;
    } else {
      config_fail(line, "unknown key '" + key + "'");
    }
  }

  try {
    spec.model.bins = BinSpec{bin_width};
  } catch (const DomainError& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (spec.kind == SynthSpec::Kind::markov) {
    if (spec.model.states.empty() || !have_transition) {
      throw std::invalid_argument("config: markov model needs states and transition");
    }
    spec.model.validate();
  } else {
    if (marginal_text.empty()) throw std::invalid_argument("config: iid model needs a marginal");
    spec.marginal = parse_marginal(marginal_text, bin_width, marginal_line);
    check_marginal(spec.marginal);
  }
  return spec;
}

SynthSpec load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path.string() + "'");
  return parse_synth_config(in);
}

Dataset generate(const SynthSpec& spec) {
  return spec.kind == SynthSpec::Kind::markov ? generate_markov(spec.model, spec.config)
                                              : generate_iid(spec.marginal, spec.config);
}

}  // namespace emoseq
