#include "emoseq/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "emoseq/correlations.hpp"
#include "emoseq/estimators.hpp"
#include "emoseq/ingest.hpp"
#include "emoseq/nullmodels.hpp"
#include "emoseq/synth.hpp"

namespace emoseq::cli {

namespace {

struct RunConfig {
  std::string input;
  std::string format;  // empty: inferred from the input extension
  std::string field;   // empty: the command's default field
  double bin_width = 0.1;
  std::string thresholds;
  std::string sub_cut = "0.5";
  std::uint64_t min_count = kDefaultMinCount;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::size_t bootstrap = 200;
  std::string log_base = "e";
  std::string averaging = "pooled";
  std::string config;
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return std::isnan(v) ? "NA" : format_double(v); }

// Bin edges, centers and thresholds, printed without accumulated binary noise.
std::string label(double v) { return num(std::round(v * 1e12) / 1e12); }

Format input_format(const RunConfig& rc) {
  return rc.format.empty() ? format_from_path(rc.input) : parse_format(rc.format);
}

Field field_or(const RunConfig& rc, Field fallback) { return rc.field.empty() ? fallback : parse_field(rc.field); }

Seed resolve_seed(const RunConfig& rc, std::ostream& err) {
  if (rc.seed) return Seed{*rc.seed};
  const Seed s = entropy_seed();
  err << "emoseq: no --seed given, using " << s.value << "\n";
  return s;
}

std::optional<double> resolve_sub_cut(const RunConfig& rc) {
  if (rc.sub_cut == "none" || rc.sub_cut.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(rc.sub_cut, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != rc.sub_cut.size()) throw UsageError("--sub-cut must be a number in [0,1] or 'none'");
  if (!(v >= 0.0 && v <= 1.0)) throw UsageError("--sub-cut must lie in [0, 1]");
  return v;
}

// "a,b,c" or "start:step:stop".
std::vector<double> parse_thresholds(const std::string& text) {
  if (text.empty()) return default_threshold_grid();
  auto to_num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad threshold '" + s + "'");
    return v;
  };
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("--thresholds range must be start:step:stop");
    const double start = to_num(parts[0]), step = to_num(parts[1]), stop = to_num(parts[2]);
    if (!(step > 0.0)) throw UsageError("--thresholds step must be positive");
    for (long k = 0;; ++k) {
      const double t = start + static_cast<double>(k) * step;
      if (t > stop + 1e-9) break;
      grid.push_back(std::min(std::round(t * 1e12) / 1e12, 1.0));
    }
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) grid.push_back(to_num(p));
  }
  return grid;
}

Dataset load(const RunConfig& rc) {
  if (rc.input.empty()) throw UsageError("--input is required");
  return read_dataset(std::filesystem::path(rc.input), input_format(rc));
}

void header(std::ostream& os, const std::string& command, const RunConfig& rc, Field field) {
  os << "# emoseq " << command << " input=" << rc.input << " field=" << field_name(field)
     << " bin_width=" << num(rc.bin_width) << "\n";
}

// ---------------------------------------------------------------------------

void cmd_hist(const RunConfig& rc, std::ostream& os) {
  const Field field = field_or(rc, Field::positive);
  const BinSpec spec{rc.bin_width};
  const Dataset ds = load(rc);
  const Histogram h = histogram(ds, field, spec);
  const auto freq = h.frequencies();
  header(os, "hist", rc, field);
  os << "# comments=" << h.total << "\n";
  os << "bin_lo\tbin_hi\tbin_center\tcount\tfrequency\n";
  for (std::size_t b = 0; b < spec.bin_count(); ++b) {
    os << label(spec.lower_edge(b)) << '\t' << label(spec.upper_edge(b)) << '\t' << label(spec.center(b)) << '\t'
       << h.counts[b] << '\t' << num(freq[b]) << '\n';
  }
}

void cmd_means(const RunConfig& rc, std::ostream& os, std::ostream& err) {
  const Field field = field_or(rc, Field::positive);
  const BinSpec spec{rc.bin_width};
  const auto cut = resolve_sub_cut(rc);
  const Dataset ds = load(rc);
  const Seed seed = resolve_seed(rc, err);

  const ThreadMeans data = thread_means(ds, field, cut, spec);
  const ThreadMeans baseline = thread_means(iid_resample(ds, field, seed), field, cut, spec);
  const auto fd = data.histogram.frequencies();
  const auto fb = baseline.histogram.frequencies();

  header(os, "means", rc, field);
  os << "# seed=" << seed.value << " sub_cut=" << (cut ? num(*cut) : std::string("none")) << "\n";
  os << "# threads_data=" << data.means.size() << " excluded_data=" << data.excluded_threads
     << " threads_baseline=" << baseline.means.size() << " excluded_baseline=" << baseline.excluded_threads << "\n";
  os << "bin_center\tcount_data\tfreq_data\tcount_baseline\tfreq_baseline\n";
  for (std::size_t b = 0; b < spec.bin_count(); ++b) {
    os << label(spec.center(b)) << '\t' << data.histogram.counts[b] << '\t' << num(fd[b]) << '\t'
       << baseline.histogram.counts[b] << '\t' << num(fb[b]) << '\n';
  }
}

void cmd_clusters(const RunConfig& rc, std::ostream& os, std::ostream& err) {
  const Field field = field_or(rc, Field::subjective);
  const auto grid = parse_thresholds(rc.thresholds);
  ClusterAveraging averaging;
  if (rc.averaging == "pooled") averaging = ClusterAveraging::pooled;
  else if (rc.averaging == "per-thread" || rc.averaging == "per_thread") averaging = ClusterAveraging::per_thread;
  else throw UsageError("--averaging must be pooled or per-thread");

  const Dataset ds = load(rc);
  const Seed seed = resolve_seed(rc, err);
  const ClusterCurve data = cluster_curve(ds, grid, averaging, field);
  const ClusterCurve threads = cluster_curve(thread_shuffle(ds, derive_seed(seed, 1)), grid, averaging, field);
  const ClusterCurve global = cluster_curve(global_shuffle(ds, derive_seed(seed, 2)), grid, averaging, field);

  os << "# emoseq clusters input=" << rc.input << " field=" << field_name(field) << " averaging=" << rc.averaging
     << "\n";
  os << "# seed=" << seed.value << " (thread shuffle stream 1, global shuffle stream 2)\n";
  os << "T\tdata\tthread_shuffle\tglobal_shuffle\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << label(grid[k]) << '\t' << num(data.mean_sizes[k]) << '\t' << num(threads.mean_sizes[k]) << '\t'
       << num(global.mean_sizes[k]) << '\n';
  }
}

void cmd_pmi(const RunConfig& rc, std::ostream& os) {
  const Field field = field_or(rc, Field::subjective);
  const BinSpec spec{rc.bin_width};
  const LogBase base = parse_log_base(rc.log_base);
  const Dataset ds = load(rc);
  const PairCountMatrix pairs = pair_counts(ds, field, spec);
  if (pairs.total_pairs() == 0) throw EmptyResultError("no consecutive pairs in input; PMI undefined");
  const CorrelationMatrix pmi = pmi_matrix(correlation_ratio(pairs, rc.min_count), base);

  header(os, "pmi", rc, field);
  os << "# pairs=" << pairs.total_pairs() << " min_count=" << rc.min_count << " log_base=" << rc.log_base << "\n";
  os << "# rows: previous comment bin center; columns: next comment bin center; NA = masked\n";
  os << "x_prev";
  for (std::size_t j = 0; j < spec.bin_count(); ++j) os << '\t' << label(spec.center(j));
  os << '\n';
  for (std::size_t i = 0; i < spec.bin_count(); ++i) {
    os << label(spec.center(i));
    for (std::size_t j = 0; j < spec.bin_count(); ++j) {
      os << '\t' << (pmi.is_defined(i, j) ? num(pmi.at(i, j)) : std::string("NA"));
    }
    os << '\n';
  }
}

void cmd_mi(const RunConfig& rc, std::ostream& os, std::ostream& err) {
  const Field field = field_or(rc, Field::positive);
  const BinSpec spec{rc.bin_width};
  MiReportOptions options;
  options.base = parse_log_base(rc.log_base);
  options.bootstrap_replicates = rc.bootstrap;
  const Dataset ds = load(rc);
  options.seed = resolve_seed(rc, err);
  if (ds.comment_count() == 0 || pair_counts(ds, field, spec).total_pairs() == 0) {
    throw EmptyResultError("no consecutive pairs in input; mutual information undefined");
  }
  const MiReport report = mi_report(ds, field, spec, options);

  header(os, "mi", rc, field);
  os << "# seed=" << report.seed.value << " bootstrap=" << report.bootstrap_replicates
     << " log_base=" << rc.log_base << " ci=0.95\n";
  os << "condition\tplugin\tmiller_madow\tbootstrap_se\tci_low\tci_high\tpairs\n";
  for (const MiReportRow& row : report.rows) {
    os << row.condition << '\t' << num(row.estimate.plugin) << '\t' << num(row.estimate.miller_madow) << '\t'
       << num(row.bootstrap_se) << '\t' << num(row.ci_low) << '\t' << num(row.ci_high) << '\t'
       << row.estimate.total_pairs << '\n';
  }
}

void cmd_threestep(const RunConfig& rc, std::ostream& os, std::ostream& err) {
  const Field field = field_or(rc, Field::positive);
  const BinSpec spec{rc.bin_width};
  const Dataset ds = load(rc);
  ThreeStepOptions options;
  options.min_count = rc.min_count;
  const ThreeStepCurve curve = three_step(ds, field, spec, options);
  if (!curve.plus_available()) err << "emoseq: no pair of consecutive comments >= " << num(curve.top_cut) << "; C+ undefined\n";
  if (!curve.minus_available()) err << "emoseq: no pair of consecutive comments <= " << num(curve.bottom_cut) << "; C- undefined\n";

  header(os, "threestep", rc, field);
  os << "# top_cut=" << num(curve.top_cut) << " bottom_cut=" << num(curve.bottom_cut)
     << " reference_level=1 min_count=" << rc.min_count << "\n";
  os << "# plus_events=" << curve.plus_events << " minus_events=" << curve.minus_events
     << " triples=" << curve.triples << "\n";
  os << "bin_center\tc_plus\tc_minus\tplus_count\tminus_count\tmarginal_count\n";
  for (std::size_t b = 0; b < spec.bin_count(); ++b) {
    os << label(spec.center(b)) << '\t' << (curve.plus_defined[b] ? num(curve.c_plus[b]) : std::string("NA")) << '\t'
       << (curve.minus_defined[b] ? num(curve.c_minus[b]) : std::string("NA")) << '\t' << curve.plus_counts[b]
       << '\t' << curve.minus_counts[b] << '\t' << curve.marginal_counts[b] << '\n';
  }
}

void cmd_validate(const RunConfig& rc, std::ostream& os, int& exit_code) {
  const Dataset ds = load(rc);
  const ValidationReport report = validate(ds);
  os << "threads\t" << report.thread_count << "\ncomments\t" << report.comment_count << "\nviolations\t"
     << report.violations.size() << "\n";
  for (const Violation& v : report.violations) {
    os << violation_name(v.kind) << '\t' << v.thread_id << '\t' << v.comment_index << '\t' << v.detail << '\n';
  }
  exit_code = report.ok() ? 0 : 1;
}

void cmd_synth(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.config.empty()) throw UsageError("synth needs --config");
  SynthSpec spec = load_synth_config(rc.config);
  if (rc.seed) {
    spec.config.seed = Seed{*rc.seed};
  } else if (!spec.seed_given) {
    spec.config.seed = entropy_seed();
    err << "emoseq: no seed in config or --seed, using " << spec.config.seed.value << "\n";
  }
  const Dataset ds = generate(spec);
  const ValidationReport report = validate(ds);
  if (!report.ok()) throw std::logic_error("generated dataset failed validation");

  // Oracle summary goes to stdout, or to stderr when the dataset itself does.
  std::ostream& info = rc.output.empty() ? err : out;
  info << "# emoseq synth config=" << rc.config << " seed=" << spec.config.seed.value << "\n";
  info << "# threads=" << report.thread_count << " comments=" << report.comment_count << " violations=0\n";
  if (spec.kind == SynthSpec::Kind::markov) {
    const BinSpec& bins = spec.model.bins;
    info << "oracle\tmi_nats\t" << num(mi_oracle(spec.model)) << "\n";
    try {
      const ThreeStepOracle ts = threestep_oracle(spec.model);
      info << "oracle_threestep\tbin_center\tc_plus\tc_minus\n";
      for (std::size_t b = 0; b < bins.bin_count(); ++b) {
        if (std::isnan(ts.c_plus[b]) && std::isnan(ts.c_minus[b])) continue;
        info << "oracle_threestep\t" << label(bins.center(b)) << '\t' << num(ts.c_plus[b]) << '\t'
             << num(ts.c_minus[b]) << '\n';
      }
    } catch (const OracleError& e) {
      info << "oracle_threestep\tunavailable\t" << e.what() << "\n";
    }
  } else {
    info << "oracle\tmi_nats\t0\n";
  }

  const Format format = rc.format.empty() ? (rc.output.empty() ? Format::jsonl : format_from_path(rc.output))
                                          : parse_format(rc.format);
  if (rc.output.empty()) {
    write_dataset(ds, out, format);
  } else {
    write_dataset(ds, std::filesystem::path(rc.output), format);
  }
}

void add_common(CLI::App* sub, RunConfig& rc, bool thresholds, bool sub_cut, bool min_count, bool seed) {
  sub->add_option("--input,-i", rc.input, "Annotated comment file (jsonl or csv)")->required();
  sub->add_option("--format", rc.format, "jsonl | csv (default: from extension)");
  sub->add_option("--field", rc.field, "pos | sub");
  sub->add_option("--bin-width", rc.bin_width, "Bin width in (0,1]");
  sub->add_option("--output,-o", rc.output, "Write the table here instead of stdout");
  if (thresholds) sub->add_option("--thresholds", rc.thresholds, "T grid: a,b,c or start:step:stop");
  if (sub_cut) sub->add_option("--sub-cut", rc.sub_cut, "Keep comments with p_sub >= cut, or 'none'");
  if (min_count) sub->add_option("--min-count", rc.min_count, "Mask cells with fewer counts");
  if (seed) sub->add_option("--seed", rc.seed, "Seed for shuffles and resampling");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"emoseq: sequential emotion statistics for threaded comment data", "emoseq"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* hist = app.add_subcommand("hist", "Histogram of p_pos or p_sub");
  add_common(hist, rc, false, false, false, false);
  auto* means = app.add_subcommand("means", "Per-thread mean distribution with IID-resample baseline");
  add_common(means, rc, false, true, false, true);
  auto* clusters = app.add_subcommand("clusters", "Average cluster size <S(T)> for data and both shuffles");
  add_common(clusters, rc, true, false, false, true);
  clusters->add_option("--averaging", rc.averaging, "pooled | per-thread");
  auto* pmi = app.add_subcommand("pmi", "PMI matrix of consecutive-comment bins");
  add_common(pmi, rc, false, false, true, false);
  pmi->add_option("--log-base", rc.log_base, "e | 2 | 10");
  auto* mi = app.add_subcommand("mi", "Mutual information: no / thread / global shuffle");
  add_common(mi, rc, false, false, false, true);
  mi->add_option("--bootstrap", rc.bootstrap, "Bootstrap replicates per row");
  mi->add_option("--log-base", rc.log_base, "e | 2 | 10");
  auto* threestep = app.add_subcommand("threestep", "Three-step correlations C+ and C-");
  add_common(threestep, rc, false, false, true, false);
  auto* validate_cmd = app.add_subcommand("validate", "Report invariant violations");
  validate_cmd->add_option("--input,-i", rc.input)->required();
  validate_cmd->add_option("--format", rc.format);
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a config file");
  synth->add_option("--config,-c", rc.config, "Generator config file")->required();
  synth->add_option("--output,-o", rc.output, "Dataset destination (default stdout)");
  synth->add_option("--format", rc.format, "jsonl | csv");
  synth->add_option("--seed", rc.seed, "Overrides the config's seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  int exit_code = 0;
  try {
    std::ostringstream table;
    if (*synth) {
      cmd_synth(rc, out, err);
      return 0;
    }
    if (*hist) cmd_hist(rc, table);
    else if (*means) cmd_means(rc, table, err);
    else if (*clusters) cmd_clusters(rc, table, err);
    else if (*pmi) cmd_pmi(rc, table);
    else if (*mi) cmd_mi(rc, table, err);
    else if (*threestep) cmd_threestep(rc, table, err);
    else if (*validate_cmd) cmd_validate(rc, table, exit_code);

    if (rc.output.empty()) {
      out << table.str();
      out.flush();
    } else {
      std::ofstream file(rc.output, std::ios::binary | std::ios::trunc);
      if (!file) throw IngestError(IngestError::Kind::io, 0, "cannot open '" + rc.output + "' for writing");
      file << table.str();
      if (!file.flush()) throw IngestError(IngestError::Kind::io, 0, "write failure on '" + rc.output + "'");
    }
  } catch (const UsageError& e) {
    err << "emoseq: " << e.what() << "\n";
    return 64;
  } catch (const IngestError& e) {
    err << "emoseq: " << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    err << "emoseq: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace emoseq::cli
