#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specsim/builtin.hpp"
#include "specsim/spec_io.hpp"
#include "specsim/validate.hpp"

namespace specsim {

class UsageError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

enum class Truth { Finite, Stationary };

struct RunManifest {
  std::string command;  // simulate | validate | bench | demo
  std::string spec;     // built-in name
  std::string spec_file;
  int T = 128;
  int M = 21;
  int N = 50;
  std::optional<std::uint64_t> seed;
  int oversample = 1;
  std::vector<std::string> methods;  // empty: the spec's natural spectral method
  std::optional<int> burnin;
  int I = 100;
  std::vector<int> lags{0, 1, 2, 3, 5, 10};
  std::string out = ".";
  std::optional<Truth> truth;
  std::vector<int> bench_T{400, 800};
  std::vector<int> bench_M;  // empty: {M}
  int repeats = 3;
  int n_freq = 0;  // 0: automatic
};

inline std::string to_string(Truth t) { return t == Truth::Finite ? "finite" : "stationary"; }

inline Truth parse_truth(const std::string& s) {
  if (s == "finite") return Truth::Finite;
  if (s == "stationary") return Truth::Stationary;
  throw UsageError("--truth must be 'finite' or 'stationary'");
}

namespace cli_detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw UsageError(flag + " must not be empty");
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void apply_config_file(RunManifest& m, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  static const std::set<std::string> known{"command", "spec",  "spec_file", "T",       "M",       "N",
                                           "seed",    "I",     "lags",      "method",  "oversample",
                                           "burnin",  "out",   "truth",     "bench_T", "bench_M", "repeats",
                                           "n_freq"};
  try {
    for (const auto& [key, v] : j.items()) {
      if (!known.count(key)) throw UsageError("config file: unknown key '" + key + "'");
      if (key == "command") m.command = v.get<std::string>();
      else if (key == "spec") m.spec = v.get<std::string>();
      else if (key == "spec_file") m.spec_file = v.get<std::string>();
      else if (key == "T") m.T = v.get<int>();
      else if (key == "M") m.M = v.get<int>();
      else if (key == "N") m.N = v.get<int>();
      else if (key == "seed") m.seed = v.get<std::uint64_t>();
      else if (key == "I") m.I = v.get<int>();
      else if (key == "lags") m.lags = v.get<std::vector<int>>();
      else if (key == "method") m.methods = v.is_array() ? v.get<std::vector<std::string>>() : split_list(v.get<std::string>());
      else if (key == "oversample") m.oversample = v.get<int>();
      else if (key == "burnin") m.burnin = v.get<int>();
      else if (key == "out") m.out = v.get<std::string>();
      else if (key == "truth") m.truth = parse_truth(v.get<std::string>());
      else if (key == "bench_T") m.bench_T = v.get<std::vector<int>>();
      else if (key == "bench_M") m.bench_M = v.get<std::vector<int>>();
      else if (key == "repeats") m.repeats = v.get<int>();
      else if (key == "n_freq") m.n_freq = v.get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file: malformed value: " + std::string(e.what()));
  }
}

inline void check_manifest(const RunManifest& m) {
  static const std::set<std::string> commands{"simulate", "validate", "bench", "demo"};
  if (!commands.count(m.command)) throw UsageError("command must be one of simulate, validate, bench, demo");
  if (m.spec.empty() && m.spec_file.empty()) throw UsageError("a spec is required (--spec or --spec-file)");
  if (!m.spec.empty() && !m.spec_file.empty()) throw UsageError("--spec and --spec-file are mutually exclusive");
  if (!m.spec.empty()) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), m.spec) == names.end())
      throw UsageError("unknown built-in spec '" + m.spec + "'");
  }
  if (!m.spec_file.empty() && !std::filesystem::exists(m.spec_file))
    throw UsageError("spec file '" + m.spec_file + "' does not exist");
  if (m.T < 2 || m.T % 2 != 0) throw UsageError("T must be even (got " + std::to_string(m.T) + ")");
  if (m.M < 2) throw UsageError("M must be >= 2");
  if (m.N < 1) throw UsageError("N must be >= 1");
  if (m.I < 1) throw UsageError("I must be >= 1");
  if (m.oversample < 1) throw UsageError("oversample must be >= 1");
  if (m.burnin && *m.burnin < 0) throw UsageError("burnin must be >= 0");
  if (m.repeats < 1) throw UsageError("repeats must be >= 1");
  if (m.lags.empty()) throw UsageError("lags must not be empty");
  for (int h : m.lags)
    if (h < 0 || h >= m.T) throw UsageError("lags must lie in [0, T)");
  for (int t : m.bench_T)
    if (t < 2 || t % 2 != 0) throw UsageError("T must be even (bench list has " + std::to_string(t) + ")");
  for (int mm : m.bench_M)
    if (mm < 2) throw UsageError("bench M values must be >= 2");
  for (const auto& s : m.methods) {
    try {
      parse_method(s);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
}

}  // namespace cli_detail

/// Parses `command [flags]`. Values from --config are applied first, flags override them.
inline RunManifest parse_manifest(const std::vector<std::string>& args,
                                  const std::optional<std::string>& config_file = std::nullopt) {
  CLI::App app{"Gaussian functional time series simulator", "specsim"};
  app.set_help_flag();
  std::string command, spec, spec_file, method, lags, out, truth, config, bench_T, bench_M;
  int T = 0, M = 0, N = 0, I = 0, oversample = 0, burnin = 0, repeats = 0, n_freq = 0;
  std::uint64_t seed = 0;
  app.add_option("command", command)->required();
  auto* o_spec = app.add_option("--spec", spec);
  auto* o_spec_file = app.add_option("--spec-file", spec_file);
  auto* o_T = app.add_option("--T", T);
  auto* o_M = app.add_option("--M", M);
  auto* o_N = app.add_option("--N", N);
  auto* o_seed = app.add_option("--seed", seed);
  auto* o_I = app.add_option("--I", I);
  auto* o_lags = app.add_option("--lags", lags);
  auto* o_method = app.add_option("--method", method);
  auto* o_oversample = app.add_option("--oversample", oversample);
  auto* o_burnin = app.add_option("--burnin", burnin);
  auto* o_out = app.add_option("--out", out);
  auto* o_truth = app.add_option("--truth", truth);
  auto* o_config = app.add_option("--config", config);
  auto* o_bench_T = app.add_option("--bench-T", bench_T);
  auto* o_bench_M = app.add_option("--bench-M", bench_M);
  auto* o_repeats = app.add_option("--repeats", repeats);
  auto* o_n_freq = app.add_option("--n-freq", n_freq);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunManifest m;
  if (config_file) cli_detail::apply_config_file(m, *config_file);
  if (o_config->count()) cli_detail::apply_config_file(m, config);
  m.command = command;
  if (o_spec->count()) m.spec = spec, m.spec_file.clear();
  if (o_spec_file->count()) m.spec_file = spec_file, m.spec.clear();
  if (o_spec->count() && o_spec_file->count()) throw UsageError("--spec and --spec-file are mutually exclusive");
  if (o_T->count()) m.T = T;
  if (o_M->count()) m.M = M;
  if (o_N->count()) m.N = N;
  if (o_seed->count()) m.seed = seed;
  if (o_I->count()) m.I = I;
  if (o_lags->count()) m.lags = cli_detail::parse_int_list(lags, "--lags");
  if (o_method->count()) m.methods = cli_detail::split_list(method);
  if (o_oversample->count()) m.oversample = oversample;
  if (o_burnin->count()) m.burnin = burnin;
  if (o_out->count()) m.out = out;
  if (o_truth->count()) m.truth = parse_truth(truth);
  if (o_bench_T->count()) m.bench_T = cli_detail::parse_int_list(bench_T, "--bench-T");
  if (o_bench_M->count()) m.bench_M = cli_detail::parse_int_list(bench_M, "--bench-M");
  if (o_repeats->count()) m.repeats = repeats;
  if (o_n_freq->count()) m.n_freq = n_freq;
  cli_detail::check_manifest(m);
  return m;
}

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  if (!m.spec.empty()) j["spec"] = m.spec;
  if (!m.spec_file.empty()) j["spec_file"] = m.spec_file;
  j["T"] = m.T;
  j["M"] = m.M;
  j["N"] = m.N;
  if (m.seed) j["seed"] = *m.seed;
  j["I"] = m.I;
  j["lags"] = m.lags;
  j["method"] = m.methods;
  j["oversample"] = m.oversample;
  if (m.burnin) j["burnin"] = *m.burnin;
  j["out"] = m.out;
  if (m.truth) j["truth"] = to_string(*m.truth);
  j["bench_T"] = m.bench_T;
  if (!m.bench_M.empty()) j["bench_M"] = m.bench_M;
  j["repeats"] = m.repeats;
  if (m.n_freq > 0) j["n_freq"] = m.n_freq;
  return j;
}

namespace cli_detail {

struct Variant {
  std::string label;
  SpectralDensitySpec spec;
  Method method;
  int N;
};

inline SpectralDensitySpec resolve_spec(const RunManifest& m) {
  return m.spec_file.empty() ? builtin_spec(m.spec) : load_spec_file(m.spec_file);
}

inline SimConfig make_config(const RunManifest& m, Method method, int N) {
  SimConfig c;
  c.T = m.T;
  c.M = m.M;
  c.N = N;
  c.seed = *m.seed;
  c.oversample = m.oversample;
  c.method = method;
  c.burnin = m.burnin;
  return c;
}

inline std::vector<Method> resolve_methods(const RunManifest& m, const SpectralDensitySpec& spec) {
  if (m.methods.empty()) return {default_method(spec)};
  std::vector<Method> out;
  for (const auto& s : m.methods) out.push_back(parse_method(s));
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline std::string sample_csv(const FtsSample& s) {
  std::string out = "t";
  for (int m = 0; m < s.grid.M; ++m) out += "," + format_double(s.grid.points[m]);
  out += "\n";
  for (int t = 0; t < s.T(); ++t) {
    out += std::to_string(t + 1);
    for (int m = 0; m < s.grid.M; ++m) out += "," + format_double(s.values(t, m));
    out += "\n";
  }
  return out;
}

inline int default_n_freq(const RunManifest& m) { return m.n_freq > 0 ? m.n_freq : std::max(4096, 8 * m.T); }

/// The comparison target: the exact covariance of the length-T spectral construction, or the
/// stationary autocovariance by quadrature.
inline AutocovSet truth_for(const RunManifest& m, const SpectralDensitySpec& spec, Truth truth, int N,
                            const Grid& grid, std::vector<int> lags) {
  if (std::find(lags.begin(), lags.end(), 0) == lags.end()) lags.push_back(0);
  lags = normalize_lags(lags);
  if (truth == Truth::Finite) return make_autocov_set(lags, finite_T_target_covariances(spec, lags, grid, m.T, N));
  return make_autocov_set(lags, true_autocovariances(spec, lags, grid, default_n_freq(m), std::max(N, 1000)));
}

inline Truth default_truth(const std::vector<Method>& methods) {
  for (Method me : methods)
    if (me == Method::FarfimaHybrid || me == Method::Temporal) return Truth::Stationary;
  return Truth::Finite;
}

inline std::string accuracy_rows(const std::vector<int>& lags, const std::vector<double>& err, const std::string& label) {
  std::string out;
  for (std::size_t i = 0; i < lags.size(); ++i)
    out += std::to_string(lags[i]) + "," + format_double(err[i]) + "," + label + "\n";
  return out;
}

inline std::vector<Variant> demo_variants(const RunManifest& m) {
  const std::string base = m.spec.empty() ? "" : m.spec;
  if (base == "example1" || base == "example1-kernel") {
    std::vector<Variant> v;
    for (int N : {1, 3, 10, 50}) v.push_back({"ckl-N" + std::to_string(N), example1_ckl(), Method::Ckl, N});
    return v;
  }
  if (base == "example2" || base == "example2-svd" || base == "example3" || base == "example3-svd") {
    const bool two = base.rfind("example2", 0) == 0;
    const auto series = two ? example2_farfima(NoiseForm::Series) : example3_farma(NoiseForm::Series);
    const auto svd = two ? example2_farfima(NoiseForm::Kernel) : example3_farma(NoiseForm::Kernel);
    return {
        {"spectral-bm", series, Method::FarfimaSpectral, m.N}, {"hybrid-bm", series, Method::FarfimaHybrid, m.N},
        {"spectral-svd", svd, Method::FarfimaSpectral, m.N},   {"hybrid-svd", svd, Method::FarfimaHybrid, m.N},
        {"temporal", series, Method::Temporal, m.N},
    };
  }
  throw UsageError("demo needs --spec example1, example2 or example3");
}

}  // namespace cli_detail

/// Executes a manifest. Artifacts go to m.out; progress lines go to `log`.
inline int run(RunManifest m, std::ostream& log) {
  using namespace cli_detail;
  namespace fs = std::filesystem;
  if (!m.seed) m.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
  fs::create_directories(m.out);
  const fs::path out(m.out);
  const Grid grid = make_grid(m.M);

  if (m.command == "simulate") {
    const SpectralDensitySpec spec = resolve_spec(m);
    const auto methods = resolve_methods(m, spec);
    if (methods.size() != 1) throw UsageError("simulate takes a single --method");
    const FtsSample s = simulate(spec, make_config(m, methods.front(), m.N), grid);
    write_file(out / "sample.csv", sample_csv(s));
    log << "wrote " << (out / "sample.csv").string() << " (" << s.T() << " x " << s.grid.M << ")\n";
  } else if (m.command == "validate") {
    const SpectralDensitySpec spec = resolve_spec(m);
    const auto methods = resolve_methods(m, spec);
    const Truth truth = m.truth.value_or(default_truth(methods));
    const auto lags = normalize_lags(m.lags);
    const AutocovSet target = truth_for(m, spec, truth, m.N, grid, lags);
    std::string csv = "h,rel_error,method\n";
    for (Method me : methods) {
      const AutocovSet avg = monte_carlo_autocov(spec, make_config(m, me, m.N), grid, lags, m.I);
      csv += accuracy_rows(lags, relative_error(avg, target), to_string(me));
    }
    write_file(out / "accuracy.csv", csv);
    log << "wrote " << (out / "accuracy.csv").string() << "\n";
  } else if (m.command == "bench") {
    const SpectralDensitySpec spec = resolve_spec(m);
    const auto methods = resolve_methods(m, spec);
    const std::vector<int> Ms = m.bench_M.empty() ? std::vector<int>{m.M} : m.bench_M;
    const auto records = run_benchmark(spec, methods, m.bench_T, Ms, m.N, m.repeats, *m.seed);
    std::string csv = "method,T,M,N,seconds\n";
    for (const auto& r : records)
      csv += to_string(r.method) + "," + std::to_string(r.T) + "," + std::to_string(r.M) + "," + std::to_string(r.N) +
             "," + format_double(r.seconds) + "\n";
    write_file(out / "bench.csv", csv);
    log << "wrote " << (out / "bench.csv").string() << "\n";
  } else if (m.command == "demo") {
    const auto variants = demo_variants(m);
    const auto lags = normalize_lags(m.lags);
    const Truth truth = m.truth.value_or(Truth::Stationary);
    std::string csv = "h,rel_error,method\n";
    std::optional<AutocovSet> shared;
    for (const auto& v : variants) {
      // the example1 table varies N, so its finite-T target does too
      const bool per_variant = truth == Truth::Finite;
      if (per_variant || !shared) shared = truth_for(m, variants.front().spec, truth, v.N, grid, lags);
      const AutocovSet avg = monte_carlo_autocov(v.spec, make_config(m, v.method, v.N), grid, lags, m.I);
      const auto err = relative_error(avg, *shared);
      csv += accuracy_rows(lags, err, v.label);
      log << v.label << ": rel.error(0) = " << format_double(err.front()) << "\n";
    }
    write_file(out / "accuracy.csv", csv);
    log << "wrote " << (out / "accuracy.csv").string() << "\n";
  }
  write_file(out / "manifest.json", manifest_json(m).dump(2) + "\n");
  return 0;
}

/// Entry point shared by the executable and the tests: 0 success, 1 runtime error, 2 usage error.
inline int cli_main(const std::vector<std::string>& args, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  RunManifest m;
  try {
    const bool help = std::find(args.begin(), args.end(), "--help") != args.end() ||
                      std::find(args.begin(), args.end(), "-h") != args.end();
    if (args.empty() || help) {
      err << "usage: specsim <simulate|validate|bench|demo> (--spec NAME | --spec-file PATH) [--T n] [--M n] [--N n]\n"
             "       [--seed s] [--I n] [--lags a,b,..] [--method m[,m..]] [--oversample k] [--burnin n]\n"
             "       [--out DIR] [--config FILE] [--truth finite|stationary] [--bench-T a,b] [--bench-M a,b]\n"
             "       [--repeats n] [--n-freq n]\n";
      return args.empty() ? 2 : 0;
    }
    m = parse_manifest(args);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  try {
    return run(m, log);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace specsim
