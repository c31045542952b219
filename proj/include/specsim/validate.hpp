#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specsim/errors.hpp"
#include "specsim/grid.hpp"
#include "specsim/linalg.hpp"
#include "specsim/parallel.hpp"
#include "specsim/random.hpp"
#include "specsim/simulate.hpp"

namespace specsim {

/// Per-lag M x M kernel matrices on a shared grid; lags ascending.
struct AutocovSet {
  std::vector<int> lags;
  std::vector<Eigen::MatrixXd> matrices;
  Grid grid;

  const Eigen::MatrixXd& at(int h) const {
    for (std::size_t i = 0; i < lags.size(); ++i)
      if (lags[i] == h) return matrices[i];
    throw InvalidArgument("lag " + std::to_string(h) + " not present");
  }
};

inline std::vector<int> normalize_lags(std::vector<int> lags) {
  for (int h : lags)
    if (h < 0) throw InvalidArgument("lags must be nonnegative");
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  if (lags.empty()) throw InvalidArgument("at least one lag is required");
  return lags;
}

/// R_h = (1/T) sum_{t=1}^{T-h} X_{t+h} (x) X_t, as the kernel matrix R_h(x_i, x_j).
inline AutocovSet empirical_autocov(const Eigen::MatrixXd& values, const Grid& grid, std::vector<int> lags) {
  lags = normalize_lags(std::move(lags));
  const long T = values.rows();
  if (values.cols() != grid.M) throw InvalidArgument("sample width does not match grid");
  if (lags.back() >= T) throw InvalidArgument("lag " + std::to_string(lags.back()) + " must be < T");
  AutocovSet out{lags, {}, grid};
  for (int h : lags) {
    const long n = T - h;
    Eigen::MatrixXd R = values.bottomRows(n).transpose() * values.topRows(n) / static_cast<double>(T);
    if (h == 0) R = (0.5 * (R + R.transpose())).eval();
    out.matrices.push_back(std::move(R));
  }
  return out;
}

inline AutocovSet empirical_autocov(const FtsSample& sample, std::vector<int> lags) {
  return empirical_autocov(sample.values, sample.grid, std::move(lags));
}

inline AutocovSet average_autocov(const std::vector<AutocovSet>& replicates) {
  if (replicates.empty()) throw InvalidArgument("average_autocov: no replicates");
  const AutocovSet& first = replicates.front();
  AutocovSet out{first.lags, {}, first.grid};
  for (const auto& m : first.matrices) out.matrices.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  for (const auto& r : replicates) {
    if (r.lags != first.lags || !(r.grid == first.grid) || r.matrices.size() != first.matrices.size())
      throw InvalidArgument("average_autocov: replicates have mismatched lags or grids");
    for (std::size_t i = 0; i < r.matrices.size(); ++i) {
      if (r.matrices[i].rows() != out.matrices[i].rows() || r.matrices[i].cols() != out.matrices[i].cols())
        throw InvalidArgument("average_autocov: mismatched matrix shapes");
      out.matrices[i] += r.matrices[i];
    }
  }
  for (auto& m : out.matrices) m /= static_cast<double>(replicates.size());
  return out;
}

inline AutocovSet make_autocov_set(const std::vector<int>& lags, const std::vector<RealKernelMatrix>& kernels) {
  if (lags.size() != kernels.size() || kernels.empty()) throw InvalidArgument("lag/matrix count mismatch");
  AutocovSet out{lags, {}, kernels.front().grid};
  for (const auto& k : kernels) out.matrices.push_back(k.values);
  return out;
}

/// rel.error(h) = ||avg_h - truth_h||_1 / ||truth_0||_1 for each lag of avg.
inline std::vector<double> relative_error(const AutocovSet& avg, const AutocovSet& truth) {
  if (!(avg.grid == truth.grid)) throw InvalidArgument("relative_error: grids differ");
  const double denom = trace_norm(truth.at(0), truth.grid);
  if (!(denom > 0.0)) throw InvalidArgument("relative_error: truth has zero lag-0 trace norm");
  std::vector<double> out;
  for (std::size_t i = 0; i < avg.lags.size(); ++i)
    out.push_back(trace_norm((avg.matrices[i] - truth.at(avg.lags[i])).eval(), avg.grid) / denom);
  return out;
}

/// Averaged empirical autocovariances over I replicates with seeds replicate_seed(config.seed, i).
/// Replicates run in parallel, each single-threaded; the average is formed in replicate order.
inline AutocovSet monte_carlo_autocov(const SpectralDensitySpec& spec, const SimConfig& config, const Grid& grid,
                                      std::vector<int> lags, int I, int threads = 0) {
  if (I < 1) throw InvalidArgument("replicate count I must be >= 1");
  lags = normalize_lags(std::move(lags));
  std::vector<AutocovSet> sets(static_cast<std::size_t>(I));
  parallel_for(
      0, I,
      [&](long i) {
        SimConfig c = config;
        c.seed = replicate_seed(config.seed, static_cast<std::uint64_t>(i));
        c.threads = 1;
        sets[static_cast<std::size_t>(i)] = empirical_autocov(simulate(spec, c, grid), lags);
      },
      threads);
  return average_autocov(sets);
}

struct BenchRecord {
  Method method = Method::Ckl;
  int T = 0;
  int M = 0;
  int N = 0;
  double seconds = 0.0;
  int replicates = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline bool method_supports(const SpectralDensitySpec& spec, Method m) {
  switch (m) {
    case Method::Ckl: return true;
    case Method::Filter: return std::holds_alternative<FilterSpec>(spec.kind) || spec.is_farfima();
    case Method::FarfimaSpectral:
    case Method::FarfimaHybrid:
    case Method::Temporal: return spec.is_farfima();
  }
  return false;
}

/// Wall time of one full simulation (setup included), median over `replicates` serialized runs.
inline std::vector<BenchRecord> run_benchmark(const SpectralDensitySpec& spec, const std::vector<Method>& methods,
                                              const std::vector<int>& Ts, const std::vector<int>& Ms, int N,
                                              int replicates = 3, std::uint64_t seed = 1, int threads = 0) {
  if (replicates < 1) throw InvalidArgument("benchmark replicates must be >= 1");
  for (Method m : methods)
    if (!method_supports(spec, m))
      throw InvalidArgument("method '" + to_string(m) + "' is incompatible with spec '" + spec.name + "'");
  std::vector<BenchRecord> out;
  for (Method m : methods)
    for (int M : Ms) {
      const Grid grid = make_grid(M);
      for (int T : Ts) {
        SimConfig c;
        c.T = T;
        c.M = M;
        c.N = N;
        c.method = m;
        c.threads = threads;
        c.validate();
        std::vector<double> times;
        for (int r = 0; r < replicates; ++r) {
          c.seed = replicate_seed(seed, static_cast<std::uint64_t>(r));
          const auto t0 = std::chrono::steady_clock::now();
          const FtsSample s = simulate(spec, c, grid);
          const auto t1 = std::chrono::steady_clock::now();
          if (s.values.rows() != T) throw NumericError("benchmark run returned the wrong length");
          times.push_back(std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9));
        }
        out.push_back({m, T, M, N, median(times), replicates});
      }
    }
  return out;
}

}  // namespace specsim
