#pragma once

#include "specsim/simulate_spectral.hpp"
#include "specsim/simulate_temporal.hpp"

namespace specsim {

inline BurnInPolicy burnin_for(const SpectralDensitySpec& spec, const SimConfig& config) {
  if (config.burnin) return {*config.burnin};
  return BurnInPolicy::default_for(spec.is_farfima() ? spec.farfima().p() : 0);
}

/// Runs the simulator selected by config.method.
inline FtsSample simulate(const SpectralDensitySpec& spec, const SimConfig& config, const Grid& grid) {
  config.validate();
  if (grid.M != config.M) throw InvalidArgument("grid resolution does not match config.M");
  switch (config.method) {
    case Method::FarfimaHybrid:
      if (!spec.is_farfima()) throw InvalidArgument("the hybrid method needs a FARFIMA spec");
      return hybrid_farfima(spec.farfima(), config, grid, burnin_for(spec, config));
    case Method::Temporal: {
      if (!spec.is_farfima()) throw InvalidArgument("the temporal method needs a FARFIMA spec");
      const BurnInPolicy b = burnin_for(spec, config);
      FtsSample out = temporal_farfima(spec.farfima(), config.T, grid, config.N, config.T + b.length, b, config.seed);
      out.config = config;
      out.config.burnin = b.length;
      return out;
    }
    default:
      return simulate_spectral(spec, config, grid);
  }
}

}  // namespace specsim
