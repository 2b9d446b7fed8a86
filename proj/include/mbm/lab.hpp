#pragma once

#include <memory>

#include "mbm/config.hpp"
#include "mbm/gaussian_processes.hpp"
#include "mbm/spectral_operators.hpp"
#include "mbm/wick_ito_integrals.hpp"

namespace mbm {

/// The objects one configuration needs: basis, operators, the cached operator
/// table and the Gaussian field on top of it.
struct Lab {
  RunConfig config;
  std::shared_ptr<const SpectralOperators> operators;
  std::shared_ptr<const OperatorTable> table;
  std::shared_ptr<const GaussianField> field;
  /// False when the table came from the on-disk cache.
  bool table_built = false;

  /// Validates the configuration, then loads or builds the operator table.
  static Lab open(const RunConfig& config, bool force_rebuild = false);

  WickItoIntegrator integrator() const { return WickItoIntegrator(field, config.integration_options()); }
  /// Same objects with a different worker count.
  Lab with_workers(int workers) const;
};

}  // namespace mbm
