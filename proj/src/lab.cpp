#include "mbm/lab.hpp"

namespace mbm {

Lab Lab::open(const RunConfig& config, bool force_rebuild) {
  config.validate();
  Lab lab;
  lab.config = config;
  lab.operators = std::make_shared<const SpectralOperators>(HermiteBasis(config.basis_size));
  bool built = false;
  lab.table = std::make_shared<const OperatorTable>(
      OperatorTable::load_or_build(config.cache_path(), lab.operators, config.hurst_values(), config.time_values(),
                                   force_rebuild, config.worker_count(), &built));
  lab.table_built = built;
  lab.field = std::make_shared<const GaussianField>(lab.table);
  return lab;
}

Lab Lab::with_workers(int workers) const {
  Lab copy = *this;
  copy.config.workers = workers;
  return copy;
}

}  // namespace mbm
