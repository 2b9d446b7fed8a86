#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mbm/gaussian_processes.hpp"
#include "mbm/spectral_operators.hpp"

namespace mbm::testing {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = (i == n - 1) ? b : a + (b - a) * i / (n - 1);
  return v;
}

// Tables are shared between tests; building the K = 512 one takes a while.
inline std::shared_ptr<const OperatorTable> table(int K) {
  static std::map<int, std::shared_ptr<const OperatorTable>> cache;
  auto& slot = cache[K];
  if (!slot) {
    auto ops = std::make_shared<const SpectralOperators>(HermiteBasis(K));
    slot = std::make_shared<const OperatorTable>(ops, linspace(0.05, 0.95, 19), linspace(0.0, 1.0, 65));
  }
  return slot;
}

inline std::shared_ptr<const GaussianField> field(int K) {
  static std::map<int, std::shared_ptr<const GaussianField>> cache;
  auto& slot = cache[K];
  if (!slot) slot = std::make_shared<const GaussianField>(table(K));
  return slot;
}

inline std::string scratch_dir(const std::string& name) { return std::string(MBM_TEST_SCRATCH) + "/" + name; }

}  // namespace mbm::testing
