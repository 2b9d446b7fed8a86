#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mbm/partition_scheme.hpp"

using namespace mbm;
using mbm::testing::linspace;

TEST(PartitionScheme, DyadicCounts) {
  const PartitionScheme s = PartitionScheme::dyadic(10);
  EXPECT_EQ(s.max_level(), 10);
  for (int n = 0; n <= 10; ++n) {
    EXPECT_EQ(s.count(n), 1u << n);
    EXPECT_GE(s.count(n), 1u << n);
    if (n) EXPECT_EQ(s.count(n) % s.count(n - 1), 0u);
  }
  EXPECT_EQ(s.count(0), 1u);
  EXPECT_THROW(s.count(11), std::out_of_range);
}

TEST(PartitionScheme, CustomValidation) {
  EXPECT_NO_THROW(PartitionScheme::custom({1, 2, 8, 64}));
  EXPECT_THROW(PartitionScheme::custom({2, 4}), std::invalid_argument);     // q_0 != 1
  EXPECT_THROW(PartitionScheme::custom({1, 2, 3}), std::invalid_argument);  // q_2 < 4
  EXPECT_THROW(PartitionScheme::custom({1, 5}), std::invalid_argument);     // q_1 > 2^{2^1}
  EXPECT_THROW(PartitionScheme::custom({1, 2, 5}), std::invalid_argument);  // not nested
  EXPECT_NO_THROW(PartitionScheme::custom({1, 4, 16}));
}

TEST(PartitionScheme, CellsAndNodes) {
  const PartitionScheme s = PartitionScheme::custom({1, 2, 4, 8});
  EXPECT_DOUBLE_EQ(s.left_node(0.37, 3), 0.25);
  EXPECT_EQ(s.cell(0.37, 3), 2u);
  EXPECT_EQ(s.cell(1.0, 3), 7u);
  for (int n = 0; n <= 3; ++n) EXPECT_EQ(s.left_node(0.0, n), 0.0);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PartitionScheme d = PartitionScheme::dyadic(12);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(gen);
    for (int n = 0; n < 12; ++n) {
      EXPECT_LE(d.left_node(t, n), d.left_node(t, n + 1));
      EXPECT_LE(d.left_node(t, n + 1), t);
    }
  }
  // nodes land exactly on their own cell
  for (std::uint64_t k = 0; k < 1024; ++k) EXPECT_EQ(d.cell(double(k) / 1024, 10), k);
}

TEST(PartitionScheme, StepHurst) {
  const PartitionScheme s = PartitionScheme::dyadic(8);
  const HurstFunction c = HurstFunction::constant(0.4);
  const HurstFunction h = HurstFunction::sine(0.5, 0.2);
  for (int n = 0; n <= 8; ++n) {
    EXPECT_EQ(s.step_hurst(c, 0.77, n), 0.4);
    EXPECT_EQ(s.step_hurst(h, 1.0, n), h(1.0));
    EXPECT_LE(s.sup_distance(h, n), h.lipschitz() / double(s.count(n)) + 1e-15);
  }
  EXPECT_EQ(s.step_hurst(h, 0.9, 0), h(0.0));
}

TEST(PatchedProcess, Examples) {
  const auto f = mbm::testing::field(64);
  const PartitionScheme s = PartitionScheme::dyadic(6);
  const HurstFunction h = HurstFunction::linear(0.3, 0.7);
  for (double t : {0.0, 0.3, 0.9}) EXPECT_EQ(patched_process_chaos(*f, s, h, t, 0), f->field_chaos(t, h(0.0)));
  for (int n : {1, 4, 6})
    for (std::uint64_t k = 0; k < s.count(n); k += 3) {
      const double t = double(k) / s.count(n);
      EXPECT_EQ(patched_process_chaos(*f, s, h, t, n), f->field_chaos(t, h(t)));
    }
  const HurstFunction c = HurstFunction::constant(0.6);
  for (int n : {0, 3, 6}) EXPECT_EQ(patched_process_chaos(*f, s, c, 0.41, n), f->mbm_chaos(0.41, c));
}

TEST(LawConvergence, ConstantExponentHasZeroDistance) {
  const auto f = mbm::testing::field(64);
  LawConvergenceOptions o;
  o.levels = {0, 2, 4};
  o.t_grid = linspace(0.1, 1.0, 10);
  o.ks_indices = {4, 9};
  o.samples = 2000;
  const LawConvergenceReport r = law_convergence_report(*f, PartitionScheme::dyadic(4), HurstFunction::constant(0.3), o);
  for (const auto& l : r.levels) {
    EXPECT_EQ(l.covariance_distance, 0.0);
    EXPECT_EQ(l.hurst_distance, 0.0);
    for (const auto& m : l.marginals) EXPECT_EQ(m.coupled_rms, 0.0);
  }
}

TEST(LawConvergence, DistancesShrinkWithLevel) {
  const auto f = mbm::testing::field(128);
  const HurstFunction h = HurstFunction::sine(0.5, 0.15);
  LawConvergenceOptions o;
  o.levels = {1, 2, 3, 4, 5, 6, 7, 8};
  o.t_grid = linspace(0.1, 1.0, 10);
  o.ks_indices = {2, 5, 8};
  o.samples = 10000;
  o.workers = 2;
  const LawConvergenceReport r = law_convergence_report(*f, PartitionScheme::dyadic(8), h, o);
  EXPECT_TRUE(r.monotone);
  for (const auto& l : r.levels) EXPECT_LE(l.covariance_distance, r.rate_constant * l.hurst_distance * (1 + 1e-12));
  EXPECT_GE(r.levels[1].covariance_distance / r.levels.back().covariance_distance, 4.0);
  for (const auto& m : r.levels.back().marginals) EXPECT_GT(m.patched_vs_mbm.p_value, 0.01);
  o.workers = 1;
  const LawConvergenceReport again = law_convergence_report(*f, PartitionScheme::dyadic(8), h, o);
  EXPECT_EQ(again.levels.back().marginals[1].patched_vs_mbm.statistic,
            r.levels.back().marginals[1].patched_vs_mbm.statistic);
}
