#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mbm/gaussian_processes.hpp"
#include "mbm/statistics.hpp"

using namespace mbm;
using mbm::testing::linspace;

TEST(HurstFunction, Presets) {
  const HurstFunction s = HurstFunction::sine(0.5, 0.15);
  EXPECT_NEAR(s(0.5), 0.65, 1e-15);
  EXPECT_NEAR(s.lower(), 0.5, 1e-15);
  EXPECT_NEAR(s.upper(), 0.65, 1e-12);
  EXPECT_NEAR(s.lipschitz(), 0.15 * std::numbers::pi, 1e-12);
  const HurstFunction l = HurstFunction::linear(0.4, 0.6);
  EXPECT_NEAR(l(0.25), 0.45, 1e-15);
  EXPECT_NEAR(l.derivative(0.7), 0.2, 1e-15);
  EXPECT_TRUE(HurstFunction::constant(0.3).is_constant());
  EXPECT_FALSE(l.is_constant());
}

TEST(HurstFunction, Validation) {
  EXPECT_THROW(HurstFunction::constant(1.0), std::domain_error);
  EXPECT_THROW(HurstFunction::sine(0.9, 0.2), std::domain_error);
  EXPECT_THROW(HurstFunction("bad", [](double t) { return 0.5 + 0.1 * t; }, [](double) { return 0.2; }),
               std::invalid_argument);
  EXPECT_THROW(HurstFunction("nan", [](double t) { return t > 0.5 ? NAN : 0.5; }, [](double) { return 0.0; }),
               std::domain_error);
}

TEST(FieldCovariance, Examples) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0), hu(0.1, 0.9);
  for (int i = 0; i < 50; ++i) {
    const double t = u(gen), s = u(gen), H = hu(gen), Hp = hu(gen);
    EXPECT_NEAR(field_covariance(t, t, H, H), std::pow(t, 2 * H), 1e-14);
    EXPECT_NEAR(field_covariance(t, s, 0.5, 0.5), std::min(t, s), 1e-14);
    EXPECT_EQ(field_covariance(t, s, H, Hp), field_covariance(s, t, Hp, H));
    const HurstFunction h = HurstFunction::sine(0.5, 0.2);
    EXPECT_NEAR(mbm_covariance(t, t, h), std::pow(t, 2 * h(t)), 1e-14);
    EXPECT_EQ(mbm_covariance(t, s, h), mbm_covariance(s, t, h));
    const HurstFunction c = HurstFunction::constant(H);
    EXPECT_NEAR(mbm_covariance(t, s, c), 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H)),
                1e-14);
  }
}

TEST(FieldChaos, ChaosPairingReproducesCovarianceAtK512) {
  const auto f = mbm::testing::field(512);
  const double chaos = pairing(f->field_chaos(0.3, 0.4), f->field_chaos(0.8, 0.6));
  const double exact = field_covariance(0.3, 0.8, 0.4, 0.6);
  EXPECT_LE(std::abs(chaos - exact) / exact, 0.02) << "chaos " << chaos << ", closed form " << exact;
}

TEST(FieldChaos, ParsevalVarianceConvergesInK) {
  // the truncated variance increases towards t^{2H} as K grows
  double prev = 0.0;
  for (int K : {64, 128, 256, 512}) {
    const double v = norm_p(mbm::testing::field(K)->field_chaos(0.5, 0.5), 0);
    EXPECT_GT(v * v, prev);
    EXPECT_LT(v * v, 0.5);
    prev = v * v;
  }
}

TEST(FieldChaos, SimpleCases) {
  const auto f = mbm::testing::field(64);
  EXPECT_EQ(norm_p(f->field_chaos(0.0, 0.3), 0), 0.0);
  EXPECT_EQ(norm_p(f->dB_dH_chaos(0.0, 0.3), 0), 0.0);
  const Eigen::VectorXd at_half = f->field_chaos(0.7, 0.5).first_chaos_coefficients();
  const Eigen::VectorXd noise = f->white_noise_fbm(0.7, 0.5).first_chaos_coefficients();
  const HermiteBasis& basis = f->table().operators().basis();
  for (int k = 0; k < 64; ++k) {
    EXPECT_NEAR(at_half[k], basis.cumulative_integral(k, 0.7), 1e-6);
    EXPECT_NEAR(noise[k], basis(k, 0.7), 1e-6);
  }
}

TEST(FieldChaos, DerivativeInHMatchesFiniteDifferences) {
  const auto f = mbm::testing::field(128);
  const double d = 1e-5;
  for (double t : linspace(0.2, 1.0, 5))
    for (double H : linspace(0.3, 0.7, 5)) {
      const ChaosVector fd = (f->field_chaos(t, H + d) - f->field_chaos(t, H - d)) * (1.0 / (2 * d));
      EXPECT_LE(norm_p(fd - f->dB_dH_chaos(t, H), -2), 1e-4) << "t = " << t << ", H = " << H;
    }
}

TEST(FieldChaos, TimeDerivativeIsWhiteNoise) {
  const auto f = mbm::testing::field(128);
  const double d = 1e-4;
  for (double t : {0.2, 0.55, 0.9})
    for (double H : {0.3, 0.5, 0.8}) {
      const Eigen::VectorXd fd =
          (f->field_chaos(t + d, H).first_chaos_coefficients() - f->field_chaos(t - d, H).first_chaos_coefficients()) /
          (2 * d);
      EXPECT_LE((fd - f->white_noise_fbm(t, H).first_chaos_coefficients()).cwiseAbs().maxCoeff(), 1e-5);
    }
}

TEST(FieldChaos, WhiteNoiseNormFiniteOnGrid) {
  const auto f = mbm::testing::field(128);
  double worst = 0.0, prev = norm_p(f->white_noise_fbm(0.0, 0.4), -2);
  for (double t : linspace(0.0, 1.0, 201)) {
    const double n = norm_p(f->white_noise_fbm(t, 0.4), -2);
    EXPECT_TRUE(std::isfinite(n));
    worst = std::max(worst, std::abs(n - prev));
    prev = n;
  }
  EXPECT_LT(worst, 1e-2);  // no jumps between neighbouring grid times
}

TEST(MbmNoise, ConstantExponentReducesToFbm) {
  const auto f = mbm::testing::field(64);
  const HurstFunction h = HurstFunction::constant(0.35);
  for (double t : {0.1, 0.5, 1.0}) {
    const Eigen::VectorXd a = f->white_noise_mbm(t, h).first_chaos_coefficients();
    const Eigen::VectorXd b = f->white_noise_fbm(t, 0.35).first_chaos_coefficients();
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-14 * (1.0 + b.cwiseAbs().maxCoeff()));
  }
}

TEST(MbmNoise, TwoSumForm) {
  const auto f = mbm::testing::field(64);
  const OperatorTable& table = f->table();
  const HurstFunction h = HurstFunction::sine(0.5, 0.2);
  for (double t : {0.13, 0.5, 0.97}) {
    const Eigen::VectorXd w = f->white_noise_mbm(t, h).first_chaos_coefficients();
    for (int k = 0; k < 64; ++k) {
      const double direct = table.apply_M(k, h(t), t) + h.derivative(t) * table.cumulative_dM(k, h(t), t);
      EXPECT_NEAR(w[k], direct, 1e-12);
    }
  }
}

TEST(MbmNoise, TimeDerivativeOfMbm) {
  const auto f = mbm::testing::field(128);
  const HurstFunction h = HurstFunction::sine(0.5, 0.2);
  const double d = 1e-4;
  for (double t : {0.2, 0.5, 0.85}) {
    const Eigen::VectorXd fd =
        (f->mbm_chaos(t + d, h).first_chaos_coefficients() - f->mbm_chaos(t - d, h).first_chaos_coefficients()) / (2 * d);
    EXPECT_LE((fd - f->white_noise_mbm(t, h).first_chaos_coefficients()).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Ensemble, DeterministicAndWorkerIndependent) {
  const GaussianEnsemble a(42, 500, 32, 1), b(42, 500, 32, 4), c(43, 500, 32, 1);
  EXPECT_TRUE(a.coordinates() == b.coordinates());
  EXPECT_FALSE(a.coordinates() == c.coordinates());
  const GaussianEnsemble prefix(42, 100, 32, 3);
  EXPECT_TRUE(prefix.coordinates() == a.coordinates().topRows(100));
}

TEST(SamplePaths, VarianceAndCovariance) {
  const int K = 512, M = 10000;
  const auto f = mbm::testing::field(K);
  const HurstFunction h = HurstFunction::sine(0.5, 0.15);
  const auto t = linspace(0.1, 1.0, 10);
  const GaussianEnsemble ens(42, M, K, 1);
  const Eigen::MatrixXd paths = sample_paths(ProcessDescriptor::mbm(h), t, *f, ens, 1);
  ASSERT_EQ(paths.rows(), M);
  ASSERT_EQ(paths.cols(), 10);

  // analytic variance at t = 1
  const double var1 = moments(std::vector<double>(paths.col(9).data(), paths.col(9).data() + M)).variance;
  EXPECT_LE(std::abs(var1 - 1.0), 3.0 * std::sqrt(2.0 / (M - 1))) << "variance " << var1;

  // empirical covariance against the covariance of the simulated (truncated)
  // expansion, with per-entry 3 sigma bands Var(XY) = s_xx s_yy + s_xy^2
  std::vector<double> hs(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) hs[i] = h(t[i]);
  const Eigen::MatrixXd c = f->coefficients(kCumM, t, hs);
  const Eigen::MatrixXd truncated = c.transpose() * c;
  const Eigen::MatrixXd empirical = paths.transpose() * paths / M;
  int outside = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = i; j < 10; ++j) {
      const double sigma =
          std::sqrt((truncated(i, i) * truncated(j, j) + truncated(i, j) * truncated(i, j)) / M);
      if (std::abs(empirical(i, j) - truncated(i, j)) > 3 * sigma) ++outside;
    }
  EXPECT_LE(outside, 1) << "of 55 entries";

  // the truncated expansion itself against mbm_covariance
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) worst = std::max(worst, std::abs(truncated(i, j) - mbm_covariance(t[i], t[j], h)));
  EXPECT_LE(worst, 0.05);
}

TEST(SamplePaths, BitIdenticalAcrossRunsAndWorkers) {
  const auto f = mbm::testing::field(64);
  const auto t = linspace(0.0, 1.0, 33);
  const HurstFunction h = HurstFunction::sine(0.5, 0.15);
  const Eigen::MatrixXd a = sample_paths(ProcessDescriptor::mbm(h), t, *f, GaussianEnsemble(42, 300, 64, 1), 1);
  const Eigen::MatrixXd b = sample_paths(ProcessDescriptor::mbm(h), t, *f, GaussianEnsemble(42, 300, 64, 3), 3);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.col(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(HolderDiagnostic, Examples) {
  const auto t = linspace(0.1, 0.9, 9), hs = linspace(0.2, 0.8, 7);
  const HolderDiagnostic d = holder_diagnostic(t, hs);
  EXPECT_TRUE(std::isfinite(d.lambda));
  EXPECT_GT(d.lambda, 0.0);
  EXPECT_EQ(d.c, 0.2);
  for (std::size_t i = 0; i < d.hurst.size(); ++i) EXPECT_NEAR(d.exponents[i], 2 * d.hurst[i], 0.05);
  const std::vector<double> one_t{0.5}, one_h{0.5};
  EXPECT_EQ(holder_diagnostic(one_t, one_h).lambda, 0.0);
}

TEST(HolderDiagnostic, BoundHoldsOnFinerGrid) {
  const HolderDiagnostic d = holder_diagnostic(linspace(0.1, 0.9, 9), linspace(0.25, 0.75, 6));
  const auto t = linspace(0.1, 0.9, 33), hs = linspace(0.25, 0.75, 21);
  for (double a : t)
    for (double b : t)
      for (double H : hs)
        for (double Hp : hs) {
          const double var = field_covariance(a, a, H, H) + field_covariance(b, b, Hp, Hp) - 2 * field_covariance(a, b, H, Hp);
          EXPECT_LE(var, d.lambda * (std::pow(std::abs(a - b), 2 * d.c) + (H - Hp) * (H - Hp)) * (1 + 1e-6));
        }
}

TEST(DerivativeBound, FiniteAndBounding) {
  const auto f = mbm::testing::field(128);
  const auto t = linspace(0.2, 1.0, 5), hs = linspace(0.3, 0.7, 5);
  const DerivativeBound b = derivative_bound(*f, t, hs, 2);
  EXPECT_TRUE(std::isfinite(b.delta));
  EXPECT_GT(b.delta, 0.0);
  for (double a : t)
    for (double H : hs) {
      const double n = norm_p(f->dB_dH_chaos(a, H) - f->dB_dH_chaos(0.6, 0.5), 0);
      EXPECT_LE(n * n, b.delta * ((a - 0.6) * (a - 0.6) + (H - 0.5) * (H - 0.5)) * (1 + 1e-12) + 1e-15);
    }
}
