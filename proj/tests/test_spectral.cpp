#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tbf/fiber_model.hpp"
#include "tbf/spectral.hpp"

using namespace tbf;

namespace {

FreqGrid grid_of(std::size_t n, double step = 2e9) {
  FreqGrid g;
  g.center_freq_hz = 193.4e12;
  g.step_hz = step;
  g.samples = n;
  return g;
}

Mstm random_mstm(std::size_t n, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Mstm m;
  m.grid = grid_of(n);
  m.data = ComplexTensor3(n, rows, cols);
  for (std::size_t k = 0; k < n; ++k) m.data.slice(k) = oracle::random_matrix(rows, cols, rng);
  return m;
}

}  // namespace

class TransformSizes : public ::testing::TestWithParam<std::size_t> {};

TEST_P(TransformSizes, MatchesDirectSumElementwise) {
  const std::size_t n = GetParam();
  const Mstm m = random_mstm(n, 2, 3, n);
  const Trtm t = mstm_to_trtm(m);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<Complex> seq(n);
      for (std::size_t k = 0; k < n; ++k) seq[k] = m.data(k, i, j);
      const auto expect = oracle::direct_delay_transform(seq);
      for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(t.data(k, i, j) - expect[k]), 1e-10);
    }
}

TEST_P(TransformSizes, RoundTripAndParseval) {
  const std::size_t n = GetParam();
  const Mstm m = random_mstm(n, 3, 3, 100 + n);
  const Trtm t = mstm_to_trtm(m);
  EXPECT_NEAR(t.data.squared_norm(), m.data.squared_norm(), 1e-9 * m.data.squared_norm());
  const Mstm back = trtm_to_mstm(t);
  EXPECT_EQ(back.grid.samples, m.grid.samples);
  EXPECT_NEAR(back.grid.step_hz, m.grid.step_hz, 1e-6);
  EXPECT_DOUBLE_EQ(back.grid.center_freq_hz, m.grid.center_freq_hz);
  double err = 0.0;
  for (std::size_t i = 0; i < m.data.size(); ++i) err = std::max(err, std::abs(back.data.raw()[i] - m.data.raw()[i]));
  EXPECT_LT(err, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Spectral, TransformSizes, ::testing::Values(2u, 7u, 8u, 64u, 421u));

TEST(Transform, FlatIdentityConcentratesAtZeroDelay) {
  const std::size_t n = 16;
  Mstm m;
  m.grid = grid_of(n);
  m.data = ComplexTensor3(n, 2, 2);
  for (std::size_t k = 0; k < n; ++k) m.data.slice(k) = CMatrix::Identity(2, 2);
  const Trtm t = mstm_to_trtm(m);
  EXPECT_LT((CMatrix(t.data.slice(0)) - 4.0 * CMatrix::Identity(2, 2)).norm(), 1e-12);
  for (std::size_t k = 1; k < n; ++k) EXPECT_LT(CMatrix(t.data.slice(k)).norm(), 1e-12);
}

TEST(Transform, LinearPhaseMapsToPositiveDelay) {
  const std::size_t n = 32;
  const FreqGrid g = grid_of(n);
  const std::size_t bin = 5;
  const double tau0 = static_cast<double>(bin) * g.resolution_s();
  Mstm m;
  m.grid = g;
  m.data = ComplexTensor3(n, 1, 1);
  for (std::size_t k = 0; k < n; ++k) m.data(k, 0, 0) = std::polar(1.0, g.angular_offset(k) * tau0);
  const Trtm t = mstm_to_trtm(m);
  for (std::size_t k = 0; k < n; ++k)
    EXPECT_NEAR(std::abs(t.data(k, 0, 0)), k == bin ? std::sqrt(32.0) : 0.0, 1e-10);
  EXPECT_NEAR(t.grid.time_s(bin), tau0, 1e-24);
}

TEST(Transform, SingleSequenceHelpersAgreeWithTensorPath) {
  const Mstm m = random_mstm(12, 1, 1, 5);
  std::vector<Complex> seq(m.data.raw());
  const auto delay = spectrum_to_delay(seq);
  const Trtm t = mstm_to_trtm(m);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_LT(std::abs(delay[k] - t.data(k, 0, 0)), 1e-12);
  const auto back = delay_to_spectrum(delay);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_LT(std::abs(back[k] - seq[k]), 1e-12);
}

TEST(Transform, SynthesizedFiberPeaksAtGroupDelays) {
  const FreqGrid g = grid_of(128, 1e9);
  DispersionModel model = make_default_model(3, 10.0 * g.resolution_s() * 2.0, 4);
  model.mixing_strength = 0.0;
  const Trtm t = mstm_to_trtm(synthesize_mstm(model, g));
  const auto delays = model.group_delays_s();
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t bin = t.grid.nearest_bin(delays[i]);
    EXPECT_NEAR(std::abs(t.data(bin, i, i)), std::sqrt(128.0), 1e-9);
  }
}

TEST(GridRelations, ResolutionExtentBandwidth) {
  const FreqGrid g = FreqGrid::from_wavelength(1550e-9, 3.8e-12, 421);
  const GridRelations r = grid_relations(g);
  EXPECT_NEAR(r.bandwidth_hz, 421 * g.step_hz, 1.0);
  EXPECT_NEAR(r.resolution_s * r.bandwidth_hz, 1.0, 1e-12);
  EXPECT_NEAR(r.extent_s * g.step_hz, 1.0, 1e-12);
  EXPECT_NEAR(r.resolution_s, 5.0e-12, 0.25e-12);
  EXPECT_GT(r.extent_s, 2.0e-9);
}

TEST(TimeGrid, NearestBinWraps) {
  TimeGrid g{1e-12, 10, 0.0};
  EXPECT_EQ(g.nearest_bin(3.2e-12), 3u);
  EXPECT_EQ(g.nearest_bin(9.7e-12), 0u);
  EXPECT_EQ(g.nearest_bin(-1e-12), 9u);
  EXPECT_EQ(g.nearest_bin(23e-12), 3u);
}

TEST(TimeGrid, Validation) {
  EXPECT_THROW((TimeGrid{0.0, 4, 0.0}).validate(), DomainError);
  EXPECT_THROW((TimeGrid{1.0, 0, 0.0}).validate(), DomainError);
}

TEST(Aliasing, WarnsOnlyBeyondEightyPercent) {
  const FreqGrid g = grid_of(100, 1e9);  // extent 1 ns
  EXPECT_FALSE(aliasing_warning(make_default_model(2, 0.7e-9, 1), g).has_value());
  const auto w = aliasing_warning(make_default_model(2, 0.9e-9, 1), g);
  ASSERT_TRUE(w.has_value());
  EXPECT_NE(w->find("alias"), std::string::npos);
}

TEST(Convolution, MatchesDirectSum) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 5u, 16u, 33u}) {
    const Eigen::VectorXcd a = oracle::random_matrix(n, 1, rng).col(0);
    const Eigen::VectorXcd b = oracle::random_matrix(n, 1, rng).col(0);
    std::vector<Complex> va(a.data(), a.data() + n), vb(b.data(), b.data() + n);
    const auto got = circular_convolve(va, vb);
    const auto expect = oracle::direct_circular_convolution(va, vb);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(got[i] - expect[i]), 1e-10);
  }
}

TEST(Convolution, ScaledDeltaShifts) {
  const std::size_t n = 9;
  std::vector<Complex> kernel(n, 0.0), signal(n, 0.0);
  kernel[2] = std::sqrt(9.0);
  signal[8] = 1.0;
  signal[1] = Complex(0.0, 2.0);
  const auto out = circular_convolve(kernel, signal);
  EXPECT_LT(std::abs(out[1] - 1.0), 1e-12);
  EXPECT_LT(std::abs(out[3] - Complex(0.0, 2.0)), 1e-12);
}

TEST(Convolution, LengthMismatchThrows) {
  EXPECT_THROW(circular_convolve(std::vector<Complex>(3), std::vector<Complex>(4)), DimensionError);
}

TEST(Trtm, ValidateShapeAgainstGrid) {
  Trtm t;
  t.grid = TimeGrid{1e-12, 4, 0.0};
  t.data = ComplexTensor3(3, 2, 2);
  EXPECT_THROW(t.validate(), DimensionError);
}
