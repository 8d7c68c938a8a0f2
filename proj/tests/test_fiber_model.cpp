#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tbf/fiber_model.hpp"

using namespace tbf;

namespace {

double v2_over_4(double core, double na, double wl) {
  const double v = oracle::pi * core * na / wl;
  return v * v / 4.0;
}

FreqGrid small_grid(std::size_t n) {
  FreqGrid g;
  g.center_freq_hz = 193.4e12;
  g.step_hz = 1e9;
  g.samples = n;
  return g;
}

}  // namespace

TEST(ModeCount, FiftyMicronCore) {
  EXPECT_EQ(mode_count_step_index(50e-6, 0.22, 1.55e-6), static_cast<int>(std::floor(v2_over_4(50e-6, 0.22, 1.55e-6))));
  EXPECT_EQ(mode_count_step_index(50e-6, 0.22, 1.55e-6), 124);
}

TEST(ModeCount, HundredMicronCore) { EXPECT_EQ(mode_count_step_index(100e-6, 0.22, 1.55e-6), 497); }

TEST(ModeCount, TinyCoreClampsToOne) { EXPECT_EQ(mode_count_step_index(1e-6, 0.1, 1.55e-6), 1); }

TEST(ModeCount, UnitsOnlyNeedToAgree) {
  EXPECT_EQ(mode_count_step_index(50.0, 0.22, 1.55), mode_count_step_index(50e-6, 0.22, 1.55e-6));
}

TEST(ModeCount, RejectsNonPositive) {
  EXPECT_THROW(mode_count_step_index(0.0, 0.22, 1.55e-6), DomainError);
  EXPECT_THROW(mode_count_step_index(50e-6, -0.1, 1.55e-6), DomainError);
}

TEST(FreqGrid, WavelengthStepConversion) {
  const FreqGrid g = FreqGrid::from_wavelength(1550e-9, 3.8e-12, 421);
  const double dnu = 299792458.0 * 3.8e-12 / (1550e-9 * 1550e-9);
  EXPECT_NEAR(g.step_hz, dnu, 1e-6 * dnu);
  EXPECT_NEAR(g.resolution_s(), 1.0 / (421 * dnu), 1e-20);
  EXPECT_NEAR(g.resolution_s(), 5.0e-12, 0.25e-12);
  EXPECT_NEAR(g.extent_s(), 2.109e-9, 0.005e-9);
  EXPECT_EQ(g.center_index(), 210u);
  EXPECT_DOUBLE_EQ(g.frequency_hz(210), g.center_freq_hz);
}

TEST(FreqGrid, RejectsDegenerateGrids) {
  FreqGrid g = small_grid(1);
  EXPECT_THROW(g.validate(), DomainError);
  g = small_grid(8);
  g.step_hz = 0.0;
  EXPECT_THROW(g.validate(), DomainError);
  EXPECT_THROW(FreqGrid::from_wavelength(-1.0, 1e-12, 8), DomainError);
}

TEST(Haar, IsUnitaryAndSeeded) {
  const CMatrix u = haar_unitary(6, 11);
  EXPECT_LT((u.adjoint() * u - CMatrix::Identity(6, 6)).norm(), 1e-12);
  EXPECT_EQ(u, haar_unitary(6, 11));
  EXPECT_GT((u - haar_unitary(6, 12)).norm(), 1e-3);
}

TEST(Haar, MeanSquaredEntryIsOneOverN) {
  // E|U_ij|^2 = 1/n for Haar unitaries
  const std::size_t n = 4;
  double acc = 0.0;
  const int draws = 400;
  for (int s = 0; s < draws; ++s) acc += std::norm(haar_unitary(n, static_cast<std::uint64_t>(s))(0, 0));
  EXPECT_NEAR(acc / draws, 1.0 / n, 0.03);
}

TEST(Mixing, EndpointsAndUnitarity) {
  EXPECT_LT((mixing_unitary(5, 3, 0.0) - CMatrix::Identity(5, 5)).norm(), 1e-14);
  EXPECT_LT((mixing_unitary(5, 3, 1.0) - haar_unitary(5, 3)).norm(), 1e-10);
  const CMatrix half = mixing_unitary(5, 3, 0.5);
  EXPECT_LT((half.adjoint() * half - CMatrix::Identity(5, 5)).norm(), 1e-10);
  EXPECT_LT((half * half - haar_unitary(5, 3)).norm(), 1e-9);
}

TEST(Synthesis, UnmixedSlicesAreDiagonalPhases) {
  DispersionModel m;
  m.num_modes = 3;
  m.length_m = 40.0;
  m.beta0 = {0.1, 0.2, 0.3};
  m.beta1 = {0.0, 1e-12, 2.5e-12};
  m.beta2 = {0.0, 1e-27, -2e-27};
  m.mixing_strength = 0.0;
  const FreqGrid g = small_grid(9);
  const Mstm t = synthesize_mstm(m, g);
  ASSERT_EQ(t.data.slices(), 9u);
  for (std::size_t k = 0; k < 9; ++k) {
    const double w = 2.0 * oracle::pi * (static_cast<double>(k) - 4.0) * 1e9;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        const std::complex<double> expect =
            i == j ? std::polar(1.0, (m.beta0[i] + m.beta1[i] * w + m.beta2[i] * w * w) * m.length_m) : 0.0;
        EXPECT_LT(std::abs(t.data(k, i, j) - expect), 1e-12);
      }
  }
  EXPECT_EQ(t.mode_labels.size(), 3u);
}

TEST(Synthesis, MixedFiberIsLosslessAndDeterministic) {
  DispersionModel m = make_default_model(5, 200e-12, 9);
  const FreqGrid g = small_grid(16);
  const Mstm a = synthesize_mstm(m, g);
  EXPECT_LT(max_unitarity_defect(a), 1e-12);
  EXPECT_EQ(a.data, synthesize_mstm(m, g).data);
}

TEST(Synthesis, SlicesShareTheMixingEigenbasis) {
  DispersionModel m = make_default_model(4, 100e-12, 2);
  const Mstm t = synthesize_mstm(m, small_grid(6));
  const CMatrix u = mixing_unitary(4, m.mixing_seed, m.mixing_strength);
  for (std::size_t k = 0; k < 6; ++k) {
    const CMatrix d = u.adjoint() * CMatrix(t.data.slice(k)) * u;
    EXPECT_LT((d - CMatrix(d.diagonal().asDiagonal())).norm(), 1e-12);
  }
}

TEST(DefaultModel, DelaysSpanTheRequestedRange) {
  const DispersionModel m = make_default_model(5, 400e-12, 1);
  const auto delays = m.group_delays_s();
  ASSERT_EQ(delays.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(delays[i], 100e-12 * static_cast<double>(i), 1e-24);
  EXPECT_TRUE(m.ideal_separable);
  EXPECT_FALSE(make_default_model(3, 0.0, 1).ideal_separable);
  EXPECT_TRUE(make_default_model(1, 0.0, 1).ideal_separable);
}

TEST(DefaultModel, RejectsBadArguments) {
  EXPECT_THROW(make_default_model(0, 1e-12, 1), DomainError);
  EXPECT_THROW(make_default_model(2, -1e-12, 1), DomainError);
}

TEST(DispersionModel, ValidateCatchesInconsistentModels) {
  DispersionModel m = make_default_model(3, 1e-10, 1);
  m.beta2.pop_back();
  EXPECT_THROW(m.validate(), DimensionError);
  m = make_default_model(3, 1e-10, 1);
  m.mixing_strength = 1.5;
  EXPECT_THROW(m.validate(), DomainError);
  m = make_default_model(3, 1e-10, 1);
  m.beta1[1] = m.beta1[0];
  EXPECT_THROW(m.validate(), DomainError);
}
