#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tbf/mub.hpp"

using namespace tbf;

namespace {

std::complex<double> omega_pow(std::size_t k, std::size_t d) {
  return std::polar(1.0, 2.0 * oracle::pi * static_cast<double>(k % d) / static_cast<double>(d));
}

// True when the basis equals `expected` up to per-state phase and order.
bool same_basis(const std::vector<StateVector>& got, const std::vector<CVector>& expected) {
  if (got.size() != expected.size()) return false;
  std::vector<bool> used(expected.size(), false);
  for (const auto& g : got) {
    bool found = false;
    for (std::size_t i = 0; i < expected.size() && !found; ++i)
      if (!used[i] && std::abs(oracle::overlap(g.amplitudes, expected[i]) - 1.0) < 1e-12) used[i] = found = true;
    if (!found) return false;
  }
  return true;
}

}  // namespace

class PrimePowerFamilies : public ::testing::TestWithParam<std::size_t> {};

TEST_P(PrimePowerFamilies, CompleteAndUnbiased) {
  const std::size_t d = GetParam();
  const MubFamily fam = mub_family(d);
  EXPECT_EQ(fam.dim, d);
  EXPECT_TRUE(fam.includes_computational);
  ASSERT_EQ(fam.bases.size(), d + 1);
  EXPECT_EQ(fam.bases[0].label, "computational");
  for (const auto& b : fam.bases) ASSERT_EQ(b.states.size(), d);
  const UnbiasednessReport r = verify_unbiased(fam);
  EXPECT_LT(r.max_gram_defect, 1e-12);
  EXPECT_LT(r.max_overlap_defect, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Mub, PrimePowerFamilies, ::testing::Values(2u, 3u, 4u, 5u, 7u, 8u, 9u, 11u, 13u, 16u, 25u, 27u));

TEST(MubState, OddPrimeMatchesQuadraticPhaseSum) {
  for (std::size_t d : {3u, 5u, 11u})
    for (std::size_t mu = 0; mu < d; ++mu)
      for (std::size_t a = 0; a < d; ++a) {
        const StateVector s = mub_state(d, mu, a);
        for (std::size_t t = 0; t < d; ++t) {
          const auto expect = omega_pow(a * t + mu * t * t, d) / std::sqrt(static_cast<double>(d));
          EXPECT_LT(std::abs(s.amplitudes(static_cast<Eigen::Index>(t)) - expect), 1e-14);
        }
      }
}

TEST(MubState, QubitBasesAreTheThreePauliBases) {
  const MubFamily fam = mub_family(2);
  const double r = 1.0 / std::sqrt(2.0);
  const CVector plus = (CVector(2) << r, r).finished(), minus = (CVector(2) << r, -r).finished();
  const CVector right = (CVector(2) << r, Complex(0, r)).finished(), left = (CVector(2) << r, Complex(0, -r)).finished();
  EXPECT_TRUE(same_basis(fam.bases[1].states, {plus, minus}));
  EXPECT_TRUE(same_basis(fam.bases[2].states, {right, left}));
}

TEST(MubState, FourDimensionalHadamardBasisListedFirst) {
  const MubFamily fam = mub_family(4);
  auto v = [](double a, double b, double c, double d) -> CVector { return (CVector(4) << a, b, c, d).finished() / 2.0; };
  const std::vector<CVector> listed = {v(1, 1, 1, 1), v(1, -1, 1, -1), v(1, 1, -1, -1), v(1, -1, -1, 1)};
  EXPECT_TRUE(same_basis(fam.bases[1].states, listed));
  for (std::size_t a = 0; a < 4; ++a)
    EXPECT_NEAR(oracle::overlap(fam.bases[1].states[a].amplitudes, listed[a]), 1.0, 1e-14);
}

TEST(MubState, NaiveQuadraticPhaseFailsForFour) {
  MubFamily naive;
  naive.dim = 4;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    MubBasis b{"mu", {}};
    for (std::size_t a = 0; a < 4; ++a) b.states.push_back(quadratic_phase_state(4, mu, a));
    naive.bases.push_back(b);
  }
  EXPECT_GT(verify_unbiased(naive).max_overlap_defect, 0.5);
}

TEST(MubState, StatesAreNormalized) {
  for (std::size_t d : {2u, 3u, 7u})
    for (std::size_t mu = 0; mu < d; ++mu)
      for (std::size_t a = 0; a < d; ++a) EXPECT_NEAR(mub_state(d, mu, a).amplitudes.norm(), 1.0, 1e-14);
}

TEST(MubState, RejectsNonPrimeAndOutOfRange) {
  EXPECT_THROW(mub_state(4, 0, 0), DomainError);
  EXPECT_THROW(mub_state(6, 0, 0), DomainError);
  EXPECT_THROW(mub_state(5, 5, 0), DomainError);
  EXPECT_THROW(mub_state(5, 0, 5), DomainError);
  EXPECT_THROW(computational_state(3, 3), DomainError);
}

TEST(MubFamily, RejectsNonPrimePowers) {
  for (std::size_t d : {0u, 1u, 6u, 10u, 12u}) EXPECT_THROW(mub_family(d), DomainError);
}

TEST(MubFamily, ProjectorsAreRankOne) {
  const MubFamily fam = mub_family(8);
  for (const auto& b : fam.bases)
    for (const auto& s : b.states) {
      const CMatrix p = s.projector();
      EXPECT_LT((p * p - p).norm(), 1e-12);
      EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
    }
}

TEST(MubFamily, ConstructionIsFast) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t d : {2u, 3u, 4u, 5u, 7u, 11u}) verify_unbiased(mub_family(d));
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(NumberTheory, PrimePowers) {
  EXPECT_TRUE(is_prime(2));
  EXPECT_TRUE(is_prime(11));
  EXPECT_FALSE(is_prime(1));
  EXPECT_FALSE(is_prime(9));
  EXPECT_EQ(prime_power(8), std::make_pair(std::size_t{2}, std::size_t{3}));
  EXPECT_EQ(prime_power(11), std::make_pair(std::size_t{11}, std::size_t{1}));
  EXPECT_EQ(prime_power(81), std::make_pair(std::size_t{3}, std::size_t{4}));
  EXPECT_FALSE(prime_power(12).has_value());
  EXPECT_FALSE(prime_power(1).has_value());
}
