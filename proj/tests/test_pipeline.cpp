#include <cmath>

#include <gtest/gtest.h>

#include "tbf/mub.hpp"
#include "tbf/parallel.hpp"
#include "tbf/pipeline.hpp"

using namespace tbf;

namespace {

DeviceConfig small_config(std::size_t d) {
  DeviceConfig c;
  c.dim = d;
  c.freq_samples = 512;
  c.window_s = 120e-12;
  return c;
}

}  // namespace

TEST(Pipeline, DeviceDelaysFollowTheLadder) {
  const SimulatedDevice dev = build_device(small_config(2));
  const auto delays = dev.device.basis().delays_s();
  ASSERT_EQ(delays.size(), 2u);
  EXPECT_NEAR(delays[0], 0.0, 5e-12);
  EXPECT_NEAR(delays[1], 160e-12, 5e-12);
  EXPECT_NEAR(dev.device.calibration(120e-12), 1.0, 1e-3);
}

TEST(Pipeline, ConfigResolution) {
  DeviceConfig c;
  c.dim = 3;
  EXPECT_EQ(c.resolved_fiber_modes(), 3u);
  EXPECT_NEAR(c.resolved_span_s(), 320e-12, 1e-24);
  EXPECT_NEAR(c.resolved_window_s(), 80e-12, 1e-24);
  const FreqGrid g = c.freq_grid();
  EXPECT_NEAR(g.resolution_s(), 5e-12, 1e-15);
  EXPECT_EQ(g.samples, 1024u);
}

TEST(Pipeline, NoiselessExpectationTomographyIsExact) {
  const SimulatedDevice dev = build_device(small_config(2));
  NoiseSpec noise;
  noise.expectation = true;
  for (const auto& target : mub_targets(2)) {
    const MonteCarloResult r = monte_carlo_fidelity(dev, target, 3, noise);
    EXPECT_GE(r.mean, 0.9999);
    EXPECT_LT(r.std, 1e-6);
    EXPECT_EQ(r.unconverged, 0u);
  }
}

TEST(Pipeline, FourDimensionalProjectorsRecovered) {
  const SimulatedDevice dev = build_device(small_config(4));
  NoiseSpec noise;
  noise.expectation = true;
  const auto targets = mub_targets(4);
  ASSERT_EQ(targets.size(), 16u);
  for (std::size_t i = 0; i < targets.size(); i += 5) {
    const Reconstruction rec = reconstruct(simulate_tomography(dev, targets[i].amplitudes, noise, 0));
    EXPECT_GE(fidelity(rec.op, targets[i]).value, 0.9999) << "target " << i;
  }
}

TEST(Pipeline, SimulationIsDeterministic) {
  const SimulatedDevice dev = build_device(small_config(2));
  NoiseSpec noise;
  noise.rng_seed = 17;
  noise.drift_std_per_probe_rad = 0.05;
  noise.franson_phase_std_rad = 0.1;
  noise.mean_counts_per_setting = 500;
  const CVector target = mub_targets(2)[0].amplitudes;
  const TomoDataset a = simulate_tomography(dev, target, noise, 3);
  const TomoDataset b = simulate_tomography(dev, target, noise, 3);
  EXPECT_EQ(a.yields, b.yields);
  const TomoDataset c = simulate_tomography(dev, target, noise, 4);
  EXPECT_NE(a.yields, c.yields);
}

TEST(Pipeline, ThreadCountDoesNotChangeResults) {
  const SimulatedDevice dev = build_device(small_config(2));
  NoiseSpec noise;
  noise.rng_seed = 5;
  noise.mean_counts_per_setting = 300;
  const StateVector target = mub_targets(2)[1];
  const unsigned before = max_threads();
  set_max_threads(1);
  const MonteCarloResult one = monte_carlo_fidelity(dev, target, 6, noise);
  set_max_threads(4);
  const MonteCarloResult four = monte_carlo_fidelity(dev, target, 6, noise);
  set_max_threads(before);
  EXPECT_EQ(one.fidelities, four.fidelities);
  EXPECT_EQ(one.mean, four.mean);
}

TEST(Pipeline, ShotNoiseLowersFidelity) {
  const SimulatedDevice dev = build_device(small_config(2));
  NoiseSpec noise;
  noise.rng_seed = 9;
  noise.mean_counts_per_setting = 200;
  const MonteCarloResult r = monte_carlo_fidelity(dev, mub_targets(2)[0], 20, noise);
  EXPECT_LT(r.mean, 0.99999);
  EXPECT_GT(r.mean, 0.8);
  EXPECT_GT(r.std, 0.0);
}

TEST(Pipeline, PeaksSumToOne) {
  const SimulatedDevice dev = build_device(small_config(2));
  const CVector plus = mub_targets(2)[0].amplitudes;
  NoiseSpec noise;
  noise.expectation = true;
  const PeakWeights w = simulate_peaks(dev, plus, plus, noise, 0);
  ASSERT_EQ(w.normalized.size(), 3u);
  double s = 0.0;
  for (double x : w.normalized) s += x;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_GT(w.normalized[1], w.normalized[0]);
}

TEST(Pipeline, Errors) {
  const SimulatedDevice dev = build_device(small_config(2));
  EXPECT_THROW(monte_carlo_fidelity(dev, mub_targets(2)[0], 1, NoiseSpec{}), DomainError);
  EXPECT_THROW(simulate_tomography(dev, CVector::Ones(3), NoiseSpec{}, 0), DimensionError);
  EXPECT_THROW(mub_targets(6), DomainError);
}
