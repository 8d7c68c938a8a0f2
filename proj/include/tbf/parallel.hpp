#pragma once

#include <cstddef>
#include <functional>

namespace tbf {

/// Upper bound on worker threads used by internal loops. 0 selects the
/// hardware concurrency. Results never depend on this value.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tbf
