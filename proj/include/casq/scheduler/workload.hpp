// Copyright 2026 The casq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace casq::scheduler {

struct WorkloadSample {
  double duration = 0;  // seconds
  std::int64_t rows = 0;
  double cpu = 0;  // seconds
};

// Synthetic query mix with power-law durations: the density of duration x
// is proportional to x^-alpha for x >= min_duration. Rows and CPU follow
// the duration with some noise. Deterministic for a given seed.
// BadExponent unless alpha > 1; BadRequest if n == 0.
std::vector<WorkloadSample> generate_workload(std::size_t n, double alpha, std::uint64_t seed,
                                              double min_duration = 1.0);

struct PowerLawFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::size_t bins_used = 0;
};

// Least-squares line through log10(density) vs log10(bin centre) over
// logarithmic bins (counts divided by bin width). Empty bins are skipped.
PowerLawFit fit_power_law(const std::vector<double>& values, std::size_t bins = 30);

}  // namespace casq::scheduler
