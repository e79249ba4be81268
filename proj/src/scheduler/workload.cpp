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

#include "casq/scheduler/workload.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "casq/core/error.hpp"

namespace casq::scheduler {

std::vector<WorkloadSample> generate_workload(std::size_t n, double alpha, std::uint64_t seed,
                                              double min_duration) {
  if (!(alpha > 1.0)) fail(ErrorCode::BadExponent, "exponent must exceed 1, got " + std::to_string(alpha));
  if (n == 0) fail(ErrorCode::BadRequest, "sample count must be positive");
  if (!(min_duration > 0)) fail(ErrorCode::BadRequest, "minimum duration must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<WorkloadSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(rng);
    WorkloadSample s;
    s.duration = min_duration * std::pow(1.0 - u, -1.0 / (alpha - 1.0));
    s.cpu = s.duration * (0.2 + 0.8 * unit(rng));
    s.rows = static_cast<std::int64_t>(s.duration * (100.0 + 900.0 * unit(rng)));
    out.push_back(s);
  }
  return out;
}

PowerLawFit fit_power_law(const std::vector<double>& values, std::size_t bins) {
  PowerLawFit fit;
  std::vector<double> v;
  for (double x : values) {
    if (x > 0) v.push_back(x);
  }
  if (v.size() < 2 || bins < 2) return fit;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = std::log10(*lo_it);
  const double hi = std::log10(*hi_it) + 1e-12;
  const double step = (hi - lo) / static_cast<double>(bins);
  if (step <= 0) return fit;
  std::vector<double> counts(bins, 0.0);
  for (double x : v) {
    auto b = static_cast<std::size_t>((std::log10(x) - lo) / step);
    counts[std::min(b, bins - 1)] += 1;
  }
  std::vector<double> xs, ys;
  for (std::size_t b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    const double left = std::pow(10.0, lo + step * static_cast<double>(b));
    const double right = std::pow(10.0, lo + step * static_cast<double>(b + 1));
    xs.push_back(std::log10(std::sqrt(left * right)));
    ys.push_back(std::log10(counts[b] / (right - left)));
  }
  const auto m = static_cast<double>(xs.size());
  fit.bins_used = xs.size();
  if (xs.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / m;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace casq::scheduler
