#include <algorithm>
#include <cmath>
#include <numeric>

#include "qieo/baselines.hpp"

namespace qieo {

std::vector<std::size_t> top_magnitudes(std::span<const double> values, std::size_t count) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, values.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ma = std::abs(values[a]);
                      const double mb = std::abs(values[b]);
                      return ma != mb ? ma > mb : a < b;
                    });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace qieo
