#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oco {

/// One server: a power interval [x_min, x_max] and an increasing concave
/// service curve h(x) = h_a * log(1 + h_b * x). Defaults follow the standard
/// configuration x in [0, 30], h(x) = 4 log(1 + 4x).
struct ServerModel {
  int zone = 0;
  double x_min = 0.0;
  double x_max = 30.0;
  double h_a = 4.0;
  double h_b = 4.0;

  double rate(double x) const { return h_a * std::log1p(h_b * x); }
  double rate_slope(double x) const { return h_a * h_b / (1.0 + h_b * x); }
  double max_rate() const { return rate(x_max); }
  double min_rate() const { return rate(x_min); }

  void validate() const {
    if (!(x_min >= 0.0) || !(x_max > x_min)) throw std::invalid_argument("server: need 0 <= x_min < x_max");
    if (!(h_a > 0.0) || !(h_b > 0.0)) throw std::invalid_argument("server: h must be increasing and concave");
  }

  /// Power level whose rate equals mu, clamped to the interval. Bisection to
  /// interval width 1e-10.
  double power_for_rate(double mu) const {
    if (mu <= min_rate()) return x_min;
    if (mu >= max_rate()) return x_max;
    double lo = x_min, hi = x_max;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (rate(mid) < mu ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

/// n identical servers split into contiguous zone clusters.
inline std::vector<ServerModel> make_fleet(int n_servers, int n_zones, const ServerModel& prototype = {}) {
  if (n_servers < 1 || n_zones < 1 || n_servers % n_zones != 0)
    throw std::invalid_argument("fleet: server count must be a positive multiple of the zone count");
  prototype.validate();
  std::vector<ServerModel> fleet(static_cast<size_t>(n_servers), prototype);
  const int per_zone = n_servers / n_zones;
  for (int i = 0; i < n_servers; ++i) fleet[static_cast<size_t>(i)].zone = i / per_zone;
  return fleet;
}

inline double fleet_capacity(const std::vector<ServerModel>& fleet) {
  double c = 0.0;
  for (const auto& s : fleet) c += s.max_rate();
  return c;
}

}  // namespace oco
