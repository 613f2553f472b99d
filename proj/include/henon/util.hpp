#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace henon {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Hausdorff distance between two finite point sets.
template <typename PointT>
double hausdorff_distance(const std::vector<PointT>& a, const std::vector<PointT>& b) {
  auto one_sided = [](const std::vector<PointT>& s, const std::vector<PointT>& t) {
    double worst = 0.0;
    for (const auto& p : s) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : t) best = std::min(best, (p - q).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

// Deterministic fan-out: results are indexed, so the outcome does not depend
// on scheduling.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

std::uint64_t fnv1a(const std::string& data);
std::string hex64(std::uint64_t v);

inline std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<unsigned>(seed), static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(stream ^ 0x9e3779b9u),
                    static_cast<unsigned>((stream >> 32) ^ 0x7f4a7c15u)};
  return std::mt19937_64(seq);
}

// Shortest-round-trip-ish fixed formatting, for byte-stable CSV output.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();
  void row(const std::vector<std::string>& cells);

 private:
  void* file_;
};

std::string join_path(const std::string& dir, const std::string& name);

}  // namespace henon
