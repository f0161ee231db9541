#include "splab/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "splab/errors.hpp"

namespace splab {

RadialMesh::RadialMesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 3) throw ConfigError("mesh needs at least 2 elements");
  if (nodes_.front() != 0.0) throw ConfigError("mesh must start at r = 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw ConfigError("mesh nodes must be strictly increasing");
}

std::size_t RadialMesh::locate(double r) const {
  if (r <= nodes_.front()) return 0;
  if (r >= nodes_.back()) return elements() - 1;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

RadialMesh build_sinh_mesh(std::size_t n, double r_max) {
  if (n < 2) throw ConfigError("sinh mesh: element count n must be >= 2 (got " + std::to_string(n) + ")");
  if (!(r_max > 0.0)) throw ConfigError("sinh mesh: r_max must be positive");
  const double dxi = std::asinh(r_max) / static_cast<double>(n);
  std::vector<double> r(n + 1);
  for (std::size_t j = 0; j <= n; ++j) r[j] = std::sinh(static_cast<double>(j) * dxi);
  r[0] = 0.0;
  r[n] = r_max;
  return RadialMesh(std::move(r));
}

RadialMesh build_uniform_mesh(std::size_t n, double r_max) {
  if (n < 2) throw ConfigError("uniform mesh: element count n must be >= 2");
  if (!(r_max > 0.0)) throw ConfigError("uniform mesh: r_max must be positive");
  std::vector<double> r(n + 1);
  for (std::size_t j = 0; j <= n; ++j) r[j] = r_max * static_cast<double>(j) / static_cast<double>(n);
  r[n] = r_max;
  return RadialMesh(std::move(r));
}

}  // namespace splab
