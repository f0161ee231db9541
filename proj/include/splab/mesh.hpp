#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace splab {

/// Nodes r_0 = 0 < r_1 < ... < r_n = r_max of a radial grid.
class RadialMesh {
 public:
  RadialMesh() = default;  // empty placeholder
  explicit RadialMesh(std::vector<double> nodes);

  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t elements() const noexcept { return nodes_.empty() ? 0 : nodes_.size() - 1; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double r_max() const noexcept { return nodes_.back(); }
  double operator[](std::size_t i) const noexcept { return nodes_[i]; }
  double width(std::size_t e) const noexcept { return nodes_[e + 1] - nodes_[e]; }
  std::span<const double> nodes() const noexcept { return nodes_; }

  /// Index of the element containing r (clamped to the mesh).
  std::size_t locate(double r) const;

 private:
  std::vector<double> nodes_;
};

/// r_j = sinh(j·δξ), δξ = arcsinh(r_max)/n: linear spacing near the origin,
/// exponential stretching in the tail. The last node is set to r_max exactly.
RadialMesh build_sinh_mesh(std::size_t n, double r_max);

RadialMesh build_uniform_mesh(std::size_t n, double r_max);

}  // namespace splab
