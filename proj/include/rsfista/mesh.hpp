// Copyright 2026 The rsfista Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RSFISTA_MESH_HPP
#define RSFISTA_MESH_HPP

#include <Eigen/Core>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rsfista/geometry.hpp"

namespace rsfista {

/// A node of the dyadic 2^d-tree over the domain box: level k and integer
/// coordinates in [0, 2^k)^d. Boxes are half-open except on the upper faces
/// of the domain.
struct Cell {
  int level = 0;
  std::array<std::int64_t, 2> index{0, 0};

  auto operator<=>(const Cell&) const = default;

  Cell parent() const;
  /// Child selected by `bits`: bit k set means the upper half along axis k.
  Cell child(unsigned bits, int dim) const;
  /// Position of this cell inside its parent, as child bits.
  unsigned child_bits(int dim) const;
  /// True when `other` is this cell or one of its descendants.
  bool is_ancestor_of(const Cell& other) const;

  Box box(const Box& domain) const;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.level) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(c.index[0]) + 0x632BE59BD9B4E019ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(c.index[1]) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Maps coefficient vectors across a change of leaf set: new[i] copies
/// old[source[i]], or is zero when source[i] < 0.
struct Transfer {
  std::vector<std::ptrdiff_t> source;

  Eigen::VectorXd apply(const Eigen::VectorXd& old) const;
};

class PiecewiseConstant;

/// Adaptive dyadic partition of a box. Leaves are stored in depth-first
/// order with children ordered by their child bits.
class DyadicMesh {
 public:
  static constexpr int kDefaultMaxDepth = 40;

  explicit DyadicMesh(Box domain, int max_depth = kDefaultMaxDepth);
  static DyadicMesh uniform(Box domain, int level, int max_depth = kDefaultMaxDepth);
  /// Rebuilds a mesh from an explicit leaf list; throws if the cells do not
  /// partition the domain.
  static DyadicMesh from_leaves(Box domain, std::vector<Cell> leaves,
                                int max_depth = kDefaultMaxDepth);

  const Box& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  int max_depth() const { return max_depth_; }
  std::size_t epoch() const { return epoch_; }
  const std::vector<Cell>& leaves() const { return leaves_; }
  std::size_t leaf_count() const { return leaves_.size(); }

  bool is_leaf(const Cell& c) const { return position_.count(c) != 0; }
  /// Index of a leaf in leaves(); throws InvalidRefinement for non-leaves.
  std::size_t position(const Cell& c) const;

  Box cell_box(const Cell& c) const { return c.box(domain_); }
  double cell_measure(const Cell& c) const;

  struct RefineResult {
    Transfer transfer;
    std::size_t refined = 0;
    /// Selected leaves left unrefined because they sit at max_depth.
    std::size_t depth_capped = 0;
  };

  /// Splits each selected leaf into its 2^d children. Carried functions keep
  /// their values (coefficients copied to the children).
  RefineResult refine(std::span<const Cell> cells,
                      std::span<PiecewiseConstant* const> carried = {});

  /// Merges sibling groups whose members are all certified, recursively.
  /// Every carried function must vanish on each certified leaf.
  Transfer coarsen_zero(std::span<const Cell> certified,
                        std::span<PiecewiseConstant* const> carried = {});

  /// Leaf containing x (half-open cells; upper domain faces are closed).
  Cell locate(const Point& x) const;
  double min_cell_width() const;
  int max_level() const;

  /// Sum of leaf measures; equals |domain| up to rounding.
  double total_measure() const;

 private:
  void reindex();
  void apply_transfer(const Transfer& t, std::span<PiecewiseConstant* const> carried) const;

  Box domain_;
  int max_depth_;
  std::size_t epoch_ = 0;
  std::vector<Cell> leaves_;
  std::unordered_map<Cell, std::size_t, CellHash> position_;
};

/// A function constant on every leaf. Coefficients are densities: the mass
/// of a cell is coeff * |T|.
class PiecewiseConstant {
 public:
  explicit PiecewiseConstant(const DyadicMesh& mesh, double value = 0.0);
  PiecewiseConstant(const DyadicMesh& mesh, Eigen::VectorXd coeffs);

  const DyadicMesh& mesh() const { return *mesh_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  double value_at(const Point& x) const;
  double l2_norm() const;
  /// Total variation norm, sum of |c_T| |T|.
  double mass_norm() const;

  /// Throws DomainMismatch when the coefficient count disagrees with the mesh.
  void check_consistent() const;

 private:
  const DyadicMesh* mesh_;
  Eigen::VectorXd coeffs_;
};

/// Leaf measures |T| in leaf order.
Eigen::VectorXd leaf_measures(const DyadicMesh& mesh);

}  // namespace rsfista

#endif  // RSFISTA_MESH_HPP
