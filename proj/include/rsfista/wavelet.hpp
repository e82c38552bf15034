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

#ifndef RSFISTA_WAVELET_HPP
#define RSFISTA_WAVELET_HPP

#include <Eigen/Core>
#include <span>
#include <unordered_map>
#include <vector>

#include "rsfista/kernels.hpp"
#include "rsfista/mesh.hpp"

namespace rsfista {

/// One basis function: the scaling function of the whole domain
/// (pattern 0 on the root cell) or a Haar detail on `cell`, where bit k of
/// `pattern` selects the sign-alternating factor along axis k.
struct WaveletIndex {
  Cell cell;
  unsigned pattern = 0;

  bool is_scaling() const { return pattern == 0; }
};

/// Haar basis over an active tree. The internal nodes of the leaf mesh are
/// exactly the detail nodes; each carries 2^d - 1 coefficients. Basis
/// indices are stable: growing only appends.
class WaveletTree {
 public:
  explicit WaveletTree(Box domain, int max_depth = DyadicMesh::kDefaultMaxDepth);

  const Box& domain() const { return mesh_.domain(); }
  int dim() const { return mesh_.dim(); }
  const DyadicMesh& leaf_mesh() const { return mesh_; }
  std::size_t size() const { return basis_.size(); }
  const std::vector<WaveletIndex>& basis() const { return basis_; }
  bool is_detail_node(const Cell& c) const { return first_.count(c) != 0; }
  /// Basis index of a detail (cell, pattern).
  std::size_t index_of(const Cell& c, unsigned pattern) const;

  /// Turns the given leaves into detail nodes. Returns the new basis
  /// indices (appended). Leaves at max depth are skipped and counted.
  std::vector<std::size_t> expand(std::span<const Cell> leaves, std::size_t* capped = nullptr);

  /// Leaf densities of sum_i c_i w_i.
  Eigen::VectorXd synthesize_leaves(const Eigen::VectorXd& coeffs) const;
  PiecewiseConstant synthesize(const Eigen::VectorXd& coeffs) const;
  /// Coefficients <u, w_i>.
  Eigen::VectorXd analyze(const PiecewiseConstant& u) const;

  /// Column <psi_j, w_i> for all j.
  Eigen::VectorXd column(const KernelOperator& op, std::size_t i) const;
  /// Brings a cached column matrix of A∘W up to date with the basis; columns
  /// already present are reused.
  void update_columns(const KernelOperator& op, Eigen::MatrixXd& cols) const;

  /// Upper bound on ||1_T A*phi||_{L2} for each leaf T.
  Eigen::VectorXd leaf_tail_bound(const KernelOperator& op, const Eigen::VectorXd& phi) const;

  struct GrowResult {
    std::vector<std::size_t> added;
    bool depth_capped = false;
    int rounds = 0;
  };
  /// Expands leaves until tail - mu <= factor * disc_grad_norm everywhere
  /// (or the depth cap, or `max_new` new coefficients, is reached).
  GrowResult grow(const KernelOperator& op, const Eigen::VectorXd& phi, double mu,
                  double disc_grad_norm, double factor, std::size_t max_new = 1u << 20);

  /// Rebuilds a tree from its detail nodes.
  static WaveletTree from_nodes(Box domain, std::vector<Cell> nodes,
                                int max_depth = DyadicMesh::kDefaultMaxDepth);
  /// Detail nodes in basis order.
  std::vector<Cell> detail_nodes() const;

 private:
  double sign_on_child(unsigned pattern, unsigned child_bits) const;

  DyadicMesh mesh_;
  std::vector<WaveletIndex> basis_;
  std::unordered_map<Cell, std::size_t, CellHash> first_;
};

}  // namespace rsfista

#endif  // RSFISTA_WAVELET_HPP
