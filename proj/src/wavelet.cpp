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

#include "rsfista/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rsfista/certify.hpp"
#include "rsfista/errors.hpp"

namespace rsfista {

WaveletTree::WaveletTree(Box domain, int max_depth) : mesh_(domain, max_depth) {
  basis_.push_back(WaveletIndex{Cell{}, 0});
}

double WaveletTree::sign_on_child(unsigned pattern, unsigned child_bits) const {
  // Lower half along a selected axis is negative, upper half positive.
  const unsigned negative = pattern & ~child_bits;
  return (std::popcount(negative) % 2) ? -1.0 : 1.0;
}

std::size_t WaveletTree::index_of(const Cell& c, unsigned pattern) const {
  const unsigned npat = (1u << dim()) - 1;
  auto it = first_.find(c);
  if (it == first_.end() || pattern == 0 || pattern > npat)
    throw InvalidRefinement("no such wavelet in the tree");
  return it->second + pattern - 1;
}

std::vector<std::size_t> WaveletTree::expand(std::span<const Cell> leaves, std::size_t* capped) {
  std::vector<Cell> todo;
  std::size_t skipped = 0;
  for (const Cell& c : leaves) {
    mesh_.position(c);  // must be a leaf
    if (c.level >= mesh_.max_depth()) {
      ++skipped;
      continue;
    }
    if (std::find(todo.begin(), todo.end(), c) == todo.end()) todo.push_back(c);
  }
  if (capped != nullptr) *capped = skipped;
  std::vector<std::size_t> added;
  if (todo.empty()) return added;
  // Deterministic order independent of the caller.
  std::sort(todo.begin(), todo.end());
  const unsigned npat = (1u << dim()) - 1;
  for (const Cell& c : todo) {
    first_.emplace(c, basis_.size());
    for (unsigned p = 1; p <= npat; ++p) {
      added.push_back(basis_.size());
      basis_.push_back(WaveletIndex{c, p});
    }
  }
  mesh_.refine(todo);
  return added;
}

Eigen::VectorXd WaveletTree::synthesize_leaves(const Eigen::VectorXd& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) != basis_.size())
    throw DomainMismatch("coefficient count differs from the basis size");
  const auto& leaves = mesh_.leaves();
  const unsigned npat = (1u << dim()) - 1;
  const double root = coeffs[0] / std::sqrt(domain().measure());
  Eigen::VectorXd out(static_cast<Eigen::Index>(leaves.size()));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Cell& leaf = leaves[i];
    double v = root;
    for (int lvl = leaf.level - 1; lvl >= 0; --lvl) {
      const int shift = leaf.level - lvl;
      const Cell anc{lvl, {leaf.index[0] >> shift, leaf.index[1] >> shift}};
      const Cell below{lvl + 1, {leaf.index[0] >> (shift - 1), leaf.index[1] >> (shift - 1)}};
      const unsigned bits = below.child_bits(dim());
      const std::size_t f = first_.at(anc);
      const double amp = 1.0 / std::sqrt(mesh_.cell_measure(anc));
      for (unsigned p = 1; p <= npat; ++p)
        v += coeffs[static_cast<Eigen::Index>(f + p - 1)] * amp * sign_on_child(p, bits);
    }
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

PiecewiseConstant WaveletTree::synthesize(const Eigen::VectorXd& coeffs) const {
  return PiecewiseConstant(mesh_, synthesize_leaves(coeffs));
}

Eigen::VectorXd WaveletTree::analyze(const PiecewiseConstant& u) const {
  if (&u.mesh() != &mesh_) {
    if (u.mesh().leaves() != mesh_.leaves() || u.mesh().domain().lo != domain().lo ||
        u.mesh().domain().hi != domain().hi)
      throw DomainMismatch("function does not live on the tree's leaf mesh");
  }
  u.check_consistent();
  const auto& leaves = mesh_.leaves();
  const unsigned npat = (1u << dim()) - 1;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
  const double root_amp = 1.0 / std::sqrt(domain().measure());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Cell& leaf = leaves[i];
    const double mass = u.coeffs()[static_cast<Eigen::Index>(i)] * mesh_.cell_measure(leaf);
    if (mass == 0.0) continue;
    c[0] += mass * root_amp;
    for (int lvl = leaf.level - 1; lvl >= 0; --lvl) {
      const int shift = leaf.level - lvl;
      const Cell anc{lvl, {leaf.index[0] >> shift, leaf.index[1] >> shift}};
      const Cell below{lvl + 1, {leaf.index[0] >> (shift - 1), leaf.index[1] >> (shift - 1)}};
      const unsigned bits = below.child_bits(dim());
      const std::size_t f = first_.at(anc);
      const double amp = 1.0 / std::sqrt(mesh_.cell_measure(anc));
      for (unsigned p = 1; p <= npat; ++p)
        c[static_cast<Eigen::Index>(f + p - 1)] += mass * amp * sign_on_child(p, bits);
    }
  }
  return c;
}

Eigen::VectorXd WaveletTree::column(const KernelOperator& op, std::size_t i) const {
  if (i >= basis_.size()) throw DomainMismatch("basis index out of range");
  const WaveletIndex& w = basis_[i];
  if (w.is_scaling())
    return op.cell_inner_products(domain()) / std::sqrt(domain().measure());
  const double amp = 1.0 / std::sqrt(mesh_.cell_measure(w.cell));
  Eigen::VectorXd col = Eigen::VectorXd::Zero(op.m());
  const unsigned nchild = 1u << dim();
  for (unsigned b = 0; b < nchild; ++b)
    col += sign_on_child(w.pattern, b) * op.cell_inner_products(mesh_, w.cell.child(b, dim()));
  return amp * col;
}

void WaveletTree::update_columns(const KernelOperator& op, Eigen::MatrixXd& cols) const {
  const Eigen::Index have = cols.cols();
  const auto total = static_cast<Eigen::Index>(basis_.size());
  if (have > total || (have > 0 && cols.rows() != op.m()))
    throw DomainMismatch("column cache does not belong to this tree");
  if (have == total) return;
  cols.conservativeResize(op.m(), total);
  const unsigned nchild = 1u << dim();
  const unsigned npat = nchild - 1;
  std::vector<Eigen::VectorXd> child(nchild);
  for (Eigen::Index i = have; i < total;) {
    const WaveletIndex& w = basis_[static_cast<std::size_t>(i)];
    if (w.is_scaling()) {
      cols.col(i) = column(op, static_cast<std::size_t>(i));
      ++i;
      continue;
    }
    // Patterns of one node are contiguous; share the child integrals.
    for (unsigned b = 0; b < nchild; ++b)
      child[b] = op.cell_inner_products(mesh_, w.cell.child(b, dim()));
    const double amp = 1.0 / std::sqrt(mesh_.cell_measure(w.cell));
    for (unsigned p = 1; p <= npat; ++p, ++i) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(op.m());
      for (unsigned b = 0; b < nchild; ++b) col += sign_on_child(p, b) * child[b];
      cols.col(i) = amp * col;
    }
  }
}

Eigen::VectorXd WaveletTree::leaf_tail_bound(const KernelOperator& op,
                                             const Eigen::VectorXd& phi) const {
  const auto& leaves = mesh_.leaves();
  Eigen::VectorXd out(static_cast<Eigen::Index>(leaves.size()));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Box box = mesh_.cell_box(leaves[i]);
    const double sup = op.kind() == KernelKind::Indicator ? op.indicator_sup_bound(phi, box)
                                                          : cell_sup_bound(op, phi, box, 1);
    out[static_cast<Eigen::Index>(i)] = std::sqrt(box.measure()) * sup;
  }
  return out;
}

WaveletTree::GrowResult WaveletTree::grow(const KernelOperator& op, const Eigen::VectorXd& phi,
                                          double mu, double disc_grad_norm, double factor,
                                          std::size_t max_new) {
  if (!(factor > 0.0)) throw InvalidParameter("growth factor must be positive");
  GrowResult result;
  const double allowed = factor * disc_grad_norm;
  while (result.added.size() < max_new) {
    const Eigen::VectorXd tails = leaf_tail_bound(op, phi);
    std::vector<Cell> offending;
    const auto& leaves = mesh_.leaves();
    for (std::size_t i = 0; i < leaves.size(); ++i)
      if (tails[static_cast<Eigen::Index>(i)] - mu > allowed) offending.push_back(leaves[i]);
    if (offending.empty()) break;
    std::size_t capped = 0;
    const auto added = expand(offending, &capped);
    if (capped > 0) result.depth_capped = true;
    if (added.empty()) break;
    result.added.insert(result.added.end(), added.begin(), added.end());
    ++result.rounds;
  }
  return result;
}

WaveletTree WaveletTree::from_nodes(Box domain, std::vector<Cell> nodes, int max_depth) {
  WaveletTree tree(domain, max_depth);
  // Nodes come in creation order, so each parent precedes its children and
  // the rebuilt basis has the same indices.
  for (const Cell& c : nodes) {
    if (!tree.mesh_.is_leaf(c)) throw InvalidRefinement("detail nodes are not a tree");
    tree.expand(std::span<const Cell>(&c, 1));
  }
  return tree;
}

std::vector<Cell> WaveletTree::detail_nodes() const {
  std::vector<Cell> out;
  for (const WaveletIndex& w : basis_)
    if (w.pattern == 1) out.push_back(w.cell);
  return out;
}

}  // namespace rsfista
