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

#include "rsfista/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "rsfista/errors.hpp"

namespace rsfista {

Cell Cell::parent() const {
  if (level == 0) throw InvalidRefinement("root cell has no parent");
  return Cell{level - 1, {index[0] >> 1, index[1] >> 1}};
}

Cell Cell::child(unsigned bits, int dim) const {
  Cell c{level + 1, {2 * index[0] + (bits & 1u), 0}};
  if (dim == 2) c.index[1] = 2 * index[1] + ((bits >> 1) & 1u);
  return c;
}

unsigned Cell::child_bits(int dim) const {
  unsigned b = static_cast<unsigned>(index[0] & 1);
  if (dim == 2) b |= static_cast<unsigned>(index[1] & 1) << 1;
  return b;
}

bool Cell::is_ancestor_of(const Cell& other) const {
  if (other.level < level) return false;
  const int shift = other.level - level;
  return (other.index[0] >> shift) == index[0] && (other.index[1] >> shift) == index[1];
}

Box Cell::box(const Box& domain) const {
  Box b = domain;
  for (int k = 0; k < domain.dim; ++k) {
    const double w = domain.width(k);
    b.lo[k] = domain.lo[k] + w * std::ldexp(static_cast<double>(index[k]), -level);
    b.hi[k] = domain.lo[k] + w * std::ldexp(static_cast<double>(index[k] + 1), -level);
  }
  return b;
}

Eigen::VectorXd Transfer::apply(const Eigen::VectorXd& old) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(source.size()));
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto s = source[i];
    if (s >= 0 && s >= old.size()) throw DomainMismatch("transfer source out of range");
    out[static_cast<Eigen::Index>(i)] = s < 0 ? 0.0 : old[s];
  }
  return out;
}

namespace {

void check_domain(const Box& domain) {
  if (domain.dim != 1 && domain.dim != 2)
    throw InvalidParameter("domain dimension must be 1 or 2");
  for (int k = 0; k < domain.dim; ++k)
    if (!(domain.hi[k] > domain.lo[k]) || !std::isfinite(domain.width(k)))
      throw InvalidParameter("domain box must have positive finite extent");
}

}  // namespace

DyadicMesh::DyadicMesh(Box domain, int max_depth) : domain_(domain), max_depth_(max_depth) {
  check_domain(domain_);
  if (max_depth_ < 0 || max_depth_ > 60) throw InvalidParameter("max_depth must lie in [0, 60]");
  leaves_.push_back(Cell{});
  reindex();
}

DyadicMesh DyadicMesh::uniform(Box domain, int level, int max_depth) {
  DyadicMesh mesh(domain, max_depth);
  if (level < 0 || level > max_depth) throw InvalidParameter("uniform level outside [0, max_depth]");
  const int dim = domain.dim;
  const std::int64_t n = std::int64_t{1} << level;
  std::vector<Cell> leaves;
  leaves.reserve(static_cast<std::size_t>(dim == 1 ? n : n * n));
  // Morton order is the depth-first order with children sorted by child bits.
  const std::int64_t total = dim == 1 ? n : n * n;
  for (std::int64_t code = 0; code < total; ++code) {
    Cell c{level, {0, 0}};
    if (dim == 1) {
      c.index[0] = code;
    } else {
      for (int b = 0; b < level; ++b) {
        c.index[0] |= ((code >> (2 * b)) & 1) << b;
        c.index[1] |= ((code >> (2 * b + 1)) & 1) << b;
      }
    }
    leaves.push_back(c);
  }
  mesh.leaves_ = std::move(leaves);
  mesh.reindex();
  return mesh;
}

DyadicMesh DyadicMesh::from_leaves(Box domain, std::vector<Cell> leaves, int max_depth) {
  DyadicMesh mesh(domain, max_depth);
  const int dim = domain.dim;
  std::unordered_set<Cell, CellHash> set;
  int deepest = 0;
  for (const Cell& c : leaves) {
    if (c.level < 0 || c.level > max_depth) throw InvalidRefinement("leaf level outside [0, max_depth]");
    const std::int64_t n = std::int64_t{1} << c.level;
    for (int k = 0; k < 2; ++k) {
      const std::int64_t hi = k < dim ? n : 1;
      if (c.index[k] < 0 || c.index[k] >= hi) throw InvalidRefinement("leaf index out of range");
    }
    if (!set.insert(c).second) throw InvalidRefinement("duplicate leaf");
    deepest = std::max(deepest, c.level);
  }
  std::vector<Cell> ordered;
  ordered.reserve(leaves.size());
  std::vector<Cell> stack{Cell{}};
  const unsigned nchild = 1u << dim;
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    if (set.count(c)) {
      ordered.push_back(c);
      continue;
    }
    if (c.level >= deepest) throw InvalidRefinement("leaves do not partition the domain");
    for (unsigned b = nchild; b-- > 0;) stack.push_back(c.child(b, dim));
  }
  if (ordered.size() != set.size()) throw InvalidRefinement("leaves overlap");
  mesh.leaves_ = std::move(ordered);
  mesh.reindex();
  return mesh;
}

void DyadicMesh::reindex() {
  position_.clear();
  position_.reserve(leaves_.size() * 2);
  for (std::size_t i = 0; i < leaves_.size(); ++i) position_.emplace(leaves_[i], i);
}

std::size_t DyadicMesh::position(const Cell& c) const {
  auto it = position_.find(c);
  if (it == position_.end())
    throw InvalidRefinement("cell (level " + std::to_string(c.level) + ") is not a leaf");
  return it->second;
}

double DyadicMesh::cell_measure(const Cell& c) const {
  return std::ldexp(domain_.measure(), -c.level * dim());
}

void DyadicMesh::apply_transfer(const Transfer& t,
                                std::span<PiecewiseConstant* const> carried) const {
  for (PiecewiseConstant* u : carried) {
    if (u == nullptr) continue;
    if (&u->mesh() != this) throw DomainMismatch("carried function lives on another mesh");
    u->coeffs() = t.apply(u->coeffs());
  }
}

DyadicMesh::RefineResult DyadicMesh::refine(std::span<const Cell> cells,
                                            std::span<PiecewiseConstant* const> carried) {
  for (PiecewiseConstant* u : carried)
    if (u != nullptr) u->check_consistent();
  std::unordered_set<Cell, CellHash> selected;
  RefineResult result;
  for (const Cell& c : cells) {
    position(c);  // validates leafness
    if (c.level >= max_depth_) {
      if (selected.count(c) == 0) ++result.depth_capped;
      continue;
    }
    selected.insert(c);
  }
  result.refined = selected.size();
  result.transfer.source.resize(leaves_.size());
  for (std::size_t i = 0; i < leaves_.size(); ++i)
    result.transfer.source[i] = static_cast<std::ptrdiff_t>(i);
  if (selected.empty()) return result;

  const unsigned nchild = 1u << dim();
  std::vector<Cell> next;
  next.reserve(leaves_.size() + selected.size() * (nchild - 1));
  std::vector<std::ptrdiff_t> source;
  source.reserve(next.capacity());
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const Cell& c = leaves_[i];
    if (selected.count(c)) {
      for (unsigned b = 0; b < nchild; ++b) {
        next.push_back(c.child(b, dim()));
        source.push_back(static_cast<std::ptrdiff_t>(i));
      }
    } else {
      next.push_back(c);
      source.push_back(static_cast<std::ptrdiff_t>(i));
    }
  }
  leaves_ = std::move(next);
  reindex();
  ++epoch_;
  result.transfer.source = std::move(source);
  apply_transfer(result.transfer, carried);
  return result;
}

Transfer DyadicMesh::coarsen_zero(std::span<const Cell> certified,
                                  std::span<PiecewiseConstant* const> carried) {
  for (PiecewiseConstant* u : carried)
    if (u != nullptr) u->check_consistent();
  std::unordered_set<Cell, CellHash> zero;
  for (const Cell& c : certified) {
    const std::size_t p = position(c);
    for (PiecewiseConstant* u : carried)
      if (u != nullptr && u->coeffs()[static_cast<Eigen::Index>(p)] != 0.0)
        throw ContractViolation("carried function is nonzero on a certified cell");
    zero.insert(c);
  }

  const unsigned nchild = 1u << dim();
  std::vector<Cell> work = leaves_;
  bool merged = true;
  bool changed = false;
  while (merged) {
    merged = false;
    std::vector<Cell> next;
    next.reserve(work.size());
    for (std::size_t i = 0; i < work.size();) {
      const Cell& c = work[i];
      bool group = c.level > 0 && c.child_bits(dim()) == 0 && i + nchild <= work.size();
      if (group) {
        const Cell p = c.parent();
        for (unsigned b = 0; b < nchild && group; ++b)
          group = work[i + b] == p.child(b, dim()) && zero.count(work[i + b]) != 0;
        if (group) {
          next.push_back(p);
          zero.insert(p);
          i += nchild;
          merged = changed = true;
          continue;
        }
      }
      next.push_back(c);
      ++i;
    }
    work = std::move(next);
  }

  Transfer t;
  t.source.reserve(work.size());
  for (const Cell& c : work) {
    auto it = position_.find(c);
    t.source.push_back(it == position_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second));
  }
  if (!changed) return t;
  leaves_ = std::move(work);
  reindex();
  apply_transfer(t, carried);
  return t;
}

Cell DyadicMesh::locate(const Point& x) const {
  if (!domain_.contains(x)) throw DomainMismatch("point outside the domain");
  Cell c{};
  while (!is_leaf(c)) {
    const Box b = cell_box(c);
    unsigned bits = 0;
    for (int k = 0; k < dim(); ++k) {
      const double mid = 0.5 * (b.lo[k] + b.hi[k]);
      if (x[k] >= mid) bits |= 1u << k;
    }
    c = c.child(bits, dim());
    if (c.level > max_depth_) throw InvalidRefinement("mesh is not a complete tree");
  }
  return c;
}

double DyadicMesh::min_cell_width() const {
  double w = std::numeric_limits<double>::infinity();
  const int lvl = max_level();
  for (int k = 0; k < dim(); ++k) w = std::min(w, std::ldexp(domain_.width(k), -lvl));
  return w;
}

int DyadicMesh::max_level() const {
  int lvl = 0;
  for (const Cell& c : leaves_) lvl = std::max(lvl, c.level);
  return lvl;
}

double DyadicMesh::total_measure() const {
  double s = 0.0;
  for (const Cell& c : leaves_) s += cell_measure(c);
  return s;
}

PiecewiseConstant::PiecewiseConstant(const DyadicMesh& mesh, double value)
    : mesh_(&mesh),
      coeffs_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.leaf_count()), value)) {}

PiecewiseConstant::PiecewiseConstant(const DyadicMesh& mesh, Eigen::VectorXd coeffs)
    : mesh_(&mesh), coeffs_(std::move(coeffs)) {
  check_consistent();
}

void PiecewiseConstant::check_consistent() const {
  if (static_cast<std::size_t>(coeffs_.size()) != mesh_->leaf_count())
    throw DomainMismatch("coefficient count " + std::to_string(coeffs_.size()) +
                         " does not match leaf count " + std::to_string(mesh_->leaf_count()));
}

double PiecewiseConstant::value_at(const Point& x) const {
  check_consistent();
  return coeffs_[static_cast<Eigen::Index>(mesh_->position(mesh_->locate(x)))];
}

double PiecewiseConstant::l2_norm() const {
  check_consistent();
  double s = 0.0;
  const auto& leaves = mesh_->leaves();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const double c = coeffs_[static_cast<Eigen::Index>(i)];
    s += c * c * mesh_->cell_measure(leaves[i]);
  }
  return std::sqrt(s);
}

double PiecewiseConstant::mass_norm() const {
  check_consistent();
  double s = 0.0;
  const auto& leaves = mesh_->leaves();
  for (std::size_t i = 0; i < leaves.size(); ++i)
    s += std::abs(coeffs_[static_cast<Eigen::Index>(i)]) * mesh_->cell_measure(leaves[i]);
  return s;
}

Eigen::VectorXd leaf_measures(const DyadicMesh& mesh) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(mesh.leaf_count()));
  for (std::size_t i = 0; i < mesh.leaf_count(); ++i)
    w[static_cast<Eigen::Index>(i)] = mesh.cell_measure(mesh.leaves()[i]);
  return w;
}

}  // namespace rsfista
