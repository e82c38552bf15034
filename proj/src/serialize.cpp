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

#include "rsfista/serialize.hpp"

#include <type_traits>

#include "rsfista/errors.hpp"

namespace rsfista {

using Json = nlohmann::json;

namespace {

Json box_json(const Box& b) {
  Json lo = Json::array(), hi = Json::array();
  for (int k = 0; k < b.dim; ++k) {
    lo.push_back(b.lo[k]);
    hi.push_back(b.hi[k]);
  }
  return {{"lo", lo}, {"hi", hi}};
}

const Json& field(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key)) throw SchemaError(path + "." + key, "missing");
  return doc.at(key);
}

template <class T>
T number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  }
  return v.get<T>();
}

Box box_from(const Json& doc, const std::string& path) {
  const Json& lo = field(doc, "lo", path);
  const Json& hi = field(doc, "hi", path);
  if (!lo.is_array() || !hi.is_array() || lo.size() != hi.size() || lo.empty() || lo.size() > 2)
    throw SchemaError(path, "expected lo and hi arrays of length 1 or 2");
  Box b;
  b.dim = static_cast<int>(lo.size());
  b.lo = {0.0, 0.0};
  b.hi = {0.0, 0.0};
  for (int k = 0; k < b.dim; ++k) {
    b.lo[k] = number<double>(lo[k], path + ".lo");
    b.hi[k] = number<double>(hi[k], path + ".hi");
    if (!(b.hi[k] > b.lo[k])) throw SchemaError(path, "empty box");
  }
  return b;
}

Cell cell_from(const Json& rec, int dim, const std::string& path) {
  Cell c;
  c.level = number<int>(field(rec, "level", path), path + ".level");
  const Json& idx = field(rec, "index", path);
  if (!idx.is_array() || static_cast<int>(idx.size()) != dim)
    throw SchemaError(path + ".index", "expected one integer per axis");
  for (int k = 0; k < dim; ++k) c.index[k] = number<std::int64_t>(idx[k], path + ".index");
  return c;
}

Json index_json(const Cell& c, int dim) {
  Json a = Json::array();
  for (int k = 0; k < dim; ++k) a.push_back(c.index[k]);
  return a;
}

}  // namespace

Json mesh_to_json(const DyadicMesh& mesh, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != static_cast<Eigen::Index>(mesh.leaf_count()))
    throw DomainMismatch("coefficient count differs from the leaf count");
  Json cells = Json::array();
  for (std::size_t i = 0; i < mesh.leaf_count(); ++i) {
    const Cell& c = mesh.leaves()[i];
    cells.push_back({{"level", c.level},
                     {"index", index_json(c, mesh.dim())},
                     {"coeff", coeffs[static_cast<Eigen::Index>(i)]}});
  }
  return {{"domain", box_json(mesh.domain())}, {"max_depth", mesh.max_depth()}, {"cells", cells}};
}

MeshFunction mesh_from_json(const Json& doc, const std::string& path) {
  const Box domain = box_from(field(doc, "domain", path), path + ".domain");
  const int max_depth = number<int>(field(doc, "max_depth", path), path + ".max_depth");
  const Json& cells = field(doc, "cells", path);
  if (!cells.is_array()) throw SchemaError(path + ".cells", "expected an array");
  std::vector<Cell> leaves;
  Eigen::VectorXd coeffs(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string p = path + ".cells[" + std::to_string(i) + "]";
    leaves.push_back(cell_from(cells[i], domain.dim, p));
    coeffs[static_cast<Eigen::Index>(i)] = number<double>(field(cells[i], "coeff", p), p + ".coeff");
  }
  try {
    DyadicMesh mesh = DyadicMesh::from_leaves(domain, leaves, max_depth);
    // from_leaves keeps depth-first order; map coefficients if it reordered.
    Eigen::VectorXd ordered(coeffs.size());
    for (std::size_t i = 0; i < leaves.size(); ++i)
      ordered[static_cast<Eigen::Index>(mesh.position(leaves[i]))] = coeffs[static_cast<Eigen::Index>(i)];
    return {std::move(mesh), std::move(ordered)};
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path + ".cells", e.what());
  }
}

Json tree_to_json(const WaveletTree& tree, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != static_cast<Eigen::Index>(tree.size()))
    throw DomainMismatch("coefficient count differs from the basis size");
  Json nodes = Json::array();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const WaveletIndex& w = tree.basis()[i];
    nodes.push_back({{"level", w.cell.level},
                     {"index", index_json(w.cell, tree.dim())},
                     {"pattern", w.pattern},
                     {"coeff", coeffs[static_cast<Eigen::Index>(i)]}});
  }
  return {{"domain", box_json(tree.domain())},
          {"max_depth", tree.leaf_mesh().max_depth()},
          {"nodes", nodes}};
}

TreeFunction tree_from_json(const Json& doc, const std::string& path) {
  const Box domain = box_from(field(doc, "domain", path), path + ".domain");
  const int max_depth = number<int>(field(doc, "max_depth", path), path + ".max_depth");
  const Json& nodes = field(doc, "nodes", path);
  if (!nodes.is_array()) throw SchemaError(path + ".nodes", "expected an array");
  struct Rec {
    Cell cell;
    unsigned pattern;
    double coeff;
  };
  std::vector<Rec> recs;
  std::vector<Cell> details;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = path + ".nodes[" + std::to_string(i) + "]";
    Rec r{cell_from(nodes[i], domain.dim, p), number<unsigned>(field(nodes[i], "pattern", p), p + ".pattern"),
          number<double>(field(nodes[i], "coeff", p), p + ".coeff")};
    if (r.pattern == 1) details.push_back(r.cell);
    recs.push_back(r);
  }
  try {
    WaveletTree tree = WaveletTree::from_nodes(domain, details, max_depth);
    if (recs.size() != tree.size()) throw SchemaError(path + ".nodes", "incomplete set of wavelets");
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tree.size()));
    for (const Rec& r : recs) {
      std::size_t i = 0;
      if (r.pattern == 0) {
        if (r.cell != Cell{}) throw SchemaError(path + ".nodes", "scaling function off the root");
      } else {
        i = tree.index_of(r.cell, r.pattern);
      }
      coeffs[static_cast<Eigen::Index>(i)] = r.coeff;
    }
    return {std::move(tree), std::move(coeffs)};
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path + ".nodes", e.what());
  }
}

}  // namespace rsfista
