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

#ifndef RSFISTA_SERIALIZE_HPP
#define RSFISTA_SERIALIZE_HPP

#include <Eigen/Core>
#include <string>

#include "json.hpp"
#include "rsfista/mesh.hpp"
#include "rsfista/wavelet.hpp"

namespace rsfista {

/// A mesh together with one coefficient per leaf.
struct MeshFunction {
  DyadicMesh mesh;
  Eigen::VectorXd coeffs;
};

/// A Haar tree together with one coefficient per basis function.
struct TreeFunction {
  WaveletTree tree;
  Eigen::VectorXd coeffs;
};

/// {"domain", "max_depth", "cells": [{"level", "index", "coeff"}, ...]}, leaves in
/// mesh order.
nlohmann::json mesh_to_json(const DyadicMesh& mesh, const Eigen::VectorXd& coeffs);
/// Inverse of mesh_to_json. Raises SchemaError (with `path`) on malformed input
/// and when the cells do not partition the domain.
MeshFunction mesh_from_json(const nlohmann::json& doc, const std::string& path = "mesh");

/// {"domain", "max_depth", "nodes": [{"level", "index", "pattern", "coeff"}, ...]},
/// one record per basis function in basis order; pattern 0 is the scaling function.
nlohmann::json tree_to_json(const WaveletTree& tree, const Eigen::VectorXd& coeffs);
TreeFunction tree_from_json(const nlohmann::json& doc, const std::string& path = "tree");

}  // namespace rsfista

#endif  // RSFISTA_SERIALIZE_HPP
