// Copyright 2026 The mtriage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtriage/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "json.hpp"
#include "mtriage/parallel.hpp"
#include "mtriage/random.hpp"

namespace mtriage {

using nlohmann::json;

Bounds bounding_box(const std::vector<Point2>& points) {
  if (points.empty()) throw StageError("cannot compute bounds of an empty point set");
  Bounds b{points[0].x, points[0].x, points[0].y, points[0].y};
  for (const auto& p : points) {
    b.min_x = std::min(b.min_x, p.x);
    b.max_x = std::max(b.max_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_y = std::max(b.max_y, p.y);
  }
  if (!(b.max_x > b.min_x) || !(b.max_y > b.min_y)) {
    throw StageError("train projections are degenerate (zero extent on an axis)");
  }
  return b;
}

std::vector<Point2> train_projections(const Corpus& corpus) {
  std::vector<Point2> out;
  out.reserve(corpus.n_train());
  for (const auto& r : corpus.records()) {
    if (!r.is_train()) continue;
    if (!r.projection) throw InputError("train record \"" + r.id + "\" has no projection");
    out.push_back(*r.projection);
  }
  return out;
}

ProjectionModel import_projection(Corpus& corpus, const std::filesystem::path& coords_file) {
  std::ifstream in(coords_file);
  if (!in) throw InputError("cannot open " + coords_file.string());
  std::unordered_map<std::string, Point2> coords;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = coords_file.filename().string() + ":" + std::to_string(line_no);
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InputError(where + ": malformed JSON");
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("x") || !j["x"].is_number() || !j.contains("y") ||
        !j["y"].is_number()) {
      throw InputError(where + ": expected {\"id\",\"x\",\"y\"}");
    }
    const Point2 p{j["x"].get<double>(), j["y"].get<double>()};
    const auto id = j["id"].get<std::string>();
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InputError(where + ": non-finite coordinate for \"" + id + "\"");
    coords[id] = p;
  }
  for (auto& r : corpus.mutable_records()) {
    const auto it = coords.find(r.id);
    if (it == coords.end()) throw InputError("coordinates file is missing id \"" + r.id + "\"");
    r.projection = it->second;
  }
  ProjectionModel model;
  model.kind = ProjectionKind::kImported;
  model.bounds = bounding_box(train_projections(corpus));
  return model;
}

void write_coordinates(const Corpus& corpus, const std::filesystem::path& coords_file) {
  std::ofstream out(coords_file);
  if (!out) throw StageError("cannot write " + coords_file.string());
  for (const auto& r : corpus.records()) {
    if (!r.projection) continue;
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["x"] = r.projection->x;
    j["y"] = r.projection->y;
    out << j.dump() << '\n';
  }
}

namespace {

// Top-2 principal directions of the centered rows of X, as columns of a D x 2 matrix.
Eigen::MatrixXd principal_directions(const Eigen::MatrixXd& X, std::uint64_t seed) {
  const auto dim = X.cols();
  constexpr Eigen::Index kSubspace = 10;
  Eigen::MatrixXd directions(dim, 2);
  if (dim <= kSubspace) {
    const Eigen::MatrixXd cov = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Eigenvalues ascend.
    directions.col(0) = eig.eigenvectors().col(dim - 1);
    directions.col(1) = eig.eigenvectors().col(dim - 2);
  } else {
    // Randomized subspace iteration.
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd Q(dim, kSubspace);
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) Q(i, j) = standard_normal(rng);
    }
    for (int iter = 0; iter < 8; ++iter) {
      const Eigen::MatrixXd Y = X.transpose() * (X * Q);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
      Q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, kSubspace);
    }
    const Eigen::MatrixXd XQ = X * Q;
    const Eigen::MatrixXd small = XQ.transpose() * XQ;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(small);
    directions.col(0) = Q * eig.eigenvectors().col(kSubspace - 1);
    directions.col(1) = Q * eig.eigenvectors().col(kSubspace - 2);
  }
  // Sign convention: largest-magnitude component positive.
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    directions.col(c).cwiseAbs().maxCoeff(&arg);
    if (directions(arg, c) < 0) directions.col(c) *= -1.0;
  }
  return directions;
}

}  // namespace

ProjectionModel fallback_project(Corpus& corpus, std::uint64_t seed) {
  if (corpus.n_train() < 3) throw InputError("linear projection needs at least 3 train records");
  const std::size_t dim = corpus.embeddings().dim();
  if (dim < 2) throw InputError("linear projection needs embeddings of dimension >= 2");

  auto& records = corpus.mutable_records();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(corpus.n_train()), static_cast<Eigen::Index>(dim));
  Eigen::Index row = 0;
  for (const auto& r : records) {
    if (!r.is_train()) continue;
    const auto e = corpus.embedding(r);
    for (std::size_t k = 0; k < dim; ++k) X(row, static_cast<Eigen::Index>(k)) = e[k];
    ++row;
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;

  Eigen::MatrixXd directions;
  if (dim == 2) {
    directions = Eigen::MatrixXd::Identity(2, 2);
  } else {
    directions = principal_directions(X, seed);
  }
  const Eigen::MatrixXd train_coords = X * directions;
  const double n = static_cast<double>(train_coords.rows());
  ProjectionModel model;
  model.kind = ProjectionKind::kLinearFallback;
  model.scale_x = std::sqrt(train_coords.col(0).squaredNorm() / (n - 1.0));
  model.scale_y = std::sqrt(train_coords.col(1).squaredNorm() / (n - 1.0));
  if (!(model.scale_x > 0.0) || !(model.scale_y > 0.0)) {
    throw StageError("train embeddings have no variance along a principal direction");
  }
  model.mean.assign(mean.data(), mean.data() + dim);
  model.basis.resize(2 * dim);
  for (std::size_t k = 0; k < dim; ++k) {
    model.basis[k] = directions(static_cast<Eigen::Index>(k), 0);
    model.basis[dim + k] = directions(static_cast<Eigen::Index>(k), 1);
  }
  for (auto& r : records) {
    const auto e = corpus.embedding(r);
    double px = 0.0, py = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double c = e[k] - model.mean[k];
      px += model.basis[k] * c;
      py += model.basis[dim + k] * c;
    }
    r.projection = Point2{px / model.scale_x, py / model.scale_y};
  }
  model.bounds = bounding_box(train_projections(corpus));
  return model;
}

std::vector<std::string> neighbors_within(const Corpus& corpus, const std::vector<std::string>& seed_ids,
                                          double radius) {
  if (!(radius > 0.0)) throw InputError("neighbor radius must be positive");
  std::vector<std::span<const float>> seeds;
  seeds.reserve(seed_ids.size());
  for (const auto& id : seed_ids) seeds.push_back(corpus.embedding(corpus.at(id)));

  const auto& records = corpus.records();
  const double r2 = radius * radius;
  std::vector<char> hit(records.size(), 0);
  parallel_for(records.size(), [&](std::size_t i) {
    const auto& r = records[i];
    if (!r.is_train()) return;
    const auto e = corpus.embedding(r);
    for (const auto& s : seeds) {
      double d2 = 0.0;
      std::size_t k = 0;
      // Partial sums only grow, so stop once the threshold is reached.
      for (; k < e.size() && d2 < r2; ++k) {
        const double d = static_cast<double>(e[k]) - static_cast<double>(s[k]);
        d2 += d * d;
      }
      if (d2 < r2) {
        hit[i] = 1;
        return;
      }
    }
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (hit[i]) out.push_back(records[i].id);
  }
  return out;
}

}  // namespace mtriage
