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

#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "mtriage/corpus.hpp"
#include "mtriage/geometry.hpp"
#include "mtriage/kdtree2d.hpp"

namespace mtriage {

enum class KdeAcceleration { kExactSum, kTree };

struct KdeConfig {
  int grid_density = 200;
  KdeAcceleration acceleration = KdeAcceleration::kExactSum;
  // Tree mode: bound on the relative error of the kernel sum.
  double relative_tolerance = 1e-6;

  void validate() const;
};

// Gaussian KDE over 2D projections with a diagonal bandwidth matrix
// H = diag(h_x^2, h_y^2).
class KdeModel {
 public:
  KdeModel(std::vector<Point2> train_points, double h_x, double h_y);

  const std::vector<Point2>& train_points() const { return points_; }
  std::size_t n() const { return points_.size(); }
  double h_x() const { return h_x_; }
  double h_y() const { return h_y_; }
  // Diagonal entries of H.
  double bandwidth_xx() const { return h_x_ * h_x_; }
  double bandwidth_yy() const { return h_y_ * h_y_; }

  // log(1 / (n * 2 pi sqrt|H|)), the constant part of every evaluation.
  double log_normalizer() const { return log_norm_; }
  // k-d tree over the points divided by (h_x, h_y).
  const KdTree2& scaled_tree() const { return *tree_; }

 private:
  std::vector<Point2> points_;
  double h_x_, h_y_;
  double log_norm_;
  std::shared_ptr<const KdTree2> tree_;
};

// Silverman's rule for two dimensions: h_j = sigma_j * n^(-1/6), with the
// sample standard deviation (n - 1 denominator).
KdeModel fit_kde(std::vector<Point2> train_points);

// Log-likelihood of a point under the model (nats), evaluated with
// log-sum-exp over all training points.
double fa_exact(const KdeModel& model, Point2 point);
// Same quantity via the k-d tree; |result - exact| <= log(1 + tolerance).
double fa_tree(const KdeModel& model, Point2 point, double relative_tolerance);
double fa_evaluate(const KdeModel& model, Point2 point, const KdeConfig& config);

// d x d log-likelihoods at cell centers over the bounds. Stored row-major with
// rows along y: value(ix, iy) = values[iy * d + ix].
class FamiliarityGrid {
 public:
  FamiliarityGrid(int density, Bounds bounds, std::vector<double> values);

  int density() const { return d_; }
  const Bounds& bounds() const { return bounds_; }
  const std::vector<double>& values() const { return values_; }
  double value(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * d_ + ix]; }
  double cell_width() const { return bounds_.width() / d_; }
  double cell_height() const { return bounds_.height() / d_; }
  Point2 cell_center(int ix, int iy) const;
  // Floor index of the coordinate, clamped into [0, d-1].
  int column_of(double x) const;
  int row_of(double y) const;

  friend bool operator==(const FamiliarityGrid&, const FamiliarityGrid&) = default;

 private:
  int d_;
  Bounds bounds_;
  std::vector<double> values_;
};

FamiliarityGrid build_grid(const KdeModel& model, const Bounds& bounds, const KdeConfig& config = {});
double fa_lookup(const FamiliarityGrid& grid, Point2 point);

// Fills familiarity for every log record from its projection.
void score_logs(Corpus& corpus, const FamiliarityGrid& grid);
// Train-record FA for diagnostics; the corpus is not modified.
std::vector<double> score_train_diagnostic(const Corpus& corpus, const FamiliarityGrid& grid);

// Binary layout: "AFGR", u32 d, f64 min_x, max_x, min_y, max_y, f64 x d^2 values.
void save_grid(const FamiliarityGrid& grid, const std::filesystem::path& path);
FamiliarityGrid load_grid(const std::filesystem::path& path);

}  // namespace mtriage
