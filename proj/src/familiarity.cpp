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

#include "mtriage/familiarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "binary_io.hpp"
#include "mtriage/parallel.hpp"

namespace mtriage {

namespace {

constexpr char kGridMagic[4] = {'A', 'F', 'G', 'R'};

std::vector<Point2> scaled(const std::vector<Point2>& points, double hx, double hy) {
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p.x / hx, p.y / hy});
  return out;
}

}  // namespace

void KdeConfig::validate() const {
  if (grid_density < 2) throw InputError("grid density must be >= 2");
  if (!(relative_tolerance > 0.0) || relative_tolerance >= 1.0) {
    throw InputError("KDE relative tolerance must lie in (0, 1)");
  }
}

KdeModel::KdeModel(std::vector<Point2> train_points, double h_x, double h_y)
    : points_(std::move(train_points)), h_x_(h_x), h_y_(h_y) {
  if (points_.size() < 2) throw InputError("KDE needs at least 2 training points");
  if (!(h_x_ > 0.0) || !(h_y_ > 0.0) || !std::isfinite(h_x_) || !std::isfinite(h_y_)) {
    throw InputError("KDE bandwidth entries must be positive and finite");
  }
  // sqrt|H| = h_x * h_y for H = diag(h_x^2, h_y^2).
  log_norm_ = -std::log(static_cast<double>(points_.size())) - std::log(2.0 * std::numbers::pi * h_x_ * h_y_);
  tree_ = std::make_shared<const KdTree2>(scaled(points_, h_x_, h_y_), 32);
}

KdeModel fit_kde(std::vector<Point2> train_points) {
  const std::size_t n = train_points.size();
  if (n < 2) throw InputError("KDE needs at least 2 training points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : train_points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0;
  for (const auto& p : train_points) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
  }
  const double sd_x = std::sqrt(sxx / static_cast<double>(n - 1));
  const double sd_y = std::sqrt(syy / static_cast<double>(n - 1));
  if (!(sd_x > 0.0) || !(sd_y > 0.0)) {
    throw StageError(std::string("training projection has zero variance along ") + (sd_x > 0.0 ? "y" : "x") +
                     "; add jitter or set the bandwidth manually");
  }
  const double factor = std::pow(static_cast<double>(n), -1.0 / 6.0);
  return KdeModel(std::move(train_points), sd_x * factor, sd_y * factor);
}

double fa_exact(const KdeModel& model, Point2 q) {
  const double ax = 0.5 / model.bandwidth_xx();
  const double ay = 0.5 / model.bandwidth_yy();
  const auto& pts = model.train_points();
  // Streaming log-sum-exp: sum holds sum(exp(t_i - top)).
  double top = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& p : pts) {
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    const double t = -(ax * dx * dx + ay * dy * dy);
    if (t <= top) {
      sum += std::exp(t - top);
    } else {
      sum = sum * std::exp(top - t) + 1.0;
      top = t;
    }
  }
  return top + std::log(sum) + model.log_normalizer();
}

double fa_tree(const KdeModel& model, Point2 point, double tolerance) {
  const KdTree2& tree = model.scaled_tree();
  const auto& nodes = tree.nodes();
  const auto& order = tree.order();
  const auto& pts = tree.points();
  const Point2 q{point.x / model.h_x(), point.y / model.h_y()};
  auto exponent = [&](std::size_t idx) {
    const double dx = q.x - pts[idx].x, dy = q.y - pts[idx].y;
    return -0.5 * (dx * dx + dy * dy);
  };

  // Reference exponent from the leaf nearest the query: an actual point, so the
  // scaled total sum(exp(t_i - ref)) is at least 1.
  std::size_t cur = 0;
  while (!nodes[cur].leaf()) {
    const auto l = static_cast<std::size_t>(nodes[cur].left), r = static_cast<std::size_t>(nodes[cur].right);
    cur = min_dist2(nodes[l], q) <= min_dist2(nodes[r], q) ? l : r;
  }
  double ref = -std::numeric_limits<double>::infinity();
  for (std::size_t i = nodes[cur].begin; i < nodes[cur].end; ++i) ref = std::max(ref, exponent(order[i]));

  const double n = static_cast<double>(model.n());
  double estimate = 0.0;
  double lower = 0.0;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const auto& node = nodes[stack.back()];
    stack.pop_back();
    const double count = static_cast<double>(node.end - node.begin);
    const double hi = std::exp(-0.5 * min_dist2(node, q) - ref);
    const double lo = std::exp(-0.5 * max_dist2(node, q) - ref);
    // Per-point error budget tolerance * L / n, with L <= true scaled sum.
    if (0.5 * (hi - lo) <= tolerance * std::max(1.0, lower) / n) {
      estimate += count * 0.5 * (hi + lo);
      lower += count * lo;
      continue;
    }
    if (node.leaf()) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const double v = std::exp(exponent(order[i]) - ref);
        estimate += v;
        lower += v;
      }
      continue;
    }
    const auto l = static_cast<std::size_t>(node.left), r = static_cast<std::size_t>(node.right);
    if (min_dist2(nodes[l], q) <= min_dist2(nodes[r], q)) {
      stack.push_back(r);
      stack.push_back(l);
    } else {
      stack.push_back(l);
      stack.push_back(r);
    }
  }
  return ref + std::log(estimate) + model.log_normalizer();
}

double fa_evaluate(const KdeModel& model, Point2 point, const KdeConfig& config) {
  return config.acceleration == KdeAcceleration::kTree ? fa_tree(model, point, config.relative_tolerance)
                                                       : fa_exact(model, point);
}

FamiliarityGrid::FamiliarityGrid(int density, Bounds bounds, std::vector<double> values)
    : d_(density), bounds_(bounds), values_(std::move(values)) {
  if (d_ < 2) throw InputError("grid density must be >= 2");
  if (!(bounds_.max_x > bounds_.min_x) || !(bounds_.max_y > bounds_.min_y)) {
    throw InputError("grid bounds must have positive extent");
  }
  if (values_.size() != static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_)) {
    throw InputError("grid value count does not match density");
  }
  for (const double v : values_) {
    if (!std::isfinite(v)) throw StageError("familiarity grid contains a non-finite value");
  }
}

Point2 FamiliarityGrid::cell_center(int ix, int iy) const {
  return {bounds_.min_x + (ix + 0.5) * cell_width(), bounds_.min_y + (iy + 0.5) * cell_height()};
}

int FamiliarityGrid::column_of(double x) const {
  const double f = std::floor((x - bounds_.min_x) / cell_width());
  if (!(f >= 0.0)) return 0;
  return f >= d_ - 1 ? d_ - 1 : static_cast<int>(f);
}

int FamiliarityGrid::row_of(double y) const {
  const double f = std::floor((y - bounds_.min_y) / cell_height());
  if (!(f >= 0.0)) return 0;
  return f >= d_ - 1 ? d_ - 1 : static_cast<int>(f);
}

FamiliarityGrid build_grid(const KdeModel& model, const Bounds& bounds, const KdeConfig& config) {
  config.validate();
  const int d = config.grid_density;
  const double w = bounds.width() / d;
  const double h = bounds.height() / d;
  std::vector<double> values(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
  parallel_for(static_cast<std::size_t>(d), [&](std::size_t iy) {
    for (int ix = 0; ix < d; ++ix) {
      const Point2 c{bounds.min_x + (ix + 0.5) * w, bounds.min_y + (static_cast<double>(iy) + 0.5) * h};
      values[iy * static_cast<std::size_t>(d) + static_cast<std::size_t>(ix)] = fa_evaluate(model, c, config);
    }
  });
  return FamiliarityGrid(d, bounds, std::move(values));
}

double fa_lookup(const FamiliarityGrid& grid, Point2 point) {
  return grid.value(grid.column_of(point.x), grid.row_of(point.y));
}

void score_logs(Corpus& corpus, const FamiliarityGrid& grid) {
  for (auto& r : corpus.mutable_records()) {
    if (!r.is_log()) continue;
    if (!r.projection) throw InputError("log record \"" + r.id + "\" has no projection");
    r.familiarity = fa_lookup(grid, *r.projection);
  }
}

std::vector<double> score_train_diagnostic(const Corpus& corpus, const FamiliarityGrid& grid) {
  std::vector<double> out;
  for (const auto& r : corpus.records()) {
    if (!r.is_train()) continue;
    if (!r.projection) throw InputError("train record \"" + r.id + "\" has no projection");
    out.push_back(fa_lookup(grid, *r.projection));
  }
  return out;
}

void save_grid(const FamiliarityGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("cannot write " + path.string());
  out.write(kGridMagic, 4);
  detail::write_u32(out, static_cast<std::uint32_t>(grid.density()));
  const auto& b = grid.bounds();
  for (const double v : {b.min_x, b.max_x, b.min_y, b.max_y}) detail::write_f64(out, v);
  for (const double v : grid.values()) detail::write_f64(out, v);
  if (!out) throw StageError("failed writing " + path.string());
}

FamiliarityGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || !std::equal(magic, magic + 4, kGridMagic)) {
    throw InputError(path.string() + ": not a familiarity grid");
  }
  std::uint32_t d = 0;
  Bounds b;
  if (!detail::read_u32(in, d) || !detail::read_f64(in, b.min_x) || !detail::read_f64(in, b.max_x) ||
      !detail::read_f64(in, b.min_y) || !detail::read_f64(in, b.max_y)) {
    throw InputError(path.string() + ": truncated grid header");
  }
  std::vector<double> values(static_cast<std::size_t>(d) * d);
  for (auto& v : values) {
    if (!detail::read_f64(in, v)) throw InputError(path.string() + ": truncated grid values");
  }
  return FamiliarityGrid(static_cast<int>(d), b, std::move(values));
}

}  // namespace mtriage
