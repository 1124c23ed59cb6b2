#pragma once

#include <cmath>
#include <vector>

#include "smoge/measure.hpp"

namespace smoge {

// Cell j collects the components of the candidate measure whose support
// point omega = (alpha1, beta, sigma2) is nearest to reference component j.
// Equidistant components go to the smallest reference index, so the cells
// always partition {0..K-1}.
struct VoronoiAssignment {
  std::vector<std::vector<int>> cells;  // size K*, candidate indices
};

struct VoronoiLossReport {
  double total = 0.0;
  double weight_term = 0.0;
  std::vector<double> per_cell_terms;  // parameter terms, one per reference cell
  std::vector<int> empty_cells;
  std::vector<int> singleton_cells;
};

inline VoronoiAssignment voronoi_cells(const MixingMeasure& g, const MixingMeasure& g_star) {
  require(g.family == g_star.family, "voronoi: expert families differ");
  require(g.input_dim == g_star.input_dim, "voronoi: input dimensions differ");
  validate_measure(g);
  validate_measure(g_star);

  VoronoiAssignment a;
  a.cells.assign(g_star.size(), {});
  for (int i = 0; i < g.size(); ++i) {
    int best = 0;
    double best_dist = omega_distance(g.components[i], g_star.components[0]);
    for (int j = 1; j < g_star.size(); ++j) {
      const double dist = omega_distance(g.components[i], g_star.components[j]);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    a.cells[best].push_back(i);
  }
  return a;
}

namespace detail {

inline double block_norm_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Shared evaluator for both losses. The weight term compares cell-total
// weights against the reference weights. Parameter gaps enter with first
// powers, except on multi-member cells of the squared variant.
inline VoronoiLossReport voronoi_loss(const MixingMeasure& g, const MixingMeasure& g_star,
                                      bool square_multi_member_cells) {
  const auto assignment = voronoi_cells(g, g_star);
  VoronoiLossReport rep;
  rep.per_cell_terms.assign(g_star.size(), 0.0);
  for (int j = 0; j < g_star.size(); ++j) {
    const auto& cell = assignment.cells[j];
    const auto& ref = g_star.components[j];
    double cell_weight = 0.0;
    const bool square = square_multi_member_cells && cell.size() > 1;
    for (int i : cell) {
      const auto& c = g.components[i];
      const double w = c.weight();
      cell_weight += w;
      const double da = block_norm_diff(c.alpha1, ref.alpha1);
      const double db = block_norm_diff(c.beta, ref.beta);
      const double ds = std::abs(c.sigma2 - ref.sigma2);
      rep.per_cell_terms[j] +=
          square ? w * (da * da + db * db + ds * ds) : w * (da + db + ds);
    }
    rep.weight_term += std::abs(cell_weight - ref.weight());
    if (cell.empty()) rep.empty_cells.push_back(j);
    if (cell.size() == 1) rep.singleton_cells.push_back(j);
  }
  rep.total = rep.weight_term;
  for (double t : rep.per_cell_terms) rep.total += t;
  return rep;
}

}  // namespace detail

inline VoronoiLossReport loss_l1(const MixingMeasure& g, const MixingMeasure& g_star) {
  return detail::voronoi_loss(g, g_star, false);
}

inline VoronoiLossReport loss_l2(const MixingMeasure& g, const MixingMeasure& g_star) {
  return detail::voronoi_loss(g, g_star, true);
}

enum class LossKind { l1, l2 };

inline VoronoiLossReport voronoi_loss(const MixingMeasure& g, const MixingMeasure& g_star,
                                      LossKind kind) {
  return kind == LossKind::l1 ? loss_l1(g, g_star) : loss_l2(g, g_star);
}

}  // namespace smoge
