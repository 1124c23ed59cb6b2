#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "smoge/reference_models.hpp"
#include "smoge/rng.hpp"
#include "smoge/voronoi.hpp"

using namespace smoge;

namespace {

MixingMeasure random_measure(Rng& rng, int k, int d) {
  MixingMeasure g;
  g.family = ExpertFamily::linear;
  g.input_dim = d;
  for (int j = 0; j < k; ++j) {
    ExpertComponent c;
    c.alpha0 = rng.uniform(-1.0, 1.0);
    for (int u = 0; u < d; ++u) c.alpha1.push_back(rng.uniform(-3.0, 3.0));
    for (int u = 0; u < d + 1; ++u) c.beta.push_back(rng.uniform(-3.0, 3.0));
    c.sigma2 = rng.uniform(0.2, 3.0);
    g.components.push_back(c);
  }
  return g;
}

// Independent nearest-reference search used as the assignment oracle.
std::vector<int> brute_force_assignment(const MixingMeasure& g, const MixingMeasure& ref) {
  std::vector<int> owner(g.size(), -1);
  for (int i = 0; i < g.size(); ++i) {
    double best = 1e300;
    for (int j = 0; j < ref.size(); ++j) {
      double s = 0.0;
      for (int u = 0; u < g.input_dim; ++u) {
        const double dv = g.components[i].alpha1[u] - ref.components[j].alpha1[u];
        s += dv * dv;
      }
      for (std::size_t u = 0; u < g.components[i].beta.size(); ++u) {
        const double dv = g.components[i].beta[u] - ref.components[j].beta[u];
        s += dv * dv;
      }
      const double dv = g.components[i].sigma2 - ref.components[j].sigma2;
      s += dv * dv;
      if (s < best - 1e-15) {
        best = s;
        owner[i] = j;
      }
    }
  }
  return owner;
}

}  // namespace

TEST(VoronoiCells, SelfAssignmentIsIdentity) {
  Rng rng(1);
  for (int k : {1, 2, 4}) {
    const auto g = random_measure(rng, k, 2);
    const auto a = voronoi_cells(g, g);
    for (int j = 0; j < k; ++j) {
      ASSERT_EQ(a.cells[j].size(), 1u);
      EXPECT_EQ(a.cells[j][0], j);
    }
  }
}

TEST(VoronoiCells, MatchesBruteForceOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ref = random_measure(rng, 2, 2);
    const auto g = random_measure(rng, 3, 2);
    const auto owner = brute_force_assignment(g, ref);
    const auto a = voronoi_cells(g, ref);
    for (int j = 0; j < ref.size(); ++j)
      for (int i : a.cells[j]) EXPECT_EQ(owner[i], j);
    std::size_t assigned = 0;
    for (const auto& cell : a.cells) assigned += cell.size();
    EXPECT_EQ(assigned, static_cast<std::size_t>(g.size()));
  }
}

TEST(VoronoiCells, TieBreaksTowardSmallestIndex) {
  MixingMeasure ref;
  ref.family = ExpertFamily::constant;
  ref.input_dim = 1;
  ref.components = {{0.0, {1.0}, {0.0}, 1.0}, {0.0, {-1.0}, {0.0}, 1.0}};
  MixingMeasure g = ref;
  g.components = {{0.0, {0.0}, {0.0}, 1.0}};  // equidistant from both references
  const auto a = voronoi_cells(g, ref);
  EXPECT_EQ(a.cells[0], (std::vector<int>{0}));
  EXPECT_TRUE(a.cells[1].empty());
}

TEST(VoronoiCells, FamilyMismatchThrows) {
  const auto g = reference_linear_truth();
  const auto s = reference_sigmoid_truth();
  EXPECT_THROW(voronoi_cells(g, s), ConfigError);
}

TEST(LossL1, ZeroAtReference) {
  const auto g = reference_linear_truth();
  const auto rep = loss_l1(g, g);
  EXPECT_DOUBLE_EQ(rep.total, 0.0);
  EXPECT_DOUBLE_EQ(rep.weight_term, 0.0);
}

// Hand evaluation: |1.1 - 1| + 1.1 (0.2 + 0.3 + 0.05) = 0.705.
TEST(LossL1, HandComputedSingleComponent) {
  MixingMeasure ref;
  ref.family = ExpertFamily::linear;
  ref.input_dim = 2;
  ref.components = {{0.0, {1.0, -0.5}, {0.8, 0.3, -0.2}, 1.0}};
  MixingMeasure g = ref;
  g.components[0].alpha0 = std::log(1.1);
  g.components[0].alpha1[0] += 0.2;
  g.components[0].beta[1] += 0.3;
  g.components[0].sigma2 += 0.05;
  const auto rep = loss_l1(g, ref);
  EXPECT_NEAR(rep.total, 0.705, 1e-12);
  EXPECT_NEAR(rep.weight_term, 0.1, 1e-12);
  EXPECT_NEAR(rep.per_cell_terms[0], 0.605, 1e-12);
}

TEST(LossL1, PermutationInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ref = random_measure(rng, 3, 2);
    auto g = random_measure(rng, 3, 2);
    const double base = loss_l1(g, ref).total;
    std::rotate(g.components.begin(), g.components.begin() + 1, g.components.end());
    EXPECT_NEAR(loss_l1(g, ref).total, base, 1e-12);
  }
}

TEST(LossL1, EmptyCellContributesReferenceWeight) {
  MixingMeasure ref;
  ref.family = ExpertFamily::constant;
  ref.input_dim = 1;
  ref.components = {{0.0, {0.0}, {0.0}, 1.0}, {std::log(0.7), {0.0}, {8.0}, 1.0}};
  MixingMeasure g;
  g.family = ExpertFamily::constant;
  g.input_dim = 1;
  g.components = {{0.0, {0.0}, {0.0}, 1.0}};  // lands in cell 1; cell 2 empty
  const auto rep = loss_l1(g, ref);
  EXPECT_EQ(rep.empty_cells, (std::vector<int>{1}));
  EXPECT_NEAR(rep.weight_term, 0.7, 1e-12);
  EXPECT_NEAR(rep.total, 0.7, 1e-12);
}

// Identity of indiscernibles in both directions over random instances.
TEST(LossL1, IdentityOfIndiscernibles) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 4;
    const auto ref = random_measure(rng, k, 2);
    // permuted copy has zero loss
    auto copy = ref;
    if (k > 1) std::rotate(copy.components.begin(), copy.components.begin() + 1,
                           copy.components.end());
    EXPECT_NEAR(loss_l1(copy, ref).total, 0.0, 1e-12);
    // any perturbed copy has positive loss
    auto bumped = ref;
    const int which = trial % 3;
    if (which == 0)
      bumped.components[trial % k].alpha0 += 0.05;
    else if (which == 1)
      bumped.components[trial % k].beta[0] += 0.05;
    else
      bumped.components[trial % k].sigma2 += 0.05;
    EXPECT_GT(loss_l1(bumped, ref).total, 1e-6);
  }
}

TEST(LossL1, WeightDriftStrictlyIncreases) {
  const auto ref = reference_linear_truth();
  auto g = ref;
  double prev = loss_l1(g, ref).total;
  for (double bump : {0.05, 0.1, 0.2, 0.4}) {
    auto drifted = ref;
    drifted.components[0].alpha0 += bump;
    const double cur = loss_l1(drifted, ref).total;
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(LossL2, EqualsL1WhenAllCellsSingleton) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 4;
    const auto ref = random_measure(rng, k, 2);
    const auto g = random_measure(rng, k, 2);
    const auto l1 = loss_l1(g, ref);
    const auto l2 = loss_l2(g, ref);
    const bool all_singleton =
        l1.singleton_cells.size() == static_cast<std::size_t>(ref.size());
    if (all_singleton) EXPECT_DOUBLE_EQ(l1.total, l2.total);
  }
}

// Doubleton cell with both atoms at 0.1 per-block distance and weight 1/2:
// each contributes 0.5 * 3 * 0.01, so the cell term is 0.03.
TEST(LossL2, HandComputedDoubleton) {
  MixingMeasure ref;
  ref.family = ExpertFamily::linear;
  ref.input_dim = 1;
  ref.components = {{0.0, {0.5}, {1.0, -0.5}, 1.0}};
  MixingMeasure g = ref;
  g.components.clear();
  for (int copy = 0; copy < 2; ++copy) {
    ExpertComponent c = ref.components[0];
    c.alpha0 = std::log(0.5);
    c.alpha1[0] += 0.1;
    c.beta[0] += 0.1;
    c.sigma2 += 0.1;
    g.components.push_back(c);
  }
  const auto rep = loss_l2(g, ref);
  ASSERT_EQ(rep.singleton_cells.size(), 0u);
  EXPECT_NEAR(rep.weight_term, 0.0, 1e-12);
  EXPECT_NEAR(rep.per_cell_terms[0], 0.03, 1e-12);
  EXPECT_NEAR(rep.total, 0.03, 1e-12);
  // first-power variant on the same instance
  const auto l1 = loss_l1(g, ref);
  EXPECT_NEAR(l1.total, 2.0 * 0.5 * 0.3, 1e-12);
}

TEST(LossL2, ZeroAtReference) {
  const auto g = reference_sigmoid_truth();
  EXPECT_DOUBLE_EQ(loss_l2(g, g).total, 0.0);
}

// Squares shrink sub-unit gaps: when every realized block difference is
// below one, the squared variant cannot exceed the first-power loss.
TEST(LossL2, BelowL1OnSubUnitGaps) {
  Rng rng(7);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto ref = random_measure(rng, 2, 2);
    auto g = ref;
    // K = 3 candidate with every component near a reference atom
    g.components.push_back(ref.components[0]);
    for (auto& c : g.components) {
      c.alpha1[0] += rng.uniform(-0.3, 0.3);
      c.beta[0] += rng.uniform(-0.3, 0.3);
      c.sigma2 = std::max(0.05, c.sigma2 + rng.uniform(-0.2, 0.2));
    }
    // condition on the assignment realizing only sub-unit block gaps
    const auto cells = voronoi_cells(g, ref);
    double max_gap = 0.0;
    for (int j = 0; j < ref.size(); ++j)
      for (int i : cells.cells[j])
        max_gap = std::max(max_gap, omega_distance(g.components[i], ref.components[j]));
    if (max_gap > 1.0) continue;
    ++checked;
    const auto l1 = loss_l1(g, ref);
    const auto l2 = loss_l2(g, ref);
    EXPECT_LE(l2.total, l1.total + 1e-12);
  }
  EXPECT_GT(checked, 20);
}

TEST(LossReports, TotalsAreConsistent) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ref = random_measure(rng, 2, 2);
    const auto g = random_measure(rng, 4, 2);
    for (const auto rep : {loss_l1(g, ref), loss_l2(g, ref)}) {
      double total = rep.weight_term;
      for (double t : rep.per_cell_terms) total += t;
      EXPECT_NEAR(rep.total, total, 1e-12);
      EXPECT_GE(rep.weight_term, 0.0);
      for (double t : rep.per_cell_terms) EXPECT_GE(t, 0.0);
    }
  }
}
