#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ndcgem/lp/mip.hpp"
#include "ndcgem/lp/model.hpp"
#include "ndcgem/lp/simplex.hpp"
#include "support/oracles.hpp"

using namespace ndcgem::lp;

namespace {

// Deterministic integer in [lo, hi] from a raw engine draw; avoids
// distribution objects whose sequences differ across standard libraries.
int draw(std::mt19937& g, int lo, int hi) {
  return lo + static_cast<int>(g() % static_cast<unsigned>(hi - lo + 1));
}

}  // namespace

TEST_CASE("binding ge row prices at +1 per unit of rhs") {
  LinearModel m;
  int x = m.add_var("x", 0, kInf, 1.0);
  int r = m.add_row("floor", Sense::ge, 1.0);
  m.add_term(r, x, 1.0);
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  CHECK(sol.objective == Catch::Approx(1.0));
  CHECK(sol.x[x] == Catch::Approx(1.0));
  CHECK(sol.duals[r] == Catch::Approx(1.0));
}

TEST_CASE("binding le row prices negative when relaxing helps") {
  LinearModel m;
  int x = m.add_var("x", 0, kInf, -1.0);
  int y = m.add_var("y", 0, kInf, -1.0);
  int r = m.add_row("cap", Sense::le, 1.0);
  m.add_term(r, x, 1.0);
  m.add_term(r, y, 1.0);
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  CHECK(sol.objective == Catch::Approx(-1.0));
  CHECK(sol.duals[r] == Catch::Approx(-1.0));
  std::string why;
  CHECK(oracle::kkt_optimal(m, sol, 1e-6, &why));
  INFO(why);
}

TEST_CASE("equality rows, negative bounds, and free variables") {
  LinearModel m;
  int x = m.add_var("x", -4, 4, 2.0);
  int y = m.add_var("y", -kInf, kInf, 1.0);
  int z = m.add_var("z", 0, 10, 0.5);
  int r1 = m.add_row("bal", Sense::eq, 3.0);
  m.add_term(r1, x, 1.0);
  m.add_term(r1, y, 1.0);
  m.add_term(r1, z, 1.0);
  int r2 = m.add_row("mix", Sense::ge, -2.0);
  m.add_term(r2, y, 1.0);
  m.add_term(r2, z, -1.0);
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  auto ref = oracle::lp_vertex_optimum(m);
  REQUIRE(ref.has_value());
  CHECK(sol.objective == Catch::Approx(ref->objective).margin(1e-7));
  std::string why;
  CHECK(oracle::kkt_optimal(m, sol, 1e-6, &why));
  INFO(why);
}

TEST_CASE("infeasible row system is reported infeasible") {
  LinearModel m;
  int x = m.add_var("x", 0, 1, 1.0);
  int r1 = m.add_row("hi", Sense::ge, 2.0);
  m.add_term(r1, x, 1.0);
  auto sol = solve_lp(m);
  CHECK(sol.status == LpStatus::infeasible);
}

TEST_CASE("conflicting rows are reported infeasible") {
  LinearModel m;
  int x = m.add_var("x", -kInf, kInf, 0.0);
  int y = m.add_var("y", -kInf, kInf, 1.0);
  int r1 = m.add_row("a", Sense::eq, 1.0);
  m.add_term(r1, x, 1.0);
  m.add_term(r1, y, 1.0);
  int r2 = m.add_row("b", Sense::eq, 3.0);
  m.add_term(r2, x, 1.0);
  m.add_term(r2, y, 1.0);
  auto sol = solve_lp(m);
  CHECK(sol.status == LpStatus::infeasible);
}

TEST_CASE("unbounded ray is reported unbounded") {
  LinearModel m;
  int x = m.add_var("x", 0, kInf, -1.0);
  int y = m.add_var("y", 0, 5, 0.0);
  int r = m.add_row("tie", Sense::le, 5.0);
  m.add_term(r, y, 1.0);
  m.add_term(r, x, -1.0);  // x can grow without bound
  auto sol = solve_lp(m);
  CHECK(sol.status == LpStatus::unbounded);
}

TEST_CASE("pure bound flips without rows") {
  LinearModel m;
  m.add_var("a", -1, 3, 1.0);
  m.add_var("b", -2, 5, -1.0);
  m.add_var("c", 0, 0, 7.0);
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  CHECK(sol.objective == Catch::Approx(-1 - 5 + 0));
  CHECK(sol.x[0] == Catch::Approx(-1.0));
  CHECK(sol.x[1] == Catch::Approx(5.0));
}

TEST_CASE("degenerate overlapping constraints still solve") {
  LinearModel m;
  int x = m.add_var("x", 0, 10, -1.0);
  int y = m.add_var("y", 0, 10, -1.0);
  for (int k = 0; k < 4; ++k) {
    int r = m.add_row("cap" + std::to_string(k), Sense::le, 4.0);
    m.add_term(r, x, 1.0);
    m.add_term(r, y, 1.0);
  }
  int r2 = m.add_row("half", Sense::le, 2.0);
  m.add_term(r2, x, 1.0);
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  CHECK(sol.objective == Catch::Approx(-4.0));
  std::string why;
  CHECK(oracle::kkt_optimal(m, sol, 1e-6, &why));
  INFO(why);
}

TEST_CASE("randomized LPs match the vertex enumeration oracle") {
  for (unsigned seed = 1; seed <= 120; ++seed) {
    std::mt19937 gen(seed);
    LinearModel m;
    const int n = 4 + draw(gen, 0, 2);
    for (int j = 0; j < n; ++j)
      m.add_var("x" + std::to_string(j), -5.0, 10.0, draw(gen, -4, 4));
    const int nr = 3 + draw(gen, 0, 3);
    for (int i = 0; i < nr; ++i) {
      Sense s = draw(gen, 0, 2) == 0 ? Sense::le : (draw(gen, 0, 1) ? Sense::ge : Sense::eq);
      int r = m.add_row("r" + std::to_string(i), s, draw(gen, -6, 12));
      int nz = 0;
      for (int j = 0; j < n; ++j) {
        int c = draw(gen, -3, 3);
        if (c != 0) {
          m.add_term(r, j, c);
          ++nz;
        }
      }
      if (nz == 0) m.add_term(r, draw(gen, 0, n - 1), 1.0);
    }
    INFO("seed " << seed);
    auto sol = solve_lp(m);
    auto ref = oracle::lp_vertex_optimum(m);
    if (sol.status == LpStatus::infeasible) {
      CHECK_FALSE(ref.has_value());
    } else {
      REQUIRE(sol.ok());
      REQUIRE(ref.has_value());
      CHECK(sol.objective == Catch::Approx(ref->objective).margin(2e-6));
      CHECK(oracle::strong_duality_gap(m, sol) <= 1e-6);
      std::string why;
      const bool kkt = oracle::kkt_optimal(m, sol, 2e-6, &why);
      INFO(why);
      CHECK(kkt);
    }
  }
}

TEST_CASE("assignment LP lands on the best permutation") {
  // 4x4 assignment relaxation has integral vertices; brute force over the
  // 24 permutations is an independent optimum.
  const double cost[4][4] = {
      {9, 2, 7, 8}, {6, 4, 3, 7}, {5, 8, 1, 8}, {7, 6, 9, 4}};
  LinearModel m;
  int var[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      var[i][j] = m.add_var("a" + std::to_string(i) + std::to_string(j), 0, 1,
                            cost[i][j]);
  for (int i = 0; i < 4; ++i) {
    int r = m.add_row("row" + std::to_string(i), Sense::eq, 1.0);
    for (int j = 0; j < 4; ++j) m.add_term(r, var[i][j], 1.0);
  }
  for (int j = 0; j < 4; ++j) {
    int r = m.add_row("col" + std::to_string(j), Sense::eq, 1.0);
    for (int i = 0; i < 4; ++i) m.add_term(r, var[i][j], 1.0);
  }
  int perm[4] = {0, 1, 2, 3};
  double best = 1e30;
  std::sort(perm, perm + 4);
  do {
    double c = 0;
    for (int i = 0; i < 4; ++i) c += cost[i][perm[i]];
    best = std::min(best, c);
  } while (std::next_permutation(perm, perm + 4));
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  CHECK(sol.objective == Catch::Approx(best));
  std::string why;
  CHECK(oracle::kkt_optimal(m, sol, 1e-6, &why));
  INFO(why);
}

TEST_CASE("medium sparse LP satisfies its own optimality certificate") {
  // Exercises refactorization, partial pricing, and LU fill handling.
  std::mt19937 gen(20240817);
  LinearModel m;
  const int n = 260, nr = 240;
  for (int j = 0; j < n; ++j)
    m.add_var("x" + std::to_string(j), 0.0, 50.0, draw(gen, -5, 9));
  for (int i = 0; i < nr; ++i) {
    Sense s = (i % 3 == 0) ? Sense::eq : (i % 3 == 1 ? Sense::le : Sense::ge);
    double rhs = (s == Sense::ge) ? -draw(gen, 0, 30) : draw(gen, 5, 60);
    int r = m.add_row("r" + std::to_string(i), s, rhs);
    for (int k = 0; k < 6; ++k)
      m.add_term(r, draw(gen, 0, n - 1), draw(gen, 1, 5) * (k % 2 ? -1 : 1));
    m.add_term(r, i % n, 1.0);  // keep every row nonempty
    if (s == Sense::eq) {
      // A dedicated wide-range variable keeps equality rows satisfiable.
      int slack = m.add_var("s" + std::to_string(i), -500.0, 500.0, 3.0);
      m.add_term(r, slack, 1.0);
    }
  }
  auto sol = solve_lp(m);
  REQUIRE(sol.ok());
  CHECK(oracle::strong_duality_gap(m, sol) <= 1e-6);
  std::string why;
  const bool kkt = oracle::kkt_optimal(m, sol, 1e-5, &why);
  INFO(why);
  CHECK(kkt);
  // Reported activities must match recomputed ones.
  for (int i = 0; i < m.n_rows(); ++i) {
    double act = 0.0;
    for (const auto& [j, c] : m.rows[i].terms) act += c * sol.x[j];
    REQUIRE(sol.row_activity[i] == Catch::Approx(act).margin(1e-6));
  }
}

TEST_CASE("solving the same model twice is bitwise deterministic") {
  std::mt19937 gen(7);
  LinearModel m;
  for (int j = 0; j < 12; ++j)
    m.add_var("x" + std::to_string(j), 0.0, 20.0, draw(gen, -5, 5));
  for (int i = 0; i < 10; ++i) {
    int r = m.add_row("r" + std::to_string(i), i % 2 ? Sense::le : Sense::ge,
                      draw(gen, -3, 10));
    for (int k = 0; k < 4; ++k) m.add_term(r, draw(gen, 0, 11), draw(gen, -3, 3));
    m.add_term(r, i, 1.0);
  }
  auto a = solve_lp(m);
  auto b = solve_lp(m);
  REQUIRE(a.status == b.status);
  REQUIRE(a.iterations == b.iterations);
  for (size_t j = 0; j < a.x.size(); ++j) REQUIRE(a.x[j] == b.x[j]);
  for (size_t i = 0; i < a.duals.size(); ++i) REQUIRE(a.duals[i] == b.duals[i]);
}

TEST_CASE("warm restart after bound tightening matches a cold solve") {
  std::mt19937 gen(99);
  LinearModel m;
  for (int j = 0; j < 10; ++j)
    m.add_var("x" + std::to_string(j), 0.0, 8.0, draw(gen, -4, 4));
  for (int i = 0; i < 8; ++i) {
    int r = m.add_row("r" + std::to_string(i), i % 2 ? Sense::le : Sense::ge,
                      i % 2 ? 12.0 : -4.0);
    for (int k = 0; k < 5; ++k) m.add_term(r, draw(gen, 0, 9), draw(gen, -3, 3));
    m.add_term(r, i, 1.0);
  }
  Simplex warm(m);
  auto base = warm.solve();
  REQUIRE(base.ok());
  auto basis = warm.basis();

  // Tighten a few bounds so the old optimum is primal infeasible.
  LinearModel tight = m;
  for (int j : {0, 3, 7}) {
    tight.vars[j].lb = 1.0;
    tight.vars[j].ub = 2.0;
    warm.set_var_bounds(j, 1.0, 2.0);
  }
  auto fast = warm.solve_warm(basis);
  auto cold = solve_lp(tight);
  REQUIRE(fast.status == cold.status);
  if (cold.ok()) {
    CHECK(fast.objective == Catch::Approx(cold.objective).margin(1e-7));
    std::string why;
    CHECK(oracle::kkt_optimal(tight, fast, 1e-6, &why));
    INFO(why);
  }
}

TEST_CASE("dual simplex detects infeasibility after bound tightening") {
  LinearModel m;
  int x = m.add_var("x", 0, 10, 1.0);
  int y = m.add_var("y", 0, 10, 1.0);
  int r = m.add_row("need", Sense::ge, 5.0);
  m.add_term(r, x, 1.0);
  m.add_term(r, y, 1.0);
  Simplex s(m);
  auto base = s.solve();
  REQUIRE(base.ok());
  auto basis = s.basis();
  s.set_var_bounds(x, 0, 1);
  s.set_var_bounds(y, 0, 1);
  auto sol = s.solve_warm(basis);
  CHECK(sol.status == LpStatus::infeasible);
}

TEST_CASE("knapsack MIP matches exhaustive enumeration") {
  const double w[10] = {3, 5, 7, 2, 9, 4, 6, 8, 1, 5};
  const double v[10] = {4, 7, 9, 2, 12, 5, 7, 11, 1, 6};
  const double cap = 20;
  LinearModel m;
  for (int j = 0; j < 10; ++j)
    m.add_var("b" + std::to_string(j), 0, 1, -v[j], true);
  int r = m.add_row("cap", Sense::le, cap);
  for (int j = 0; j < 10; ++j) m.add_term(r, j, w[j]);

  double best = 0;
  for (int mask = 0; mask < 1024; ++mask) {
    double tw = 0, tv = 0;
    for (int j = 0; j < 10; ++j)
      if (mask & (1 << j)) {
        tw += w[j];
        tv += v[j];
      }
    if (tw <= cap) best = std::max(best, tv);
  }
  auto sol = solve_mip(m);
  REQUIRE(sol.ok());
  CHECK(sol.objective == Catch::Approx(-best));
  CHECK(sol.best_bound <= sol.objective + 1e-9);
  for (int j = 0; j < 10; ++j)
    CHECK(sol.x[j] == Catch::Approx(std::round(sol.x[j])));
}

TEST_CASE("mixed integer model matches the enumeration oracle") {
  for (unsigned seed = 1; seed <= 25; ++seed) {
    std::mt19937 gen(seed * 31);
    LinearModel m;
    for (int j = 0; j < 3; ++j)
      m.add_var("i" + std::to_string(j), 0, 3, draw(gen, -4, 4), true);
    for (int j = 0; j < 3; ++j)
      m.add_var("c" + std::to_string(j), 0.0, 6.0, draw(gen, -4, 4));
    for (int i = 0; i < 4; ++i) {
      Sense s = i % 2 ? Sense::le : Sense::ge;
      int r = m.add_row("r" + std::to_string(i), s, s == Sense::le ? draw(gen, 4, 14)
                                                                   : draw(gen, -6, 2));
      for (int j = 0; j < 6; ++j) {
        int c = draw(gen, -2, 2);
        if (c != 0) m.add_term(r, j, c);
      }
      m.add_term(r, i % 6, 1.0);
    }
    INFO("seed " << seed * 31);
    auto sol = solve_mip(m);
    auto ref = oracle::mip_enumeration_optimum(m);
    if (!ref.has_value()) {
      CHECK(sol.status == MipStatus::infeasible);
    } else {
      REQUIRE(sol.ok());
      CHECK(sol.objective == Catch::Approx(ref->objective).margin(1e-5));
    }
  }
}

TEST_CASE("integer-infeasible model with feasible relaxation") {
  LinearModel m;
  int x = m.add_var("x", 0, 5, 1.0, true);
  int r = m.add_row("odd", Sense::eq, 1.0);
  m.add_term(r, x, 2.0);  // 2x = 1 has no integer solution
  auto sol = solve_mip(m);
  CHECK(sol.status == MipStatus::infeasible);
}

TEST_CASE("resolve_fixed returns priceable duals at the incumbent") {
  LinearModel m;
  int u = m.add_var("u", 0, 1, 10.0, true);          // commitment
  int p = m.add_var("p", 0, 8, 2.0);                 // output
  int rcap = m.add_row("cap", Sense::le, 0.0);       // p <= 8u
  m.add_term(rcap, p, 1.0);
  m.add_term(rcap, u, -8.0);
  int rdem = m.add_row("demand", Sense::ge, 5.0);
  m.add_term(rdem, p, 1.0);
  MipSolver solver(m);
  auto mip = solver.solve();
  REQUIRE(mip.ok());
  CHECK(mip.x[u] == Catch::Approx(1.0));
  CHECK(mip.objective == Catch::Approx(10.0 + 2.0 * 5.0));
  auto fixed = solver.resolve_fixed();
  REQUIRE(fixed.ok());
  // With u pinned at 1 the demand row prices at the energy cost.
  CHECK(fixed.duals[rdem] == Catch::Approx(2.0));
  CHECK(fixed.duals[rcap] == Catch::Approx(0.0));
}

TEST_CASE("branch and bound respects the relative gap option") {
  // A model whose LP bound is weak: gap 50% must accept the first incumbent.
  LinearModel m;
  for (int j = 0; j < 6; ++j) m.add_var("b" + std::to_string(j), 0, 1, -3.0 - j, true);
  int r = m.add_row("cap", Sense::le, 2.5);
  for (int j = 0; j < 6; ++j) m.add_term(r, j, 1.0);
  MipOptions loose;
  loose.gap = 0.5;
  auto sol = solve_mip(m, loose);
  REQUIRE(sol.ok());
  // Objective within 50% of the true optimum (-8 -7 = -15 with two items).
  CHECK(sol.objective <= -15.0 * 0.5);
  CHECK(sol.best_bound <= sol.objective + 1e-9);
}
