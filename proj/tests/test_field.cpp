#include <cmath>
#include <limits>

#include "doctest.h"
#include "kernelconv/field.hpp"

using namespace kernelconv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridSpec window64() { return GridSpec::make({-2, -2}, {2, 2}, 64, 64); }

ScalarFieldSeq field_of(const char* expr, long j_max = 64, MonotoneHint hint = MonotoneHint::None,
                        long j0 = 1, int window = 5) {
  return ScalarFieldSeq::make(Expr::parse(expr), j0, j_max, window, hint);
}

}  // namespace

TEST_CASE("field spec validation") {
  CHECK_NOTHROW(field_of("x^2 + y^2 - 1/j"));
  CHECK_THROWS_AS(ScalarFieldSeq::make(Expr::parse("x"), 1, 64, 0, MonotoneHint::None), SpecError);
  CHECK_THROWS_AS(ScalarFieldSeq::make(Expr::parse("x"), 0, 64, 5, MonotoneHint::None), SpecError);
  CHECK_THROWS_AS(ScalarFieldSeq::make(Expr::parse("x"), 60, 64, 5, MonotoneHint::None), SpecError);
}

TEST_CASE("field sampling") {
  GridSpec g = window64();
  ScalarFieldSeq seq = field_of("r^2 + s^2 - 1/j");
  FieldGrid f = sample_field(seq, 4, g);
  Cell c{40, 24};
  Point p = g.center(c);
  CHECK(f.at(c) == doctest::Approx(p.x * p.x + p.y * p.y - 0.25));

  // negative infinity is a legitimate sample
  FieldGrid logs = sample_field(field_of("log(abs(x) - abs(x))"), 1, g);
  CHECK(logs.at({5, 5}) == -kInf);

  // +infinity and indeterminate forms name the offending cell
  CHECK_THROWS_AS(sample_field(field_of("1/(x - x)"), 1, g), FieldError);
  try {
    sample_field(field_of("1/(x - x)"), 3, g);
  } catch (const FieldError& e) {
    CHECK(std::string(e.what()).find("field at cell (0, 0), j=3") == 0);
  }
}

TEST_CASE("usc regularization is a clipped neighborhood max") {
  GridSpec g = GridSpec::make({0, 0}, {8, 6}, 8, 6);
  FieldGrid f(g, 0);
  f.values[g.index({3, 2})] = 5;
  f.values[g.index({6, 4})] = -kInf;

  FieldGrid u = usc_regularize(f);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) CHECK(u.at({3 + dx, 2 + dy}) == 5);
  CHECK(u.at({3, 0}) == 0);
  // an isolated dip is absorbed by its finite neighbors
  CHECK(u.at({6, 4}) == 0);

  // a window full of -infinity stays that way (border clipping keeps the max
  // over the in-window neighbors only)
  FieldGrid all_neg(g, -kInf);
  CHECK(usc_regularize(all_neg).at({0, 0}) == -kInf);
}

TEST_CASE("tail suprema under monotone hints") {
  GridSpec g = window64();

  SUBCASE("decreasing fields evaluate exactly at the start index") {
    auto [f, rep] = tail_sup(field_of("x + 1/j", 64, MonotoneHint::Decreasing), 4, g);
    CHECK(rep.method == "exact");
    CHECK(rep.stabilized);
    CHECK(rep.k_or_j_reached == 4);
    Cell c{10, 10};
    CHECK(f.at(c) == doctest::Approx(g.center(c).x + 0.25));
  }

  SUBCASE("increasing fields evaluate at the budget end and say so") {
    auto [f, rep] = tail_sup(field_of("x - 1/j", 64, MonotoneHint::Increasing), 4, g);
    CHECK(rep.method == "budget");
    CHECK(!rep.stabilized);
    CHECK(rep.k_or_j_reached == 64);
    Cell c{10, 10};
    CHECK(f.at(c) == doctest::Approx(g.center(c).x - 1.0 / 64));
  }

  SUBCASE("unhinted fields run the windowed max") {
    // constant in j: the running max never moves and the window holds at once
    auto [f, rep] = tail_sup(field_of("x*y"), 2, g);
    CHECK(rep.method == "window");
    CHECK(rep.stabilized);
    CHECK(rep.k_or_j_reached == 2 + 5);
    Cell c{20, 30};
    CHECK(f.at(c) == doctest::Approx(g.center(c).x * g.center(c).y));

    // eventually-flat growth stabilizes once the plateau is reached
    auto [f2, rep2] = tail_sup(field_of("min(j, 3) + x"), 1, g);
    CHECK(rep2.stabilized);
    CHECK(f2.at(c) == doctest::Approx(3 + g.center(c).x));

    // a supremum approached forever runs out the budget
    auto [f3, rep3] = tail_sup(field_of("x - 1/j"), 1, g);
    CHECK(rep3.method == "budget");
    CHECK(!rep3.stabilized);
    CHECK(f3.at(c) == doctest::Approx(g.center(c).x - 1.0 / 64));
  }

  SUBCASE("equal infinities count as zero change") {
    // the s = 0 profile row keeps log(0) = -infinity at every j; two equal
    // infinities must read as zero delta (a naive difference would be NaN and
    // poison the window logic), while the finite rows creep at 1/j and carry
    // the scan to the budget
    GridSpec prof = GridSpec::make({0, -0.015625}, {2, 1.984375}, 64, 64);
    REQUIRE(prof.center({0, 0}).y == 0);
    auto [f, rep] = tail_sup(field_of("r^2 + s^2 - 1 + log(s^2)/j", 64), 1, prof);
    CHECK(rep.method == "budget");
    CHECK(f.at({10, 0}) == -kInf);
    CHECK(std::isfinite(f.at({10, 1})));
  }

  CHECK_THROWS_AS(tail_sup(field_of("x"), 0, g), SpecError);
}

TEST_CASE("the limit envelope") {
  GridSpec g = window64();

  SUBCASE("an index-free field gives its own regularization") {
    auto [psi, rep] = capital_psi(field_of("x^2 + y^2 - 1"), g);
    CHECK(rep.method == "window");
    CHECK(rep.stabilized);
    FieldGrid expect = usc_regularize(sample_field(field_of("x^2 + y^2 - 1"), 1, g));
    for (std::size_t i = 0; i < expect.values.size(); ++i)
      CHECK(psi.values[i] == doctest::Approx(expect.values[i]));
  }

  SUBCASE("an alternating field settles on the upper branch") {
    auto [psi, rep] = capital_psi(field_of("x^2 + y^2 - 0.625 + 0.375*(-1)^j"), g);
    CHECK(rep.stabilized);
    FieldGrid expect = usc_regularize(sample_field(field_of("x^2 + y^2 - 0.25"), 1, g));
    for (std::size_t i = 0; i < expect.values.size(); ++i)
      CHECK(psi.values[i] == doctest::Approx(expect.values[i]));
  }

  SUBCASE("a tail supremum that keeps falling runs to the budget cap") {
    auto [psi, rep] = capital_psi(field_of("x + 1/j"), g);
    CHECK(rep.method == "budget");
    CHECK(!rep.stabilized);
    CHECK(rep.k_or_j_reached == 64 - 5);
    // the envelope is the regularized suffix supremum at the deepest k: the
    // neighborhood max shifts the linear part one cell to the right
    Cell c{10, 10};
    double expect = g.center({11, 10}).x + 1.0 / rep.k_or_j_reached;
    CHECK(psi.at(c) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("sublevel kernel from the envelope") {
  GridSpec g = window64();

  SUBCASE("disc sublevel at the origin") {
    PointedMask k = kernel_from_psi(field_of("x^2 + y^2 - 1"), {0, 0}, g);
    REQUIRE(!k.is_empty());
    // oracle: strict sublevel of the neighborhood max of d^2 - 1
    GridMask oracle(g);
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        double m = -kInf;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            Cell n{ix + dx, iy + dy};
            if (!g.contains(n)) continue;
            Point p = g.center(n);
            m = std::max(m, p.x * p.x + p.y * p.y - 1);
          }
        if (m < 0) oracle.set({ix, iy});
      }
    CHECK(k.mask == oracle);  // the disc sublevel is already connected
    CHECK(k.point == g.cell_at({0, 0}));
  }

  SUBCASE("a base point outside the sublevel set is rejected") {
    CHECK_THROWS_AS(kernel_from_psi(field_of("x^2 + y^2 - 1"), {1.5, 0}, g), TamenessError);
    CHECK_THROWS_AS(kernel_from_psi(field_of("x^2 + y^2 - 1"), {5, 5}, g), SpecError);
  }

  SUBCASE("only the base component is returned") {
    // two discs, connected for the field but separated in the sublevel set
    PointedMask k = kernel_from_psi(
        field_of("min((x-1)^2 + y^2, (x+1)^2 + y^2) - 0.25"), {1, 0}, g);
    REQUIRE(!k.is_empty());
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        if (k.mask.test({ix, iy})) CHECK(g.center({ix, iy}).x > 0);
  }
}

TEST_CASE("boundary flatness diagnostic") {
  GridSpec g = window64();

  SUBCASE("a clean disc field has no flat spots") {
    FieldGrid psi = usc_regularize(sample_field(field_of("x^2 + y^2 - 1"), 1, g));
    BoundaryDiagnostic d = boundary_condition_diagnostic(psi, 0.05);
    CHECK(d.ok);
    CHECK(d.violations.empty());
    CHECK(d.delta == 0.05);
  }

  SUBCASE("a plateau pinned just below zero is flagged") {
    FieldGrid psi = sample_field(field_of("max(x^2 + y^2 - 1, -0.02)"), 1, g);
    BoundaryDiagnostic d = boundary_condition_diagnostic(psi, 0.05);
    CHECK(!d.ok);
    // the whole deep interior of the disc sits at -0.02, within delta of
    // zero yet far from the sublevel boundary
    CHECK(d.violations.size() > 100);
  }
}

TEST_CASE("dual-route sublevel cross-check") {
  GridSpec g = window64();

  SUBCASE("index-free disc") {
    CrossCheckResult r = cross_check_sublevel(field_of("x^2 + y^2 - 1"), {0, 0}, g);
    CHECK(r.equal);
    CHECK(r.band_measured <= 2);
    CHECK(r.warnings.empty());
    CHECK(r.component_hypothesis_ok);
    CHECK(r.boundary_hypothesis_ok);
    REQUIRE(!r.kernel_domains.is_empty());
    REQUIRE(!r.kernel_psi.is_empty());
    // route one erodes, route two regularizes: both land on the disc
    CHECK(subset_of(r.kernel_domains.mask, rasterize_shape(disc(0, 0, 1), g)));
    CHECK(subset_of(r.kernel_psi.mask, rasterize_shape(disc(0, 0, 1), g)));
  }

  SUBCASE("alternating radii agree on the smaller disc") {
    CrossCheckResult r =
        cross_check_sublevel(field_of("x^2 + y^2 - 0.625 + 0.375*(-1)^j"), {0, 0}, g);
    CHECK(r.equal);
    // the envelope keeps the tighter branch: everything inside radius 1/2
    CHECK(subset_of(r.kernel_psi.mask, rasterize_shape(disc(0, 0, 0.55), g)));
  }

  SUBCASE("fields must be indexed from one") {
    CHECK_THROWS_AS(cross_check_sublevel(field_of("x - 1", 64, MonotoneHint::None, 3), {0, 0}, g),
                    ClassError);
  }
}
