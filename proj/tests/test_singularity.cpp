#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wirenet/singularity.hpp"

using namespace wirenet;

namespace {

bool near_point(const KVec& k, std::initializer_list<double> target, double tol) {
  KVec t(target);
  return torus_dist(k, t) < tol;
}

const DegeneracyPoint* find_point(const DegeneracyReport& rep,
                                  std::initializer_list<double> target, double tol = 1e-4) {
  for (const auto& p : rep.points)
    if (near_point(p.k, target, tol)) return &p;
  return nullptr;
}

}  // namespace

TEST_CASE("char_map on the honeycomb gives a0 = -|f|^2 and a vanishing shift residual") {
  auto f = make_family(builtin_model("honeycomb"));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (int i = 0; i < 100; ++i) {
    KVec k{u(rng), u(rng)};
    auto cp = char_map(f, k);
    double f2 = std::norm(1.0 + std::polar(1.0, k[0]) + std::polar(1.0, k[1]));
    REQUIRE(cp.a.size() == 1);
    CHECK(cp.a[0] == Catch::Approx(-f2).margin(1e-9));
    CHECK(cp.a[0] >= -9.0 - 1e-12);
    CHECK(cp.a[0] <= 0.0 + 1e-12);
    CHECK(cp.shift_residual < 1e-12);
    CHECK(cp.discriminant >= 0.0);
    // b reproduces the eigenvalues: evaluate the monic polynomial at them
    auto ev = f.eigenvalues(k);
    for (double lam : ev) {
      double val = 1.0;
      for (int j = static_cast<int>(cp.b.size()) - 1; j >= 0; --j) val = val * lam + cp.b[j];
      CHECK(std::abs(val) < 1e-8);
    }
  }
}

TEST_CASE("char_map on the gyroid has constant z^2 coefficient -6") {
  auto f = make_family(builtin_model("G"));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (int i = 0; i < 100; ++i) {
    auto cp = char_map(f, {u(rng), u(rng), u(rng)});
    REQUIRE(cp.a.size() == 3);
    CHECK(cp.a[2] == Catch::Approx(-6.0).margin(1e-9));
  }
}

TEST_CASE("diagonal family with distinct entries has positive discriminant") {
  HamiltonianFamily f(2, 3,
                      [](const KVec&) {
                        CMatrix m(3);
                        m(0, 0) = -1.0;
                        m(1, 1) = 0.5;
                        m(2, 2) = 2.0;
                        return m;
                      },
                      4.0);
  auto cp = char_map(f, {0.0, 0.0});
  CHECK(cp.discriminant > 1.0);
}

TEST_CASE("P lattice scan finds no degenerate points") {
  auto f = make_family(builtin_model("P"));
  auto rep = scan_and_classify(f, ScanParams{.grid = 16});
  CHECK(rep.points.empty());
}

TEST_CASE("honeycomb scan finds exactly the two conical points, each A1 and Dirac") {
  auto f = make_family(builtin_model("honeycomb"));
  auto rep = scan_and_classify(f, ScanParams{.grid = 32});
  REQUIRE(rep.points.size() == 2);
  const double k1 = 2 * M_PI / 3, k2 = 4 * M_PI / 3;
  CHECK(find_point(rep, {k1, k2}, 1e-6) != nullptr);
  CHECK(find_point(rep, {k2, k1}, 1e-6) != nullptr);
  for (const auto& p : rep.points) {
    CHECK(p.converged);
    CHECK(p.min_gap < 1e-8);
    CHECK(p.stratum == std::vector<int>{1});
    CHECK_FALSE(p.non_isolated);
    REQUIRE(p.dirac.size() == 1);
    CHECK(p.dirac[0].applicable);
    CHECK(p.dirac[0].is_dirac);
    CHECK(p.discriminant < 1e-16);
    // closed form: the refined point zeroes f
    CHECK(std::abs(1.0 + std::polar(1.0, p.k[0]) + std::polar(1.0, p.k[1])) < 1e-7);
  }
}

TEST_CASE("gyroid scan reproduces the four ramification points with their strata") {
  auto f = make_family(builtin_model("G"));
  auto rep = scan_and_classify(f, ScanParams{.grid = 32});
  REQUIRE(rep.points.size() == 4);
  const double h = M_PI / 2;
  struct Want {
    std::initializer_list<double> k;
    std::vector<int> stratum;
  };
  const Want wants[] = {
      {{0.0, 0.0, 0.0}, {2}},
      {{M_PI, M_PI, M_PI}, {2}},
      {{h, h, h}, {1, 1}},
      {{3 * h, 3 * h, 3 * h}, {1, 1}},
  };
  for (const auto& w : wants) {
    const auto* p = find_point(rep, w.k, 1e-6);
    REQUIRE(p != nullptr);
    CHECK(p->converged);
    CHECK(p->stratum == w.stratum);
    CHECK(p->discriminant < 1e-16);
    CHECK_FALSE(p->non_isolated);
    if (w.stratum == std::vector<int>{1, 1}) {
      REQUIRE(p->dirac.size() == 2);
      for (const auto& d : p->dirac) {
        CHECK(d.applicable);
        CHECK(d.is_dirac);
        CHECK(d.nondegenerate);
        CHECK((d.n_pos == 1 || d.n_neg == 1));
      }
    } else {
      CHECK(p->dirac.empty());  // triple point: no two-band Morse test applies
    }
  }
}

TEST_CASE("D surface scan samples the degenerate circles") {
  auto f = make_family(builtin_model("D"));
  auto rep = scan_and_classify(f, ScanParams{.grid = 24});
  REQUIRE(rep.points.size() >= 60);
  int checked_dirac = 0;
  for (const auto& p : rep.points) {
    CHECK(p.converged);
    CHECK(p.non_isolated);
    CHECK(p.stratum == std::vector<int>{1});
    // each refined point lies on one of the three circles
    bool on_circle = false;
    for (int i = 0; i < 3 && !on_circle; ++i) {
      int j = (i + 1) % 3, l = (i + 2) % 3;
      double di = cyclic_sep(p.k[i], M_PI);
      double rel = cyclic_sep(p.k[j], wrap_2pi(p.k[l] + M_PI));
      if (di < 1e-6 && rel < 1e-6) on_circle = true;
      rel = cyclic_sep(p.k[l], wrap_2pi(p.k[j] + M_PI));
      if (di < 1e-6 && rel < 1e-6) on_circle = true;
    }
    CHECK(on_circle);
    if (checked_dirac < 8) {
      ++checked_dirac;
      auto d = dirac_test(f, p.k, 0);
      CHECK(d.applicable);
      CHECK_FALSE(d.nondegenerate);  // not Morse along the circle
      CHECK_FALSE(d.is_dirac);
    }
  }
}

TEST_CASE("discriminant vanishes iff the gap vanishes on refined points") {
  auto f = make_family(builtin_model("G"));
  auto rep = scan_and_classify(f, ScanParams{.grid = 32});
  for (const auto& p : rep.points) {
    CHECK(p.min_gap < 1e-8);
    CHECK(p.discriminant < 1e-16);
  }
  // generic points: both clearly nonzero
  auto cp = char_map(f, {1.0, 2.0, 0.5});
  CHECK(cp.discriminant > 1e-6);
  CHECK(f.min_gap({1.0, 2.0, 0.5}) > 1e-2);
}

TEST_CASE("refine_degenerate localizes the gyroid Dirac point to 1e-6") {
  auto f = make_family(builtin_model("G"));
  KVec k0{M_PI / 2 + 0.09, M_PI / 2 - 0.07, M_PI / 2 + 0.05};
  auto rr = refine_degenerate(f, k0, 0.1);
  CHECK(rr.converged);
  CHECK(near_point(rr.k, {M_PI / 2, M_PI / 2, M_PI / 2}, 1e-6));
}

TEST_CASE("dirac_test is inapplicable off the crossing and on non-isolated pairs") {
  auto f = make_family(builtin_model("G"));
  // generic point: no coincident pair
  auto v = dirac_test(f, {1.0, 0.4, 2.2}, 0);
  CHECK_FALSE(v.applicable);
  // triple point: pair not isolated
  auto w = dirac_test(f, {0.0, 0.0, 0.0}, 0);
  CHECK_FALSE(w.applicable);
}

TEST_CASE("classify_stratum on the gyroid special points") {
  auto f = make_family(builtin_model("G"));
  auto a2 = classify_stratum(f, {0.0, 0.0, 0.0});
  CHECK(a2.partition == std::vector<int>{3, 1});
  CHECK(a2.stratum == std::vector<int>{2});
  auto a11 = classify_stratum(f, {M_PI / 2, M_PI / 2, M_PI / 2});
  CHECK(a11.partition == std::vector<int>{2, 2});
  CHECK(a11.stratum == std::vector<int>{1, 1});
  auto generic = classify_stratum(f, {1.0, 0.3, 2.1});
  CHECK(generic.stratum.empty());
  CHECK(generic.partition == std::vector<int>{1, 1, 1, 1});
}
