#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "wirenet/bloch.hpp"

using namespace wirenet;

namespace {

cplx honeycomb_f(double k1, double k2) {
  return 1.0 + std::polar(1.0, k1) + std::polar(1.0, k2);
}

}  // namespace

TEST_CASE("honeycomb H(0) has off-diagonal 3 and eigenvalues -3, 3") {
  auto f = make_family(builtin_model("honeycomb"));
  auto H = f({0.0, 0.0});
  CHECK(H(0, 1) == cplx(3.0, 0.0));
  auto ev = f.eigenvalues({0.0, 0.0});
  CHECK(ev[0] == Catch::Approx(-3.0));
  CHECK(ev[1] == Catch::Approx(3.0));
}

TEST_CASE("honeycomb bands match the closed form +-|1+e^{ik1}+e^{ik2}|") {
  auto f = make_family(builtin_model("honeycomb"));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (int i = 0; i < 200; ++i) {
    double k1 = u(rng), k2 = u(rng);
    auto ev = f.eigenvalues({k1, k2});
    double a = std::abs(honeycomb_f(k1, k2));
    CHECK(ev[0] == Catch::Approx(-a).margin(1e-10));
    CHECK(ev[1] == Catch::Approx(a).margin(1e-10));
  }
}

TEST_CASE("P band is the cosine sum; H at the quarter point vanishes") {
  auto f = make_family(builtin_model("P"));
  auto H = f({M_PI / 2, M_PI / 2, M_PI / 2});
  CHECK(std::abs(H(0, 0)) < 1e-14);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (int i = 0; i < 200; ++i) {
    KVec k{u(rng), u(rng), u(rng)};
    auto ev = f.eigenvalues(k);
    CHECK(ev[0] ==
          Catch::Approx(2.0 * (std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2]))).margin(1e-12));
  }
}

TEST_CASE("gyroid H(0) is the K4 adjacency with eigenvalues {-1,-1,-1,3}") {
  auto f = make_family(builtin_model("G"));
  auto H = f({0.0, 0.0, 0.0});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(H(i, j) == (i == j ? cplx(0.0) : cplx(1.0)));
  auto ev = f.eigenvalues({0.0, 0.0, 0.0});
  CHECK(ev[0] == Catch::Approx(-1.0));
  CHECK(ev[1] == Catch::Approx(-1.0));
  CHECK(ev[2] == Catch::Approx(-1.0));
  CHECK(ev[3] == Catch::Approx(3.0));
}

TEST_CASE("gyroid spectra at the special diagonal points") {
  auto f = make_family(builtin_model("G"));
  // (pi,pi,pi): triple degeneracy, pattern (1,3)
  auto ev = f.eigenvalues({M_PI, M_PI, M_PI});
  CHECK(ev[0] == Catch::Approx(-3.0));
  CHECK(ev[1] == Catch::Approx(1.0));
  CHECK(ev[2] == Catch::Approx(1.0));
  CHECK(ev[3] == Catch::Approx(1.0));
  // (pi/2,pi/2,pi/2): two double crossings at +-sqrt(3)
  auto ev2 = f.eigenvalues({M_PI / 2, M_PI / 2, M_PI / 2});
  CHECK(ev2[0] == Catch::Approx(-std::sqrt(3.0)));
  CHECK(ev2[1] == Catch::Approx(-std::sqrt(3.0)));
  CHECK(ev2[2] == Catch::Approx(std::sqrt(3.0)));
  CHECK(ev2[3] == Catch::Approx(std::sqrt(3.0)));
}

TEST_CASE("property: hermiticity, k -> -k symmetry, zero trace, spectral bound") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (const char* name : {"P", "D", "G", "honeycomb"}) {
    auto m = builtin_model(name);
    auto f = make_family(m);
    double bound = m.weight_bound();
    for (int i = 0; i < 1000; ++i) {
      KVec k(m.dim), mk(m.dim);
      for (int d = 0; d < m.dim; ++d) { k[d] = u(rng); mk[d] = -k[d]; }
      auto H = f(k);
      CHECK(H.herm_defect() < 1e-12);
      auto Hm = f(mk);
      // real weights: H(-k) = conj(H(k))
      for (int a = 0; a < H.size(); ++a)
        for (int b = 0; b < H.size(); ++b)
          CHECK(std::abs(Hm(a, b) - std::conj(H(a, b))) < 1e-12);
      if (!m.has_self_loops()) {
        cplx tr = 0;
        for (int a = 0; a < H.size(); ++a) tr += H(a, a);
        CHECK(std::abs(tr) < 1e-13);
      }
      auto ev = f.eigenvalues(k);
      CHECK(std::abs(ev.front()) <= bound + 1e-9);
      CHECK(std::abs(ev.back()) <= bound + 1e-9);
    }
  }
}

TEST_CASE("gauge invariance: spectra agree across random gauges") {
  std::mt19937_64 rng(8);
  for (const char* name : {"P", "D", "G", "honeycomb"}) {
    auto m = builtin_model(name);
    auto g0 = make_gauge(m, 0);
    auto ks = random_kpoints(m.dim, 100, 12345);
    for (int rep = 0; rep < 4; ++rep) {
      auto g = random_gauge(m, rng);
      CHECK(regauge_deviation(m, g0, g, ks) < 1e-10);
    }
  }
}

TEST_CASE("band_structure emits a lexicographic CSV with closed-form P values") {
  auto f = make_family(builtin_model("P"));
  auto t = band_structure(f, 4);
  REQUIRE(t.kpoints.size() == 64);
  // lexicographic: second index varies fastest
  CHECK(t.kpoints[1][2] == Catch::Approx(M_PI / 2));
  CHECK(t.kpoints[4][1] == Catch::Approx(M_PI / 2));
  for (size_t i = 0; i < t.kpoints.size(); ++i) {
    const auto& k = t.kpoints[i];
    CHECK(t.bands[i][0] ==
          Catch::Approx(2 * (std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2]))).margin(1e-12));
  }
  std::ostringstream os;
  write_band_csv(t, 3, 1, os);
  CHECK(os.str().substr(0, 17) == "k1,k2,k3,lambda1\n");
}

TEST_CASE("band budget guard fires") {
  auto f = make_family(builtin_model("G"));
  CHECK_THROWS_AS(band_structure(f, 4096), BudgetError);
}

TEST_CASE("perturbed families stay hermitian and shift weights") {
  auto m = builtin_model("G");
  auto f = make_family(m);
  std::vector<cplx> d(m.edge_count(), cplx(0.01, 0.002));
  auto fp = f.perturbed(d);
  auto H = fp({0.3, 1.1, 2.0});
  CHECK(H.herm_defect() < 1e-12);
  CHECK(std::abs(fp.edge_weight(0) - cplx(1.01, 0.002)) < 1e-15);
}

TEST_CASE("simply-laced constancy: z^{k-2} coefficient equals -|E| via two routes") {
  auto m = builtin_model("G");
  auto f = make_family(m);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (int i = 0; i < 100; ++i) {
    KVec k{u(rng), u(rng), u(rng)};
    // route 1: trace identity c_{k-2} = (tr^2 - tr H^2)/2 straight from H
    auto H = f(k);
    cplx tr = 0, tr2 = 0;
    for (int a = 0; a < 4; ++a) {
      tr += H(a, a);
      for (int b = 0; b < 4; ++b) tr2 += H(a, b) * H(b, a);
    }
    double c2_trace = 0.5 * (std::norm(tr) - tr2.real());
    CHECK(c2_trace == Catch::Approx(-6.0).margin(1e-10));
    // route 2: elementary symmetric function of the eigenvalues
    auto ev = f.eigenvalues(k);
    double e2 = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) e2 += ev[a] * ev[b];
    CHECK(e2 == Catch::Approx(-6.0).margin(1e-9));
  }
}
