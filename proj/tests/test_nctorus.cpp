#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wirenet/nctorus.hpp"

using namespace wirenet;

namespace {

const char* kSquare = R"({"name":"square","dim":2,"lattice_basis":[[1,0],[0,1]],
  "vertices":["o"],"edges":[{"from":0,"to":0,"translation":[1,0]},{"from":0,"to":0,"translation":[0,1]}]})";

std::vector<long> int_shift(const WeylWord& w) { return word_int_shift(w); }

}  // namespace

TEST_CASE("flux spec: skew storage, exact cocycle antisymmetry") {
  auto fx = FluxSpec::from_upper(3, {Rational(1, 3), Rational(-1, 2), Rational(2, 5)});
  CHECK(fx.theta[1][0] == Rational(-1, 3));
  CHECK(fx.denominator() == 30);
  RVec u{Rational(1, 4), Rational(0), Rational(3)};
  RVec v{Rational(2), Rational(-1, 2), Rational(1, 8)};
  CHECK((fx.alpha(u, v) * fx.alpha(v, u)).is_one());
  RVec zero{Rational(0), Rational(0), Rational(0)};
  CHECK(fx.alpha(u, zero).is_one());
  // float view of the skew matrix
  CHECK(std::abs(fx.theta[0][1].value() + fx.theta[1][0].value()) < 1e-14);
}

TEST_CASE("weyl words: reverse word inverts, composition is associative") {
  auto fx = FluxSpec::from_upper(3, {Rational(1, 3), Rational(1, 7), Rational(-2, 5)});
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<RVec> steps;
    for (int s = 0; s < 4; ++s) {
      RVec v(3);
      for (auto& x : v) x = Rational(static_cast<int>(rng() % 9) - 4, 1 + static_cast<int>(rng() % 4));
      steps.push_back(v);
    }
    WeylWord w = weyl_identity(3);
    for (const auto& s : steps) w = weyl_step(fx, w, s);
    auto wrev = weyl_reverse(fx, steps);
    auto prod = weyl_compose(fx, w, wrev);
    CHECK(prod.phase.is_one());
    for (const auto& x : prod.shift) CHECK(x.num == 0);
    // associativity: (a b) c = a (b c)
    WeylWord a{steps[0], Phase()}, b{steps[1], Phase()}, c{steps[2], Phase()};
    auto l = weyl_compose(fx, weyl_compose(fx, a, b), c);
    auto r = weyl_compose(fx, a, weyl_compose(fx, b, c));
    CHECK(l.phase == r.phase);
  }
}

TEST_CASE("torus rep satisfies the commutation contract exactly") {
  // n=2, theta = 1/3: 3x3 clock/shift pair
  auto fx = FluxSpec::from_upper(2, {Rational(1, 3)});
  auto rep = torus_rep(fx, {cplx(1, 0), cplx(1, 0)});
  REQUIRE(rep.dim == 3);
  auto lhs = rep.U[0] * rep.U[1];
  auto rhs = Phase(Rational(1, 3)).value() * (rep.U[1] * rep.U[0]);
  CHECK((lhs - rhs).max_abs() < 1e-12);

  // n=1: scalar twist
  auto fx1 = FluxSpec::zero(1);
  auto rep1 = torus_rep(fx1, {std::polar(1.0, 0.7)});
  REQUIRE(rep1.dim == 1);
  CHECK(std::abs(rep1.U[0](0, 0) - std::polar(1.0, 0.7)) < 1e-15);

  // n=3, all theta = 1/2: three anticommuting unitaries
  auto fx3 = FluxSpec::from_upper(3, {Rational(1, 2), Rational(1, 2), Rational(1, 2)});
  auto rep3 = torus_rep(fx3, seeded_twist(3, 5));
  REQUIRE(rep3.dim == 8);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      auto l = rep3.U[i] * rep3.U[j];
      auto r = cplx(-1, 0) * (rep3.U[j] * rep3.U[i]);
      CHECK((l - r).max_abs() < 1e-12);
    }
  // unitarity and U^N ~ I
  for (int i = 0; i < 3; ++i) {
    auto uu = rep3.U[i].adjoint() * rep3.U[i];
    CHECK((uu - CMatrix::identity(8)).max_abs() < 1e-12);
    auto p = detail::mat_pow(rep3.U[i], 2);
    CHECK((p - rep3.eta[i] * CMatrix::identity(8)).max_abs() < 1e-12);
  }
}

TEST_CASE("rep_word obeys the cocycle composition law") {
  auto fx = FluxSpec::from_upper(3, {Rational(1, 3), Rational(-1, 2), Rational(1, 4)});
  auto rep = torus_rep(fx, seeded_twist(3, 11), 1 << 22);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 12; ++t) {
    std::vector<long> a(3), b(3), ab(3);
    RVec ar(3), br(3);
    for (int d = 0; d < 3; ++d) {
      a[d] = static_cast<long>(rng() % 5) - 2;
      b[d] = static_cast<long>(rng() % 5) - 2;
      ab[d] = a[d] + b[d];
      ar[d] = Rational(a[d]);
      br[d] = Rational(b[d]);
    }
    auto lhs = rep_word(rep, a, 1.0) * rep_word(rep, b, 1.0);
    auto rhs = fx.alpha(ar, br).value() * rep_word(rep, ab, 1.0);
    CHECK((lhs - rhs).max_abs() < 1e-11);
  }
}

TEST_CASE("magnetic entries: tree edges are trivial, zero field gives bare loop vectors") {
  auto G = builtin_model("G");
  auto g = make_gauge(G, 0);
  auto fx = FluxSpec::from_upper(3, {Rational(2, 3), Rational(1, 5), Rational(-1, 2)});
  for (int e : g.tree_edges) {
    auto w = magnetic_entry(G, g, fx, e);
    CHECK(w.phase.is_one());
    for (const auto& x : w.shift) CHECK(x.num == 0);
  }
  auto zero = FluxSpec::zero(3);
  for (int e = 0; e < G.edge_count(); ++e) {
    auto w = magnetic_entry(G, g, zero, e);
    CHECK(w.phase.is_one());
    std::vector<long> m = int_shift(w);
    for (int d = 0; d < 3; ++d) CHECK(m[d] == g.loop_vectors[e][d]);
  }
  // reversed word is the inverse
  for (int e = 0; e < G.edge_count(); ++e) {
    auto wf = magnetic_entry(G, g, fx, e, true);
    auto wr = magnetic_entry(G, g, fx, e, false);
    auto prod = weyl_compose(fx, wf, wr);
    CHECK(prod.phase.is_one());
  }
}

TEST_CASE("honeycomb magnetic entries carry the chi phases; commutation gives q") {
  auto hc = builtin_model("honeycomb");
  auto g = make_gauge(hc, 0);
  auto fx = honeycomb_flux_from_phi(Rational(1, 2));  // chi = i
  auto w1 = magnetic_entry(hc, g, fx, 1);
  auto w2 = magnetic_entry(hc, g, fx, 2);
  CHECK(w1.phase == Phase(Rational(3, 4)));  // e^{-i pi/2} = conj(chi)
  CHECK(w2.phase == Phase(Rational(1, 4)));  // e^{+i pi/2} = chi
  CHECK(int_shift(w1) == std::vector<long>{1, 0});
  CHECK(int_shift(w2) == std::vector<long>{0, 1});
  // commutation phase of the two loop words = q = conj(chi)^6
  Phase q{fx.theta[0][1]};
  Phase chi{-fx.theta[0][1] / Rational(3) * Rational(1, 2)};  // e^{i pi phi}, phi = -theta/3
  CHECK(q == Phase(Rational(1, 2)));
  CHECK(chi == Phase(Rational(1, 4)));
  CHECK(q == chi.conj().pow(6));
}

TEST_CASE("magnetic harper at zero flux with twist e^{ik} equals the Bloch matrix") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  for (const char* name : {"P", "D", "G", "honeycomb"}) {
    auto m = builtin_model(name);
    auto g = make_gauge(m, 0);
    HamiltonianFamily f(m, g);
    auto zero = FluxSpec::zero(m.dim);
    for (int t = 0; t < 25; ++t) {
      KVec k(m.dim);
      std::vector<cplx> twist(m.dim);
      for (int d = 0; d < m.dim; ++d) {
        k[d] = u(rng);
        twist[d] = std::polar(1.0, k[d]);
      }
      auto rep = torus_rep(zero, twist);
      auto H = magnetic_harper(m, g, zero, rep);
      auto B = f(k);
      REQUIRE(H.size() == B.size());
      CHECK((H - B).max_abs() < 1e-14);
    }
  }
}

TEST_CASE("magnetic harper: hermitian, spectrum gauge-independent up to a character shift") {
  auto G = builtin_model("G");
  auto fx = FluxSpec::from_upper(3, {Rational(1, 2), Rational(0), Rational(0)});
  auto twist = seeded_twist(3, 42);
  auto rep = torus_rep(fx, twist);
  auto g0 = make_gauge(G, 0);
  auto H0 = magnetic_harper(G, g0, fx, rep);
  CHECK(H0.herm_defect() < 1e-12);
  auto e0 = eigvals_hermitian(H0);
  CHECK(std::abs(e0.front()) <= 6.0 + 1e-9);  // norm bound from six unit edges
  CHECK(std::abs(e0.back()) <= 6.0 + 1e-9);

  // same root, any tree and order: isospectral at the same twist
  std::mt19937_64 rng(13);
  int tested = 0;
  while (tested < 3) {
    auto g1 = random_gauge(G, rng);
    if (g1.root != 0) continue;
    ++tested;
    auto e1 = eigvals_hermitian(magnetic_harper(G, g1, fx, rep));
    for (size_t i = 0; i < e0.size(); ++i) CHECK(e0[i] == Catch::Approx(e1[i]).margin(1e-10));
  }

  // a different root re-gauges by a fractional magnetic translation, which
  // shifts the central character: z -> z * e^{-2 pi i (d^T theta)} with d the
  // root displacement
  for (int root : {1, 2, 3}) {
    auto g2 = make_gauge(G, root);
    auto e2 = eigvals_hermitian(magnetic_harper(G, g2, fx, rep));
    std::vector<cplx> zshift(3);
    for (int i = 0; i < 3; ++i) {
      Rational r(0);
      for (int a = 0; a < 3; ++a)
        r += (G.positions[root][a] - G.positions[0][a]) * fx.theta[a][i];
      zshift[i] = twist[i] * std::polar(1.0, -2.0 * M_PI * r.value());
    }
    auto repS = torus_rep(fx, zshift);
    auto eS = eigvals_hermitian(magnetic_harper(G, g0, fx, repS));
    for (size_t i = 0; i < e0.size(); ++i) CHECK(eS[i] == Catch::Approx(e2[i]).margin(1e-10));
  }
}

TEST_CASE("burnside: matrix units are full, monotone under extra generators, rank capped") {
  // full matrix-unit set on C^3
  std::vector<CMatrix> units;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CMatrix e(3);
      e(i, j) = 1.0;
      units.push_back(e);
    }
  auto r = burnside_fullness(units);
  CHECK(r.rank == 9);
  CHECK(r.is_full);

  // single diagonal with distinct entries: the commutative span
  CMatrix d(3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = -0.5;
  auto rd = burnside_fullness({d});
  CHECK(rd.rank == 3);
  CHECK_FALSE(rd.is_full);

  // monotone: adding a shift makes it full
  CMatrix s(3);
  s(0, 1) = 1.0;
  s(1, 2) = 1.0;
  s(2, 0) = 1.0;
  auto rs = burnside_fullness({d, s});
  CHECK(rs.rank == 9);
  CHECK(rs.rank >= rd.rank);
}

TEST_CASE("structured and dense closures agree on concrete cases") {
  auto G = builtin_model("G");
  auto gG = make_gauge(G, 0);
  for (auto upper : {std::vector<Rational>{Rational(1, 2), Rational(0), Rational(0)},
                     std::vector<Rational>{Rational(1, 2), Rational(1, 2), Rational(0)}}) {
    auto fx = FluxSpec::from_upper(3, upper);
    auto twist = seeded_twist(3, 777);
    MonomialAlgebra alg(4, fx, twist);
    auto sgens = bh_generators(G, gG, fx, alg);
    auto sr = burnside_structured(alg, sgens);
    auto rep = torus_rep(fx, twist);
    auto H = magnetic_harper(G, gG, fx, rep);
    auto dgens = represented_generators(4, rep);
    dgens.insert(dgens.begin(), H);
    auto dr = burnside_fullness(dgens);
    CHECK(sr.rank == dr.rank);
  }
  // honeycomb with the reduced rep: D^2 = k^2 N^2 so is_full matches the torus criterion
  auto hc = builtin_model("honeycomb");
  auto ghc = make_gauge(hc, 0);
  auto fx = honeycomb_flux_from_phi(Rational(1, 6));
  auto twist2 = seeded_twist(2, 99);
  auto rep2 = torus_rep(fx, twist2);
  auto H2 = magnetic_harper(hc, ghc, fx, rep2);
  auto dg = represented_generators(2, rep2);
  dg.insert(dg.begin(), H2);
  auto dr2 = burnside_fullness(dg);
  CHECK(dr2.rank == 16);
  CHECK(dr2.is_full);  // D = 2N = 4
}

TEST_CASE("analytic classifiers reproduce the worked cases") {
  // honeycomb
  CHECK(classify_honeycomb(FluxSpec::zero(2)).label == "commutative");
  CHECK_FALSE(classify_honeycomb(FluxSpec::zero(2)).full);
  auto c1 = classify_honeycomb(honeycomb_flux_from_phi(Rational(1)));  // chi=-1, q=1
  CHECK_FALSE(c1.full);
  CHECK(c1.label.find("isomorphic") != std::string::npos);
  auto cf = classify_honeycomb(honeycomb_flux_from_phi(Rational(1, 6)));
  CHECK(cf.full);
  auto c2 = classify_honeycomb(honeycomb_flux_from_phi(Rational(1, 2)));
  CHECK_FALSE(c2.full);
  CHECK(c2.label.find("case-2") != std::string::npos);

  // diamond
  auto d0 = classify_diamond(FluxSpec::zero(3));
  CHECK_FALSE(d0.full);
  CHECK(d0.label.find("case-1a") != std::string::npos);
  auto d2a = classify_diamond(diamond_flux_from_t(Rational(1, 2), Rational(1, 2), Rational(1, 2)));
  CHECK_FALSE(d2a.full);
  CHECK(d2a.label.find("case-2a") != std::string::npos);
  auto dfull = classify_diamond(diamond_flux_from_t(Rational(1, 3), Rational(0), Rational(0)));
  CHECK(dfull.full);

  // gyroid
  auto g0 = classify_gyroid(FluxSpec::zero(3));
  CHECK_FALSE(g0.full);
  CHECK(g0.label.find("case-2") != std::string::npos);
  auto gfull = classify_gyroid(FluxSpec::from_upper(3, {Rational(1, 2), Rational(0), Rational(0)}));
  CHECK(gfull.full);
  auto g2i = classify_gyroid(FluxSpec::from_upper(3, {Rational(1), Rational(-1), Rational(0)}));
  CHECK_FALSE(g2i.full);  // integer fluxes: all phi = 1
  CHECK(g2i.label.find("case-2") != std::string::npos);
  auto g3 = classify_gyroid(FluxSpec::from_upper(3, {Rational(1, 4), Rational(1, 4), Rational(0)}));
  // Phi = 1, all alpha = 1, some phi != 1 -> case 3
  CHECK_FALSE(g3.full);
  CHECK(g3.label.find("case-3") != std::string::npos);

  // P: always the trivial matrix size
  CHECK(classify_builtin("P", FluxSpec::zero(3)).full);
}

TEST_CASE("certified fullness agrees with the classifier on a small mixed panel") {
  auto hc = builtin_model("honeycomb");
  auto ghc = make_gauge(hc, 0);
  for (auto phi : {Rational(0), Rational(1, 2), Rational(1, 6), Rational(1, 4)}) {
    auto cert = certify_fullness(hc, ghc, honeycomb_flux_from_phi(phi));
    INFO("phi = " << phi.str());
    CHECK(cert.has_analytic);
    CHECK(cert.agree);
  }
  auto G = builtin_model("G");
  auto gG = make_gauge(G, 0);
  for (auto upper : {std::vector<Rational>{Rational(0), Rational(0), Rational(0)},
                     std::vector<Rational>{Rational(1, 2), Rational(0), Rational(0)},
                     std::vector<Rational>{Rational(1, 2), Rational(1, 2), Rational(0)}}) {
    auto cert = certify_fullness(G, gG, FluxSpec::from_upper(3, upper));
    CHECK(cert.agree);
  }
}

TEST_CASE("known edge: printed one-parameter family point full at all sampled characters") {
  // The compressed case-(3) description admits t = (0,1/3,1/3); every sampled
  // character (generic and sign characters, and much finer grids offline) has
  // full rank there. Documented as-is; the acceptance panel uses the
  // family members that the certification confirms.
  auto D = builtin_model("D");
  auto gD = make_gauge(D, 0);
  auto fx = diamond_flux_from_t(Rational(0), Rational(1, 3), Rational(1, 3));
  auto v = classify_diamond(fx);
  CHECK_FALSE(v.full);
  CHECK(v.label.find("case-3") != std::string::npos);
  auto cert = certify_fullness(D, gD, fx);
  CHECK(cert.numeric_full);
  CHECK_FALSE(cert.agree);
}

TEST_CASE("integer flux shifts change entries but preserve the certified rank structure") {
  auto G = builtin_model("G");
  auto gG = make_gauge(G, 0);
  auto a = certify_fullness(G, gG, FluxSpec::from_upper(3, {Rational(1, 2), Rational(0), Rational(0)}));
  auto b = certify_fullness(G, gG, FluxSpec::from_upper(3, {Rational(3, 2), Rational(0), Rational(0)}));
  CHECK(a.numeric_full == b.numeric_full);
  CHECK(a.min_rank == b.min_rank);
}

TEST_CASE("butterfly: square lattice reproduces the Harper gap structure") {
  auto sq = load_model(kSquare);
  auto gsq = make_gauge(sq, 0);
  auto bt = butterfly(sq, gsq, {Rational(1)}, 5, 16);
  for (const auto& row : bt.rows) {
    INFO("p/q = " << row.p << "/" << row.q);
    CHECK(row.gap_count >= 0);
    CHECK(row.lo >= -4.0 - 1e-9);
    CHECK(row.hi <= 4.0 + 1e-9);
    if (row.q == 3) CHECK(row.gap_count == 2);
    if (row.q == 4) CHECK(row.gap_count == 2);  // central pair touches
    if (row.q == 5) CHECK(row.gap_count == 4);
  }
  // oracle: classical Harper matrix at flux 1/3 (Landau-gauge tridiagonal with
  // corner phases), spectrum over the same twist set must match band-by-band
  auto fx = FluxSpec::from_upper(2, {Rational(1, 3)});
  for (double a : {0.0, 0.7}) {
    for (double b : {0.0, 1.1}) {
      auto rep = torus_rep(fx, {std::polar(1.0, a), std::polar(1.0, b)});
      auto H = magnetic_harper(sq, gsq, fx, rep);
      auto ours = eigvals_hermitian(H);
      // classical matrix: diag(2cos(a + 2 pi m / 3)) + z2 * cyclic shift + h.c.
      CMatrix O(3);
      for (int m = 0; m < 3; ++m) O(m, m) = 2.0 * std::cos(a + 2.0 * M_PI * m / 3.0);
      for (int m = 0; m < 3; ++m) {
        int mshift = (m + 1) % 3;
        O(mshift, m) += std::polar(1.0, b);
        O(m, mshift) += std::polar(1.0, -b);
      }
      auto oracle = eigvals_hermitian(O);
      for (int i = 0; i < 3; ++i) CHECK(ours[i] == Catch::Approx(oracle[i]).margin(1e-10));
    }
  }
}

TEST_CASE("butterfly: honeycomb at zero flux fills [-3,3] with no gap") {
  auto hc = builtin_model("honeycomb");
  auto ghc = make_gauge(hc, 0);
  auto bt = butterfly(hc, ghc, {Rational(1)}, 1, 24);
  REQUIRE(bt.rows.size() == 1);
  CHECK(bt.rows[0].lo == Catch::Approx(-3.0).margin(1e-9));
  CHECK(bt.rows[0].hi == Catch::Approx(3.0).margin(1e-9));
  CHECK(bt.rows[0].gap_count == 0);
}

TEST_CASE("dimension guards fire") {
  auto G = builtin_model("G");
  auto gG = make_gauge(G, 0);
  auto fx = FluxSpec::from_upper(3, {Rational(1, 7), Rational(0), Rational(0)});
  CHECK_THROWS_AS(torus_rep(fx, seeded_twist(3, 1), 200), BudgetError);
  CHECK_THROWS_AS(certify_fullness(G, gG, fx, 1, 0, 400), BudgetError);
}
