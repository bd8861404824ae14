#include <catch2/catch_amalgamated.hpp>
#include <map>

#include "whg/reps.hpp"
#include "whg/rng.hpp"

using namespace whg;

namespace {

GroupElement el(const GroupParams& gp, std::initializer_list<Residue> x,
                std::initializer_list<Residue> y, Residue z) {
  return GroupElement(gp, VecZp(x), VecZp(y), z);
}

// Independent route to rho_k: the Pauli form omega^{kz} X^x Z_k^y built
// from per-qupit shift and clock matrices via Kronecker products.
ComplexMatrix rho_pauli_form(Residue k, const GroupElement& g) {
  const auto& gp = g.params;
  const RootsOfUnity w(gp.p);
  auto x1 = [&](Residue e) {
    ComplexMatrix m(gp.p, gp.p);
    for (std::int64_t u = 0; u < gp.p; ++u) m.at(add_mod(u, e, gp.p), u) = 1.0;
    return m;
  };
  auto zk1 = [&](Residue e) {
    ComplexMatrix m(gp.p, gp.p);
    for (std::int64_t u = 0; u < gp.p; ++u) m.at(u, u) = w[mul_mod(k, mul_mod(e, u, gp.p), gp.p)];
    return m;
  };
  // digit i of the register index is less significant for smaller i, so the
  // kron chain runs from the last digit down
  ComplexMatrix xs(1, 1), zs(1, 1);
  xs.at(0, 0) = 1.0;
  zs.at(0, 0) = 1.0;
  for (std::int64_t i = gp.n - 1; i >= 0; --i) {
    xs = tensor(xs, x1(g.x[static_cast<std::size_t>(i)]));
    zs = tensor(zs, zk1(g.y[static_cast<std::size_t>(i)]));
  }
  return mat_mul(xs, zs).scaled(w[mul_mod(k, g.z, gp.p)]);
}

}  // namespace

TEST_CASE("chi pinned values and multiplicativity") {
  const GroupParams gp(3, 1);
  for (std::int64_t i = 0; i < gp.order(); ++i)
    CHECK(chi(VecZp{0}, VecZp{0}, element_from_index(gp, i)) == Complex(1.0, 0.0));
  CHECK(std::abs(chi(VecZp{1}, VecZp{2}, el(gp, {1}, {1}, 0)) - Complex(1.0, 0.0)) < 1e-12);

  Rng rng(71);
  const GroupParams gp5(5, 2);
  for (int t = 0; t < 200; ++t) {
    const auto a = element_from_index(gp5, static_cast<std::int64_t>(rng.below(3125)));
    const auto b = element_from_index(gp5, static_cast<std::int64_t>(rng.below(3125)));
    const VecZp av = vec_unrank(static_cast<std::int64_t>(rng.below(25)), 5, 2);
    const VecZp bv = vec_unrank(static_cast<std::int64_t>(rng.below(25)), 5, 2);
    CHECK(std::abs(chi(av, bv, multiply(a, b)) - chi(av, bv, a) * chi(av, bv, b)) < 1e-12);
  }
}

TEST_CASE("rho pinned values") {
  const GroupParams gp(3, 1);
  const RootsOfUnity w(3);
  for (Residue k = 1; k < 3; ++k) {
    const ComplexMatrix m = rho(k, center_generator(gp));
    CHECK(max_abs_diff(m, ComplexMatrix::identity(3).scaled(w[k])) < 1e-12);
  }
  const ComplexMatrix s = rho(1, el(gp, {1}, {0}, 0));
  ComplexMatrix shift(3, 3);
  for (std::int64_t u = 0; u < 3; ++u) shift.at((u + 1) % 3, u) = 1.0;
  CHECK(max_abs_diff(s, shift) < 1e-12);
  CHECK_THROWS_AS(rho(0, center_generator(gp)), ZeroLabel);
}

TEST_CASE("rho sum form equals Pauli product form") {
  const GroupParams gp(3, 1);
  for (std::int64_t i = 0; i < gp.order(); ++i)
    for (Residue k = 1; k < 3; ++k)
      REQUIRE(max_abs_diff(rho(k, element_from_index(gp, i)),
                           rho_pauli_form(k, element_from_index(gp, i))) < 1e-12);
  Rng rng(73);
  const GroupParams gp5(5, 2);
  for (int t = 0; t < 40; ++t) {
    const auto g = element_from_index(gp5, static_cast<std::int64_t>(rng.below(3125)));
    const Residue k = 1 + static_cast<Residue>(rng.below(4));
    REQUIRE(max_abs_diff(rho(k, g), rho_pauli_form(k, g)) < 1e-12);
  }
}

TEST_CASE("rho is a homomorphism; character supported on the center") {
  // trace of rho_k is p^n omega^{kz} on central elements and 0 elsewhere,
  // so the subgroup average is p^n/|H| for abelian H with G' not<= H
  const GroupParams gp(3, 1);
  for (Residue k = 1; k < 3; ++k) {
    for (std::int64_t i = 0; i < gp.order(); ++i) {
      const auto g = element_from_index(gp, i);
      const double tr = std::abs(rho(k, g).trace());
      if (g.is_central()) CHECK(tr == Catch::Approx(3.0));
      else CHECK(tr < 1e-12);
      for (std::int64_t j = 0; j < gp.order(); ++j) {
        const auto h = element_from_index(gp, j);
        REQUIRE(max_abs_diff(mat_mul(rho(k, g), rho(k, h)), rho(k, multiply(g, h))) < 1e-12);
      }
    }
  }
  // sampled at p=5, n=1
  Rng rng(251);
  const GroupParams gp5(5, 1);
  for (int t = 0; t < 300; ++t) {
    const auto g = element_from_index(gp5, static_cast<std::int64_t>(rng.below(125)));
    const auto h = element_from_index(gp5, static_cast<std::int64_t>(rng.below(125)));
    const Residue k = 1 + static_cast<Residue>(rng.below(4));
    REQUIRE(max_abs_diff(mat_mul(rho(k, g), rho(k, h)), rho(k, multiply(g, h))) < 1e-12);
  }
}

TEST_CASE("sum of squared irrep dimensions is |G|") {
  for (const auto& gp : {GroupParams(2, 1), GroupParams(3, 1), GroupParams(5, 2)}) {
    std::int64_t sum = 0;
    for (const auto& label : all_labels(gp)) {
      const std::int64_t d = irrep_dim(label, gp);
      sum += d * d;
    }
    CHECK(sum == gp.order());
    CHECK(static_cast<std::int64_t>(all_labels(gp).size()) == gp.pair_dim() + gp.p - 1);
  }
}

TEST_CASE("projector pinned cases and idempotence") {
  const GroupParams gp(3, 1);
  CHECK(max_abs_diff(projector(IrrepLabel::high_dim(1), trivial_subgroup(gp)),
                     ComplexMatrix::identity(3)) < 1e-12);

  Rng rng(79);
  for (int t = 0; t < 20; ++t) {
    const auto cls = t % 2 == 0 ? SubgroupClass::AbelianNonCentral
                                : SubgroupClass::NormalContainsCenter;
    const Subgroup h = random_subgroup(gp, cls, rng);
    for (const auto& label : all_labels(gp)) {
      const ComplexMatrix pr = projector(label, h);
      CHECK(max_abs_diff(mat_mul(pr, pr), pr) < 1e-12);
      CHECK(max_abs_diff(pr, pr.adjoint()) < 1e-12);
      Complex chi_sum = 0.0;
      for (const auto& e : h.elements()) chi_sum += irrep_matrix(label, e).trace();
      CHECK(std::abs(pr.trace() - chi_sum / static_cast<double>(h.order())) < 1e-10);
    }
    if (cls == SubgroupClass::AbelianNonCentral) {
      // rank = p^n / |H|
      const double r = projector(IrrepLabel::high_dim(1), h).trace().real();
      CHECK(r == Catch::Approx(3.0 / static_cast<double>(h.order())).margin(1e-10));
    }
  }
}

TEST_CASE("one-dim character orthogonality, exhaustive p=3 n=1") {
  const GroupParams gp(3, 1);
  const auto labels = all_labels(gp);
  for (const auto& mu : labels) {
    if (!mu.is_one_dim()) continue;
    for (const auto& nu : labels) {
      if (!nu.is_one_dim()) continue;
      Complex sum = 0.0;
      for (std::int64_t i = 0; i < gp.order(); ++i) {
        const auto g = element_from_index(gp, i);
        sum += chi(mu.a, mu.b, g) * std::conj(chi(nu.a, nu.b, g));
      }
      const double expect = (mu == nu) ? 27.0 : 0.0;
      REQUIRE(std::abs(sum - expect) < 1e-9);
    }
  }
}

TEST_CASE("plancherel pinned case at p=3, n=1") {
  const GroupParams gp(3, 1);
  const Subgroup h(gp, {el(gp, {1}, {0}, 0)});
  const PlancherelDist dist(h);
  CHECK(dist.high_dim_mass() == Rational(1, 3));
  CHECK(dist.one_dim_mass() == Rational(1, 9));
  CHECK(dist.one_dim_total_mass() == Rational(1, 3));
  std::int64_t supported = 0;
  for (const auto& label : all_labels(gp)) {
    const Rational m = dist.mass(label);
    if (label.is_one_dim()) {
      const bool expect = label.a == VecZp{0};  // pairing a*1 + b*0 = 0
      CHECK((m != Rational(0)) == expect);
      if (expect) CHECK(m == Rational(1, 9));
      supported += expect ? 1 : 0;
    } else {
      CHECK(m == Rational(1, 3));
    }
  }
  CHECK(supported == 3);
}

TEST_CASE("plancherel of the trivial subgroup gives mass d^2/|G|") {
  const GroupParams gp(3, 1);
  const PlancherelDist dist(trivial_subgroup(gp));
  for (const auto& label : all_labels(gp)) {
    const std::int64_t d = irrep_dim(label, gp);
    CHECK(dist.mass(label) == Rational(d * d, gp.order()));
  }
}

TEST_CASE("plancherel empirical frequencies within 4 sigma") {
  Rng rng(83);
  const GroupParams gp(3, 1);
  for (int t = 0; t < 4; ++t) {
    const auto cls = t % 2 == 0 ? SubgroupClass::AbelianNonCentral
                                : SubgroupClass::NormalContainsCenter;
    const Subgroup h = random_subgroup(gp, cls, rng);
    const PlancherelDist dist(h);
    const int draws = 10000;
    std::map<std::string, int> freq;
    for (int i = 0; i < draws; ++i) ++freq[dist.sample(rng).str()];
    for (const auto& [label, mass] : dist.support()) {
      const double q = mass.to_double();
      const double sigma = std::sqrt(draws * q * (1 - q));
      CHECK(std::abs(freq[label.str()] - draws * q) <= 4 * sigma + 0.5);
    }
  }
}

TEST_CASE("qft_dense unitarity and entry structure") {
  for (const auto& gp : {GroupParams(2, 1), GroupParams(3, 1), GroupParams(5, 1)}) {
    const ComplexMatrix u = qft_dense(gp);
    CHECK(unitarity_deviation(u) < 1e-9);
    const std::int64_t d = gp.register_dim();
    const double one_dim_scale = 1.0 / std::sqrt(static_cast<double>(gp.order()));
    const double high_scale = std::sqrt(static_cast<double>(d) / static_cast<double>(gp.order()));
    const RootsOfUnity w(gp.p);
    for (std::int64_t row = 0; row < gp.order(); ++row) {
      for (std::int64_t col = 0; col < gp.order(); ++col) {
        const Complex v = u.at(row, col);
        const GroupElement g = element_from_index(gp, col);
        const std::int64_t k = row / (d * d);
        const VecZp a = vec_unrank((row / d) % d, gp.p, gp.n), b = vec_unrank(row % d, gp.p, gp.n);
        if (k == 0) {
          REQUIRE(std::abs(std::abs(v) - one_dim_scale) < 1e-12);  // modulus p^{-(2n+1)/2}
        } else if (g.x == vec_sub(a, b, gp.p)) {
          const Complex expect =
              high_scale * w[mul_mod(k, add_mod(g.z, dot(b, g.y, gp.p), gp.p), gp.p)];
          REQUIRE(std::abs(v - expect) < 1e-12);
        } else {
          REQUIRE(std::abs(v) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("qft_dense refuses oversized instances") {
  CHECK_THROWS_AS(qft_dense(GroupParams(17, 3)), TooLarge);
}
