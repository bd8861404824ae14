#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "whg/group.hpp"
#include "whg/rng.hpp"
#include "whg/subgroup.hpp"

using namespace whg;

namespace {

GroupElement el(const GroupParams& gp, std::initializer_list<Residue> x,
                std::initializer_list<Residue> y, Residue z) {
  return GroupElement(gp, VecZp(x), VecZp(y), z);
}

std::vector<GroupElement> all_elements(const GroupParams& gp) {
  std::vector<GroupElement> out;
  for (std::int64_t i = 0; i < gp.order(); ++i) out.push_back(element_from_index(gp, i));
  return out;
}

GroupElement random_el(const GroupParams& gp, Rng& rng) {
  return element_from_index(gp, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp.order()))));
}

}  // namespace

TEST_CASE("group law pinned values at p=3, n=1") {
  const GroupParams gp(3, 1);
  CHECK(multiply(el(gp, {1}, {2}, 0), el(gp, {2}, {1}, 1)) == el(gp, {0}, {0}, 2));
  const GroupElement g = el(gp, {1}, {2}, 1);
  CHECK(multiply(g, identity_element(gp)) == g);
  CHECK(multiply(identity_element(gp), g) == g);
}

TEST_CASE("associativity, exhaustive at p=3, n=1 and sampled at p=5") {
  const GroupParams gp(3, 1);
  const auto elems = all_elements(gp);
  for (const auto& a : elems)
    for (const auto& b : elems)
      for (const auto& c : elems)
        REQUIRE(multiply(multiply(a, b), c) == multiply(a, multiply(b, c)));

  Rng rng(17);
  const GroupParams gp5(5, 2);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_el(gp5, rng), b = random_el(gp5, rng), c = random_el(gp5, rng);
    REQUIRE(multiply(multiply(a, b), c) == multiply(a, multiply(b, c)));
  }
}

TEST_CASE("inverse pinned and double-inverse") {
  const GroupParams gp(3, 1);
  CHECK(inverse(el(gp, {1}, {2}, 0)) == el(gp, {2}, {1}, 2));
  CHECK(multiply(el(gp, {1}, {2}, 0), inverse(el(gp, {1}, {2}, 0))) == identity_element(gp));
  CHECK(inverse(identity_element(gp)) == identity_element(gp));
  for (const auto& g : all_elements(gp)) {
    CHECK(inverse(inverse(g)) == g);
    CHECK(multiply(g, inverse(g)) == identity_element(gp));
  }
}

TEST_CASE("power closed form") {
  const GroupParams gp(3, 1);
  CHECK(power(el(gp, {1}, {1}, 0), 2) == el(gp, {2}, {2}, 1));
  CHECK(power(el(gp, {1}, {2}, 1), 0) == identity_element(gp));

  // closed form equals iterated multiplication for all g, a < p (p = 3, 5)
  for (const std::int64_t p : {3, 5}) {
    const GroupParams g2(p, 1);
    for (const auto& g : all_elements(g2)) {
      GroupElement acc = identity_element(g2);
      for (std::int64_t a = 0; a < p; ++a) {
        REQUIRE(power(g, a) == acc);
        acc = multiply(acc, g);
      }
      REQUIRE(power(g, p) == identity_element(g2));  // exponent p
      REQUIRE(power(g, -1) == inverse(g));
    }
  }
}

TEST_CASE("power at p = 2 uses iterated multiplication") {
  const GroupParams gp(2, 1);
  for (const auto& g : all_elements(gp)) {
    CHECK(power(g, 2) == el(gp, {0}, {0}, dot(g.x, g.y, 2)));  // (x,y,z)^2 = (0,0,xy)
    CHECK(power(g, 4) == identity_element(gp));
    CHECK(power(g, -1) == inverse(g));
  }
}

TEST_CASE("conjugation closed form") {
  const GroupParams gp(3, 1);
  CHECK(conjugate(el(gp, {1}, {0}, 0), el(gp, {0}, {1}, 0)) == el(gp, {1}, {0}, 2));
  // conjugation by a center element fixes everything
  for (const auto& h : all_elements(gp))
    CHECK(conjugate(h, center_generator(gp)) == h);

  Rng rng(23);
  const GroupParams gp5(5, 2);
  for (int t = 0; t < 1000; ++t) {
    const auto h = random_el(gp5, rng), g = random_el(gp5, rng);
    REQUIRE(conjugate(h, g) == multiply(inverse(g), multiply(h, g)));
  }
}

TEST_CASE("matrix realization is a faithful homomorphism") {
  const GroupParams gp(3, 1);
  CHECK(matrix_realization(identity_element(gp)) == MatZp::identity(3));
  const MatZp c = matrix_realization(center_generator(gp));
  MatZp expect = MatZp::identity(3);
  expect.at(0, 2) = 1;
  CHECK(c == expect);
  for (const auto& a : all_elements(gp))
    for (const auto& b : all_elements(gp))
      REQUIRE(mat_mul(matrix_realization(a), matrix_realization(b), 3) ==
              matrix_realization(multiply(a, b)));
}

TEST_CASE("s_basis projections") {
  const GroupParams gp(3, 1);
  const Subgroup h(gp, {el(gp, {1}, {1}, 2)});
  CHECK(h.s_basis() == span_of(3, 2, {{1, 1}}));
  CHECK(trivial_subgroup(gp).s_basis().dim() == 0);

  Rng rng(31);
  const GroupParams gp5(5, 2);
  for (int t = 0; t < 20; ++t) {
    const auto sub = random_subgroup(gp5, SubgroupClass::AbelianNonCentral, rng);
    CHECK(is_isotropic(sub.s_basis()));
    CHECK(sub.order() == sub.s_basis().size());  // |S_H| = |H| for abelian, G' not<= H
  }
}

TEST_CASE("classify pinned cases") {
  const GroupParams gp(3, 1);
  CHECK(center_subgroup(gp).classify() == SubgroupClass::NormalContainsCenter);
  CHECK(Subgroup(gp, {el(gp, {1}, {1}, 2)}).classify() == SubgroupClass::AbelianNonCentral);
  // commutator of the two generators lands in the center
  const Subgroup noncommuting(gp, {el(gp, {1}, {0}, 0), el(gp, {0}, {1}, 0)});
  CHECK(noncommuting.classify() == SubgroupClass::NormalContainsCenter);
  CHECK(noncommuting.contains(center_generator(gp)));
  CHECK(noncommuting.order() == 27);
}

TEST_CASE("subgroup closure and membership against enumeration") {
  Rng rng(37);
  const GroupParams gp(3, 1);
  for (int t = 0; t < 10; ++t) {
    const auto cls = t % 2 == 0 ? SubgroupClass::AbelianNonCentral
                                : SubgroupClass::NormalContainsCenter;
    const Subgroup h = random_subgroup(gp, cls, rng);
    CHECK(verify_closure(h));
    const auto elems = h.elements();
    CHECK(static_cast<std::int64_t>(elems.size()) == h.order());
    std::int64_t members = 0;
    for (const auto& g : all_elements(gp))
      if (h.contains(g)) ++members;
    CHECK(members == h.order());
  }
}

TEST_CASE("canonical_h0 pinned and closure") {
  const GroupParams gp(3, 1);
  const Subgroup h0 = canonical_h0(span_of(3, 2, {{1, 1}}), gp);
  CHECK(h0 == Subgroup(gp, {el(gp, {1}, {1}, 2)}));  // xy/2 = 1*inv(2) = 2
  CHECK(canonical_h0(SubspaceBasis(3, 2), gp) == trivial_subgroup(gp));
  CHECK_THROWS_AS(canonical_h0(span_of(2, 2, {{1, 0}}), GroupParams(2, 1)), EvenCharacteristic);
  CHECK_THROWS_AS(canonical_h0(span_of(3, 4, {{1, 0, 0, 0}, {0, 0, 1, 0}}), GroupParams(3, 2)),
                  NotIsotropic);

  // closure at p=5, n=1: products of H_0 elements stay in H_0
  Rng rng(41);
  const GroupParams gp5(5, 1);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_isotropic(5, 1, 1, rng);
    const Subgroup h = canonical_h0(s, gp5);
    CHECK(h.s_basis() == s);
    CHECK(verify_closure(h));
    for (const auto& e : h.elements())
      CHECK(e.z == mul_mod(dot(e.x, e.y, 5), inv_mod(2, 5), 5));
  }
}

TEST_CASE("phi_alpha pinned values and homomorphism") {
  const GroupParams gp(5, 1);
  CHECK(apply_phi_alpha(GroupAutomorphism(2), el(gp, {1}, {1}, 1)) == el(gp, {2}, {2}, 4));
  const GroupElement g = el(gp, {3}, {2}, 4);
  CHECK(apply_phi_alpha(GroupAutomorphism(1), g) == g);
  CHECK_THROWS_AS(GroupAutomorphism(0), ZeroAlpha);

  Rng rng(43);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_el(gp, rng), b = random_el(gp, rng);
    const GroupAutomorphism phi(1 + static_cast<Residue>(rng.below(4)));
    REQUIRE(apply_phi_alpha(phi, multiply(a, b)) ==
            multiply(apply_phi_alpha(phi, a), apply_phi_alpha(phi, b)));
  }
  // S_{phi_alpha(H)} = S_H
  for (int t = 0; t < 10; ++t) {
    const auto h = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
    const GroupAutomorphism phi(1 + static_cast<Residue>(rng.below(4)));
    CHECK(h.mapped(phi).s_basis() == h.s_basis());
  }
}

TEST_CASE("conjugation preserves S_H and orbits have size p^dim") {
  Rng rng(47);
  const GroupParams gp(3, 1);
  for (int t = 0; t < 8; ++t) {
    const auto h = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
    for (int s = 0; s < 10; ++s)
      CHECK(h.conjugated(random_el(gp, rng)).s_basis() == h.s_basis());
    // explicit orbit enumeration
    std::set<std::string> orbit;
    for (const auto& g : all_elements(gp)) orbit.insert(format_subgroup(h.conjugated(g)));
    std::int64_t expect = 1;
    for (std::int64_t i = 0; i < h.s_basis().dim(); ++i) expect *= 3;
    CHECK(static_cast<std::int64_t>(orbit.size()) == expect);
  }
}

TEST_CASE("canonical_h0 of s_basis(H) is conjugate to H via an explicit conjugator") {
  Rng rng(53);
  const GroupParams gp(3, 1);
  for (int t = 0; t < 10; ++t) {
    const auto h = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
    const Subgroup h0 = canonical_h0(h.s_basis(), gp);
    // search over (x^, y^) pairs
    bool found = false;
    for (std::int64_t i = 0; i < 9 && !found; ++i)
      found = h.conjugated(el(gp, {i % 3}, {i / 3}, 0)) == h0;
    CHECK(found);
    // the solved conjugator works too
    const Conjugator c = conjugator_to_h0(h);
    CHECK(h.conjugated(conjugator_element(gp, c)) == h0);
  }
}

TEST_CASE("random_subgroup class contracts") {
  Rng rng(59);
  const GroupParams gp(3, 1);
  CHECK(random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng, 0) == trivial_subgroup(gp));
  for (int t = 0; t < 50; ++t) {
    const auto a = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
    CHECK(!a.contains(center_generator(gp)));
    const auto n = random_subgroup(gp, SubgroupClass::NormalContainsCenter, rng);
    CHECK(n.contains(center_generator(gp)));
  }
}

TEST_CASE("operations on mismatched group parameters are rejected") {
  const GroupElement a = el(GroupParams(3, 1), {1}, {1}, 0);
  const GroupElement b = el(GroupParams(5, 1), {1}, {1}, 0);
  CHECK_THROWS_AS(multiply(a, b), ParamsMismatch);
  CHECK_THROWS_AS(conjugate(a, b), ParamsMismatch);
  CHECK_THROWS_AS(Subgroup(GroupParams(3, 1), {b}), ParamsMismatch);
}

TEST_CASE("enumeration refuses subgroups past the cap") {
  // |G| = 17^5 > 2^16, and the full group is its own subgroup
  const GroupParams gp(17, 2);
  const Subgroup g = full_group(gp);
  CHECK(g.order() == 17LL * 17 * 17 * 17 * 17);
  CHECK_THROWS_AS(g.elements(), TooLarge);
}

TEST_CASE("subgroup literal round-trip is bit-exact") {
  Rng rng(61);
  for (const auto& gp : {GroupParams(3, 1), GroupParams(5, 2), GroupParams(2, 2)}) {
    for (int t = 0; t < 20; ++t) {
      const auto cls = t % 2 == 0 ? SubgroupClass::AbelianNonCentral
                                  : SubgroupClass::NormalContainsCenter;
      const Subgroup h = random_subgroup(gp, cls, rng);
      const std::string lit = format_subgroup(h);
      CHECK(parse_subgroup(lit) == h);
      CHECK(format_subgroup(parse_subgroup(lit)) == lit);
    }
  }
  CHECK(format_subgroup(trivial_subgroup(GroupParams(3, 1))) == "3,1");
  const Subgroup parsed = parse_subgroup("3,1;gen=1|1|2");
  CHECK(parsed == Subgroup(GroupParams(3, 1), {el(GroupParams(3, 1), {1}, {1}, 2)}));
  CHECK_THROWS_AS(parse_subgroup("4,1"), Error);
  CHECK_THROWS_AS(parse_subgroup("3,1;gen=1|1"), Error);
}
