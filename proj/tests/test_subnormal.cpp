#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "common.hpp"
#include "subkit/error.hpp"
#include "subkit/subnormal.hpp"

using namespace subkit;
using testutil::pick;
using testutil::rng;

namespace {

Subgroup gen(const GroupPtr& g, const std::vector<std::vector<std::vector<int>>>& cycles) {
  std::vector<Perm> gens;
  for (const auto& c : cycles) gens.push_back(Perm::from_cycles(g->degree(), c));
  return Subgroup::generated(g, std::move(gens));
}

} // namespace

TEST_CASE("normal_closure") {
  auto g = testutil::s4();
  SUBCASE("normal subgroup is its own closure") {
    Subgroup v4 = gen(g, {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}});
    CHECK(normal_closure(g, v4) == v4);
  }
  SUBCASE("a transposition generates all of S4") {
    CHECK(normal_closure(g, gen(g, {{{0, 1}}})).order() == 24);
  }
  SUBCASE("a double transposition generates V4") {
    Subgroup c = normal_closure(g, gen(g, {{{0, 1}, {2, 3}}}));
    CHECK(c.order() == 4);
    CHECK(c.contains(Perm::from_cycles(4, {{0, 2}, {1, 3}})));
  }
}

TEST_CASE("subnormal_series") {
  auto g = testutil::s4();
  SUBCASE("whole group has a length-0 series") {
    auto out = subnormal_series(g, Subgroup::whole(g));
    REQUIRE(out.subnormal);
    CHECK(out.series->links.size() == 1);
  }
  SUBCASE("double transposition: H < V4 < S4") {
    Subgroup h = gen(g, {{{0, 1}, {2, 3}}});
    auto out = subnormal_series(g, h);
    REQUIRE(out.subnormal);
    REQUIRE(out.series->links.size() == 3);
    CHECK(out.series->links[0] == h);
    CHECK(out.series->links[1].order() == 4);
    CHECK(out.series->links[2].order() == 24);
    // Canonical property: each link is the normal closure of H in its successor.
    for (std::size_t i = 0; i + 1 < out.series->links.size(); ++i) {
      auto succ = std::make_shared<const Group>(out.series->links[i + 1].group());
      Subgroup hh(succ, h.group());
      CHECK(normal_closure(succ, hh).elements() == out.series->links[i].elements());
    }
    // Each link is invariant under conjugation by N_G(H).
    auto [ngh, _] = normalizer_centralizer(g, h);
    for (const Subgroup& link : out.series->links)
      for (const Perm& x : ngh.elements())
        CHECK(conjugate_subgroup(link, x) == link);
  }
  SUBCASE("a transposition is not subnormal; witness is the terminal fixed point") {
    auto out = subnormal_series(g, gen(g, {{{0, 1}}}));
    CHECK(!out.subnormal);
    CHECK(out.fixed_point.order() == 24);
  }
}

TEST_CASE("wielandt_join") {
  auto g = testutil::s4();
  Subgroup s = sylow_subgroup(g, 2);
  SUBCASE("h1 = h2 reproduces h1") {
    Subgroup h = gen(g, {{{0, 1}, {2, 3}}});
    auto out = wielandt_join(g, s, h, h);
    CHECK(out.join == h);
    CHECK(out.identity_holds);
  }
  SUBCASE("two double transpositions") {
    Subgroup h1 = gen(g, {{{0, 1}, {2, 3}}});
    Subgroup h2 = gen(g, {{{0, 2}, {1, 3}}});
    auto out = wielandt_join(g, s, h1, h2);
    CHECK(out.join.order() == 4);
    CHECK(out.identity_holds);
    CHECK(out.lhs.order() == 4);
  }
  SUBCASE("non-subnormal input is rejected") {
    Subgroup h1 = gen(g, {{{0, 1}}});
    Subgroup h2 = gen(g, {{{0, 2}, {1, 3}}});
    CHECK_THROWS_AS(wielandt_join(g, s, h1, h2), error);
  }
  SUBCASE("A4xA4 factors join to the whole group with S-identity") {
    auto gg = testutil::a4xa4();
    Subgroup ss = sylow_subgroup(gg, 2);
    Subgroup g1 = gen(gg, {{{0, 1}, {2, 3}}, {{0, 1, 2}}});
    Subgroup g2 = gen(gg, {{{4, 5}, {6, 7}}, {{4, 5, 6}}});
    auto out = wielandt_join(gg, ss, g1, g2);
    CHECK(out.join.order() == 144);
    CHECK(out.identity_holds);
    CHECK(out.lhs == ss);
  }
}

TEST_CASE("s_restriction") {
  auto g = testutil::s4();
  Subgroup d8(g, Group::from_generators(
                     4, {Perm::from_cycles(4, {{0, 1, 2, 3}}), Perm::from_cycles(4, {{0, 2}})}));
  SUBCASE("empty word gives S") {
    CHECK(s_restriction(g, d8, {}) == d8);
  }
  SUBCASE("letters inside S leave S") {
    for (const Perm& x : d8.elements())
      CHECK(s_restriction(g, d8, {x}) == d8);
  }
  SUBCASE("conjugating D8 by a 3-cycle keeps exactly the Klein group") {
    Subgroup sw = s_restriction(g, d8, {Perm::from_cycles(4, {{0, 1, 2}})});
    REQUIRE(sw.order() == 4);
    CHECK(sw.contains(Perm::from_cycles(4, {{0, 2}, {1, 3}})));
    CHECK(sw.contains(Perm::from_cycles(4, {{0, 1}, {2, 3}})));
    CHECK(sw.contains(Perm::from_cycles(4, {{0, 3}, {1, 2}})));
  }
  SUBCASE("S_u <= S_f for the collapsed word (random words)") {
    auto r = rng(7u);
    for (int trial = 0; trial < 100; ++trial) {
      Word w;
      int len = 1 + static_cast<int>(trial % 4);
      Perm prod = Perm::identity(4);
      for (int i = 0; i < len; ++i) {
        w.push_back(pick(r, g->elements()));
        prod = prod.then(w.back());
      }
      Subgroup su = s_restriction(g, d8, w);
      Subgroup sf = s_restriction(g, d8, {prod});
      CHECK(sf.contains(su));
    }
  }
}

TEST_CASE("frattini_split on S4 with N = A4") {
  auto g = testutil::s4();
  Subgroup s = sylow_subgroup(g, 2);
  Subgroup a4 = gen(g, {{{0, 1, 2}}, {{1, 2, 3}}});
  REQUIRE(a4.order() == 12);
  Subgroup t = intersect_subgroups(s, a4);
  auto [nt, _] = normalizer_centralizer(g, t);

  SUBCASE("identity splits trivially") {
    auto w = frattini_split(g, s, a4, Perm::identity(4));
    CHECK(w.a.is_identity());
    CHECK(w.b.is_identity());
  }
  SUBCASE("every g in S4 splits with matching restriction") {
    for (const Perm& x : g->elements()) {
      auto w = frattini_split(g, s, a4, x);
      CHECK(a4.contains(w.a));
      CHECK(nt.contains(w.b));
      CHECK(w.a.then(w.b) == x);
      CHECK(s_restriction(g, s, {w.a, w.b}) == s_restriction(g, s, {x}));
    }
  }
  SUBCASE("exhaustive oracle: the returned witness is the lex-least valid one") {
    Perm x = Perm::from_cycles(4, {{0, 1}});
    auto w = frattini_split(g, s, a4, x);
    Subgroup sx = s_restriction(g, s, {x});
    bool found_smaller = false;
    for (const Perm& a : a4.elements()) {
      if (!(a < w.a)) continue;
      Perm b = a.inverse().then(x);
      if (nt.contains(b) && s_restriction(g, s, {a, b}) == sx) found_smaller = true;
    }
    CHECK(!found_smaller);
  }
}

TEST_CASE("normal_product_split") {
  auto g = testutil::a4xa4();
  Subgroup s = sylow_subgroup(g, 2);
  Subgroup g1 = gen(g, {{{0, 1}, {2, 3}}, {{0, 1, 2}}});
  Subgroup g2 = gen(g, {{{4, 5}, {6, 7}}, {{4, 5, 6}}});
  SUBCASE("direct product factorisation") {
    Perm x = Perm::from_cycles(8, {{0, 1, 2}, {4, 6, 5}});
    auto w = normal_product_split(g, s, g1, g2, x);
    CHECK(g1.contains(w.a));
    CHECK(g2.contains(w.b));
    CHECK(w.a.then(w.b) == x);
    CHECK(s_restriction(g, s, {w.a, w.b}) == s_restriction(g, s, {x}));
  }
  SUBCASE("identity gives (1,1)") {
    auto w = normal_product_split(g, s, g1, g2, Perm::identity(8));
    CHECK(w.a.is_identity());
    CHECK(w.b.is_identity());
  }
  SUBCASE("g outside MN is rejected") {
    auto s4 = testutil::s4();
    Subgroup ss = sylow_subgroup(s4, 2);
    Subgroup v4 = gen(s4, {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}});
    CHECK_THROWS_AS(normal_product_split(s4, ss, v4, v4, Perm::from_cycles(4, {{0, 1}})), error);
  }
}

TEST_CASE("normal_subnormal_split") {
  auto g = testutil::s4();
  // Use the Sylow 2-subgroup containing V4 and its central involution.
  Subgroup s = sylow_subgroup(g, 2);
  Subgroup v4 = gen(g, {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}});
  // The center of S is an order-2 subgroup of V4 normalized by S.
  auto [ns, zs] = normalizer_centralizer(g, s);
  Subgroup h = Subgroup::trivial(g);
  for (const Subgroup& cand : all_subgroups(std::make_shared<const Group>(s.group()))) {
    if (cand.order() != 2) continue;
    Subgroup in_g(g, cand.group());
    bool s_invariant = std::all_of(s.elements().begin(), s.elements().end(),
                                   [&](const Perm& x) { return normalizes(x, in_g); });
    if (s_invariant && v4.contains(in_g) && is_subnormal(g, in_g)) {
      h = in_g;
      break;
    }
  }
  REQUIRE(h.order() == 2);
  for (const Perm& a : v4.elements())
    for (const Perm& b : h.elements()) {
      Perm x = a.then(b);
      auto w = normal_subnormal_split(g, s, v4, h, x);
      CHECK(v4.contains(w.a));
      CHECK(h.contains(w.b));
      CHECK(w.a.then(w.b) == x);
      CHECK(s_restriction(g, s, {w.a, w.b}) == s_restriction(g, s, {x}));
    }
  SUBCASE("g in H gives (1, g)") {
    Perm x = h.elements().back();
    auto w = normal_subnormal_split(g, s, v4, h, x);
    CHECK(w.a.is_identity());
    CHECK(w.b == x);
  }
}

TEST_CASE("characteristic_subgroups") {
  SUBCASE("abelian p-group") {
    auto v4 = testutil::make(4, {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}}, "V4");
    auto rec = characteristic_subgroups(v4, 2);
    CHECK(rec.o_p.order() == 4);
    CHECK(rec.f_star.order() == 4);
    CHECK(rec.is_char_p);
  }
  SUBCASE("S4 at p = 2") {
    auto rec = characteristic_subgroups(testutil::s4(), 2);
    CHECK(rec.o_p.order() == 4);
    CHECK(rec.o_upper_p.order() == 12);
    CHECK(rec.components.empty());
    CHECK(rec.f_star.order() == 4);
    CHECK(rec.is_char_p);
  }
  SUBCASE("A5 at p = 2") {
    auto rec = characteristic_subgroups(testutil::a5(), 2);
    CHECK(rec.o_p.order() == 1);
    CHECK(rec.o_upper_p.order() == 60);
    REQUIRE(rec.components.size() == 1);
    CHECK(rec.components[0].order() == 60);
    CHECK(!rec.is_char_p);
  }
  SUBCASE("O^p has p-power index cofactor") {
    for (auto g : {testutil::s4(), testutil::a4(), testutil::d8()})
      for (int p : prime_divisors(g->order())) {
        auto rec = characteristic_subgroups(g, p);
        std::size_t quotient = g->order() / rec.o_upper_p.order();
        CHECK(p_part(quotient, p) == quotient);
      }
  }
  SUBCASE("components commute elementwise and centralize the fitting subgroup") {
    auto g = testutil::s5();
    auto rec = characteristic_subgroups(g, 2);
    REQUIRE(rec.components.size() == 1);
    for (const Subgroup& k : rec.components)
      for (const Perm& x : rec.fitting.elements())
        for (const Perm& y : k.elements())
          CHECK(x.then(y) == y.then(x));
  }
}

TEST_CASE("all_subnormal_subgroups") {
  SUBCASE("S4: 1, three C2 in V4, V4, A4, S4") {
    auto subs = all_subnormal_subgroups(testutil::s4());
    CHECK(subs.size() == 7);
    for (const Subgroup& h : subs) CHECK(is_subnormal(testutil::s4(), h));
  }
  SUBCASE("S5: only 1, A5, S5") {
    auto subs = all_subnormal_subgroups(testutil::s5());
    REQUIRE(subs.size() == 3);
    CHECK(subs[0].order() == 1);
    CHECK(subs[1].order() == 60);
    CHECK(subs[2].order() == 120);
  }
  SUBCASE("A4xA4 subnormal lattice") {
    // 67 subgroups of O_2 = V4xV4, the two A4 factors, six A4xC2 products,
    // four order-48 subgroups over O_2 (one per C3 of the C3xC3 quotient),
    // and the whole group.
    auto g = testutil::a4xa4();
    auto subs = all_subnormal_subgroups(g);
    CHECK(subs.size() == 80);
    std::size_t order48 = 0;
    for (const Subgroup& h : subs)
      if (h.order() == 48) ++order48;
    CHECK(order48 == 4);
  }
}

TEST_CASE("normal closure + normalizer generation forces normality") {
  // If G = <H^G> N_G(H) for subnormal H then H is already normal.
  auto g = testutil::s4();
  for (const Subgroup& h : all_subnormal_subgroups(g)) {
    Subgroup m = normal_closure(g, h);
    auto [ngh, _] = normalizer_centralizer(g, h);
    Subgroup together = subgroup_join(g, {m, ngh});
    if (together.order() == g->order()) {
      CHECK(m == h);
      CHECK(is_normal_in_ambient(h));
    }
  }
}
