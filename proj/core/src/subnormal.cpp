#include "subkit/subnormal.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_set>

#include "subkit/error.hpp"

namespace subkit {

namespace {

void require_in(const GroupPtr& ambient, const Subgroup& h, const char* op) {
  if (h.ambient().get() != ambient.get() &&
      (h.ambient()->degree() != ambient->degree() || h.ambient()->elements() != ambient->elements()))
    fail(errc::ambient_mismatch, std::string(op) + ": subgroup belongs to a different ambient group");
}

Subgroup from_sorted(const GroupPtr& ambient, std::vector<Perm> elems) {
  return Subgroup(ambient, Group::from_sorted_elements(ambient->degree(), std::move(elems), {}));
}

std::vector<Perm> closure(const GroupPtr& ambient, const std::vector<Perm>& gens) {
  std::unordered_set<Perm, PermHash> seen;
  std::deque<Perm> work;
  Perm id = Perm::identity(ambient->degree());
  seen.insert(id);
  work.push_back(id);
  while (!work.empty()) {
    Perm cur = std::move(work.front());
    work.pop_front();
    for (const Perm& g : gens) {
      Perm next = cur.then(g);
      if (seen.insert(next).second) work.push_back(std::move(next));
    }
  }
  std::vector<Perm> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Perm> gens_of(const Subgroup& h) {
  if (!h.group().generators().empty()) return h.group().generators();
  return h.elements();
}

// <H^K> for K given by its element list.
Subgroup normal_closure_in(const GroupPtr& ambient, const std::vector<Perm>& k_elements,
                           const Subgroup& h) {
  std::vector<Perm> gens;
  for (const Perm& x : gens_of(h))
    for (const Perm& g : k_elements) {
      Perm c = x.conjugated_by(g);
      if (!c.is_identity()) gens.push_back(c);
    }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  return from_sorted(ambient, closure(ambient, gens));
}

} // namespace

Subgroup normal_closure(const GroupPtr& ambient, const Subgroup& h) {
  require_in(ambient, h, "normal_closure");
  return normal_closure_in(ambient, ambient->elements(), h);
}

SubnormalOutcome subnormal_series(const GroupPtr& ambient, const Subgroup& h) {
  require_in(ambient, h, "subnormal_series");
  std::vector<Subgroup> descent; // G = K_0 > K_1 > ... down to the fixed point
  descent.push_back(Subgroup::whole(ambient));
  for (;;) {
    const Subgroup& cur = descent.back();
    if (cur.order() == h.order()) break;
    Subgroup next = normal_closure_in(ambient, cur.elements(), h);
    if (next.order() == cur.order()) break;
    descent.push_back(std::move(next));
  }
  SubnormalOutcome out;
  out.fixed_point = descent.back();
  out.subnormal = (descent.back() == h);
  if (out.subnormal) {
    SubnormalSeries series;
    series.ambient = ambient;
    series.links.assign(descent.rbegin(), descent.rend());
    out.series = std::move(series);
  }
  return out;
}

bool is_subnormal(const GroupPtr& ambient, const Subgroup& h) {
  return subnormal_series(ambient, h).subnormal;
}

WielandtJoin wielandt_join(const GroupPtr& ambient, const Subgroup& s, const Subgroup& h1,
                           const Subgroup& h2) {
  require_in(ambient, s, "wielandt_join");
  require_in(ambient, h1, "wielandt_join");
  require_in(ambient, h2, "wielandt_join");
  if (!is_subnormal(ambient, h1) || !is_subnormal(ambient, h2))
    fail(errc::not_subnormal, "wielandt_join: inputs must be subnormal");
  WielandtJoin out;
  out.join = subgroup_join(ambient, {h1, h2});
  SubnormalOutcome cert = subnormal_series(ambient, out.join);
  if (!cert.subnormal)
    fail(errc::not_subnormal, "wielandt_join: join is not subnormal (internal invariant)");
  out.series = std::move(*cert.series);
  out.lhs = intersect_subgroups(out.join, s);
  out.rhs = subgroup_join(ambient, {intersect_subgroups(h1, s), intersect_subgroups(h2, s)});
  out.identity_holds = (out.lhs == out.rhs);
  return out;
}

Subgroup s_restriction(const GroupPtr& ambient, const Subgroup& s, const Word& w) {
  require_in(ambient, s, "s_restriction");
  for (const Perm& f : w)
    if (!ambient->contains(f))
      fail(errc::ambient_mismatch, "s_restriction: word letter outside ambient group");
  std::vector<Perm> kept;
  for (const Perm& x : s.elements()) {
    Perm cur = x;
    bool ok = true;
    for (const Perm& f : w) {
      cur = cur.conjugated_by(f);
      if (!s.contains(cur)) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(x);
  }
  return from_sorted(ambient, std::move(kept));
}

namespace {

// First (a, b) in ascending order of a with b := a^{-1} g satisfying the
// membership predicates and S_g = S_{(a,b)}; the lex-least valid witness.
SplitWitness split_scan(const GroupPtr& ambient, const Subgroup& s, const Perm& g,
                        const std::vector<Perm>& a_range, auto&& b_ok, const char* op) {
  Subgroup sg = s_restriction(ambient, s, {g});
  for (const Perm& a : a_range) {
    Perm b = a.inverse().then(g);
    if (!b_ok(b)) continue;
    Subgroup sab = s_restriction(ambient, s, {a, b});
    if (sab == sg) return SplitWitness{a, b, std::move(sab)};
  }
  fail(errc::precondition_violation, std::string(op) + ": no valid factorization found");
}

} // namespace

SplitWitness frattini_split(const GroupPtr& ambient, const Subgroup& s, const Subgroup& n,
                            const Perm& g) {
  require_in(ambient, s, "frattini_split");
  require_in(ambient, n, "frattini_split");
  if (!is_normal_in_ambient(n))
    fail(errc::precondition_violation, "frattini_split: N must be normal");
  if (!ambient->contains(g))
    fail(errc::ambient_mismatch, "frattini_split: g outside ambient group");
  Subgroup t = intersect_subgroups(s, n);
  auto [nt, ct] = normalizer_centralizer(ambient, t);
  return split_scan(ambient, s, g, n.elements(),
                    [&](const Perm& b) { return nt.contains(b); }, "frattini_split");
}

SplitWitness normal_product_split(const GroupPtr& ambient, const Subgroup& s, const Subgroup& m,
                                  const Subgroup& n, const Perm& g) {
  require_in(ambient, s, "normal_product_split");
  require_in(ambient, m, "normal_product_split");
  require_in(ambient, n, "normal_product_split");
  if (!is_normal_in_ambient(m) || !is_normal_in_ambient(n))
    fail(errc::precondition_violation, "normal_product_split: M and N must be normal");
  bool in_product = false;
  for (const Perm& a : m.elements())
    if (n.contains(a.inverse().then(g))) {
      in_product = true;
      break;
    }
  if (!in_product) fail(errc::not_in_product, "normal_product_split: g not in MN");
  return split_scan(ambient, s, g, m.elements(),
                    [&](const Perm& b) { return n.contains(b); }, "normal_product_split");
}

SplitWitness normal_subnormal_split(const GroupPtr& ambient, const Subgroup& s, const Subgroup& n,
                                    const Subgroup& h, const Perm& g) {
  require_in(ambient, s, "normal_subnormal_split");
  require_in(ambient, n, "normal_subnormal_split");
  require_in(ambient, h, "normal_subnormal_split");
  if (!is_normal_in_ambient(n))
    fail(errc::precondition_violation, "normal_subnormal_split: N must be normal");
  if (!is_subnormal(ambient, h))
    fail(errc::precondition_violation, "normal_subnormal_split: H must be subnormal");
  for (const Perm& x : s.elements())
    if (!normalizes(x, h))
      fail(errc::precondition_violation, "normal_subnormal_split: S must normalize H");
  bool in_product = false;
  for (const Perm& a : n.elements())
    if (h.contains(a.inverse().then(g))) {
      in_product = true;
      break;
    }
  if (!in_product) fail(errc::not_in_product, "normal_subnormal_split: g not in NH");
  return split_scan(ambient, s, g, n.elements(),
                    [&](const Perm& b) { return h.contains(b); }, "normal_subnormal_split");
}

namespace {

Subgroup commutator_subgroup(const GroupPtr& ambient, const Subgroup& k) {
  std::vector<Perm> gens;
  for (const Perm& x : k.elements())
    for (const Perm& y : k.elements()) {
      Perm c = x.inverse().then(y.inverse()).then(x).then(y);
      if (!c.is_identity()) gens.push_back(c);
    }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  return from_sorted(ambient, closure(ambient, gens));
}

} // namespace

namespace {

// O_p as the intersection of all Sylow p-subgroups.
Subgroup p_core(const GroupPtr& g, int p) {
  Subgroup syl = sylow_subgroup(g, p);
  std::vector<Perm> core = syl.elements();
  for (const Perm& x : g->elements()) {
    std::vector<Perm> conj;
    conj.reserve(core.size());
    for (const Perm& y : syl.elements()) conj.push_back(y.conjugated_by(x));
    std::sort(conj.begin(), conj.end());
    std::vector<Perm> merged;
    std::set_intersection(core.begin(), core.end(), conj.begin(), conj.end(),
                          std::back_inserter(merged));
    core = std::move(merged);
    if (core.size() == 1) break;
  }
  return from_sorted(g, std::move(core));
}

} // namespace

bool is_characteristic_p(const GroupPtr& g, int p) {
  Subgroup op = p_core(g, p);
  Subgroup cop = centralizer_of_set(g, op.elements());
  return op.contains(cop);
}

Subgroup o_p_subgroup(const GroupPtr& g, int p) { return p_core(g, p); }

Subgroup o_upper_p_subgroup(const GroupPtr& g, int p) {
  std::vector<Perm> pprime;
  for (const Perm& x : g->elements())
    if (x.order() % p != 0 && !x.is_identity()) pprime.push_back(x);
  return from_sorted(g, closure(g, pprime));
}

CharacteristicSubgroups characteristic_subgroups(const GroupPtr& g, int p) {
  if (!is_prime(p)) fail(errc::precondition_violation, "characteristic_subgroups: p must be prime");
  CharacteristicSubgroups out;
  out.o_p = p_core(g, p);

  out.o_upper_p = o_upper_p_subgroup(g, p);

  // Fitting subgroup: product of the O_q over all prime divisors.
  std::vector<Subgroup> cores;
  for (int q : prime_divisors(g->order()))
    cores.push_back(q == p ? out.o_p : p_core(g, q));
  out.fitting = cores.empty() ? Subgroup::trivial(g) : subgroup_join(g, cores);

  // Components: subnormal, perfect, simple modulo center (equivalently,
  // every proper normal subgroup is central).
  for (const Subgroup& k : all_subnormal_subgroups(g)) {
    if (k.order() == 1) continue;
    if (commutator_subgroup(g, k) != k) continue;
    auto kptr = std::make_shared<const Group>(k.group());
    Subgroup center = normalizer_centralizer(kptr, Subgroup::whole(kptr)).second;
    bool quasisimple = true;
    for (const Subgroup& m : normal_subgroups(kptr)) {
      if (m.order() == k.order()) continue;
      bool central = std::all_of(m.elements().begin(), m.elements().end(),
                                 [&](const Perm& x) { return center.contains(x); });
      if (!central) {
        quasisimple = false;
        break;
      }
    }
    if (quasisimple) out.components.push_back(k);
  }

  std::vector<Subgroup> fs_parts = out.components;
  fs_parts.push_back(out.fitting);
  out.f_star = subgroup_join(g, fs_parts);

  Subgroup cop = centralizer_of_set(g, out.o_p.elements());
  out.is_char_p = out.o_p.contains(cop);
  return out;
}

std::vector<Subgroup> all_subnormal_subgroups(const GroupPtr& g, const Budget& budget) {
  std::map<std::vector<Perm>, bool> seen;
  std::deque<Subgroup> work;
  // Memo of normal-subgroup lists keyed by member element set.
  std::map<std::vector<Perm>, std::vector<std::vector<Perm>>> normals_memo;
  auto normals_of = [&](const Subgroup& k) -> const std::vector<std::vector<Perm>>& {
    auto it = normals_memo.find(k.elements());
    if (it != normals_memo.end()) return it->second;
    auto kptr = std::make_shared<const Group>(k.group());
    std::vector<std::vector<Perm>> lists;
    for (const Subgroup& m : normal_subgroups(kptr, budget)) lists.push_back(m.elements());
    return normals_memo.emplace(k.elements(), std::move(lists)).first->second;
  };

  Subgroup whole = Subgroup::whole(g);
  seen.emplace(whole.elements(), true);
  work.push_back(whole);
  std::vector<Subgroup> out{whole};
  while (!work.empty()) {
    Subgroup cur = std::move(work.front());
    work.pop_front();
    for (const auto& elems : normals_of(cur)) {
      if (seen.contains(elems)) continue;
      if (seen.size() >= budget.max_subgroups)
        fail(errc::budget_exceeded, "subnormal enumeration exceeds subgroup cap");
      Subgroup sub = Subgroup(g, Group::from_sorted_elements(g->degree(), elems, {}));
      seen.emplace(elems, true);
      out.push_back(sub);
      work.push_back(std::move(sub));
    }
  }
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.elements() < b.elements();
  });
  return out;
}

} // namespace subkit
