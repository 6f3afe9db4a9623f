#include "subkit/group.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <deque>
#include <map>
#include <unordered_set>

#include "subkit/error.hpp"

namespace subkit {

Budget Budget::from_env() {
  Budget b;
  if (const char* v = std::getenv("SUBKIT_MAX_ELEMENTS")) {
    char* end = nullptr;
    unsigned long long n = std::strtoull(v, &end, 10);
    if (end && *end == '\0' && n > 0) b.max_elements = static_cast<std::size_t>(n);
  }
  return b;
}

bool Group::contains(const Perm& p) const {
  return std::binary_search(elements_.begin(), elements_.end(), p);
}

std::optional<std::size_t> Group::element_index(const Perm& p) const {
  auto it = std::lower_bound(elements_.begin(), elements_.end(), p);
  if (it == elements_.end() || *it != p) return std::nullopt;
  return static_cast<std::size_t>(it - elements_.begin());
}

const Perm& Group::identity() const { return elements_.front(); }

bool Group::is_abelian() const {
  const std::vector<Perm>& gens = generators_.empty() ? elements_ : generators_;
  for (const Perm& a : gens)
    for (const Perm& b : gens)
      if (a.then(b) != b.then(a)) return false;
  return true;
}

bool Group::is_p_group(int p) const {
  return p_part(order(), p) == order();
}

Group Group::from_generators(int degree, std::vector<Perm> gens, std::string name,
                             const Budget& budget) {
  for (const Perm& g : gens)
    if (g.degree() != degree)
      fail(errc::malformed_permutation, "generator degree " + std::to_string(g.degree()) +
                                            " does not match group degree " +
                                            std::to_string(degree));
  std::unordered_set<Perm, PermHash> seen;
  std::deque<Perm> work;
  Perm id = Perm::identity(degree);
  seen.insert(id);
  work.push_back(id);
  while (!work.empty()) {
    Perm cur = std::move(work.front());
    work.pop_front();
    for (const Perm& g : gens) {
      Perm next = cur.then(g);
      if (seen.insert(next).second) {
        if (seen.size() > budget.max_elements)
          fail(errc::budget_exceeded, "group closure exceeds element budget of " +
                                          std::to_string(budget.max_elements));
        work.push_back(std::move(next));
      }
    }
  }
  std::vector<Perm> elems(seen.begin(), seen.end());
  std::sort(elems.begin(), elems.end());
  Group grp;
  grp.degree_ = degree;
  grp.name_ = std::move(name);
  grp.generators_ = std::move(gens);
  grp.elements_ = std::move(elems);
  return grp;
}

Group Group::from_sorted_elements(int degree, std::vector<Perm> elements, std::vector<Perm> gens,
                                  std::string name) {
  assert(std::is_sorted(elements.begin(), elements.end()));
  assert(!elements.empty() && elements.front().is_identity() == (elements.front() == Perm::identity(degree)));
  Group grp;
  grp.degree_ = degree;
  grp.name_ = std::move(name);
  grp.generators_ = std::move(gens);
  grp.elements_ = std::move(elements);
  return grp;
}

Group group_from_generators(int degree, const std::vector<Perm>& gens, std::string name,
                            const Budget& budget) {
  return Group::from_generators(degree, gens, std::move(name), budget);
}

Subgroup::Subgroup(GroupPtr ambient, Group group) : ambient_(std::move(ambient)), group_(std::move(group)) {
  if (!ambient_)
    fail(errc::ambient_mismatch, "subgroup without ambient group");
  if (group_.degree() != ambient_->degree())
    fail(errc::ambient_mismatch, "subgroup degree does not match ambient");
  for (const Perm& p : group_.elements())
    if (!ambient_->contains(p))
      fail(errc::ambient_mismatch, "element " + p.to_cycle_string() + " not in ambient group");
}

Subgroup Subgroup::trivial(GroupPtr ambient) {
  int degree = ambient->degree();
  return Subgroup(std::move(ambient),
                  Group::from_sorted_elements(degree, {Perm::identity(degree)}, {}));
}

Subgroup Subgroup::whole(GroupPtr ambient) {
  Group g = *ambient;
  return Subgroup(std::move(ambient), std::move(g));
}

Subgroup Subgroup::generated(GroupPtr ambient, std::vector<Perm> gens, std::string name) {
  Group g = Group::from_generators(ambient->degree(), std::move(gens), std::move(name));
  return Subgroup(std::move(ambient), std::move(g));
}

bool Subgroup::contains(const Subgroup& other) const {
  if (other.order() > order()) return false;
  for (const Perm& p : other.elements())
    if (!group_.contains(p)) return false;
  return true;
}

bool Subgroup::operator==(const Subgroup& other) const {
  return group_.elements() == other.group_.elements();
}

namespace {

bool same_ambient(const GroupPtr& a, const GroupPtr& b) {
  if (a.get() == b.get()) return true;
  return a && b && a->degree() == b->degree() && a->elements() == b->elements();
}

void require_ambient(const GroupPtr& ambient, const Subgroup& h, const char* op) {
  if (!same_ambient(ambient, h.ambient()))
    fail(errc::ambient_mismatch, std::string(op) + ": subgroup has a different ambient group");
}

// Closure of a set of permutations known to lie in a finite group.
std::vector<Perm> close_under_product(int degree, const std::vector<Perm>& gens,
                                      std::size_t max_elements) {
  std::unordered_set<Perm, PermHash> seen;
  std::deque<Perm> work;
  Perm id = Perm::identity(degree);
  seen.insert(id);
  work.push_back(id);
  while (!work.empty()) {
    Perm cur = std::move(work.front());
    work.pop_front();
    for (const Perm& g : gens) {
      Perm next = cur.then(g);
      if (seen.insert(next).second) {
        if (seen.size() > max_elements)
          fail(errc::budget_exceeded, "closure exceeds element budget");
        work.push_back(std::move(next));
      }
    }
  }
  std::vector<Perm> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Perm> generating_set(const Subgroup& h) {
  if (!h.group().generators().empty()) return h.group().generators();
  return h.elements();
}

} // namespace

Subgroup subgroup_join(const GroupPtr& ambient, std::span<const Subgroup> parts) {
  std::vector<Perm> gens;
  for (const Subgroup& part : parts) {
    require_ambient(ambient, part, "subgroup_join");
    for (const Perm& g : generating_set(part))
      if (!g.is_identity()) gens.push_back(g);
  }
  std::vector<Perm> elems = close_under_product(ambient->degree(), gens, ambient->order());
  return Subgroup(ambient, Group::from_sorted_elements(ambient->degree(), std::move(elems),
                                                       std::move(gens)));
}

Subgroup subgroup_join(const GroupPtr& ambient, std::initializer_list<Subgroup> parts) {
  return subgroup_join(ambient, std::span<const Subgroup>(parts.begin(), parts.size()));
}

Subgroup sylow_subgroup(const GroupPtr& g, int p) {
  if (!is_prime(p)) fail(errc::precondition_violation, "sylow_subgroup: p must be prime");
  const std::size_t target = p_part(g->order(), p);
  std::vector<Perm> cur = {Perm::identity(g->degree())};
  std::vector<Perm> curGens;
  while (cur.size() < target) {
    // N_G(P) contains a p-element outside P whose adjunction stays a p-group.
    bool grown = false;
    for (const Perm& x : g->elements()) {
      if (std::binary_search(cur.begin(), cur.end(), x)) continue;
      if (p_part(static_cast<std::size_t>(x.order()), p) != static_cast<std::size_t>(x.order()))
        continue;
      bool normalizes_cur = true;
      for (const Perm& y : cur)
        if (!std::binary_search(cur.begin(), cur.end(), y.conjugated_by(x))) {
          normalizes_cur = false;
          break;
        }
      if (!normalizes_cur) continue;
      std::vector<Perm> gens = curGens;
      gens.push_back(x);
      std::vector<Perm> bigger = close_under_product(g->degree(), gens, g->order());
      if (p_part(bigger.size(), p) != bigger.size()) continue;
      cur = std::move(bigger);
      curGens = std::move(gens);
      grown = true;
      break;
    }
    if (!grown)
      fail(errc::precondition_violation, "sylow_subgroup: growth stalled (ambient not closed?)");
  }
  // Canonicalize over the full conjugate orbit.
  std::vector<Perm> best = cur;
  for (const Perm& x : g->elements()) {
    std::vector<Perm> conj;
    conj.reserve(cur.size());
    for (const Perm& y : cur) conj.push_back(y.conjugated_by(x));
    std::sort(conj.begin(), conj.end());
    if (conj < best) best = std::move(conj);
  }
  std::vector<Perm> gens;
  for (const Perm& y : best)
    if (!y.is_identity()) gens.push_back(y);
  return Subgroup(g, Group::from_sorted_elements(g->degree(), std::move(best), std::move(gens)));
}

std::pair<Subgroup, Subgroup> normalizer_centralizer(const GroupPtr& ambient, const Subgroup& h) {
  require_ambient(ambient, h, "normalizer_centralizer");
  std::vector<Perm> normal, central;
  for (const Perm& g : ambient->elements()) {
    bool norm = true, cent = true;
    for (const Perm& x : h.elements()) {
      Perm cx = x.conjugated_by(g);
      if (cx != x) cent = false;
      if (!h.contains(cx)) {
        norm = false;
        break;
      }
    }
    if (norm) {
      normal.push_back(g);
      if (cent) central.push_back(g);
    }
  }
  auto make = [&](std::vector<Perm> elems) {
    return Subgroup(ambient, Group::from_sorted_elements(ambient->degree(), std::move(elems), {}));
  };
  return {make(std::move(normal)), make(std::move(central))};
}

namespace {

std::vector<Subgroup> subgroup_bfs(const GroupPtr& g, const Budget& budget) {
  std::map<std::vector<Perm>, std::vector<Perm>> found; // elements -> generators
  std::vector<Perm> trivial = {Perm::identity(g->degree())};
  found.emplace(trivial, std::vector<Perm>{});
  std::deque<std::pair<std::vector<Perm>, std::vector<Perm>>> work;
  work.emplace_back(trivial, std::vector<Perm>{});
  while (!work.empty()) {
    auto [elems, gens] = std::move(work.front());
    work.pop_front();
    for (const Perm& x : g->elements()) {
      if (std::binary_search(elems.begin(), elems.end(), x)) continue;
      std::vector<Perm> nextGens = gens;
      nextGens.push_back(x);
      std::vector<Perm> next = close_under_product(g->degree(), nextGens, g->order());
      if (found.contains(next)) continue;
      if (found.size() >= budget.max_subgroups)
        fail(errc::budget_exceeded, "subgroup lattice exceeds cap of " +
                                        std::to_string(budget.max_subgroups));
      found.emplace(next, nextGens);
      work.emplace_back(std::move(next), std::move(nextGens));
    }
  }
  std::vector<Subgroup> out;
  out.reserve(found.size());
  for (auto& [elems, gens] : found)
    out.emplace_back(g, Group::from_sorted_elements(g->degree(), elems, gens));
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.elements() < b.elements();
  });
  return out;
}

} // namespace

std::vector<Subgroup> enumerate_subgroups(const GroupPtr& s, const Budget& budget) {
  std::vector<int> ps = prime_divisors(s->order());
  if (ps.size() > 1)
    fail(errc::precondition_violation, "enumerate_subgroups: input is not a p-group");
  return subgroup_bfs(s, budget);
}

std::vector<Subgroup> all_subgroups(const GroupPtr& g, const Budget& budget) {
  return subgroup_bfs(g, budget);
}

std::vector<std::vector<Perm>> conjugacy_classes(const Group& g) {
  std::vector<std::vector<Perm>> classes;
  std::unordered_set<Perm, PermHash> seen;
  for (const Perm& x : g.elements()) {
    if (seen.contains(x)) continue;
    std::unordered_set<Perm, PermHash> orbit;
    for (const Perm& a : g.elements()) orbit.insert(x.conjugated_by(a));
    std::vector<Perm> cls(orbit.begin(), orbit.end());
    std::sort(cls.begin(), cls.end());
    for (const Perm& y : cls) seen.insert(y);
    classes.push_back(std::move(cls));
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

std::vector<Subgroup> normal_subgroups(const GroupPtr& g, const Budget& budget) {
  std::vector<std::vector<Perm>> classes = conjugacy_classes(*g);
  std::map<std::vector<Perm>, bool> found;
  std::vector<Perm> trivial = {Perm::identity(g->degree())};
  found.emplace(trivial, true);
  std::deque<std::vector<Perm>> work{trivial};
  while (!work.empty()) {
    std::vector<Perm> cur = std::move(work.front());
    work.pop_front();
    for (const auto& cls : classes) {
      if (std::binary_search(cur.begin(), cur.end(), cls.front())) continue;
      std::vector<Perm> gens = cur;
      gens.insert(gens.end(), cls.begin(), cls.end());
      // A subgroup generated by a union of classes is normal.
      std::vector<Perm> next = close_under_product(g->degree(), gens, g->order());
      if (found.contains(next)) continue;
      if (found.size() >= budget.max_subgroups)
        fail(errc::budget_exceeded, "normal subgroup enumeration exceeds cap");
      found.emplace(next, true);
      work.push_back(std::move(next));
    }
  }
  std::vector<Subgroup> out;
  out.reserve(found.size());
  for (auto& [elems, _] : found)
    out.emplace_back(g, Group::from_sorted_elements(g->degree(), elems, {}));
  std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.elements() < b.elements();
  });
  return out;
}

Subgroup intersect_subgroups(const Subgroup& a, const Subgroup& b) {
  std::vector<Perm> elems;
  std::set_intersection(a.elements().begin(), a.elements().end(), b.elements().begin(),
                        b.elements().end(), std::back_inserter(elems));
  return Subgroup(a.ambient(),
                  Group::from_sorted_elements(a.group().degree(), std::move(elems), {}));
}

Subgroup conjugate_subgroup(const Subgroup& h, const Perm& g) {
  std::vector<Perm> elems;
  elems.reserve(h.order());
  for (const Perm& x : h.elements()) elems.push_back(x.conjugated_by(g));
  std::sort(elems.begin(), elems.end());
  std::vector<Perm> gens;
  for (const Perm& x : h.group().generators()) gens.push_back(x.conjugated_by(g));
  return Subgroup(h.ambient(),
                  Group::from_sorted_elements(h.group().degree(), std::move(elems), std::move(gens)));
}

bool is_normal_in_ambient(const Subgroup& h) {
  for (const Perm& g : h.ambient()->elements())
    for (const Perm& x : h.group().generators().empty() ? h.elements() : h.group().generators())
      if (!h.contains(x.conjugated_by(g))) return false;
  return true;
}

bool normalizes(const Perm& g, const Subgroup& h) {
  for (const Perm& x : h.group().generators().empty() ? h.elements() : h.group().generators())
    if (!h.contains(x.conjugated_by(g))) return false;
  return true;
}

Subgroup centralizer_of_set(const GroupPtr& ambient, std::span<const Perm> xs) {
  std::vector<Perm> elems;
  for (const Perm& g : ambient->elements()) {
    bool cent = true;
    for (const Perm& x : xs)
      if (x.conjugated_by(g) != x) {
        cent = false;
        break;
      }
    if (cent) elems.push_back(g);
  }
  return Subgroup(ambient, Group::from_sorted_elements(ambient->degree(), std::move(elems), {}));
}

Group quotient_permutation_group(const Group& g, const Group& n) {
  // Right cosets Nx, acted on by right multiplication.
  std::vector<std::vector<Perm>> cosets;
  std::unordered_set<Perm, PermHash> assigned;
  std::vector<std::size_t> coset_of(g.order());
  for (const Perm& x : g.elements()) {
    if (assigned.contains(x)) continue;
    std::vector<Perm> coset;
    for (const Perm& m : n.elements()) coset.push_back(m.then(x));
    std::sort(coset.begin(), coset.end());
    for (const Perm& y : coset) assigned.insert(y);
    cosets.push_back(std::move(coset));
  }
  std::sort(cosets.begin(), cosets.end());
  auto coset_index = [&](const Perm& x) -> std::size_t {
    for (std::size_t i = 0; i < cosets.size(); ++i)
      if (std::binary_search(cosets[i].begin(), cosets[i].end(), x)) return i;
    return cosets.size();
  };
  std::vector<Perm> images;
  for (const Perm& x : g.elements()) {
    std::vector<int> img(cosets.size());
    for (std::size_t i = 0; i < cosets.size(); ++i)
      img[i] = static_cast<int>(coset_index(cosets[i].front().then(x)));
    images.push_back(Perm::from_images(img));
  }
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());
  return Group::from_sorted_elements(static_cast<int>(cosets.size()), std::move(images), {},
                                     g.name().empty() ? "" : g.name() + "/N");
}

std::size_t p_part(std::size_t n, int p) {
  std::size_t q = 1;
  while (n % static_cast<std::size_t>(p) == 0) {
    n /= static_cast<std::size_t>(p);
    q *= static_cast<std::size_t>(p);
  }
  return q;
}

bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

std::vector<int> prime_divisors(std::size_t n) {
  std::vector<int> out;
  for (int p = 2; static_cast<std::size_t>(p) * static_cast<std::size_t>(p) <= n; ++p) {
    if (n % static_cast<std::size_t>(p) == 0) {
      out.push_back(p);
      while (n % static_cast<std::size_t>(p) == 0) n /= static_cast<std::size_t>(p);
    }
  }
  if (n > 1) out.push_back(static_cast<int>(n));
  return out;
}

} // namespace subkit
