#include "subkit/partial.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <set>
#include <unordered_set>

#include "subkit/error.hpp"
#include "subkit/subnormal.hpp"

namespace subkit {

std::size_t WordIdsHash::operator()(const WordIds& w) const {
  std::size_t h = 1469598103934665603ull;
  for (std::uint32_t x : w) {
    h ^= x;
    h *= 1099511628211ull;
  }
  return h;
}

PartialGroupTable::PartialGroupTable(std::size_t n, std::uint32_t identity,
                                     std::vector<std::uint32_t> inverse,
                                     std::vector<std::string> labels, int complete_to_length)
    : identity_(identity), inverse_(std::move(inverse)), labels_(std::move(labels)),
      complete_(complete_to_length) {
  if (inverse_.size() != n || labels_.size() != n)
    fail(errc::precondition_violation, "partial group table: inconsistent sizes");
}

void PartialGroupTable::define(WordIds w, std::uint32_t product) {
  products_[std::move(w)] = product;
}

bool PartialGroupTable::in_domain(const WordIds& w) const {
  if (w.empty()) return true;
  return products_.contains(w);
}

std::optional<std::uint32_t> PartialGroupTable::product(const WordIds& w) const {
  if (w.empty()) return identity_;
  auto it = products_.find(w);
  if (it == products_.end()) return std::nullopt;
  return it->second;
}

namespace {

PartialAxiomReport axiom_fail(std::string axiom, WordIds witness, std::string detail) {
  PartialAxiomReport r;
  r.ok = false;
  r.axiom = std::move(axiom);
  r.witness = std::move(witness);
  r.detail = std::move(detail);
  return r;
}

} // namespace

PartialAxiomReport check_partial_group(const PartialGroupTable& t) {
  // Length-one totality and the inversion involution.
  for (std::uint32_t x = 0; x < t.size(); ++x) {
    auto px = t.product({x});
    if (!px) return axiom_fail("length-one", {x}, "length-one word missing from the domain");
    if (*px != x) return axiom_fail("length-one", {x}, "product of a length-one word is not its letter");
    if (t.inverse(x) >= t.size() || t.inverse(t.inverse(x)) != x)
      return axiom_fail("inversion-involution", {x}, "inversion map is not involutory");
  }
  std::vector<std::pair<WordIds, std::uint32_t>> entries(t.entries().begin(), t.entries().end());
  std::sort(entries.begin(), entries.end());
  for (const auto& [w, pw] : entries) {
    // Prefix/suffix closure.
    for (std::size_t cut = 1; cut < w.size(); ++cut) {
      WordIds u(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cut));
      WordIds v(w.begin() + static_cast<std::ptrdiff_t>(cut), w.end());
      if (!t.in_domain(u)) return axiom_fail("prefix-closure", w, "a prefix is outside the domain");
      if (!t.in_domain(v)) return axiom_fail("suffix-closure", w, "a suffix is outside the domain");
    }
    // Substitution multiplicativity: collapsing a middle segment to its
    // product keeps the word in the domain with the same product.
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = i + 2; j <= w.size(); ++j) {
        if (j - i == w.size()) continue;
        WordIds mid(w.begin() + static_cast<std::ptrdiff_t>(i),
                    w.begin() + static_cast<std::ptrdiff_t>(j));
        auto pm = t.product(mid);
        if (!pm) return axiom_fail("prefix-closure", w, "a segment is outside the domain");
        WordIds collapsed(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
        collapsed.push_back(*pm);
        collapsed.insert(collapsed.end(), w.begin() + static_cast<std::ptrdiff_t>(j), w.end());
        auto pc = t.product(collapsed);
        if (!pc)
          return axiom_fail("substitution", w, "collapsed word is outside the domain");
        if (*pc != pw)
          return axiom_fail("substitution", w, "collapsed word has a different product");
      }
    // Inversion cancellation, within the stored bound.
    if (2 * w.size() <= static_cast<std::size_t>(t.complete_to_length())) {
      WordIds cancel;
      for (auto it = w.rbegin(); it != w.rend(); ++it) cancel.push_back(t.inverse(*it));
      WordIds winv = cancel;
      cancel.insert(cancel.end(), w.begin(), w.end());
      auto pc = t.product(cancel);
      if (!pc || *pc != t.identity())
        return axiom_fail("inversion-cancellation", w, "w^{-1} o w does not multiply to 1");
      auto pi = t.product(winv);
      if (!pi || *pi != t.inverse(pw))
        return axiom_fail("inversion-cancellation", w, "product of w^{-1} is not the inverse");
    }
  }
  PartialAxiomReport r;
  r.ok = true;
  return r;
}

// ---- locality ----

Locality::Locality(GroupPtr group, Subgroup sylow, int prime, std::vector<Subgroup> delta,
                   int word_bound, const Budget& budget)
    : group_(std::move(group)), sylow_(std::move(sylow)), prime_(prime), word_bound_(word_bound) {
  if (!is_prime(prime_)) fail(errc::precondition_violation, "locality: p must be prime");
  if (word_bound_ < 3 || word_bound_ > 8)
    fail(errc::precondition_violation, "locality: word bound must be between 3 and 8");
  if (sylow_.order() != p_part(group_->order(), prime_))
    fail(errc::precondition_violation, "locality: S is not a Sylow p-subgroup");

  auto base = std::make_shared<const Group>(sylow_.group());
  lat_ = std::make_shared<const SubgroupLattice>(base, budget);

  if (delta.empty()) fail(errc::invalid_delta, "locality: Delta must be nonempty");
  std::set<std::uint64_t> dmasks;
  for (const Subgroup& p : delta) {
    std::uint64_t m = 0;
    for (const Perm& x : p.elements()) {
      auto idx = base->element_index(x);
      if (!idx) fail(errc::invalid_delta, "locality: Delta member is not a subgroup of S");
      m |= 1ull << *idx;
    }
    lat_->id_of(m); // throws if not a subgroup
    dmasks.insert(m);
  }
  // Overgroup closure inside S.
  for (std::uint32_t id = 0; id < lat_->size(); ++id)
    for (std::uint64_t m : dmasks)
      if ((m & lat_->mask(id)) == m && !dmasks.contains(lat_->mask(id)))
        fail(errc::invalid_delta, "locality: Delta is not closed under passing to overgroups");
  // Closure under F_S(G)-conjugacy.
  FusionSystem ambient_fusion = fusion_from_group(group_, sylow_, prime_, budget, lat_);
  for (std::uint32_t id = 0; id < lat_->size(); ++id) {
    if (!dmasks.contains(lat_->mask(id))) continue;
    for (std::uint32_t other = 0; other < lat_->size(); ++other)
      if (ambient_fusion.class_of()[other] == ambient_fusion.class_of()[id] &&
          !dmasks.contains(lat_->mask(other)))
        fail(errc::invalid_delta, "locality: Delta is not closed under fusion conjugacy");
  }
  delta_masks_.assign(dmasks.begin(), dmasks.end());
  for (std::uint64_t m : delta_masks_) delta_.push_back(lat_->subgroup_from_mask(m));

  const std::size_t ns = base->order();
  for (const Perm& g : group_->elements()) {
    std::vector<std::uint8_t> conj(ns, SubgroupLattice::npos);
    std::uint64_t sf = 0;
    for (std::size_t x = 0; x < ns; ++x) {
      auto idx = base->element_index(base->elements()[x].conjugated_by(g));
      if (idx) {
        conj[x] = static_cast<std::uint8_t>(*idx);
        sf |= 1ull << x;
      }
    }
    if (!delta_contains_mask(sf)) continue;
    index_.emplace(g, static_cast<std::uint32_t>(elements_.size()));
    elements_.push_back(g);
    s_conj_.push_back(std::move(conj));
    sf_mask_.push_back(sf);
  }
  inverse_ids_.resize(elements_.size());
  for (std::uint32_t i = 0; i < elements_.size(); ++i) {
    auto inv = index_of(elements_[i].inverse());
    // S_{g^{-1}} = S_g^g, a fusion conjugate, so inverses never leave L.
    if (!inv) fail(errc::invalid_delta, "locality: element set not closed under inversion");
    inverse_ids_[i] = *inv;
  }
}

std::optional<std::uint32_t> Locality::index_of(const Perm& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Locality::delta_contains_mask(std::uint64_t mask) const {
  return std::binary_search(delta_masks_.begin(), delta_masks_.end(), mask);
}

std::uint64_t Locality::image_mask(const WordIds& w) const {
  std::uint64_t a = lat_->mask(lat_->whole_id());
  for (std::uint32_t f : w) {
    std::uint64_t next = 0;
    for (std::uint64_t m = a & sf_mask_[f]; m; m &= m - 1)
      next |= 1ull << s_conj_[f][static_cast<std::uint8_t>(std::countr_zero(m))];
    a = next;
  }
  return a;
}

bool Locality::in_domain(const WordIds& w) const {
  if (w.size() > static_cast<std::size_t>(word_bound_)) return false;
  // S_w and its staged image are F_S(G)-conjugate, and Delta is closed
  // under that conjugacy, so membership can be tested on the image.
  return delta_contains_mask(image_mask(w));
}

Perm Locality::word_product(const WordIds& w) const {
  Perm acc = Perm::identity(group_->degree());
  for (std::uint32_t f : w) acc = acc.then(elements_[f]);
  return acc;
}

Subgroup Locality::s_w_subgroup(const WordIds& w) const {
  std::vector<Perm> kept;
  for (const Perm& x : sylow_.elements()) {
    Perm cur = x;
    bool ok = true;
    for (std::uint32_t f : w) {
      cur = cur.conjugated_by(elements_[f]);
      if (!sylow_.contains(cur)) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(x);
  }
  return Subgroup(group_, Group::from_sorted_elements(group_->degree(), std::move(kept), {}));
}

PartialGroupTable Locality::materialize(std::size_t max_words) const {
  const std::size_t n = elements_.size();
  int complete = 1;
  std::size_t total = n;
  while (complete < word_bound_) {
    std::size_t next = total;
    std::size_t layer = 1;
    bool overflow = false;
    for (int i = 0; i <= complete; ++i) {
      layer *= n;
      if (layer > max_words) {
        overflow = true;
        break;
      }
    }
    if (overflow || next + layer > max_words) break;
    total = next + layer;
    ++complete;
  }

  std::vector<std::uint32_t> inverse(n);
  std::vector<std::string> labels(n);
  std::uint32_t identity = 0;
  for (std::size_t i = 0; i < n; ++i) {
    inverse[i] = inverse_ids_[i];
    labels[i] = elements_[i].to_cycle_string();
    if (elements_[i].is_identity()) identity = static_cast<std::uint32_t>(i);
  }
  PartialGroupTable table(n, identity, std::move(inverse), std::move(labels), complete);

  // DFS over in-domain words; prefixes of in-domain words are in-domain,
  // so pruning on the membership test is exhaustive.
  struct Frame {
    WordIds word;
    std::uint64_t image;
    Perm product;
  };
  std::deque<Frame> work;
  work.push_back({{}, lat_->mask(lat_->whole_id()), Perm::identity(group_->degree())});
  while (!work.empty()) {
    Frame cur = std::move(work.front());
    work.pop_front();
    if (cur.word.size() >= static_cast<std::size_t>(complete)) continue;
    for (std::uint32_t f = 0; f < n; ++f) {
      std::uint64_t next = 0;
      for (std::uint64_t m = cur.image & sf_mask_[f]; m; m &= m - 1)
        next |= 1ull << s_conj_[f][static_cast<std::uint8_t>(std::countr_zero(m))];
      if (!delta_contains_mask(next)) continue;
      Frame child;
      child.word = cur.word;
      child.word.push_back(f);
      child.image = next;
      child.product = cur.product.then(elements_[f]);
      auto pid = index_of(child.product);
      if (!pid) fail(errc::precondition_violation, "locality: product escaped the element set");
      table.define(child.word, *pid);
      work.push_back(std::move(child));
    }
  }
  return table;
}

Locality locality_from_group(const GroupPtr& g, const Subgroup& s, int prime,
                             std::vector<Subgroup> delta, int word_bound, const Budget& budget) {
  return Locality(g, s, prime, std::move(delta), word_bound, budget);
}

Locality locality_all_subgroups(const GroupPtr& g, const Subgroup& s, int prime, int word_bound,
                                const Budget& budget) {
  auto base = std::make_shared<const Group>(s.group());
  std::vector<Subgroup> delta;
  for (const Subgroup& p : enumerate_subgroups(base, budget))
    delta.emplace_back(g, p.group());
  return Locality(g, s, prime, std::move(delta), word_bound, budget);
}

std::pair<Subgroup, bool> word_domain(const Locality& l, const Word& w) {
  WordIds ids;
  for (const Perm& x : w) {
    auto idx = l.index_of(x);
    if (!idx) fail(errc::ambient_mismatch, "word_domain: letter outside the locality");
    ids.push_back(*idx);
  }
  Subgroup sw = l.s_w_subgroup(ids);
  bool flag = l.in_domain(ids);

  std::uint64_t sw_mask = 0;
  for (const Perm& x : sw.elements())
    sw_mask |= 1ull << *l.lattice()->base()->element_index(x);
  bool literal_flag = l.delta_contains_mask(sw_mask) &&
                      ids.size() <= static_cast<std::size_t>(l.word_bound());
  if (flag != literal_flag)
    fail(errc::sides_disagree, "word_domain: membership flag disagrees with S_w in Delta");
  if (flag) {
    Perm prod = l.word_product(ids);
    // S_w <= S_{Pi(w)} and the staged image equals the one-shot conjugate.
    for (const Perm& x : sw.elements())
      if (!l.sylow().contains(x.conjugated_by(prod)))
        fail(errc::sides_disagree, "word_domain: S_w is not inside S_{Pi(w)}");
    std::uint64_t staged = l.image_mask(ids);
    std::uint64_t oneshot = 0;
    for (const Perm& x : sw.elements())
      oneshot |= 1ull << *l.lattice()->base()->element_index(x.conjugated_by(prod));
    if (staged != oneshot)
      fail(errc::sides_disagree, "word_domain: staged image differs from S_w^{Pi(w)}");
  }
  return {std::move(sw), flag};
}

// ---- partial normality ----

namespace {

bool pair_in_domain(const Locality& l, std::uint32_t a, std::uint32_t b) {
  return l.in_domain({a, b});
}

bool conj_defined(const Locality& l, std::uint32_t x, std::uint32_t f) {
  return l.in_domain({l.inverse_id(f), x, f});
}

// Smallest subset of the partial subgroup `k` containing `seed` that is
// closed under inversion, in-domain binary products and conjugation by k.
std::vector<Perm> partial_normal_closure(const Locality& l, const std::vector<Perm>& seed,
                                         const std::vector<Perm>& k) {
  std::set<Perm> out(seed.begin(), seed.end());
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Perm> cur(out.begin(), out.end());
    for (const Perm& x : cur) {
      Perm xi = x.inverse();
      if (!out.contains(xi)) {
        out.insert(xi);
        changed = true;
      }
    }
    cur.assign(out.begin(), out.end());
    for (const Perm& a : cur)
      for (const Perm& b : cur) {
        if (!pair_in_domain(l, *l.index_of(a), *l.index_of(b))) continue;
        Perm ab = a.then(b);
        if (!out.contains(ab)) {
          out.insert(ab);
          changed = true;
        }
      }
    cur.assign(out.begin(), out.end());
    for (const Perm& f : k) {
      std::uint32_t fid = *l.index_of(f);
      for (const Perm& x : cur) {
        if (!conj_defined(l, *l.index_of(x), fid)) continue;
        Perm xf = x.conjugated_by(f);
        if (!out.contains(xf)) {
          out.insert(xf);
          changed = true;
        }
      }
    }
  }
  return {out.begin(), out.end()};
}

} // namespace

PartialNormalityReport partial_normality(const Locality& l, const std::vector<Perm>& n) {
  std::vector<Perm> nvec = n;
  std::sort(nvec.begin(), nvec.end());
  nvec.erase(std::unique(nvec.begin(), nvec.end()), nvec.end());
  for (const Perm& x : nvec)
    if (!l.index_of(x)) fail(errc::ambient_mismatch, "partial_normality: subset outside the locality");

  PartialNormalityReport report;
  auto member = [&](const Perm& x) { return std::binary_search(nvec.begin(), nvec.end(), x); };

  if (!member(Perm::identity(l.group()->degree()))) {
    report.verdict = PartialVerdict::not_subgroup;
    report.detail = "missing identity";
    return report;
  }
  for (const Perm& x : nvec)
    if (!member(x.inverse())) {
      report.verdict = PartialVerdict::not_subgroup;
      report.detail = "not closed under inversion at " + x.to_cycle_string();
      return report;
    }
  // Binary in-domain products suffice: longer in-domain words collapse to
  // nested pairs because Delta is closed under passing to overgroups.
  for (const Perm& a : nvec)
    for (const Perm& b : nvec) {
      if (!pair_in_domain(l, *l.index_of(a), *l.index_of(b))) continue;
      if (!member(a.then(b))) {
        report.verdict = PartialVerdict::not_subgroup;
        report.detail = "not closed under the partial product at (" + a.to_cycle_string() + ", " +
                        b.to_cycle_string() + ")";
        return report;
      }
    }

  bool normal = true;
  for (std::uint32_t f = 0; normal && f < l.elements().size(); ++f)
    for (const Perm& x : nvec) {
      if (!conj_defined(l, *l.index_of(x), f)) continue;
      if (!member(x.conjugated_by(l.element(f)))) {
        normal = false;
        break;
      }
    }
  if (normal) {
    report.verdict = PartialVerdict::partial_normal;
    return report;
  }

  // Iterated partial normal closures, mirroring the group-side series.
  std::vector<std::vector<Perm>> chain{l.elements()};
  for (;;) {
    const std::vector<Perm>& k = chain.back();
    if (k.size() == nvec.size()) break;
    std::vector<Perm> next = partial_normal_closure(l, nvec, k);
    if (next.size() == k.size()) break;
    chain.push_back(std::move(next));
  }
  if (chain.back() == nvec) {
    report.verdict = PartialVerdict::partial_subnormal;
    report.chain = std::move(chain);
    return report;
  }
  report.verdict = PartialVerdict::partial_subgroup;
  report.detail = "terminal partial normal closure has " + std::to_string(chain.back().size()) +
                  " elements";
  return report;
}

// ---- fusion and splitting ----

namespace {

std::vector<MorphismSpec> conjugation_seeds(const Locality& l, const std::vector<Perm>& subset) {
  std::vector<MorphismSpec> specs;
  for (const Perm& f : subset) {
    std::uint32_t fid = *l.index_of(f);
    MorphismSpec spec;
    for (std::uint64_t m = l.s_f_mask(fid); m; m &= m - 1) {
      std::uint8_t x = static_cast<std::uint8_t>(std::countr_zero(m));
      spec.source.push_back(l.lattice()->base()->elements()[x]);
      spec.images.push_back(
          l.lattice()->base()->elements()[l.conj_in_s(x, fid)]);
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

} // namespace

PartialSetOps partial_set_ops(const Locality& l, const std::vector<Perm>& x,
                              const std::vector<Perm>& y) {
  PartialSetOps out;
  std::set<Perm> prod;
  for (const Perm& a : x) {
    auto ida = l.index_of(a);
    if (!ida) fail(errc::ambient_mismatch, "partial_set_ops: element outside the locality");
    for (const Perm& b : y) {
      auto idb = l.index_of(b);
      if (!idb) fail(errc::ambient_mismatch, "partial_set_ops: element outside the locality");
      if (pair_in_domain(l, *ida, *idb)) prod.insert(a.then(b));
    }
  }
  out.product.assign(prod.begin(), prod.end());

  for (std::uint32_t f = 0; f < l.elements().size(); ++f) {
    bool defined = true, fixes = true, setwise = true;
    std::set<Perm> image;
    for (const Perm& a : x) {
      if (!conj_defined(l, *l.index_of(a), f)) {
        defined = false;
        break;
      }
      Perm c = a.conjugated_by(l.element(f));
      image.insert(c);
      if (c != a) fixes = false;
    }
    if (!defined) continue;
    if (image.size() != x.size()) setwise = false;
    for (const Perm& a : x)
      if (!image.contains(a)) setwise = false;
    if (setwise) out.normalizer.push_back(l.element(f));
    if (fixes) out.centralizer.push_back(l.element(f));
  }
  return out;
}

LocalityFusionSplit locality_fusion_and_split(const Locality& l, const std::vector<Perm>& n) {
  PartialNormalityReport norm = partial_normality(l, n);
  if (norm.verdict != PartialVerdict::partial_normal)
    fail(errc::precondition_violation, "locality_fusion_and_split: N is not partial normal");

  std::vector<Perm> nvec = n;
  std::sort(nvec.begin(), nvec.end());
  nvec.erase(std::unique(nvec.begin(), nvec.end()), nvec.end());

  LocalityFusionSplit out;
  auto base = l.lattice()->base();
  out.fusion = fusion_generate(base, l.prime(), {}, conjugation_seeds(l, l.elements()),
                               Budget::from_env(), l.lattice());

  // T = S n N and N_L(T).
  std::vector<Perm> t_elems;
  for (const Perm& x : base->elements())
    if (std::binary_search(nvec.begin(), nvec.end(), x)) t_elems.push_back(x);
  PartialSetOps t_ops = partial_set_ops(l, t_elems, t_elems);
  std::vector<Perm> nlt = t_ops.normalizer;
  std::set<Perm> nlt_set(nlt.begin(), nlt.end());

  out.all_split = true;
  for (std::uint32_t gid = 0; gid < l.elements().size(); ++gid) {
    const Perm& g = l.element(gid);
    std::uint64_t sg = l.s_f_mask(gid);
    bool found = false;
    for (const Perm& n0 : nvec) {
      Perm h = n0.inverse().then(g);
      auto hid = l.index_of(h);
      if (!hid || !nlt_set.contains(h)) continue;
      std::uint32_t n0id = *l.index_of(n0);
      if (!l.in_domain({n0id, *hid})) continue;
      // S_{(n,h)} as a preimage mask.
      std::uint64_t snh = 0;
      for (std::uint64_t m = l.s_f_mask(n0id); m; m &= m - 1) {
        std::uint8_t x = static_cast<std::uint8_t>(std::countr_zero(m));
        std::uint8_t mid = l.conj_in_s(x, n0id);
        if (l.conj_in_s(mid, *hid) != SubgroupLattice::npos &&
            (l.s_f_mask(*hid) & (1ull << mid)))
          snh |= 1ull << x;
      }
      if (snh == sg) {
        out.witnesses.emplace_back(n0, h);
        found = true;
        break;
      }
    }
    if (!found) {
      out.all_split = false;
      out.failures.push_back({g, "no Frattini factorization with matching restriction"});
    }
  }

  FusionSystem f_ns = fusion_generate(base, l.prime(), {},
                                      conjugation_seeds(l, partial_set_ops(l, nvec,
                                                                           {base->elements().begin(),
                                                                            base->elements().end()})
                                                               .product),
                                      Budget::from_env(), l.lattice());
  FusionSystem f_nlt = fusion_generate(base, l.prime(), {}, conjugation_seeds(l, nlt),
                                       Budget::from_env(), l.lattice());
  FusionSystem rhs = fusion_generate(base, l.prime(), {f_ns, f_nlt}, {}, Budget::from_env(),
                                     l.lattice());
  out.lhs_size = out.fusion.size();
  out.rhs_size = rhs.size();
  out.generation_identity = equal_systems(out.fusion, rhs);
  return out;
}

LinkingReport is_linking_locality(const Locality& l) {
  LinkingReport out;
  auto base = l.lattice()->base();
  FusionSystem f = fusion_generate(base, l.prime(), {}, conjugation_seeds(l, l.elements()),
                                   Budget::from_env(), l.lattice());
  if (!is_saturated(f).saturated) {
    out.failing_clause = "F_S(L) is not saturated";
    return out;
  }
  for (const Subgroup& cr : centric_radicals(f)) {
    std::uint64_t mask = 0;
    for (const Perm& x : cr.elements()) mask |= 1ull << *base->element_index(x);
    if (!l.delta_contains_mask(mask)) {
      out.failing_clause = "a centric radical subgroup lies outside Delta";
      return out;
    }
  }
  for (const Subgroup& p : l.delta()) {
    std::vector<Perm> pelems(p.elements().begin(), p.elements().end());
    PartialSetOps ops = partial_set_ops(l, pelems, pelems);
    std::vector<Perm> nl = ops.normalizer;
    std::sort(nl.begin(), nl.end());
    bool closed = true;
    for (const Perm& a : nl) {
      if (!std::binary_search(nl.begin(), nl.end(), a.inverse())) closed = false;
      for (const Perm& b : nl)
        if (!std::binary_search(nl.begin(), nl.end(), a.then(b))) closed = false;
    }
    if (!closed) {
      out.failing_clause = "N_L(P) is not a subgroup for some P in Delta";
      return out;
    }
    auto nptr = std::make_shared<const Group>(
        Group::from_sorted_elements(l.group()->degree(), nl, {}));
    if (!is_characteristic_p(nptr, l.prime())) {
      out.failing_clause = "N_L(P) is not of characteristic p for P of order " +
                           std::to_string(p.order());
      return out;
    }
  }
  out.linking = true;
  return out;
}

// ---- exhaustive bounded word-domain verification ----

WordSweepReport sweep_word_states(const Locality& l, std::size_t sample_words) {
  WordSweepReport out;
  out.bound = l.word_bound();
  struct State {
    std::uint64_t image;
    Perm product;
    bool operator==(const State&) const = default;
  };
  struct StateHash {
    std::size_t operator()(const State& s) const {
      return std::hash<std::uint64_t>()(s.image) * 1099511628211ull ^ PermHash()(s.product);
    }
  };

  auto base = l.lattice()->base();
  auto check_state = [&](const State& st, const WordIds& rep) -> bool {
    Subgroup sw = l.s_w_subgroup(rep);
    // Literal S_w must be the preimage of the incrementally tracked image.
    std::vector<Perm> preimage;
    for (const Perm& x : l.sylow().elements()) {
      Perm y = x.conjugated_by(st.product);
      auto idx = base->element_index(y);
      if (idx && (st.image & (1ull << *idx))) preimage.push_back(x);
    }
    if (preimage != sw.elements()) {
      out.detail = "incremental image disagrees with the literal S_w";
      return false;
    }
    // Cross-module agreement with the plain group-side computation.
    Word perm_word;
    for (std::uint32_t f : rep) perm_word.push_back(l.element(f));
    Subgroup via_engine = s_restriction(l.group(), Subgroup(l.group(), *base), perm_word);
    if (via_engine.elements() != sw.elements()) {
      out.detail = "s_restriction disagrees with the locality word domain";
      return false;
    }
    // E:Sw membership rule, on both the image and the literal subgroup.
    std::uint64_t sw_mask = 0;
    for (const Perm& x : sw.elements()) sw_mask |= 1ull << *base->element_index(x);
    bool flag = l.in_domain(rep);
    if (flag != l.delta_contains_mask(sw_mask) || flag != l.delta_contains_mask(st.image)) {
      out.detail = "domain membership differs from S_w in Delta";
      return false;
    }
    // E:2 for in-domain words.
    if (flag) {
      for (const Perm& x : sw.elements())
        if (!l.sylow().contains(x.conjugated_by(st.product))) {
          out.detail = "S_w is not inside S_{Pi(w)}";
          return false;
        }
    }
    return true;
  };

  std::unordered_map<State, WordIds, StateHash> seen;
  std::deque<std::pair<State, WordIds>> work;
  State start{l.lattice()->mask(l.lattice()->whole_id()), Perm::identity(l.group()->degree())};
  seen.emplace(start, WordIds{});
  work.emplace_back(start, WordIds{});
  if (!check_state(start, {})) return out;
  while (!work.empty()) {
    auto [st, rep] = std::move(work.front());
    work.pop_front();
    if (rep.size() >= static_cast<std::size_t>(l.word_bound())) continue;
    for (std::uint32_t f = 0; f < l.elements().size(); ++f) {
      std::uint64_t next = 0;
      for (std::uint64_t m = st.image & l.s_f_mask(f); m; m &= m - 1)
        next |= 1ull << l.conj_in_s(static_cast<std::uint8_t>(std::countr_zero(m)), f);
      State child{next, st.product.then(l.element(f))};
      if (seen.contains(child)) continue;
      WordIds childRep = rep;
      childRep.push_back(f);
      seen.emplace(child, childRep);
      if (!check_state(child, childRep)) return out;
      work.emplace_back(std::move(child), std::move(childRep));
    }
  }
  out.states = seen.size();

  // Deterministic sample of literal words through the public word_domain.
  std::uint64_t lcg = 0x2545F4914F6CDD1Dull;
  for (std::size_t i = 0; i < sample_words && !l.elements().empty(); ++i) {
    lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
    std::size_t len = 1 + (lcg >> 33) % static_cast<std::size_t>(l.word_bound());
    Word w;
    for (std::size_t k = 0; k < len; ++k) {
      lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
      w.push_back(l.element(static_cast<std::uint32_t>((lcg >> 33) % l.elements().size())));
    }
    word_domain(l, w); // throws sides_disagree on any postcondition violation
    ++out.sampled_words;
  }
  out.ok = true;
  return out;
}

LocalityInvariantReport verify_locality_invariants(const Locality& l) {
  LocalityInvariantReport out;
  auto base = l.lattice()->base();

  // S maximal among p-subgroups of the element set.
  for (const Perm& g : l.elements()) {
    std::size_t ord = static_cast<std::size_t>(g.order());
    if (p_part(ord, l.prime()) != ord) continue;
    if (base->contains(g)) continue;
    std::vector<Perm> gens(l.sylow().group().generators());
    gens.push_back(g);
    Group bigger = Group::from_generators(l.group()->degree(), gens);
    if (p_part(bigger.order(), l.prime()) == bigger.order()) {
      out.detail = "S is not maximal: a larger p-subgroup exists";
      return out;
    }
  }
  // Conjugation maps are injective homomorphisms on S_f.
  for (std::uint32_t f = 0; f < l.elements().size(); ++f) {
    const Perm& pf = l.element(f);
    for (std::uint64_t m1 = l.s_f_mask(f); m1; m1 &= m1 - 1) {
      const Perm& x = base->elements()[static_cast<std::size_t>(std::countr_zero(m1))];
      for (std::uint64_t m2 = l.s_f_mask(f); m2; m2 &= m2 - 1) {
        const Perm& y = base->elements()[static_cast<std::size_t>(std::countr_zero(m2))];
        if (!l.sylow().contains(x.then(y))) continue;
        if (x.then(y).conjugated_by(pf) != x.conjugated_by(pf).then(y.conjugated_by(pf))) {
          out.detail = "conjugation map is not a homomorphism";
          return out;
        }
      }
    }
  }
  // N_L(P) is a subgroup for every P in Delta.
  for (const Subgroup& p : l.delta()) {
    std::vector<Perm> pelems(p.elements().begin(), p.elements().end());
    std::vector<Perm> nl = partial_set_ops(l, pelems, pelems).normalizer;
    std::sort(nl.begin(), nl.end());
    for (const Perm& a : nl)
      for (const Perm& b : nl)
        if (!std::binary_search(nl.begin(), nl.end(), a.then(b))) {
          out.detail = "N_L(P) is not closed under the product";
          return out;
        }
  }
  out.ok = true;
  return out;
}

} // namespace subkit
