#include "subkit/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "subkit/error.hpp"

namespace subkit {

namespace {

std::uint8_t index_in(const Group& g, const Perm& p, const char* what) {
  auto idx = g.element_index(p);
  if (!idx) fail(errc::ambient_mismatch, std::string(what) + ": element outside the base group");
  return static_cast<std::uint8_t>(*idx);
}

} // namespace

SubgroupLattice::SubgroupLattice(GroupPtr base, const Budget& budget) : base_(std::move(base)) {
  const std::size_t n = base_->order();
  if (n > 64)
    fail(errc::budget_exceeded,
         "fusion engine supports p-groups of order at most 64, got " + std::to_string(n));
  mult_.assign(n, std::vector<std::uint8_t>(n));
  conj_.assign(n, std::vector<std::uint8_t>(n));
  inv_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const Perm& pa = base_->elements()[a];
    inv_[a] = index_in(*base_, pa.inverse(), "lattice");
    for (std::size_t b = 0; b < n; ++b) {
      const Perm& pb = base_->elements()[b];
      mult_[a][b] = index_in(*base_, pa.then(pb), "lattice");
      conj_[b][a] = index_in(*base_, pa.conjugated_by(pb), "lattice");
    }
  }
  for (const Subgroup& h : enumerate_subgroups(base_, budget)) {
    std::uint64_t m = 0;
    for (const Perm& x : h.elements()) m |= 1ull << index_in(*base_, x, "lattice");
    masks_.push_back(m);
  }
  std::sort(masks_.begin(), masks_.end(), [](std::uint64_t a, std::uint64_t b) {
    if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
    return a < b;
  });
  members_.resize(masks_.size());
  pos_.assign(masks_.size(), std::vector<std::uint8_t>(n, npos));
  for (std::size_t i = 0; i < masks_.size(); ++i) {
    for (std::uint64_t m = masks_[i]; m; m &= m - 1) {
      std::uint8_t idx = static_cast<std::uint8_t>(std::countr_zero(m));
      pos_[i][idx] = static_cast<std::uint8_t>(members_[i].size());
      members_[i].push_back(idx);
    }
    if (masks_[i] == (n == 64 ? ~0ull : (1ull << n) - 1)) whole_ = static_cast<std::uint32_t>(i);
  }
  below_.resize(masks_.size());
  for (std::size_t i = 0; i < masks_.size(); ++i)
    for (std::size_t j = 0; j < masks_.size(); ++j)
      if ((masks_[j] & masks_[i]) == masks_[j]) below_[i].push_back(static_cast<std::uint32_t>(j));
}

std::uint32_t SubgroupLattice::id_of(std::uint64_t mask) const {
  int pc = std::popcount(mask);
  auto it = std::lower_bound(masks_.begin(), masks_.end(), mask,
                             [pc](std::uint64_t a, std::uint64_t b) {
                               if (std::popcount(a) != std::popcount(b))
                                 return std::popcount(a) < std::popcount(b);
                               return a < b;
                             });
  (void)pc;
  if (it == masks_.end() || *it != mask)
    fail(errc::precondition_violation, "subset is not a subgroup of the base");
  return static_cast<std::uint32_t>(it - masks_.begin());
}

int SubgroupLattice::order_of(std::uint32_t id) const { return std::popcount(masks_[id]); }

std::uint64_t SubgroupLattice::conj_mask(std::uint64_t m, std::uint8_t g) const {
  std::uint64_t out = 0;
  for (; m; m &= m - 1)
    out |= 1ull << conj_[g][static_cast<std::uint8_t>(std::countr_zero(m))];
  return out;
}

std::uint64_t SubgroupLattice::normalizer_mask(std::uint32_t id) const {
  std::uint64_t out = 0;
  for (std::size_t g = 0; g < base_->order(); ++g)
    if (conj_mask(masks_[id], static_cast<std::uint8_t>(g)) == masks_[id]) out |= 1ull << g;
  return out;
}

std::uint64_t SubgroupLattice::centralizer_mask(std::uint32_t id) const {
  std::uint64_t out = 0;
  for (std::size_t g = 0; g < base_->order(); ++g) {
    bool cent = true;
    for (std::uint8_t x : members_[id])
      if (conj_[g][x] != x) {
        cent = false;
        break;
      }
    if (cent) out |= 1ull << g;
  }
  return out;
}

Subgroup SubgroupLattice::subgroup_from_mask(std::uint64_t mask) const {
  std::vector<Perm> elems;
  for (std::uint64_t m = mask; m; m &= m - 1)
    elems.push_back(base_->elements()[static_cast<std::size_t>(std::countr_zero(m))]);
  return Subgroup(base_, Group::from_sorted_elements(base_->degree(), std::move(elems), {}));
}

std::size_t MorphismHash::operator()(const Morphism& m) const {
  std::size_t h = 1469598103934665603ull ^ m.src;
  for (std::uint8_t b : m.img) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::uint64_t img_mask(const Morphism& m) {
  std::uint64_t out = 0;
  for (std::uint8_t b : m.img) out |= 1ull << b;
  return out;
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

} // namespace

FusionSystem::FusionSystem(GroupPtr base, int prime, LatticePtr lattice,
                           std::vector<Morphism> sorted_morphisms)
    : base_(std::move(base)), prime_(prime), lat_(std::move(lattice)),
      morphisms_(std::move(sorted_morphisms)) {
  assert(std::is_sorted(morphisms_.begin(), morphisms_.end()));
  src_offset_.assign(lat_->size() + 1, 0);
  for (const Morphism& m : morphisms_) ++src_offset_[m.src + 1];
  for (std::size_t i = 1; i < src_offset_.size(); ++i) src_offset_[i] += src_offset_[i - 1];

  UnionFind uf(lat_->size());
  for (const Morphism& m : morphisms_)
    if (static_cast<int>(m.img.size()) == lat_->order_of(m.src))
      uf.unite(m.src, lat_->id_of(img_mask(m)));
  class_of_.resize(lat_->size());
  for (std::size_t i = 0; i < lat_->size(); ++i)
    class_of_[i] = uf.find(static_cast<std::uint32_t>(i));
}

bool FusionSystem::contains(const Morphism& m) const {
  return std::binary_search(morphisms_.begin(), morphisms_.end(), m);
}

std::span<const Morphism> FusionSystem::with_source(std::uint32_t p) const {
  return {morphisms_.data() + src_offset_[p], morphisms_.data() + src_offset_[p + 1]};
}

std::vector<Morphism> FusionSystem::hom_set(std::uint32_t p, std::uint32_t q) const {
  std::vector<Morphism> out;
  std::uint64_t qmask = lat_->mask(q);
  for (const Morphism& m : with_source(p))
    if ((img_mask(m) & ~qmask) == 0) out.push_back(m);
  return out;
}

Group FusionSystem::aut_group(std::uint32_t p) const {
  std::uint64_t pmask = lat_->mask(p);
  std::vector<Perm> perms;
  for (const Morphism& m : with_source(p)) {
    if (img_mask(m) != pmask) continue;
    std::vector<int> images(m.img.size());
    for (std::size_t k = 0; k < m.img.size(); ++k)
      images[k] = lat_->pos_in(p, m.img[k]);
    perms.push_back(Perm::from_images(images));
  }
  std::sort(perms.begin(), perms.end());
  return Group::from_sorted_elements(lat_->order_of(p), std::move(perms), {});
}

bool same_base(const FusionSystem& a, const FusionSystem& b) {
  return a.base().get() == b.base().get() || a.base()->elements() == b.base()->elements();
}

bool equal_systems(const FusionSystem& a, const FusionSystem& b) {
  return same_base(a, b) && a.morphisms() == b.morphisms();
}

Morphism embed_morphism(const Morphism& m, const SubgroupLattice& from, const SubgroupLattice& into) {
  std::uint64_t src_mask = 0;
  Morphism out;
  out.img.resize(m.img.size());
  for (std::size_t k = 0; k < m.img.size(); ++k) {
    src_mask |= 1ull << index_in(*into.base(), from.element(from.members(m.src)[k]), "embed");
    out.img[k] = index_in(*into.base(), from.element(m.img[k]), "embed");
  }
  out.src = into.id_of(src_mask);
  return out;
}

bool system_contains(const FusionSystem& outer, const FusionSystem& inner) {
  for (const Morphism& m : inner.morphisms())
    if (!outer.contains(embed_morphism(m, *inner.lattice(), *outer.lattice()))) return false;
  return true;
}

FusionSystem intersect_systems(const FusionSystem& a, const FusionSystem& b) {
  if (!same_base(a, b))
    fail(errc::precondition_violation, "intersect_systems: different base groups");
  std::vector<Morphism> common;
  std::set_intersection(a.morphisms().begin(), a.morphisms().end(), b.morphisms().begin(),
                        b.morphisms().end(), std::back_inserter(common));
  return FusionSystem(a.base(), a.prime(), a.lattice(), std::move(common));
}

namespace {

LatticePtr lattice_for(const GroupPtr& base, LatticePtr provided, const Budget& budget) {
  if (provided) {
    if (provided->base().get() != base.get() && provided->base()->elements() != base->elements())
      fail(errc::precondition_violation, "provided lattice does not match the base group");
    return provided;
  }
  return std::make_shared<const SubgroupLattice>(base, budget);
}

} // namespace

FusionSystem fusion_from_group(const GroupPtr& g, const Subgroup& s, int prime,
                               const Budget& budget, LatticePtr lattice) {
  if (!is_prime(prime)) fail(errc::precondition_violation, "fusion_from_group: p must be prime");
  if (s.order() != p_part(g->order(), prime))
    fail(errc::precondition_violation, "fusion_from_group: S is not a Sylow p-subgroup");
  GroupPtr base = lattice ? lattice->base() : std::make_shared<const Group>(s.group());
  LatticePtr lat = lattice_for(base, std::move(lattice), budget);
  const std::size_t ns = base->order();

  std::unordered_set<Morphism, MorphismHash> seen;
  std::vector<std::uint8_t> conj_to(ns);
  for (const Perm& h : g->elements()) {
    bool total = true;
    std::uint64_t defined = 0;
    for (std::size_t x = 0; x < ns; ++x) {
      auto idx = base->element_index(base->elements()[x].conjugated_by(h));
      if (idx) {
        conj_to[x] = static_cast<std::uint8_t>(*idx);
        defined |= 1ull << x;
      } else {
        total = false;
      }
    }
    (void)total;
    for (std::uint32_t pid = 0; pid < lat->size(); ++pid) {
      std::uint64_t pmask = lat->mask(pid);
      if ((pmask & ~defined) != 0) continue;
      Morphism m;
      m.src = pid;
      m.img.reserve(lat->members(pid).size());
      for (std::uint8_t x : lat->members(pid)) m.img.push_back(conj_to[x]);
      seen.insert(std::move(m));
    }
  }
  std::vector<Morphism> morphisms(seen.begin(), seen.end());
  std::sort(morphisms.begin(), morphisms.end());
  if (morphisms.size() > budget.max_morphisms)
    fail(errc::budget_exceeded, "fusion_from_group: morphism budget exceeded");
  return FusionSystem(base, prime, std::move(lat), std::move(morphisms));
}

namespace {

Morphism morphism_from_spec(const MorphismSpec& spec, const SubgroupLattice& lat) {
  if (spec.source.size() != spec.images.size() || spec.source.empty())
    fail(errc::precondition_violation, "seed morphism: source/image size mismatch");
  std::vector<std::pair<std::uint8_t, std::uint8_t>> pairs;
  std::uint64_t src_mask = 0;
  for (std::size_t k = 0; k < spec.source.size(); ++k) {
    std::uint8_t a = index_in(*lat.base(), spec.source[k], "seed morphism source");
    std::uint8_t b = index_in(*lat.base(), spec.images[k], "seed morphism image");
    pairs.emplace_back(a, b);
    src_mask |= 1ull << a;
  }
  std::sort(pairs.begin(), pairs.end());
  Morphism m;
  m.src = lat.id_of(src_mask);
  for (auto& [a, b] : pairs) m.img.push_back(b);
  // Injective homomorphism check in index space.
  std::uint64_t seen_img = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (seen_img & (1ull << pairs[i].second))
      fail(errc::precondition_violation, "seed morphism is not injective");
    seen_img |= 1ull << pairs[i].second;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      std::uint8_t ab = lat.mult(pairs[i].first, pairs[j].first);
      std::uint8_t pos = lat.pos_in(m.src, ab);
      if (pos == SubgroupLattice::npos)
        fail(errc::precondition_violation, "seed morphism source is not a subgroup");
      if (m.img[pos] != lat.mult(pairs[i].second, pairs[j].second))
        fail(errc::precondition_violation, "seed morphism is not a homomorphism");
    }
  }
  return m;
}

} // namespace

FusionSystem fusion_generate(const GroupPtr& base, int prime,
                             const std::vector<FusionSystem>& seed_systems,
                             const std::vector<MorphismSpec>& seed_maps, const Budget& budget,
                             LatticePtr lattice) {
  if (!is_prime(prime)) fail(errc::precondition_violation, "fusion_generate: p must be prime");
  LatticePtr lat = lattice_for(base, std::move(lattice), budget);

  std::unordered_set<Morphism, MorphismHash> seen;
  std::deque<Morphism> work;
  std::vector<std::vector<Morphism>> by_src(lat->size());
  std::vector<std::vector<Morphism>> by_img(lat->size());
  auto push = [&](Morphism&& m) {
    if (seen.size() >= budget.max_morphisms)
      fail(errc::budget_exceeded, "fusion_generate: morphism budget exceeded");
    auto [it, fresh] = seen.insert(std::move(m));
    if (fresh) work.push_back(*it);
  };

  // F_S(S): every restriction of every inner conjugation map.
  for (std::size_t g = 0; g < base->order(); ++g)
    for (std::uint32_t pid = 0; pid < lat->size(); ++pid) {
      Morphism m;
      m.src = pid;
      for (std::uint8_t x : lat->members(pid))
        m.img.push_back(lat->conj(x, static_cast<std::uint8_t>(g)));
      push(std::move(m));
    }
  for (const FusionSystem& sys : seed_systems)
    for (const Morphism& m : sys.morphisms())
      push(embed_morphism(m, *sys.lattice(), *lat));
  for (const MorphismSpec& spec : seed_maps)
    push(morphism_from_spec(spec, *lat));

  while (!work.empty()) {
    Morphism m = std::move(work.front());
    work.pop_front();
    std::uint32_t imgid = lat->id_of(img_mask(m));
    by_src[m.src].push_back(m);
    by_img[imgid].push_back(m);

    // Restrictions to every proper subgroup of the source.
    for (std::uint32_t q : lat->below(m.src)) {
      if (q == m.src) continue;
      Morphism r;
      r.src = q;
      for (std::uint8_t x : lat->members(q)) r.img.push_back(m.img[lat->pos_in(m.src, x)]);
      push(std::move(r));
    }
    // Inverse onto the image subgroup.
    {
      Morphism inv;
      inv.src = imgid;
      inv.img.resize(m.img.size());
      for (std::size_t k = 0; k < m.img.size(); ++k)
        inv.img[lat->pos_in(imgid, m.img[k])] = lat->members(m.src)[k];
      push(std::move(inv));
    }
    // Compositions: m then psi (source of psi = image of m), chi then m.
    for (const Morphism& psi : by_src[imgid]) {
      Morphism c;
      c.src = m.src;
      c.img.reserve(m.img.size());
      for (std::uint8_t b : m.img) c.img.push_back(psi.img[lat->pos_in(imgid, b)]);
      push(std::move(c));
    }
    for (const Morphism& chi : by_img[m.src]) {
      Morphism c;
      c.src = chi.src;
      c.img.reserve(chi.img.size());
      for (std::uint8_t b : chi.img) c.img.push_back(m.img[lat->pos_in(m.src, b)]);
      push(std::move(c));
    }
  }

  std::vector<Morphism> morphisms(seen.begin(), seen.end());
  std::sort(morphisms.begin(), morphisms.end());
  return FusionSystem(base, prime, std::move(lat), std::move(morphisms));
}

// ---- saturation ----

namespace {

// Image vectors of Aut_S(P) (conjugation by the normalizer of P in S).
std::vector<std::vector<std::uint8_t>> aut_s_maps(const SubgroupLattice& lat, std::uint32_t p) {
  std::vector<std::vector<std::uint8_t>> maps;
  std::uint64_t nmask = lat.normalizer_mask(p);
  for (std::uint64_t m = nmask; m; m &= m - 1) {
    std::uint8_t g = static_cast<std::uint8_t>(std::countr_zero(m));
    std::vector<std::uint8_t> img;
    img.reserve(lat.members(p).size());
    for (std::uint8_t x : lat.members(p)) img.push_back(lat.conj(x, g));
    maps.push_back(std::move(img));
  }
  std::sort(maps.begin(), maps.end());
  maps.erase(std::unique(maps.begin(), maps.end()), maps.end());
  return maps;
}

} // namespace

SaturationReport is_saturated(const FusionSystem& f) {
  const SubgroupLattice& lat = *f.lattice();
  const int p = f.prime();
  std::map<std::uint32_t, std::vector<std::uint32_t>> classes;
  for (std::uint32_t id = 0; id < lat.size(); ++id) classes[f.class_of()[id]].push_back(id);

  SaturationReport report;
  for (auto& [root, ids] : classes) {
    // Fully normalized representative: maximal |N_S(P)|, lex-least tie-break.
    std::uint32_t rep = ids.front();
    int best = std::popcount(lat.normalizer_mask(rep));
    for (std::uint32_t id : ids) {
      int nn = std::popcount(lat.normalizer_mask(id));
      if (nn > best || (nn == best && lat.mask(id) < lat.mask(rep))) {
        best = nn;
        rep = id;
      }
    }

    auto auts = aut_s_maps(lat, rep);
    std::size_t aut_f_count = 0;
    std::uint64_t rep_mask = lat.mask(rep);
    for (const Morphism& m : f.with_source(rep))
      if (img_mask(m) == rep_mask) ++aut_f_count;
    bool aut_s_inside = true;
    for (const auto& img : auts) {
      Morphism m{rep, img};
      if (!f.contains(m)) aut_s_inside = false;
    }
    if (!aut_s_inside || auts.size() != p_part(aut_f_count, p)) {
      SaturationFailure fail_info;
      fail_info.kind = SaturationFailure::Kind::sylow_axiom;
      fail_info.subgroup = rep;
      fail_info.detail = "Aut_S has order " + std::to_string(auts.size()) + ", Aut_F has order " +
                         std::to_string(aut_f_count);
      report.failure = fail_info;
      return report;
    }

    std::unordered_set<std::uint64_t> aut_hashes;
    auto hash_img = [](const std::vector<std::uint8_t>& v) {
      std::uint64_t h = 1469598103934665603ull;
      for (std::uint8_t b : v) {
        h ^= b;
        h *= 1099511628211ull;
      }
      return h;
    };
    for (const auto& img : auts) aut_hashes.insert(hash_img(img));

    for (std::uint32_t q : ids) {
      for (const Morphism& phi : f.with_source(q)) {
        if (img_mask(phi) != rep_mask) continue;
        // N_phi = {g in N_S(Q) : phi^{-1} c_g phi in Aut_S(P)}.
        std::uint64_t nphi = 0;
        std::uint64_t nq = lat.normalizer_mask(q);
        for (std::uint64_t mm = nq; mm; mm &= mm - 1) {
          std::uint8_t g = static_cast<std::uint8_t>(std::countr_zero(mm));
          std::vector<std::uint8_t> comp(lat.members(rep).size());
          bool ok = true;
          for (std::size_t k = 0; k < lat.members(rep).size(); ++k) {
            std::uint8_t v = lat.members(rep)[k];
            // u = phi^{-1}(v)
            std::uint8_t pos = SubgroupLattice::npos;
            for (std::size_t j = 0; j < phi.img.size(); ++j)
              if (phi.img[j] == v) {
                pos = static_cast<std::uint8_t>(j);
                break;
              }
            if (pos == SubgroupLattice::npos) {
              ok = false;
              break;
            }
            std::uint8_t u = lat.members(q)[pos];
            std::uint8_t w = lat.conj(u, g);
            comp[k] = phi.img[lat.pos_in(q, w)];
          }
          if (ok && aut_hashes.contains(hash_img(comp))) nphi |= 1ull << g;
        }
        std::uint32_t nphi_id = lat.id_of(nphi);
        bool extends = false;
        for (const Morphism& psi : f.with_source(nphi_id)) {
          bool match = true;
          for (std::size_t k = 0; k < lat.members(q).size(); ++k) {
            std::uint8_t x = lat.members(q)[k];
            if (psi.img[lat.pos_in(nphi_id, x)] != phi.img[k]) {
              match = false;
              break;
            }
          }
          if (match) {
            extends = true;
            break;
          }
        }
        if (!extends) {
          SaturationFailure fail_info;
          fail_info.kind = SaturationFailure::Kind::extension_axiom;
          fail_info.subgroup = rep;
          fail_info.morphism = phi;
          fail_info.extension_domain = nphi_id;
          fail_info.detail = "isomorphism into the representative does not extend to N_phi";
          report.failure = fail_info;
          return report;
        }
      }
    }
  }
  report.saturated = true;
  return report;
}

std::vector<Subgroup> centric_radicals(const FusionSystem& f) {
  const SubgroupLattice& lat = *f.lattice();
  std::map<std::uint32_t, std::vector<std::uint32_t>> classes;
  for (std::uint32_t id = 0; id < lat.size(); ++id) classes[f.class_of()[id]].push_back(id);

  std::vector<Subgroup> out;
  for (std::uint32_t id = 0; id < lat.size(); ++id) {
    bool centric = true;
    for (std::uint32_t q : classes[f.class_of()[id]])
      if ((lat.centralizer_mask(q) & ~lat.mask(q)) != 0) {
        centric = false;
        break;
      }
    if (!centric) continue;
    Group aut = f.aut_group(id);
    std::vector<Perm> inner;
    for (std::uint8_t q : lat.members(id)) {
      std::vector<int> img(lat.members(id).size());
      for (std::size_t k = 0; k < lat.members(id).size(); ++k)
        img[k] = lat.pos_in(id, lat.conj(lat.members(id)[k], q));
      inner.push_back(Perm::from_images(img));
    }
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    Group inn = Group::from_sorted_elements(lat.order_of(id), std::move(inner), {});
    Group outg = quotient_permutation_group(aut, inn);
    auto outp = std::make_shared<const Group>(std::move(outg));
    if (o_p_subgroup(outp, f.prime()).order() != 1) continue;
    out.push_back(lat.subgroup_from_mask(lat.mask(id)));
  }
  return out;
}

HyperfocalResult hyperfocal(const FusionSystem& f, const GroupPtr& realized_by) {
  const int p = f.prime();
  for (const Perm& x : f.base()->elements())
    if (!realized_by->contains(x))
      fail(errc::ambient_mismatch, "hyperfocal: base is not inside the realizing group");
  if (f.base()->order() != p_part(realized_by->order(), p))
    fail(errc::precondition_violation, "hyperfocal: base is not Sylow in the realizing group");

  Subgroup s_in_g(realized_by, *f.base());
  Subgroup opg = o_upper_p_subgroup(realized_by, p);
  Subgroup group_side = intersect_subgroups(s_in_g, opg);

  const SubgroupLattice& lat = *f.lattice();
  std::vector<Perm> gens;
  for (std::uint32_t id = 0; id < lat.size(); ++id) {
    Group aut = f.aut_group(id);
    auto autp = std::make_shared<const Group>(std::move(aut));
    Subgroup oup = o_upper_p_subgroup(autp, p);
    for (const Perm& alpha : oup.elements())
      for (std::size_t j = 0; j < lat.members(id).size(); ++j) {
        const Perm& x = lat.element(lat.members(id)[j]);
        const Perm& xa = lat.element(lat.members(id)[static_cast<std::size_t>(alpha(static_cast<int>(j)))]);
        Perm comm = x.inverse().then(xa);
        if (!comm.is_identity()) gens.push_back(comm);
      }
  }
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  Subgroup fusion_side(realized_by,
                       Group::from_generators(realized_by->degree(), std::move(gens)));

  if (group_side.elements() != fusion_side.elements())
    fail(errc::sides_disagree, "hyperfocal: S n O^p(G) differs from hyp(F)");

  auto kptr = std::make_shared<const Group>(opg.group());
  Subgroup s_in_k(kptr, group_side.group());
  FusionSystem opf = fusion_from_group(kptr, s_in_k, p);
  return HyperfocalResult{std::move(group_side), std::move(fusion_side), std::move(opf)};
}

// ---- subsystem transport, products, brackets ----

namespace {

// Morphisms of a subsystem expressed in the coordinates of the parent base.
std::vector<std::pair<std::uint64_t, std::vector<std::uint8_t>>>
parent_space(const FusionSystem& parent, const SubsystemHandle& e) {
  const SubgroupLattice& plat = *parent.lattice();
  const SubgroupLattice& elat = *e.system.lattice();
  std::vector<std::uint8_t> trans(elat.base()->order());
  for (std::size_t i = 0; i < elat.base()->order(); ++i)
    trans[i] = index_in(*plat.base(), elat.base()->elements()[i], "subsystem transport");
  std::vector<std::pair<std::uint64_t, std::vector<std::uint8_t>>> out;
  out.reserve(e.system.size());
  for (const Morphism& m : e.system.morphisms()) {
    std::uint64_t mask = 0;
    std::vector<std::uint8_t> img(m.img.size());
    for (std::size_t k = 0; k < m.img.size(); ++k) {
      mask |= 1ull << trans[elat.members(m.src)[k]];
      img[k] = trans[m.img[k]];
    }
    out.emplace_back(mask, std::move(img));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t base_mask_in_parent(const FusionSystem& parent, const FusionSystem& sys) {
  std::uint64_t mask = 0;
  for (const Perm& x : sys.base()->elements())
    mask |= 1ull << index_in(*parent.base(), x, "subsystem base");
  return mask;
}

} // namespace

std::uint64_t stabilizer_mask(const FusionSystem& parent, const SubsystemHandle& e) {
  const SubgroupLattice& lat = *parent.lattice();
  std::uint64_t tmask = base_mask_in_parent(parent, e.system);
  std::uint64_t nst = lat.normalizer_mask(lat.id_of(tmask));
  auto canon = parent_space(parent, e);
  std::uint64_t stab = 0;
  for (std::uint64_t mm = nst; mm; mm &= mm - 1) {
    std::uint8_t a = static_cast<std::uint8_t>(std::countr_zero(mm));
    std::uint8_t ainv = lat.inverse(a);
    auto moved = canon;
    for (auto& [mask, img] : moved) {
      std::uint64_t new_mask = lat.conj_mask(mask, a);
      // Images aligned with the ascending members of the conjugated source.
      std::vector<std::uint8_t> old_members;
      for (std::uint64_t t = mask; t; t &= t - 1)
        old_members.push_back(static_cast<std::uint8_t>(std::countr_zero(t)));
      std::vector<std::uint8_t> new_img;
      for (std::uint64_t t = new_mask; t; t &= t - 1) {
        std::uint8_t w = static_cast<std::uint8_t>(std::countr_zero(t));
        std::uint8_t v = lat.conj(w, ainv);
        std::size_t pos = static_cast<std::size_t>(
            std::lower_bound(old_members.begin(), old_members.end(), v) - old_members.begin());
        new_img.push_back(lat.conj(img[pos], a));
      }
      mask = new_mask;
      img = std::move(new_img);
    }
    std::sort(moved.begin(), moved.end());
    if (moved == canon) stab |= 1ull << a;
  }
  return stab;
}

std::pair<SubsystemHandle, Subgroup> subsystem_transport(const FusionSystem& parent,
                                                         const SubsystemHandle& e, const Perm& a) {
  if (!parent.base()->contains(a))
    fail(errc::ambient_mismatch, "subsystem_transport: a must lie in S");
  const SubgroupLattice& elat = *e.system.lattice();

  std::vector<Perm> new_elems;
  for (const Perm& x : e.system.base()->elements()) new_elems.push_back(x.conjugated_by(a));
  std::sort(new_elems.begin(), new_elems.end());
  auto new_base = std::make_shared<const Group>(
      Group::from_sorted_elements(e.system.base()->degree(), std::move(new_elems), {}));
  auto new_lat = std::make_shared<const SubgroupLattice>(new_base);

  std::unordered_set<Morphism, MorphismHash> seen;
  for (const Morphism& m : e.system.morphisms()) {
    MorphismSpec spec;
    for (std::size_t k = 0; k < m.img.size(); ++k) {
      spec.source.push_back(elat.element(elat.members(m.src)[k]).conjugated_by(a));
      spec.images.push_back(elat.element(m.img[k]).conjugated_by(a));
    }
    seen.insert(morphism_from_spec(spec, *new_lat));
  }
  std::vector<Morphism> morphisms(seen.begin(), seen.end());
  std::sort(morphisms.begin(), morphisms.end());
  FusionSystem transported(new_base, e.system.prime(), std::move(new_lat), std::move(morphisms));

  SubsystemHandle out;
  out.system = std::move(transported);
  if (e.realization) {
    if (!e.realization->ambient->contains(a))
      fail(errc::ambient_mismatch, "subsystem_transport: a outside the realizing ambient group");
    out.realization = GroupRealization{e.realization->ambient,
                                       conjugate_subgroup(e.realization->realizer, a)};
  }
  Subgroup stab = parent.lattice()->subgroup_from_mask(stabilizer_mask(parent, e));
  return {std::move(out), std::move(stab)};
}

SubsystemHandle product_subsystem(const FusionSystem& parent, const GroupPtr& realized_by,
                                  const SubsystemHandle& e, const Subgroup& p_sub) {
  if (!e.realization)
    fail(errc::precondition_violation, "product_subsystem: subsystem lacks a group realization");
  const GroupPtr& g = realized_by;
  const Subgroup& h = e.realization->realizer;
  if (h.ambient().get() != g.get() && h.ambient()->elements() != g->elements())
    fail(errc::ambient_mismatch, "product_subsystem: realization ambient mismatch");

  std::uint64_t pmask = 0;
  for (const Perm& x : p_sub.elements()) {
    auto idx = parent.base()->element_index(x);
    if (!idx) fail(errc::not_normalizing, "product_subsystem: P is not contained in S");
    pmask |= 1ull << *idx;
  }
  if ((pmask & ~stabilizer_mask(parent, e)) != 0)
    fail(errc::not_normalizing, "product_subsystem: P does not normalize the subsystem");

  Subgroup p_in_g(g, p_sub.group());
  Subgroup k = subgroup_join(g, {h, p_in_g});
  Subgroup hp = intersect_subgroups(h, p_in_g);
  if (k.order() * hp.order() != h.order() * p_sub.order())
    fail(errc::precondition_violation,
         "product_subsystem: HP is not a subgroup (P does not normalize H)");

  Subgroup s_in_g(g, *parent.base());
  Subgroup tp = intersect_subgroups(k, s_in_g);
  auto kptr = std::make_shared<const Group>(k.group());
  Subgroup tp_in_k(kptr, tp.group());
  FusionSystem sys = fusion_from_group(kptr, tp_in_k, parent.prime());

  auto hptr = std::make_shared<const Group>(h.group());
  if (o_upper_p_subgroup(kptr, parent.prime()).elements() !=
      o_upper_p_subgroup(hptr, parent.prime()).elements())
    fail(errc::sides_disagree, "product_subsystem: O^p(HP) differs from O^p(H)");

  SubsystemHandle out;
  out.system = std::move(sys);
  out.realization = GroupRealization{g, std::move(k)};
  return out;
}

BracketResult bracket_subnormal(const FusionSystem& parent, const GroupPtr& realized_by,
                                const std::vector<SubsystemHandle>& parts) {
  if (parts.empty()) fail(errc::precondition_violation, "bracket_subnormal: no parts");
  const GroupPtr& g = realized_by;
  const int p = parent.prime();
  Subgroup s_in_g(g, *parent.base());

  BracketResult out;
  std::vector<Subgroup> realizers;
  std::vector<Subgroup> sylow_parts;
  for (const SubsystemHandle& part : parts) {
    if (!part.realization)
      fail(errc::precondition_violation, "bracket_subnormal: part lacks a group realization");
    const Subgroup& h = part.realization->realizer;
    if (!is_subnormal(g, h)) fail(errc::not_subnormal, "bracket_subnormal: part is not subnormal");
    Subgroup t = intersect_subgroups(h, s_in_g);
    if (t.elements() != part.system.base()->elements())
      fail(errc::precondition_violation,
           "bracket_subnormal: part base differs from H n S of its realization");
    realizers.push_back(h);
    sylow_parts.push_back(std::move(t));
  }

  Subgroup join = subgroup_join(g, realizers);
  Subgroup t = intersect_subgroups(join, s_in_g);
  Subgroup t_parts = subgroup_join(g, sylow_parts);
  if (!(t == t_parts))
    fail(errc::sides_disagree, "bracket_subnormal: <H_i> n S differs from <H_i n S>");

  SubnormalOutcome join_cert = subnormal_series(g, join);
  if (!join_cert.subnormal)
    fail(errc::not_subnormal, "bracket_subnormal: join is not subnormal (internal invariant)");
  out.join_series = std::move(*join_cert.series);

  auto jptr = std::make_shared<const Group>(join.group());
  for (const Subgroup& h : realizers) {
    SubnormalOutcome cert = subnormal_series(jptr, Subgroup(jptr, h.group()));
    if (!cert.subnormal)
      fail(errc::not_subnormal, "bracket_subnormal: part is not subnormal in the join");
    out.part_series.push_back(std::move(*cert.series));
  }

  FusionSystem sys = fusion_from_group(jptr, Subgroup(jptr, t.group()), p);
  out.handle.system = std::move(sys);
  out.handle.realization = GroupRealization{g, std::move(join)};
  out.sylow_intersection = std::move(t);
  return out;
}

// ---- identity verification ----

namespace {

Subgroup sylow_of(const IdentityInstance& inst) {
  if (inst.sylow) return *inst.sylow;
  return sylow_subgroup(inst.group, inst.prime);
}

FusionSystem realized_fusion(const GroupPtr& g, const Subgroup& ambient_subgroup,
                             const Subgroup& sylow_part, int p) {
  auto kptr = std::make_shared<const Group>(ambient_subgroup.group());
  return fusion_from_group(kptr, Subgroup(kptr, sylow_part.group()), p);
}

IdentityOutcome outcome(bool pass, std::string detail) { return IdentityOutcome{pass, std::move(detail)}; }

IdentityOutcome check_tgroups(const IdentityInstance& inst) {
  const GroupPtr& g = inst.group;
  const int p = inst.prime;
  const Subgroup& h1 = inst.subgroups.at(0);
  const Subgroup& h2 = inst.subgroups.at(1);
  if (!is_subnormal(g, h1) || !is_subnormal(g, h2))
    return outcome(false, "inputs are not subnormal");
  Subgroup s = sylow_of(inst);
  Subgroup join = subgroup_join(g, {h1, h2});
  Subgroup t = intersect_subgroups(join, s);
  FusionSystem lhs = realized_fusion(g, join, t, p);
  Subgroup k1 = subgroup_join(g, {h1, t});
  Subgroup k2 = subgroup_join(g, {h2, t});
  FusionSystem f1 = realized_fusion(g, k1, t, p);
  FusionSystem f2 = realized_fusion(g, k2, t, p);
  FusionSystem rhs = fusion_generate(lhs.base(), p, {f1, f2}, {}, Budget::from_env(), lhs.lattice());
  bool pass = equal_systems(lhs, rhs);
  return outcome(pass, "F_T(<H1,H2>) has " + std::to_string(lhs.size()) +
                           " morphisms, generated side has " + std::to_string(rhs.size()));
}

IdentityOutcome check_bracket_prop(const IdentityInstance& inst) {
  const GroupPtr& g = inst.group;
  const int p = inst.prime;
  const Subgroup& h1 = inst.subgroups.at(0);
  const Subgroup& h2 = inst.subgroups.at(1);
  if (!is_subnormal(g, h1) || !is_subnormal(g, h2))
    return outcome(false, "inputs are not subnormal");
  Subgroup s = sylow_of(inst);
  FusionSystem parent = fusion_from_group(g, s, p);

  SubsystemHandle e1{realized_fusion(g, h1, intersect_subgroups(h1, s), p),
                     GroupRealization{g, h1}};
  SubsystemHandle e2{realized_fusion(g, h2, intersect_subgroups(h2, s), p),
                     GroupRealization{g, h2}};
  BracketResult bracket = bracket_subnormal(parent, g, {e1, e2});

  Subgroup join = subgroup_join(g, {h1, h2});
  Subgroup t = intersect_subgroups(join, s);
  FusionSystem lhs = realized_fusion(g, join, t, p);

  if (!equal_systems(lhs, bracket.handle.system))
    return outcome(false, "direct F_T(<H1,H2>) differs from the bracket subsystem");
  if (!(bracket.sylow_intersection == t))
    return outcome(false, "bracket Sylow intersection differs from <H1,H2> n S");
  if (!is_saturated(bracket.handle.system).saturated)
    return outcome(false, "bracket subsystem is not saturated");
  if (!system_contains(bracket.handle.system, e1.system) ||
      !system_contains(bracket.handle.system, e2.system))
    return outcome(false, "bracket subsystem does not contain a part");
  return outcome(true, "both sides have " + std::to_string(lhs.size()) + " morphisms over T of order " +
                           std::to_string(t.order()));
}

IdentityOutcome check_hyperfocal(const IdentityInstance& inst) {
  Subgroup s = sylow_of(inst);
  FusionSystem f = fusion_from_group(inst.group, s, inst.prime);
  try {
    HyperfocalResult res = hyperfocal(f, inst.group);
    if (res.o_p_system.base()->elements() != res.group_side.elements())
      return outcome(false, "carried O^p system has the wrong base");
    return outcome(true, "hyp(F) = S n O^p(G) has order " + std::to_string(res.group_side.order()));
  } catch (const error& e) {
    if (e.code() == errc::sides_disagree) return outcome(false, e.what());
    throw;
  }
}

IdentityOutcome check_remark_product(const IdentityInstance& inst) {
  const GroupPtr& g = inst.group;
  const int p = inst.prime;
  const Subgroup& h = inst.subgroups.at(0);
  if (!inst.intermediate || !inst.p_sub)
    fail(errc::precondition_violation, "remark_product: missing intermediate subsystem or P");
  const Subgroup& mid = *inst.intermediate;
  if (!mid.contains(h)) fail(errc::precondition_violation, "remark_product: H must lie in G'");
  if (!is_subnormal(g, mid) || !is_subnormal(g, h))
    return outcome(false, "chain members are not subnormal");
  Subgroup s = sylow_of(inst);
  Subgroup s_mid = intersect_subgroups(mid, s);
  Subgroup t = intersect_subgroups(h, s);

  FusionSystem parent_f = fusion_from_group(g, s, p);
  SubsystemHandle e_f{realized_fusion(g, h, t, p), GroupRealization{g, h}};
  SubsystemHandle prod_f = product_subsystem(parent_f, g, e_f, *inst.p_sub);

  auto midptr = std::make_shared<const Group>(mid.group());
  Subgroup s_in_mid(midptr, s_mid.group());
  FusionSystem parent_g = fusion_from_group(midptr, s_in_mid, p);
  SubsystemHandle e_g{realized_fusion(g, h, t, p),
                      GroupRealization{midptr, Subgroup(midptr, h.group())}};
  Subgroup p_in_mid(midptr, inst.p_sub->group());
  SubsystemHandle prod_g = product_subsystem(parent_g, midptr, e_g, p_in_mid);

  bool pass = equal_systems(prod_f.system, prod_g.system);
  return outcome(pass, "(EP) over TP of order " +
                           std::to_string(prod_f.system.base()->order()) +
                           (pass ? " agrees across ambients" : " differs across ambients"));
}

IdentityOutcome check_assoc(const IdentityInstance& inst) {
  const GroupPtr& g = inst.group;
  const int p = inst.prime;
  const std::size_t n = inst.subgroups.size();
  Subgroup s = sylow_of(inst);
  FusionSystem parent = fusion_from_group(g, s, p);
  std::vector<SubsystemHandle> parts;
  for (const Subgroup& h : inst.subgroups) {
    if (!is_subnormal(g, h)) return outcome(false, "part is not subnormal");
    parts.push_back(SubsystemHandle{realized_fusion(g, h, intersect_subgroups(h, s), p),
                                    GroupRealization{g, h}});
  }
  BracketResult flat = bracket_subnormal(parent, g, parts);

  // Every cut pattern 0 = i_0 < i_1 < ... < i_k = n over contiguous blocks.
  for (std::uint32_t cuts = 0; n >= 2 && cuts < (1u << (n - 1)); ++cuts) {
    std::vector<SubsystemHandle> blocks;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool cut_here = (i + 1 == n) || (cuts & (1u << i));
      if (!cut_here) continue;
      std::vector<SubsystemHandle> block(parts.begin() + static_cast<std::ptrdiff_t>(start),
                                         parts.begin() + static_cast<std::ptrdiff_t>(i + 1));
      blocks.push_back(bracket_subnormal(parent, g, block).handle);
      start = i + 1;
    }
    BracketResult nested = bracket_subnormal(parent, g, blocks);
    if (!equal_systems(nested.handle.system, flat.handle.system))
      return outcome(false, "cut pattern " + std::to_string(cuts) + " gives a different bracket");
  }
  return outcome(true, "all cut patterns agree (bracket over T of order " +
                           std::to_string(flat.sylow_intersection.order()) + ")");
}

} // namespace

IdentityOutcome verify_identity(IdentityKind kind, const IdentityInstance& instance) {
  switch (kind) {
    case IdentityKind::tgroups: return check_tgroups(instance);
    case IdentityKind::bracket_prop: return check_bracket_prop(instance);
    case IdentityKind::hyperfocal_eq: return check_hyperfocal(instance);
    case IdentityKind::remark_product: return check_remark_product(instance);
    case IdentityKind::assoc: return check_assoc(instance);
  }
  fail(errc::precondition_violation, "verify_identity: unknown kind");
}

FusionSystem embed_system(const FusionSystem& sys, const GroupPtr& base, int prime,
                          LatticePtr lattice) {
  LatticePtr lat = lattice_for(base, std::move(lattice), Budget::from_env());
  std::vector<Morphism> morphisms;
  morphisms.reserve(sys.size());
  for (const Morphism& m : sys.morphisms())
    morphisms.push_back(embed_morphism(m, *sys.lattice(), *lat));
  std::sort(morphisms.begin(), morphisms.end());
  return FusionSystem(base, prime, std::move(lat), std::move(morphisms));
}

} // namespace subkit
