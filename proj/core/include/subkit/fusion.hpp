#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subkit/group.hpp"
#include "subkit/subnormal.hpp"

namespace subkit {

/// The subgroup lattice of a p-group S with |S| <= 64, with subgroups
/// represented as bitmasks over the canonical element order of S. All
/// fusion-system arithmetic runs in this index space.
class SubgroupLattice {
public:
  SubgroupLattice(GroupPtr base, const Budget& budget = Budget::from_env());

  const GroupPtr& base() const { return base_; }
  std::size_t size() const { return masks_.size(); }
  std::uint64_t mask(std::uint32_t id) const { return masks_[id]; }
  std::uint32_t id_of(std::uint64_t mask) const; // throws if absent
  std::uint32_t whole_id() const { return whole_; }
  std::uint32_t trivial_id() const { return 0; }
  int order_of(std::uint32_t id) const;
  /// Member element indices of a subgroup, ascending.
  const std::vector<std::uint8_t>& members(std::uint32_t id) const { return members_[id]; }
  /// Ids of all subgroups contained in `id` (including itself).
  const std::vector<std::uint32_t>& below(std::uint32_t id) const { return below_[id]; }

  const Perm& element(std::uint8_t idx) const { return base_->elements()[idx]; }
  std::uint8_t mult(std::uint8_t a, std::uint8_t b) const { return mult_[a][b]; }
  std::uint8_t inverse(std::uint8_t a) const { return inv_[a]; }
  /// Index of x^g for g in S.
  std::uint8_t conj(std::uint8_t x, std::uint8_t g) const { return conj_[g][x]; }
  std::uint64_t conj_mask(std::uint64_t m, std::uint8_t g) const;
  /// Position of element idx within members(id), or npos.
  std::uint8_t pos_in(std::uint32_t id, std::uint8_t idx) const { return pos_[id][idx]; }
  static constexpr std::uint8_t npos = 255;

  std::uint64_t normalizer_mask(std::uint32_t id) const;
  std::uint64_t centralizer_mask(std::uint32_t id) const;

  Subgroup subgroup_from_mask(std::uint64_t mask) const; // ambient = base

private:
  GroupPtr base_;
  std::uint32_t whole_ = 0;
  std::vector<std::uint64_t> masks_; // canonical order: (popcount, mask)
  std::vector<std::vector<std::uint8_t>> members_;
  std::vector<std::vector<std::uint32_t>> below_;
  std::vector<std::vector<std::uint8_t>> pos_;
  std::vector<std::vector<std::uint8_t>> mult_;
  std::vector<std::vector<std::uint8_t>> conj_;
  std::vector<std::uint8_t> inv_;
};

using LatticePtr = std::shared_ptr<const SubgroupLattice>;

/// An injective homomorphism from a subgroup of S into S, stored as the
/// image indices aligned with the source's ascending member list. Hom-sets
/// Hom(P,Q) are the morphisms with source P and image inside Q.
struct Morphism {
  std::uint32_t src = 0;
  std::vector<std::uint8_t> img;

  auto operator<=>(const Morphism&) const = default;
};

struct MorphismHash {
  std::size_t operator()(const Morphism& m) const;
};

/// An explicit map between subgroups of the base, used to seed generation.
struct MorphismSpec {
  std::vector<Perm> source; // must form a subgroup of the base
  std::vector<Perm> images; // aligned with `source`
};

/// A fusion system over a p-group S: a set of injective homomorphisms
/// between subgroups of S closed under composition, restriction, inclusion
/// and inversion of isomorphisms, containing all S-conjugation maps.
class FusionSystem {
public:
  FusionSystem() = default;
  FusionSystem(GroupPtr base, int prime, LatticePtr lattice, std::vector<Morphism> sorted_morphisms);

  const GroupPtr& base() const { return base_; }
  int prime() const { return prime_; }
  const LatticePtr& lattice() const { return lat_; }
  const std::vector<Morphism>& morphisms() const { return morphisms_; }
  std::size_t size() const { return morphisms_.size(); }

  bool contains(const Morphism& m) const;
  /// Morphisms with source `p` (contiguous range of the sorted store).
  std::span<const Morphism> with_source(std::uint32_t p) const;
  /// Materialized hom-set Hom(P, Q).
  std::vector<Morphism> hom_set(std::uint32_t p, std::uint32_t q) const;
  /// Aut_F(P) as a permutation group on the member list of P.
  Group aut_group(std::uint32_t p) const;
  /// F-conjugacy class ids (union-find over isomorphisms), one per subgroup.
  const std::vector<std::uint32_t>& class_of() const { return class_of_; }

private:
  GroupPtr base_;
  int prime_ = 2;
  LatticePtr lat_;
  std::vector<Morphism> morphisms_;
  std::vector<std::size_t> src_offset_; // by-source ranges in morphisms_
  std::vector<std::uint32_t> class_of_;
};

bool same_base(const FusionSystem& a, const FusionSystem& b);
bool equal_systems(const FusionSystem& a, const FusionSystem& b);
/// True if every morphism of `inner` (over T <= base of `outer`) is in `outer`.
bool system_contains(const FusionSystem& outer, const FusionSystem& inner);
/// Hom-set-wise intersection of two systems over the same base.
FusionSystem intersect_systems(const FusionSystem& a, const FusionSystem& b);

/// F_S(G): all restrictions of conjugation maps c_g between subgroups of S.
FusionSystem fusion_from_group(const GroupPtr& g, const Subgroup& s, int prime,
                               const Budget& budget = Budget::from_env(),
                               LatticePtr lattice = nullptr);

/// Least fusion system over `base` containing all seeds and F_S(S).
FusionSystem fusion_generate(const GroupPtr& base, int prime,
                             const std::vector<FusionSystem>& seed_systems,
                             const std::vector<MorphismSpec>& seed_maps = {},
                             const Budget& budget = Budget::from_env(),
                             LatticePtr lattice = nullptr);

struct SaturationFailure {
  enum class Kind { sylow_axiom, extension_axiom };
  Kind kind = Kind::sylow_axiom;
  std::uint32_t subgroup = 0;         // fully normalized class representative
  std::optional<Morphism> morphism;   // offending isomorphism
  std::uint32_t extension_domain = 0; // N_phi for the extension axiom
  std::string detail;
};

struct SaturationReport {
  bool saturated = false;
  std::optional<SaturationFailure> failure;
};

/// Checks the Sylow axiom (Aut_S(P) Sylow in Aut_F(P)) and the extension
/// axiom on a fully normalized representative of every F-conjugacy class.
SaturationReport is_saturated(const FusionSystem& f);

/// {P <= S : all F-conjugates Q have C_S(Q) = Z(Q), and O_p(Out_F(P)) = 1}.
std::vector<Subgroup> centric_radicals(const FusionSystem& f);

struct HyperfocalResult {
  Subgroup group_side;     // S n O^p(G)
  Subgroup fusion_side;    // hyp(F) = <[P, O^p(Aut_F(P))] : P <= S>
  FusionSystem o_p_system; // F_{S n O^p(G)}(O^p(G))
};

/// Both sides of the hyperfocal identity for f = F_S(G) realized by G;
/// throws sides_disagree if they differ (they never do on valid input).
HyperfocalResult hyperfocal(const FusionSystem& f, const GroupPtr& realized_by);

/// Group-level witness that a subsystem is (sub)normal-realized.
struct GroupRealization {
  GroupPtr ambient;  // G
  Subgroup realizer; // H <= G with F_{H n S}(H) = system
};

struct SubsystemHandle {
  FusionSystem system; // over T <= S
  std::optional<GroupRealization> realization;
};

/// (E^a over T^a, N_S(E)). The stabilizer is computed over N_S(T).
std::pair<SubsystemHandle, Subgroup> subsystem_transport(const FusionSystem& parent,
                                                         const SubsystemHandle& e, const Perm& a);

/// (EP)_F realized as F_{TP}(HP). Requires the realized product HP to be a
/// subgroup; verifies O^p(HP) = O^p(H) at the group level.
SubsystemHandle product_subsystem(const FusionSystem& parent, const GroupPtr& realized_by,
                                  const SubsystemHandle& e, const Subgroup& p_sub);

struct BracketResult {
  SubsystemHandle handle;                  // over T = <H_1,...,H_n> n S
  SubnormalSeries join_series;             // certificate for the join in G
  std::vector<SubnormalSeries> part_series; // each H_i subnormal in the join
  Subgroup sylow_intersection;             // T, equal to <T_1,...,T_n>
};

/// Smallest saturated subsystem in which all parts are subnormal, realized
/// as F_T(<H_1,...,H_n>) through the parts' group realizations.
BracketResult bracket_subnormal(const FusionSystem& parent, const GroupPtr& realized_by,
                                const std::vector<SubsystemHandle>& parts);

enum class IdentityKind { tgroups, bracket_prop, hyperfocal_eq, remark_product, assoc };

struct IdentityInstance {
  GroupPtr group;
  int prime = 2;
  std::vector<Subgroup> subgroups;      // H_1..H_n where applicable
  std::optional<Subgroup> intermediate; // ambient chain member for remark_product
  std::optional<Subgroup> p_sub;        // P for remark_product
  std::optional<Subgroup> sylow;        // cached Sylow subgroup (recomputed if absent)
};

struct IdentityOutcome {
  bool pass = false;
  std::string detail; // human-readable description of the comparison
};

/// Computes both sides of the named identity independently and compares
/// them hom-set by hom-set. Failures are reported, not thrown.
IdentityOutcome verify_identity(IdentityKind kind, const IdentityInstance& instance);

// Shared helpers (also used by the locality layer and the harness).
Morphism embed_morphism(const Morphism& m, const SubgroupLattice& from, const SubgroupLattice& into);
FusionSystem embed_system(const FusionSystem& sys, const GroupPtr& base, int prime,
                          LatticePtr lattice);
std::uint64_t stabilizer_mask(const FusionSystem& parent, const SubsystemHandle& e);

} // namespace subkit
