#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "subkit/fusion.hpp"
#include "subkit/group.hpp"

namespace subkit {

using WordIds = std::vector<std::uint32_t>;

struct WordIdsHash {
  std::size_t operator()(const WordIds& w) const;
};

/// An extensional partial-group table: elements, an involutory inversion,
/// and a product defined on a stored set of words. Group-induced localities
/// materialize into this form up to a word budget for axiom checking.
class PartialGroupTable {
public:
  PartialGroupTable(std::size_t n, std::uint32_t identity, std::vector<std::uint32_t> inverse,
                    std::vector<std::string> labels, int complete_to_length);

  std::size_t size() const { return inverse_.size(); }
  std::uint32_t identity() const { return identity_; }
  std::uint32_t inverse(std::uint32_t x) const { return inverse_[x]; }
  const std::string& label(std::uint32_t x) const { return labels_[x]; }
  /// Lengths up to which the stored domain is known to be complete.
  int complete_to_length() const { return complete_; }

  void define(WordIds w, std::uint32_t product);
  bool in_domain(const WordIds& w) const;
  std::optional<std::uint32_t> product(const WordIds& w) const;
  const std::unordered_map<WordIds, std::uint32_t, WordIdsHash>& entries() const {
    return products_;
  }

private:
  std::uint32_t identity_;
  std::vector<std::uint32_t> inverse_;
  std::vector<std::string> labels_;
  int complete_;
  std::unordered_map<WordIds, std::uint32_t, WordIdsHash> products_;
};

struct PartialAxiomReport {
  bool ok = false;
  std::string axiom;   // first failing axiom, empty when ok
  WordIds witness;
  std::string detail;
};

/// Exhaustively validates the partial-group axioms on the stored domain:
/// length-one totality, prefix/suffix closure, substitution
/// multiplicativity, involutory inversion and inversion cancellation
/// (the latter restricted to words that stay within the stored bound).
PartialAxiomReport check_partial_group(const PartialGroupTable& t);

/// A locality induced by a finite group: element set {g : S_g in Delta},
/// word domain {w : |w| <= bound and S_w in Delta}, group multiplication.
class Locality {
public:
  Locality(GroupPtr group, Subgroup sylow, int prime, std::vector<Subgroup> delta, int word_bound,
           const Budget& budget);

  const GroupPtr& group() const { return group_; }
  const Subgroup& sylow() const { return sylow_; }
  int prime() const { return prime_; }
  int word_bound() const { return word_bound_; }
  const std::vector<Subgroup>& delta() const { return delta_; }
  const std::vector<Perm>& elements() const { return elements_; }
  const LatticePtr& lattice() const { return lat_; }

  std::optional<std::uint32_t> index_of(const Perm& x) const;
  const Perm& element(std::uint32_t i) const { return elements_[i]; }
  std::uint32_t inverse_id(std::uint32_t i) const { return inverse_ids_[i]; }

  bool delta_contains_mask(std::uint64_t mask) const;
  /// Image S_w^{Pi(w)} as a mask over the base, computed incrementally.
  std::uint64_t image_mask(const WordIds& w) const;
  std::uint64_t s_f_mask(std::uint32_t f) const { return sf_mask_[f]; }
  std::uint8_t conj_in_s(std::uint8_t x, std::uint32_t f) const { return s_conj_[f][x]; }
  bool in_domain(const WordIds& w) const;
  Perm word_product(const WordIds& w) const;
  /// S_w as a subgroup of S (elementwise staged-conjugation test).
  Subgroup s_w_subgroup(const WordIds& w) const;

  /// Extensional table of all in-domain words up to the word budget.
  PartialGroupTable materialize(std::size_t max_words) const;

private:
  GroupPtr group_;
  Subgroup sylow_;
  int prime_;
  int word_bound_;
  std::vector<Subgroup> delta_;
  std::vector<Perm> elements_;
  LatticePtr lat_;
  std::vector<std::uint64_t> delta_masks_; // sorted
  std::vector<std::uint64_t> sf_mask_;
  std::vector<std::vector<std::uint8_t>> s_conj_; // per element: S-index -> S-index or npos
  std::vector<std::uint32_t> inverse_ids_;
  std::unordered_map<Perm, std::uint32_t, PermHash> index_;
};

/// Builds the group-induced locality; validates S Sylow and the Delta
/// closure requirements (nonempty, overgroup-closed, F_S(G)-conjugation
/// closed). Throws invalid_delta otherwise.
Locality locality_from_group(const GroupPtr& g, const Subgroup& s, int prime,
                             std::vector<Subgroup> delta, int word_bound = 4,
                             const Budget& budget = Budget::from_env());

/// Convenience: Delta = all subgroups of S.
Locality locality_all_subgroups(const GroupPtr& g, const Subgroup& s, int prime,
                                int word_bound = 4, const Budget& budget = Budget::from_env());

/// (S_w, membership flag); verifies S_w <= S_{Pi(w)} and the staged-image
/// identity for in-domain words.
std::pair<Subgroup, bool> word_domain(const Locality& l, const Word& w);

enum class PartialVerdict { not_subgroup, partial_subgroup, partial_normal, partial_subnormal };

struct PartialNormalityReport {
  PartialVerdict verdict = PartialVerdict::not_subgroup;
  std::string detail;
  /// Descending chain L = K_0 > K_1 > ... > N for subnormal verdicts.
  std::vector<std::vector<Perm>> chain;
};

PartialNormalityReport partial_normality(const Locality& l, const std::vector<Perm>& n);

struct SplitFailure {
  Perm g;
  std::string reason;
};

struct LocalityFusionSplit {
  FusionSystem fusion;           // F_S(L)
  bool all_split = false;        // Frattini splitting succeeded for every g
  std::vector<SplitFailure> failures;
  std::vector<std::pair<Perm, Perm>> witnesses; // per locality element, (n, h)
  bool generation_identity = false; // F_S(L) = <F_S(NS), F_S(N_L(T))>
  std::size_t lhs_size = 0;
  std::size_t rhs_size = 0;
};

LocalityFusionSplit locality_fusion_and_split(const Locality& l, const std::vector<Perm>& n);

struct PartialSetOps {
  std::vector<Perm> product;     // XY
  std::vector<Perm> normalizer;  // N_L(X)
  std::vector<Perm> centralizer; // C_L(X)
};

PartialSetOps partial_set_ops(const Locality& l, const std::vector<Perm>& x,
                              const std::vector<Perm>& y);

struct LinkingReport {
  bool linking = false;
  std::string failing_clause; // empty when linking
};

/// Saturation of F_S(L), F_S(L)^{cr} inside Delta, and characteristic-p
/// normalizers for every member of Delta.
LinkingReport is_linking_locality(const Locality& l);

struct WordSweepReport {
  bool ok = false;
  std::string detail;
  std::size_t states = 0;        // distinct (image, product) states reached
  std::size_t sampled_words = 0; // literal word_domain cross-checks
  int bound = 0;
};

/// Exhaustive verification of the bounded word domain: S_w, Pi(w) and the
/// membership flag depend only on the state (S_w^{Pi(w)}, Pi(w)), so one
/// representative word per reachable state covers every word of length
/// <= bound. Each state is cross-checked against the literal element-wise
/// S_w computation, the E:Sw membership rule and the S_w <= S_{Pi(w)} law.
WordSweepReport sweep_word_states(const Locality& l, std::size_t sample_words = 500);

struct LocalityInvariantReport {
  bool ok = false;
  std::string detail; // first violated invariant
};

/// Structural invariants: S maximal among p-subgroups of the element set,
/// Delta closures, conjugation maps injective homomorphisms, N_L(P) a
/// subgroup for every P in Delta.
LocalityInvariantReport verify_locality_invariants(const Locality& l);

} // namespace subkit
