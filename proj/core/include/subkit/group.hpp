#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subkit/budget.hpp"
#include "subkit/perm.hpp"

namespace subkit {

/// A finite permutation group with its full element set enumerated in
/// canonical (lexicographic image-array) order. Immutable after construction.
class Group {
public:
  Group() = default;

  int degree() const { return degree_; }
  const std::string& name() const { return name_; }
  std::size_t order() const { return elements_.size(); }
  const std::vector<Perm>& elements() const { return elements_; }
  const std::vector<Perm>& generators() const { return generators_; }

  bool contains(const Perm& p) const;
  /// Position of p in the canonical element order, if a member.
  std::optional<std::size_t> element_index(const Perm& p) const;
  const Perm& identity() const;
  bool is_abelian() const;
  /// True if every element order is a power of p.
  bool is_p_group(int p) const;

  /// Closure of `gens`; the canonical constructor. Deterministic.
  static Group from_generators(int degree, std::vector<Perm> gens, std::string name = "",
                               const Budget& budget = Budget::from_env());
  /// Wraps an already-closed, sorted element set (trusted; asserts in debug).
  static Group from_sorted_elements(int degree, std::vector<Perm> elements,
                                    std::vector<Perm> gens, std::string name = "");

private:
  int degree_ = 0;
  std::string name_;
  std::vector<Perm> generators_;
  std::vector<Perm> elements_; // sorted
};

using GroupPtr = std::shared_ptr<const Group>;

/// A subgroup tied to an ambient group. Compared by element-set equality.
class Subgroup {
public:
  Subgroup() = default;
  /// Validates containment in the ambient group; throws ambient_mismatch.
  Subgroup(GroupPtr ambient, Group group);

  static Subgroup trivial(GroupPtr ambient);
  static Subgroup whole(GroupPtr ambient);
  static Subgroup generated(GroupPtr ambient, std::vector<Perm> gens, std::string name = "");

  const GroupPtr& ambient() const { return ambient_; }
  const Group& group() const { return group_; }
  std::size_t order() const { return group_.order(); }
  const std::vector<Perm>& elements() const { return group_.elements(); }
  bool contains(const Perm& p) const { return group_.contains(p); }
  bool contains(const Subgroup& other) const;

  bool operator==(const Subgroup& other) const;

private:
  GroupPtr ambient_;
  Group group_;
};

// ---- group_core operations ----

/// Group generated by `gens`, fully enumerated, deterministic across runs.
Group group_from_generators(int degree, const std::vector<Perm>& gens, std::string name = "",
                            const Budget& budget = Budget::from_env());

/// <union of parts> as a subgroup of `ambient`.
Subgroup subgroup_join(const GroupPtr& ambient, std::span<const Subgroup> parts);
Subgroup subgroup_join(const GroupPtr& ambient, std::initializer_list<Subgroup> parts);

/// A Sylow p-subgroup; deterministic (lexicographically least element set
/// over the conjugate orbit). Trivial subgroup when p does not divide |G|.
Subgroup sylow_subgroup(const GroupPtr& g, int p);

/// (N_ambient(h), C_ambient(h)) by exhaustive membership test.
std::pair<Subgroup, Subgroup> normalizer_centralizer(const GroupPtr& ambient, const Subgroup& h);

/// All subgroups of the p-group `s`, canonically ordered (by order, then
/// lexicographic element set). Throws budget_exceeded above the lattice cap.
std::vector<Subgroup> enumerate_subgroups(const GroupPtr& s,
                                          const Budget& budget = Budget::from_env());

/// All subgroups of an arbitrary small group (same ordering and budget cap).
std::vector<Subgroup> all_subgroups(const GroupPtr& g, const Budget& budget = Budget::from_env());

/// All normal subgroups, enumerated by closing conjugacy-class unions.
std::vector<Subgroup> normal_subgroups(const GroupPtr& g,
                                       const Budget& budget = Budget::from_env());

// ---- helpers shared across modules ----

std::vector<std::vector<Perm>> conjugacy_classes(const Group& g);
Subgroup intersect_subgroups(const Subgroup& a, const Subgroup& b);
Subgroup conjugate_subgroup(const Subgroup& h, const Perm& g);
bool is_normal_in_ambient(const Subgroup& h);
bool normalizes(const Perm& g, const Subgroup& h);
Subgroup centralizer_of_set(const GroupPtr& ambient, std::span<const Perm> xs);

/// The quotient g/n as a permutation group acting on right cosets of n.
Group quotient_permutation_group(const Group& g, const Group& n);

/// p-part of n (largest power of p dividing n).
std::size_t p_part(std::size_t n, int p);
bool is_prime(int p);
std::vector<int> prime_divisors(std::size_t n);

} // namespace subkit
