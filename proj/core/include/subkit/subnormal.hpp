#pragma once

#include <optional>
#include <vector>

#include "subkit/group.hpp"

namespace subkit {

using Word = std::vector<Perm>;

/// Canonical subnormal series: links[0] = H, links.back() = ambient, each
/// link normal in its successor and equal to the normal closure of H there.
struct SubnormalSeries {
  GroupPtr ambient;
  std::vector<Subgroup> links;
};

struct SubnormalOutcome {
  bool subnormal = false;
  std::optional<SubnormalSeries> series; // present iff subnormal
  Subgroup fixed_point;                  // terminal iterated normal closure
};

struct WielandtJoin {
  Subgroup join;
  SubnormalSeries series; // certificate for the join
  bool identity_holds = false;
  Subgroup lhs; // <H1,H2> n S
  Subgroup rhs; // <H1 n S, H2 n S>
};

/// Witness for the splitting lemmas: g = a*b with S_g = S_{(a,b)}.
struct SplitWitness {
  Perm a;
  Perm b;
  Subgroup restriction; // the common S_g = S_{(a,b)}
};

struct CharacteristicSubgroups {
  Subgroup o_p;          // largest normal p-subgroup
  Subgroup o_upper_p;    // smallest normal subgroup with p-group quotient
  Subgroup fitting;      // product of all O_q
  std::vector<Subgroup> components; // subnormal quasisimple subgroups
  Subgroup f_star;       // fitting * product of components
  bool is_char_p = false; // C_G(O_p) <= O_p
};

/// <H^G>, the smallest normal subgroup of `ambient` containing h.
Subgroup normal_closure(const GroupPtr& ambient, const Subgroup& h);

/// Iterates K_0 = G, K_{i+1} = <H^{K_i}> to a fixed point. Subnormal inputs
/// get the canonical series; others get the terminal fixed point as witness.
SubnormalOutcome subnormal_series(const GroupPtr& ambient, const Subgroup& h);

/// Join of two subnormal subgroups with series certificate and the
/// Sylow-intersection identity verdict (<H1,H2> n S = <H1 n S, H2 n S>).
WielandtJoin wielandt_join(const GroupPtr& ambient, const Subgroup& s, const Subgroup& h1,
                           const Subgroup& h2);

/// S_w = {x in S : every staged conjugate x^{f1...fi} lies in S}.
Subgroup s_restriction(const GroupPtr& ambient, const Subgroup& s, const Word& w);

/// Frattini splitting for N normal: g = a*f with a in N, f in N_G(S n N).
SplitWitness frattini_split(const GroupPtr& ambient, const Subgroup& s, const Subgroup& n,
                            const Perm& g);

/// g in MN with M, N normal: g = a*b, a in M, b in N, S_g = S_{(a,b)}.
SplitWitness normal_product_split(const GroupPtr& ambient, const Subgroup& s, const Subgroup& m,
                                  const Subgroup& n, const Perm& g);

/// g in NH with N normal, H subnormal, S <= N_G(H).
SplitWitness normal_subnormal_split(const GroupPtr& ambient, const Subgroup& s, const Subgroup& n,
                                    const Subgroup& h, const Perm& g);

CharacteristicSubgroups characteristic_subgroups(const GroupPtr& g, int p);

/// C_G(O_p(G)) <= O_p(G), without computing the full record.
bool is_characteristic_p(const GroupPtr& g, int p);

/// Largest normal p-subgroup (intersection of the Sylow p-subgroups).
Subgroup o_p_subgroup(const GroupPtr& g, int p);

/// Smallest normal subgroup with p-group quotient (closure of p'-elements).
Subgroup o_upper_p_subgroup(const GroupPtr& g, int p);

/// Every subnormal subgroup, canonically ordered: the set of normal
/// subgroups closed under "normal subgroup of a member".
std::vector<Subgroup> all_subnormal_subgroups(const GroupPtr& g,
                                              const Budget& budget = Budget::from_env());

bool is_subnormal(const GroupPtr& ambient, const Subgroup& h);

} // namespace subkit
