#pragma once

#include <memory>
#include <random>
#include <vector>

#include "subkit/group.hpp"

// Shared generators for the small groups exercised across the test suites.
namespace testutil {

using subkit::Group;
using subkit::GroupPtr;
using subkit::Perm;

inline GroupPtr make(int degree, const std::vector<std::vector<std::vector<int>>>& cycles,
                     std::string name) {
  std::vector<Perm> gens;
  for (const auto& c : cycles) gens.push_back(Perm::from_cycles(degree, c));
  return std::make_shared<const Group>(
      Group::from_generators(degree, std::move(gens), std::move(name)));
}

inline GroupPtr s4() { return make(4, {{{0, 1, 2, 3}}, {{0, 1}}}, "S4"); }
inline GroupPtr a4() { return make(4, {{{0, 1}, {2, 3}}, {{0, 1, 2}}}, "A4"); }
inline GroupPtr d8() { return make(4, {{{0, 1, 2, 3}}, {{0, 2}}}, "D8"); }
inline GroupPtr s5() { return make(5, {{{0, 1, 2, 3, 4}}, {{0, 1}}}, "S5"); }
inline GroupPtr a5() { return make(5, {{{0, 1, 2}}, {{0, 1, 2, 3, 4}}}, "A5"); }
inline GroupPtr s3() { return make(3, {{{0, 1, 2}}, {{0, 1}}}, "S3"); }

inline GroupPtr a4xa4() {
  return make(8, {{{0, 1}, {2, 3}}, {{0, 1, 2}}, {{4, 5}, {6, 7}}, {{4, 5, 6}}}, "A4xA4");
}

// Deterministic sampler used by the property-style tests.
inline std::mt19937 rng(unsigned seed = 20240811u) { return std::mt19937(seed); }

inline const Perm& pick(std::mt19937& r, const std::vector<Perm>& pool) {
  std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
  return pool[d(r)];
}

} // namespace testutil
