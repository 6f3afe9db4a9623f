#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace subkit {

/// A permutation of {0, ..., degree-1} stored as its image array.
/// Composition is left-to-right: (a.then(b))(x) = b(a(x)), matching the
/// exponent convention x^(ab) = (x^a)^b used throughout the library.
class Perm {
public:
  Perm() = default;

  static Perm identity(int degree);
  /// Validates that `images` is a bijection; throws malformed_permutation.
  static Perm from_images(std::vector<std::uint8_t> images);
  static Perm from_images(const std::vector<int>& images);
  /// Builds a product of disjoint cycles, e.g. {{0,1,2},{3,4}}.
  static Perm from_cycles(int degree, const std::vector<std::vector<int>>& cycles);

  int degree() const { return static_cast<int>(img_.size()); }
  int operator()(int point) const { return img_[static_cast<std::size_t>(point)]; }
  const std::vector<std::uint8_t>& images() const { return img_; }

  Perm then(const Perm& other) const; // this first, then other
  Perm inverse() const;
  /// g^{-1} * this * g.
  Perm conjugated_by(const Perm& g) const;
  bool is_identity() const;
  int order() const;

  auto operator<=>(const Perm&) const = default;

  /// Cycle notation, e.g. "(0 1 2)(3 4)"; "()" for the identity.
  std::string to_cycle_string() const;

private:
  std::vector<std::uint8_t> img_;
};

struct PermHash {
  std::size_t operator()(const Perm& p) const;
};

std::ostream& operator<<(std::ostream& os, const Perm& p);

} // namespace subkit
