#pragma once

#include <cstddef>

namespace subkit {

/// Enumeration limits. Everything in this library is exact and fully
/// enumerated, so the caps below bound worst-case memory, not accuracy.
struct Budget {
  std::size_t max_elements = 100000;   // group element cap (SUBKIT_MAX_ELEMENTS)
  std::size_t max_subgroups = 20000;   // subgroup-lattice cap
  std::size_t max_morphisms = 2000000; // fusion hom-set closure cap
  std::size_t max_words = 200000;      // materialized word-domain cap

  /// Defaults, with SUBKIT_MAX_ELEMENTS applied if set.
  static Budget from_env();
};

} // namespace subkit
