#include "subkit/perm.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

#include "subkit/error.hpp"

namespace subkit {

Perm Perm::identity(int degree) {
  Perm p;
  p.img_.resize(static_cast<std::size_t>(degree));
  std::iota(p.img_.begin(), p.img_.end(), std::uint8_t{0});
  return p;
}

Perm Perm::from_images(std::vector<std::uint8_t> images) {
  const std::size_t n = images.size();
  if (n > 255)
    fail(errc::malformed_permutation, "degree " + std::to_string(n) + " exceeds 255");
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (images[i] >= n || seen[images[i]])
      fail(errc::malformed_permutation,
           "images[" + std::to_string(i) + "]=" + std::to_string(images[i]) +
               " is not part of a bijection of degree " + std::to_string(n));
    seen[images[i]] = true;
  }
  Perm p;
  p.img_ = std::move(images);
  return p;
}

Perm Perm::from_images(const std::vector<int>& images) {
  std::vector<std::uint8_t> img;
  img.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i] < 0 || images[i] > 255)
      fail(errc::malformed_permutation,
           "images[" + std::to_string(i) + "]=" + std::to_string(images[i]) + " out of range");
    img.push_back(static_cast<std::uint8_t>(images[i]));
  }
  return from_images(std::move(img));
}

Perm Perm::from_cycles(int degree, const std::vector<std::vector<int>>& cycles) {
  std::vector<int> img(static_cast<std::size_t>(degree));
  std::iota(img.begin(), img.end(), 0);
  for (const auto& cyc : cycles) {
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      int from = cyc[i];
      int to = cyc[(i + 1) % cyc.size()];
      if (from < 0 || from >= degree || to < 0 || to >= degree)
        fail(errc::malformed_permutation, "cycle point out of range");
      img[static_cast<std::size_t>(from)] = to;
    }
  }
  return from_images(img);
}

Perm Perm::then(const Perm& other) const {
  Perm r;
  r.img_.resize(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i)
    r.img_[i] = other.img_[img_[i]];
  return r;
}

Perm Perm::inverse() const {
  Perm r;
  r.img_.resize(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i)
    r.img_[img_[i]] = static_cast<std::uint8_t>(i);
  return r;
}

Perm Perm::conjugated_by(const Perm& g) const {
  // x^g maps g(i) to g(x(i)).
  Perm r;
  r.img_.resize(img_.size());
  for (std::size_t i = 0; i < img_.size(); ++i)
    r.img_[g.img_[i]] = g.img_[img_[i]];
  return r;
}

bool Perm::is_identity() const {
  for (std::size_t i = 0; i < img_.size(); ++i)
    if (img_[i] != i) return false;
  return true;
}

int Perm::order() const {
  int ord = 1;
  Perm acc = *this;
  while (!acc.is_identity()) {
    acc = acc.then(*this);
    ++ord;
  }
  return ord;
}

std::string Perm::to_cycle_string() const {
  std::ostringstream os;
  std::vector<bool> seen(img_.size(), false);
  bool any = false;
  for (std::size_t i = 0; i < img_.size(); ++i) {
    if (seen[i] || img_[i] == i) continue;
    any = true;
    os << '(';
    std::size_t j = i;
    bool first = true;
    do {
      if (!first) os << ' ';
      first = false;
      os << j;
      seen[j] = true;
      j = img_[j];
    } while (j != i);
    os << ')';
  }
  if (!any) return "()";
  return os.str();
}

std::size_t PermHash::operator()(const Perm& p) const {
  std::size_t h = 1469598103934665603ull;
  for (std::uint8_t b : p.images()) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::ostream& operator<<(std::ostream& os, const Perm& p) { return os << p.to_cycle_string(); }

} // namespace subkit
