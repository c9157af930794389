#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "b4nls/spectral/field.hpp"

namespace b4nls {

/// Field snapshot file: magic "B4NLS1", then little-endian u8 kind, u8 d,
/// u32 N, f64 beta and N^d complex128 coefficients in ascending lattice order
/// (k from -N/2 to N/2 - 1 per axis, row-major, last axis fastest).
inline constexpr std::array<char, 6> kSnapshotMagic{'B', '4', 'N', 'L', 'S', '1'};

namespace detail {

template <class T>
void write_le(std::ostream& os, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!is) throw PreconditionError("snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

/// Storage index of the i-th point in ascending lattice order.
inline std::size_t lattice_to_storage(const ManifoldSpec& spec, std::size_t ordinal) {
  const int n = spec.modes_per_dim();
  const auto shift = [n](int pos) { return static_cast<std::size_t>((pos + n / 2) % n); };
  if (spec.dim() == 1) return shift(static_cast<int>(ordinal));
  const int row = static_cast<int>(ordinal / n);
  const int col = static_cast<int>(ordinal % n);
  return shift(row) * static_cast<std::size_t>(n) + shift(col);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& u) {
  const auto& spec = u.spec();
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(spec.kind()));
  detail::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(spec.dim()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(spec.modes_per_dim()));
  detail::write_le<double>(os, spec.beta());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Complex c = u[detail::lattice_to_storage(spec, i)];
    detail::write_le<double>(os, c.real());
    detail::write_le<double>(os, c.imag());
  }
}

inline SpectralField read_snapshot(std::istream& is) {
  std::array<char, 6> magic{};
  is.read(magic.data(), magic.size());
  require(is && magic == kSnapshotMagic, "not a B4NLS1 snapshot");
  const auto kind = detail::read_le<std::uint8_t>(is);
  const auto d = detail::read_le<std::uint8_t>(is);
  const auto n = detail::read_le<std::uint32_t>(is);
  const auto beta = detail::read_le<double>(is);
  require(kind == static_cast<std::uint8_t>(ManifoldKind::torus), "only torus snapshots carry fields");
  const ManifoldSpec spec = make_torus(d, static_cast<int>(n), beta);
  CVector c(static_cast<Eigen::Index>(spec.size()));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double re = detail::read_le<double>(is);
    const double im = detail::read_le<double>(is);
    c[static_cast<Eigen::Index>(detail::lattice_to_storage(spec, i))] = Complex(re, im);
  }
  return SpectralField(spec, std::move(c));
}

inline void write_snapshot(const std::filesystem::path& path, const SpectralField& u) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "cannot open " + path.string() + " for writing");
  write_snapshot(os, u);
}

inline SpectralField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace b4nls
