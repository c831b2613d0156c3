#include "fhartree/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace fhartree {

static_assert(std::endian::native == std::endian::little,
              "field format is little-endian; byte swapping is not implemented");

namespace {
constexpr char kMagic[8] = {'F', 'H', 'A', 'R', 'T', 'F', 'L', 'D'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T take(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw invalid_input("read_field: truncated file");
  return v;
}

template <class Field>
void write_field_impl(const std::filesystem::path& path, const Field& f, bool spectral) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    FH_REQUIRE(out.good(), "write_field: cannot open " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, spectral ? 1 : 0);
    put<std::uint64_t>(out, f.grid.n_points);
    put<double>(out, f.grid.r_max);
    put<std::uint64_t>(out, f.values.size());
    for (const cplx& z : f.values) {
      put<double>(out, z.real());
      put<double>(out, z.imag());
    }
    FH_REQUIRE(out.good(), "write_field: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}
}  // namespace

void write_field(const std::filesystem::path& path, const RadialField& f) {
  write_field_impl(path, f, false);
}
void write_field(const std::filesystem::path& path, const SpectralField& F) {
  write_field_impl(path, F, true);
}

LoadedField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  FH_REQUIRE(in.good(), "read_field: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  FH_REQUIRE(in && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
             "read_field: bad magic in " + path.string());
  const auto version = take<std::uint32_t>(in);
  FH_REQUIRE(version == 1, "read_field: unsupported format version");
  LoadedField out;
  out.spectral = take<std::uint32_t>(in) == 1;
  const auto n = take<std::uint64_t>(in);
  const double r_max = take<double>(in);
  out.grid = RadialGrid(static_cast<std::size_t>(n), r_max);
  const auto count = take<std::uint64_t>(in);
  FH_REQUIRE(count == n, "read_field: sample count does not match grid");
  out.values.resize(static_cast<std::size_t>(count));
  for (auto& z : out.values) {
    const double re = take<double>(in);
    const double im = take<double>(in);
    z = cplx(re, im);
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    FH_REQUIRE(out.good(), "write_text_atomic: cannot open " + tmp.string());
    out << content;
    FH_REQUIRE(out.good(), "write_text_atomic: write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace fhartree
