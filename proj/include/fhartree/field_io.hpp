#ifndef FHARTREE_FIELD_IO_HPP
#define FHARTREE_FIELD_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "fhartree/field.hpp"

namespace fhartree {

// Binary field container, little-endian throughout:
//   bytes 0..7   magic "FHARTFLD"
//   u32          format version (1)
//   u32          domain: 0 physical, 1 spectral
//   u64          n_points
//   f64          r_max
//   u64          sample count (= n_points)
//   f64 pairs    interleaved re, im

void write_field(const std::filesystem::path& path, const RadialField& f);
void write_field(const std::filesystem::path& path, const SpectralField& F);

struct LoadedField {
  bool spectral = false;
  RadialGrid grid;
  std::vector<cplx> values;
};
LoadedField read_field(const std::filesystem::path& path);

/// Write text atomically: temp file in the same directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// One CSV cell with enough digits to round-trip a double exactly.
std::string csv_number(double v);

}  // namespace fhartree

#endif
