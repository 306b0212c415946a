#pragma once

#include "mft/core.hpp"

#include <iosfwd>
#include <string>

namespace mft {

/* Headers are ASCII with shortest round-trip decimal numbers; payloads are little-endian doubles. */

void write_field(const ScalarField& f, std::ostream& os);
void write_field(const ScalarField& f, const std::string& path);
ScalarField read_field(std::istream& is);
ScalarField read_field(const std::string& path);

void write_sinogram(const Sinogram& s, std::ostream& os);
void write_sinogram(const Sinogram& s, const std::string& path);
Sinogram read_sinogram(std::istream& is);
Sinogram read_sinogram(const std::string& path);

struct PgmRange {
  double min = 0.0;
  double max = 0.0;
};

/// 16-bit binary PGM with linear min-max scaling; a constant field maps to mid-gray.
/// The range is also written to `path + ".range"`.
PgmRange export_pgm(const ScalarField& f, const std::string& path);
/// Reads back a 16-bit P5 image as raw gray levels (row-major, width = dims[1]).
std::vector<int> read_pgm(const std::string& path, int* width = nullptr, int* height = nullptr);

/// One CSV row per first-axis index, one column per second-axis index.
void export_csv(const ScalarField& f, const std::string& path);

/// ASCII header of an .mff or .mfs file, payload excluded.
std::string read_header_text(const std::string& path);

}  // namespace mft
