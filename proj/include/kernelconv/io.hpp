#pragma once

#include <cstdint>
#include <string>

#include "kernelconv/field.hpp"
#include "kernelconv/grid.hpp"

namespace kernelconv {

/// Binary PGM (P5, maxval 255). File row 0 is the top of the geometric
/// window (largest y); set cells are 255, unset 0.
void write_pgm(const GridMask& mask, const std::string& path);

/// Field PGM: finite values scaled affinely to 1..255, -infinity drawn as 0.
/// A constant field renders mid-gray. Returns "min,max" of the finite range
/// used for the scale.
std::string write_pgm(const FieldGrid& field, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// FNV-1a 64-bit digest, lowercase hex.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace kernelconv
