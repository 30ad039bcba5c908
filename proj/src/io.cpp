#include "kernelconv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace kernelconv {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_bytes(const std::string& path, const std::string& header,
                 const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << header;
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error("short write to " + path);
}

std::string pgm_header(const GridSpec& g) {
  return "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n255\n";
}

}  // namespace

void write_pgm(const GridMask& mask, const std::string& path) {
  const GridSpec& g = mask.spec();
  std::vector<std::uint8_t> pixels;
  pixels.reserve(g.cells());
  for (int iy = g.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < g.nx; ++ix) pixels.push_back(mask.test({ix, iy}) ? 255 : 0);
  write_bytes(path, pgm_header(g), pixels);
}

std::string write_pgm(const FieldGrid& field, const std::string& path) {
  const GridSpec& g = field.spec;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : field.values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

  bool has_finite = lo <= hi;
  bool flat = !(hi > lo);
  std::vector<std::uint8_t> pixels;
  pixels.reserve(g.cells());
  for (int iy = g.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      double v = field.at({ix, iy});
      if (!std::isfinite(v)) {
        pixels.push_back(0);  // only -infinity reaches a FieldGrid
      } else if (flat) {
        pixels.push_back(128);
      } else {
        double t = (v - lo) / (hi - lo);
        pixels.push_back(static_cast<std::uint8_t>(1 + std::lround(254 * t)));
      }
    }
  write_bytes(path, pgm_header(g), pixels);
  if (!has_finite) return "0,0";
  return fmt_double(lo) + "," + fmt_double(hi);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error("short write to " + path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kernelconv
