#pragma once

// Rasters (binary PGM) and CSV companions for the partition, agreement-set
// and orbit pictures. CSV is always written first; rasters need d = 2.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "akc/errors.hpp"
#include "akc/lab/config.hpp"
#include "akc/lab/store.hpp"
#include "akc/parallel.hpp"
#include "akc/partition.hpp"

namespace akc::lab {

/// 8-bit grayscale image, row 0 at the top (x_2 near 1).
class Raster {
public:
  Raster(int width, int height, unsigned char fill = 0)
      : w_(width), h_(height), px_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 1 || height < 1) throw InvalidArgument("raster size must be positive");
  }

  int width() const noexcept { return w_; }
  int height() const noexcept { return h_; }
  unsigned char& at(int row, int col) { return px_[static_cast<std::size_t>(row) * w_ + col]; }
  unsigned char at(int row, int col) const { return px_[static_cast<std::size_t>(row) * w_ + col]; }
  const std::vector<unsigned char>& pixels() const noexcept { return px_; }

  std::string pgm() const {
    std::string out = "P5\n" + std::to_string(w_) + " " + std::to_string(h_) + "\n255\n";
    out.append(px_.begin(), px_.end());
    return out;
  }

private:
  int w_, h_;
  std::vector<unsigned char> px_;
};

/// Exact pixel centre ((col + 1/2) / size, 1 - (row + 1/2) / size).
inline RationalPoint pixel_centre(int row, int col, int size) {
  RationalPoint p(2);
  p[0] = make_rational(2L * col + 1, 2L * size);
  p[1] = 1 - make_rational(2L * row + 1, 2L * size);
  return p;
}

struct RenderResult {
  std::filesystem::path csv, pgm;
  std::size_t rows = 0;
};

inline void require_raster_dim(int d, const std::string& target) {
  if (d != 2)
    throw UnsupportedDimension(target + " raster needs d = 2 (got d = " + std::to_string(d) +
                               "); CSV written");
}

/// Atoms of eta_q: bands i/q^d <= x_d < (i+1)/q^d, shaded alternately.
inline RenderResult render_partitions(const Integer& q, int d, int size,
                                      const std::filesystem::path& prefix) {
  check_dimension(d);
  if (q < 1) throw InvalidArgument("q must be >= 1");
  const Integer atoms = pow_of(q, static_cast<unsigned long>(d));
  if (atoms > 1000000) throw InvalidArgument("more than 10^6 atoms");
  RenderResult res;
  res.csv = prefix.string() + ".csv";
  std::string csv = "atom,lo,hi\n";
  for (Integer i = 0; i < atoms; ++i) {
    csv += i.get_str() + "," + to_string(make_rational(i, atoms)) + "," +
           to_string(make_rational(Integer(i + 1), atoms)) + "\n";
    ++res.rows;
  }
  write_text_file(res.csv, csv);
  require_raster_dim(d, "partitions");
  Raster img(size, size);
  const std::int64_t a = atoms.get_si();
  for (int r = 0; r < size; ++r) {
    const Rational y = pixel_centre(r, 0, size)[1];
    const std::int64_t i = floor_of(Rational(y * atoms)).get_si();
    const auto shade = static_cast<unsigned char>(i % 2 ? 200 : 60 + (120 * i) / std::max<std::int64_t>(a, 1));
    for (int c = 0; c < size; ++c) img.at(r, c) = shade;
  }
  res.pgm = prefix.string() + ".pgm";
  write_text_file(res.pgm, img.pgm());
  return res;
}

/// E_{n,q}: exact description in CSV, exact membership per pixel centre.
inline RenderResult render_agreement_set(int n, const Integer& q, int d, Mode mode, int size,
                                         const std::filesystem::path& prefix, unsigned threads = 0) {
  const AgreementSet E(n, q, d, mode);
  RenderResult res;
  res.csv = prefix.string() + ".csv";
  const Rational lo = make_rational(1, long(n) * n);
  std::string csv = "kind,coordinate,lo,hi,lo_closed\n";
  for (int i = 0; i + 1 < d; ++i) {
    csv += "core," + std::to_string(i + 1) + "," + to_string(lo) + "," + to_string(Rational(1 - lo)) + ",1\n";
    ++res.rows;
  }
  for (const auto& p : E.strips().pieces()) {
    csv += "excluded," + std::to_string(d) + "," + to_string(p.lo) + "," + to_string(p.hi) + "," +
           (p.lo_closed ? "1" : "0") + "\n";
    ++res.rows;
  }
  csv += "shear," + std::string(mode == Mode::torus ? q.get_str() : "0") + ",,,\n";
  csv += "measure,," + to_string(E.measure()) + ",,\n";
  write_text_file(res.csv, csv);
  require_raster_dim(d, "agreement-set");
  Raster img(size, size);
  for_chunks(static_cast<std::size_t>(size), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r)
      for (int c = 0; c < size; ++c)
        img.at(static_cast<int>(r), c) = E.contains(pixel_centre(static_cast<int>(r), c, size)) ? 255 : 0;
  }, 1);
  res.pgm = prefix.string() + ".pgm";
  write_text_file(res.pgm, img.pgm());
  return res;
}

/// Orbit of T at stage position s from a seeded base point.
inline RenderResult render_orbit(const Store& st, std::size_t s, std::size_t points, int size,
                                 const std::filesystem::path& prefix, std::uint64_t seed) {
  const auto build = st.build();
  if (s >= build.size()) throw MissingStage("stage position " + std::to_string(s));
  if (!build.evaluable(s)) throw NotEvaluable("stage maps at this scale");
  const StageMap T = build.T(s);
  const int d = build.records()[s].d;
  Rng rng(seed);
  Point x(d);
  for (int c = 0; c < d; ++c) x[c] = rng.uniform();
  std::vector<Point> orbit(points, x);
  for (std::size_t i = 1; i < points; ++i) orbit[i] = T.apply(orbit[i - 1]);
  RenderResult res;
  res.csv = prefix.string() + ".csv";
  std::string csv = "i";
  for (int c = 0; c < d; ++c) csv += ",x" + std::to_string(c + 1);
  csv += "\n";
  char buf[40];
  for (std::size_t i = 0; i < points; ++i) {
    csv += std::to_string(i);
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", orbit[i][c]);
      csv += buf;
    }
    csv += "\n";
    ++res.rows;
  }
  write_text_file(res.csv, csv);
  require_raster_dim(d, "orbit");
  Raster img(size, size);
  for (const auto& p : orbit) {
    if (!(p[0] >= 0.0 && p[0] < 1.0 && p[1] >= 0.0 && p[1] < 1.0))
      throw OutOfDomain("orbit point outside [0,1)^2");
    const int col = std::min(size - 1, static_cast<int>(p[0] * size));
    const int row = std::min(size - 1, static_cast<int>((1.0 - p[1]) * size));
    img.at(row, col) = 255;
  }
  res.pgm = prefix.string() + ".pgm";
  write_text_file(res.pgm, img.pgm());
  return res;
}

}  // namespace akc::lab
