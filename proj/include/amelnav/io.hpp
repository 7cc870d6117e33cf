#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace amelnav::io {

// Little-endian binary primitives for checkpoint files. x86-only project,
// so native byte order is written as-is.

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_i64(std::ostream& os, std::int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("binary read failed (u32)");
  return v;
}
inline std::int64_t read_i64(std::istream& is) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("binary read failed (i64)");
  return v;
}
inline double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("binary read failed (f64)");
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_i64(os, static_cast<std::int64_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string read_string(std::istream& is) {
  const auto n = read_i64(is);
  if (n < 0) throw std::runtime_error("binary read failed (string size)");
  std::string s(static_cast<std::size_t>(n), '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("binary read failed (string)");
  return s;
}

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  write_i64(os, m.rows());
  write_i64(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}
inline Eigen::MatrixXd read_matrix(std::istream& is) {
  const auto rows = read_i64(is);
  const auto cols = read_i64(is);
  if (rows < 0 || cols < 0) throw std::runtime_error("bad matrix header");
  Eigen::MatrixXd m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is) throw std::runtime_error("binary read failed (matrix)");
  return m;
}

inline void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  write_i64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(sizeof(double) * v.size()));
}
inline Eigen::VectorXd read_vector(std::istream& is) {
  const auto n = read_i64(is);
  if (n < 0) throw std::runtime_error("bad vector header");
  Eigen::VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double) * v.size()));
  if (!is) throw std::runtime_error("binary read failed (vector)");
  return v;
}

}  // namespace amelnav::io
