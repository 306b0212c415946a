#include "mft/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mft {

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& what) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw DataError("malformed number '" + token + "' in " + what);
  return v;
}

long parse_int(const std::string& token, const std::string& what) {
  long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw DataError("malformed integer '" + token + "' in " + what);
  }
  return v;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

std::string next_line(std::istream& is, const std::string& what) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("unexpected end of header while reading " + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void check_magic(const std::string& line, const std::string& family) {
  if (line == family + "1") return;
  if (line.size() == 4 && line.compare(0, 3, family) == 0) {
    throw DataError("unsupported " + family + " version '" + line + "' (this reader handles " + family + "1)");
  }
  throw DataError("bad magic '" + line.substr(0, 16) + "', expected " + family + "1");
}

void put_doubles(std::ostream& os, const double* data, std::size_t count) {
  std::vector<unsigned char> bytes(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("write failed");
}

void get_doubles(std::istream& is, double* data, std::size_t count, const std::string& what) {
  const std::streamoff start = is.tellg();
  std::vector<unsigned char> bytes(count * 8);
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  const std::size_t got = static_cast<std::size_t>(is.gcount());
  if (got != bytes.size()) {
    throw DataError("truncated " + what + " payload: expected " + std::to_string(bytes.size()) + " bytes from offset " +
                    std::to_string(start) + ", file ends at byte offset " + std::to_string(start + static_cast<std::streamoff>(got)));
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    data[i] = std::bit_cast<double>(u);
    if (!std::isfinite(data[i])) {
      throw DataError("non-finite value in " + what + " payload at byte offset " +
                      std::to_string(start + static_cast<std::streamoff>(i * 8)));
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after " + what + " payload");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "'");
  return is;
}

Vector parse_vector(const std::vector<std::string>& t, std::size_t first, std::size_t count, const std::string& what) {
  if (t.size() != first + count) throw DataError("expected " + std::to_string(count) + " values in " + what);
  Vector v(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) v[static_cast<Eigen::Index>(i)] = parse_double(t[first + i], what);
  return v;
}

}  // namespace

void write_field(const ScalarField& f, std::ostream& os) {
  f.validate();
  os << "MFF1\n" << f.grid.n;
  for (int d : f.grid.dims) os << ' ' << d;
  os << '\n';
  for (int i = 0; i < f.grid.n; ++i) os << (i ? " " : "") << num(f.grid.origin[i]);
  os << '\n';
  for (int i = 0; i < f.grid.n; ++i) os << (i ? " " : "") << num(f.grid.spacing[i]);
  os << '\n';
  put_doubles(os, f.values.data(), f.grid.size());
}

void write_field(const ScalarField& f, const std::string& path) {
  auto os = open_out(path);
  write_field(f, os);
}

ScalarField read_field(std::istream& is) {
  check_magic(next_line(is, "magic"), "MFF");
  const auto dims_t = tokens(next_line(is, "dimensions"));
  if (dims_t.empty()) throw DataError("missing dimension line");
  const long n = parse_int(dims_t[0], "dimension line");
  if (n < 1 || n > kMaxReconstructionDim || dims_t.size() != static_cast<std::size_t>(n) + 1) {
    throw DataError("dimension line must be 'n d0 .. d{n-1}' with 1 <= n <= 3");
  }
  ScalarField f;
  f.grid.n = static_cast<int>(n);
  for (long i = 0; i < n; ++i) {
    const long d = parse_int(dims_t[static_cast<std::size_t>(i) + 1], "dimension line");
    if (d < 1 || d > (1L << 24)) throw DataError("grid dimension out of range");
    f.grid.dims.push_back(static_cast<int>(d));
  }
  f.grid.origin = parse_vector(tokens(next_line(is, "origin")), 0, static_cast<std::size_t>(n), "origin line");
  f.grid.spacing = parse_vector(tokens(next_line(is, "spacing")), 0, static_cast<std::size_t>(n), "spacing line");
  try {
    f.grid.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid grid header: ") + e.what());
  }
  f.values.resize(static_cast<Eigen::Index>(f.grid.size()));
  get_doubles(is, f.values.data(), f.grid.size(), "field");
  return f;
}

ScalarField read_field(const std::string& path) {
  auto is = open_in(path);
  return read_field(is);
}

void write_sinogram(const Sinogram& s, std::ostream& os) {
  s.validate();
  const int n = s.directions.dim();
  os << "MFS1\n" << s.family_tag << '\n' << s.directions.size() << ' ' << n << '\n';
  for (Eigen::Index j = 0; j < s.directions.size(); ++j) {
    for (int i = 0; i < n; ++i) os << num(s.directions.nodes(i, j)) << ' ';
    os << num(s.directions.weights[j]) << '\n';
  }
  os << num(s.lambdas.lambda0) << ' ' << num(s.lambdas.dlambda) << ' ' << s.lambdas.count << '\n';
  // Column-major storage is already direction-major.
  put_doubles(os, s.values.data(), static_cast<std::size_t>(s.values.size()));
}

void write_sinogram(const Sinogram& s, const std::string& path) {
  auto os = open_out(path);
  write_sinogram(s, os);
}

Sinogram read_sinogram(std::istream& is) {
  check_magic(next_line(is, "magic"), "MFS");
  Sinogram s;
  s.family_tag = next_line(is, "family tag");
  if (s.family_tag.rfind("family=", 0) != 0) throw DataError("family line must start with 'family='");
  const auto head = tokens(next_line(is, "direction count"));
  if (head.size() != 2) throw DataError("direction line must be 'ndirs n'");
  const long ndirs = parse_int(head[0], "direction line");
  const long n = parse_int(head[1], "direction line");
  if (ndirs < 1 || n < 2 || n > kMaxDiagnosticDim) throw DataError("direction count or dimension out of range");
  s.directions.nodes.resize(n, ndirs);
  s.directions.weights.resize(ndirs);
  for (long j = 0; j < ndirs; ++j) {
    const Vector row = parse_vector(tokens(next_line(is, "direction")), 0, static_cast<std::size_t>(n) + 1, "direction line");
    s.directions.nodes.col(j) = row.head(n);
    s.directions.weights[j] = row[n];
  }
  const auto lt = tokens(next_line(is, "lambda grid"));
  if (lt.size() != 3) throw DataError("lambda line must be 'lambda0 dlambda count'");
  s.lambdas.lambda0 = parse_double(lt[0], "lambda line");
  s.lambdas.dlambda = parse_double(lt[1], "lambda line");
  const long count = parse_int(lt[2], "lambda line");
  if (count < 1 || count > (1L << 24)) throw DataError("lambda count out of range");
  s.lambdas.count = static_cast<int>(count);
  try {
    s.directions.validate();
    s.lambdas.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid sinogram header: ") + e.what());
  }
  s.values.resize(count, ndirs);
  get_doubles(is, s.values.data(), static_cast<std::size_t>(s.values.size()), "sinogram");
  return s;
}

Sinogram read_sinogram(const std::string& path) {
  auto is = open_in(path);
  return read_sinogram(is);
}

PgmRange export_pgm(const ScalarField& f, const std::string& path) {
  f.validate();
  if (f.grid.n != 2) throw ConfigError("export_pgm: needs a 2D field (slice 3D fields first)");
  PgmRange r{f.values.minCoeff(), f.values.maxCoeff()};
  const int height = f.grid.dims[0];
  const int width = f.grid.dims[1];
  auto os = open_out(path);
  os << "P5\n" << width << ' ' << height << "\n65535\n";
  std::vector<unsigned char> bytes(f.grid.size() * 2);
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    long level = 32768;
    if (r.max > r.min) level = std::lround((f[i] - r.min) / (r.max - r.min) * 65535.0);
    bytes[2 * i] = static_cast<unsigned char>(level >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(level & 0xff);
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("write failed for '" + path + "'");
  auto side = open_out(path + ".range");
  side << "min " << num(r.min) << "\nmax " << num(r.max) << '\n';
  return r;
}

std::vector<int> read_pgm(const std::string& path, int* width, int* height) {
  auto is = open_in(path);
  std::string magic;
  long w = 0;
  long h = 0;
  long maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 65535 || w < 1 || h < 1) throw DataError("'" + path + "' is not a 16-bit P5 image");
  is.get();
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w * h * 2));
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(is.gcount()) != bytes.size()) throw DataError("truncated PGM payload in '" + path + "'");
  std::vector<int> out(static_cast<std::size_t>(w * h));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (bytes[2 * i] << 8) | bytes[2 * i + 1];
  if (width) *width = static_cast<int>(w);
  if (height) *height = static_cast<int>(h);
  return out;
}

void export_csv(const ScalarField& f, const std::string& path) {
  f.validate();
  if (f.grid.n != 2) throw ConfigError("export_csv: needs a 2D field");
  auto os = open_out(path);
  const int rows = f.grid.dims[0];
  const int cols = f.grid.dims[1];
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      os << (c ? "," : "") << num(f[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]);
    }
    os << '\n';
  }
}

std::string read_header_text(const std::string& path) {
  auto is = open_in(path);
  const std::string magic = next_line(is, "magic");
  std::size_t lines = 0;
  if (magic.rfind("MFF", 0) == 0) {
    check_magic(magic, "MFF");
    lines = 3;
  } else if (magic.rfind("MFS", 0) == 0) {
    check_magic(magic, "MFS");
    std::string out = magic + "\n";
    out += next_line(is, "family tag") + "\n";
    const std::string head = next_line(is, "direction count");
    out += head + "\n";
    const auto t = tokens(head);
    if (t.empty()) throw DataError("missing direction count");
    const long ndirs = parse_int(t[0], "direction line");
    for (long j = 0; j < ndirs; ++j) next_line(is, "direction");
    out += "(" + std::to_string(ndirs) + " direction lines)\n";
    out += next_line(is, "lambda grid") + "\n";
    return out;
  } else {
    throw DataError("'" + path + "' is neither an MFF nor an MFS file");
  }
  std::string out = magic + "\n";
  for (std::size_t i = 0; i < lines; ++i) out += next_line(is, "header") + "\n";
  return out;
}

}  // namespace mft
