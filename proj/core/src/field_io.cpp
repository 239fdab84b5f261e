#include "gihelm/field_io.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#include "gihelm/binary.hpp"
#include "gihelm/errors.hpp"

namespace gihelm {

namespace binary {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("error reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

}  // namespace binary

namespace {
constexpr char kMagic[4] = {'G', 'I', 'H', 'F'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

std::string encode_field(const ComplexField& field) {
  const Grid2D& g = field.grid;
  if (field.values.size() != g.size()) throw InvalidArgument("encode_field: value count does not match grid");
  std::string out(kMagic, 4);
  out.reserve(kFieldHeaderBytes + 8 * g.size());
  binary::put<std::uint16_t>(out, kVersion);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nz));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
  binary::put<double>(out, g.dz);
  binary::put<double>(out, g.dx);
  binary::put<double>(out, g.z0);
  binary::put<double>(out, g.x0);
  for (const cplx& c : field.values) {
    binary::put<float>(out, static_cast<float>(c.real()));
    binary::put<float>(out, static_cast<float>(c.imag()));
  }
  return out;
}

ComplexField decode_field(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, kMagic, 4) != 0) throw FormatError("bad field magic", 0);
  if (bytes.size() < kFieldHeaderBytes) throw FormatError("field header truncated", bytes.size());
  const char* p = bytes.data();
  const auto version = binary::get<std::uint16_t>(p + 4);
  if (version != kVersion) throw FormatError("unsupported field version " + std::to_string(version), 4);
  Grid2D g;
  g.nz = binary::get<std::uint32_t>(p + 6);
  g.nx = binary::get<std::uint32_t>(p + 10);
  g.dz = binary::get<double>(p + 14);
  g.dx = binary::get<double>(p + 22);
  g.z0 = binary::get<double>(p + 30);
  g.x0 = binary::get<double>(p + 38);
  if (g.nz == 0) throw FormatError("field has nz = 0", 6);
  if (g.nx == 0) throw FormatError("field has nx = 0", 10);
  const std::uint64_t need = kFieldHeaderBytes + 8ull * g.nz * g.nx;
  if (bytes.size() < need) throw FormatError("field payload truncated", bytes.size());
  if (bytes.size() > need) throw FormatError("trailing bytes after field payload", need);
  ComplexField f;
  f.grid = g;
  f.values.resize(g.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const char* q = p + kFieldHeaderBytes + 8 * i;
    f.values[i] = {binary::get<float>(q), binary::get<float>(q + 4)};
  }
  return f;
}

void write_field(const std::filesystem::path& path, const ComplexField& field) {
  binary::write_file(path, encode_field(field));
}

ComplexField read_field(const std::filesystem::path& path) { return decode_field(binary::read_file(path)); }

}  // namespace gihelm
