#include "lineleak/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string_view>

#include "lineleak/error.hpp"

namespace lineleak {

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  }

  std::optional<std::string> next() {
    std::string text;
    if (!std::getline(in_, text)) return std::nullopt;
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    return text;
  }

  std::string expect(const char* what) {
    auto text = next();
    if (!text) fail(std::string("unexpected end of file, expected ") + what);
    return *text;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, line_, what); }

  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<std::string_view> split(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

double parse_double(const LineReader& r, std::string_view token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
    r.fail("invalid number '" + std::string(token) + "'");
  }
  return v;
}

std::size_t parse_count(const LineReader& r, std::string_view token) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    r.fail("invalid count '" + std::string(token) + "'");
  }
  return v;
}

// "<keyword> N" header line
std::size_t expect_count_line(LineReader& r, std::string_view keyword) {
  const std::string text = r.expect("count header");
  const auto tok = split(text);
  if (tok.size() != 2 || tok[0] != keyword) r.fail("malformed header, expected '" + std::string(keyword) + " N'");
  return parse_count(r, tok[1]);
}

void format_double(std::string& out, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::string to_hex(const Payload& p) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(p.size() * 2);
  for (unsigned char c : p) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

Payload from_hex(const LineReader& r, std::string_view hex) {
  if (hex.size() % 2 != 0) r.fail("odd-length hex payload");
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    r.fail("invalid hex digit in payload");
  };
  Payload out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  }
  return out;
}

void write_payloads(const std::vector<Payload>& payloads, const std::string& path) {
  const std::string side = sidecar_path(path, "payloads");
  if (payloads.empty()) {
    std::filesystem::remove(side);
    return;
  }
  auto out = open_out(side);
  out << "PAYLOADS v1\ncount " << payloads.size() << '\n';
  for (const Payload& p : payloads) out << to_hex(p) << '\n';
  finish(out, side);
}

std::vector<Payload> read_payloads(const std::string& path, std::size_t expected) {
  const std::string side = sidecar_path(path, "payloads");
  if (!std::filesystem::exists(side)) return {};
  LineReader r(side);
  if (r.expect("magic") != "PAYLOADS v1") r.fail("expected 'PAYLOADS v1'");
  const std::size_t n = expect_count_line(r, "count");
  if (n != expected) r.fail("payload count " + std::to_string(n) + " does not match " + std::to_string(expected));
  std::vector<Payload> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string text = r.expect("payload row");
    const auto tok = split(text);
    if (tok.size() > 1) r.fail("payload row must be a single hex token");
    out.push_back(tok.empty() ? Payload{} : from_hex(r, tok[0]));
  }
  return out;
}

bool is_identity(const std::vector<std::size_t>& idx) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] != i) return false;
  }
  return true;
}

void write_sources(const SourceMap* sources, std::size_t count, const std::string& path) {
  const std::string side = sidecar_path(path, "sources");
  if (sources == nullptr || (is_identity(sources->indices) && sources->total == count)) {
    std::filesystem::remove(side);
    return;
  }
  if (sources->indices.size() != count) {
    throw Error(ErrorCode::MisalignedInputs, "source map size does not match element count");
  }
  auto out = open_out(side);
  out << "SOURCES v1\ncount " << count << "\ntotal " << sources->total << '\n';
  for (std::size_t i : sources->indices) out << i << '\n';
  finish(out, side);
}

SourceMap read_sources(const std::string& path, std::size_t expected) {
  const std::string side = sidecar_path(path, "sources");
  SourceMap map;
  if (!std::filesystem::exists(side)) {
    map.indices.resize(expected);
    std::iota(map.indices.begin(), map.indices.end(), std::size_t{0});
    map.total = expected;
    return map;
  }
  LineReader r(side);
  if (r.expect("magic") != "SOURCES v1") r.fail("expected 'SOURCES v1'");
  const std::size_t n = expect_count_line(r, "count");
  if (n != expected) r.fail("source count " + std::to_string(n) + " does not match " + std::to_string(expected));
  map.total = expect_count_line(r, "total");
  map.indices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string text = r.expect("source row");
    const auto tok = split(text);
    if (tok.size() != 1) r.fail("source row must hold one index");
    map.indices.push_back(parse_count(r, tok[0]));
  }
  return map;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties;
  bool has_list = false;
};

}  // namespace

std::string sidecar_path(const std::string& path, const char* suffix) { return path + "." + suffix; }

PointCloud read_ply(const std::string& path, SourceMap* sources) {
  LineReader r(path);
  if (r.expect("magic") != "ply") r.fail("missing 'ply' magic");

  std::vector<PlyElement> elements;
  bool have_format = false;
  for (;;) {
    const std::string text = r.expect("end_header");
    const auto tok = split(text);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) r.fail("malformed format line");
      if (tok[1] != "ascii") {
        throw Error(ErrorCode::UnsupportedFormat,
                    path + ":" + std::to_string(r.line()) + ": only ASCII PLY is supported, got '" +
                        std::string(tok[1]) + "'");
      }
      if (tok[2] != "1.0") r.fail("unsupported PLY version '" + std::string(tok[2]) + "'");
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) r.fail("malformed element line");
      elements.push_back({std::string(tok[1]), parse_count(r, tok[2]), {}, false});
    } else if (tok[0] == "property") {
      if (elements.empty()) r.fail("property before any element");
      if (tok.size() >= 2 && tok[1] == "list") {
        if (tok.size() != 5) r.fail("malformed list property");
        elements.back().has_list = true;
        elements.back().properties.emplace_back(tok[4]);
      } else {
        if (tok.size() != 3) r.fail("malformed property line");
        elements.back().properties.emplace_back(tok[2]);
      }
    } else {
      r.fail("unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_format) r.fail("missing format line");

  PointCloud pc;
  bool seen_vertex = false;
  for (const PlyElement& el : elements) {
    if (el.name != "vertex") {
      for (std::size_t i = 0; i < el.count; ++i) r.expect(el.name.c_str());
      continue;
    }
    if (el.has_list) throw Error(ErrorCode::UnsupportedFormat, path + ": list properties on vertex");
    std::size_t ix = el.properties.size(), iy = ix, iz = ix;
    for (std::size_t p = 0; p < el.properties.size(); ++p) {
      if (el.properties[p] == "x") ix = p;
      if (el.properties[p] == "y") iy = p;
      if (el.properties[p] == "z") iz = p;
    }
    if (ix == el.properties.size() || iy == el.properties.size() || iz == el.properties.size()) {
      throw Error(ErrorCode::UnsupportedFormat, path + ": vertex element lacks x, y, z");
    }
    seen_vertex = true;
    pc.points.reserve(el.count);
    for (std::size_t i = 0; i < el.count; ++i) {
      const std::string text = r.expect("vertex row");
      const auto tok = split(text);
      if (tok.size() != el.properties.size()) {
        r.fail("expected " + std::to_string(el.properties.size()) + " values, got " + std::to_string(tok.size()));
      }
      pc.points.push_back({parse_double(r, tok[ix]), parse_double(r, tok[iy]), parse_double(r, tok[iz])});
    }
  }
  if (!seen_vertex) throw Error(ErrorCode::UnsupportedFormat, path + ": no vertex element");

  pc.payloads = read_payloads(path, pc.size());
  if (sources != nullptr) *sources = read_sources(path, pc.size());
  return pc;
}

void write_ply(const PointCloud& pc, const std::string& path, const SourceMap* sources) {
  if (pc.has_payloads() && pc.payloads.size() != pc.size()) {
    throw Error(ErrorCode::MisalignedInputs, "payloads do not align with points");
  }
  std::string body;
  body.reserve(pc.size() * 64 + 200);
  body += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(pc.size()) +
          "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const Point3& p : pc.points) {
    format_double(body, p.x);
    body += ' ';
    format_double(body, p.y);
    body += ' ';
    format_double(body, p.z);
    body += '\n';
  }
  auto out = open_out(path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  finish(out, path);
  write_payloads(pc.payloads, path);
  write_sources(sources, pc.size(), path);
}

LineCloud read_lines(const std::string& path, std::vector<std::string>* warnings) {
  LineReader r(path);
  const std::string magic = r.expect("magic");
  if (magic != "LINECLOUD v1") {
    if (magic.rfind("LINECLOUD", 0) == 0) {
      throw Error(ErrorCode::UnsupportedFormat, path + ":1: unsupported version '" + magic + "'");
    }
    r.fail("expected 'LINECLOUD v1'");
  }
  const std::size_t n = expect_count_line(r, "count");

  LineCloud lc;
  lc.lines.reserve(n);
  std::size_t renormalized = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string text = r.expect("line row");
    const auto tok = split(text);
    if (tok.size() != 6) r.fail("expected 6 values, got " + std::to_string(tok.size()));
    double v[6];
    for (int k = 0; k < 6; ++k) v[k] = parse_double(r, tok[k]);
    const Vec3 dir{v[3], v[4], v[5]};
    const double len = norm(dir);
    if (!(len > 0.0)) r.fail("zero direction");
    if (std::abs(len - 1.0) > 1e-9) ++renormalized;
    lc.lines.push_back({{v[0], v[1], v[2]}, Direction3::from_unit(dir)});
  }
  if (renormalized > 0 && warnings != nullptr) {
    warnings->push_back(path + ": renormalized " + std::to_string(renormalized) + " non-unit direction(s)");
  }
  lc.payloads = read_payloads(path, n);
  lc.source_indices = read_sources(path, n).indices;
  return lc;
}

void write_lines(const LineCloud& lc, const std::string& path) {
  if (lc.has_payloads() && lc.payloads.size() != lc.size()) {
    throw Error(ErrorCode::MisalignedInputs, "payloads do not align with lines");
  }
  std::string body;
  body.reserve(lc.size() * 128 + 40);
  body += "LINECLOUD v1\ncount " + std::to_string(lc.size()) + "\n";
  for (const Line3& l : lc.lines) {
    const double v[6] = {l.anchor.x, l.anchor.y, l.anchor.z, l.direction.x(), l.direction.y(), l.direction.z()};
    for (int k = 0; k < 6; ++k) {
      if (k > 0) body += ' ';
      format_double(body, v[k]);
    }
    body += '\n';
  }
  auto out = open_out(path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  finish(out, path);
  write_payloads(lc.payloads, path);
  if (lc.source_indices.empty()) {
    write_sources(nullptr, lc.size(), path);
  } else {
    SourceMap map{lc.source_indices, 0};
    map.total = lc.size();
    for (std::size_t s : lc.source_indices) map.total = std::max(map.total, s + 1);
    write_sources(&map, lc.size(), path);
  }
}

}  // namespace lineleak
