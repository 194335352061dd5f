#include "specfilter/core/jsonio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace specfilter {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_node(const OrderedJson& node, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (node.type()) {
    case nlohmann::detail::value_t::null: out += "null"; break;
    case nlohmann::detail::value_t::boolean: out += node.get<bool>() ? "true" : "false"; break;
    case nlohmann::detail::value_t::number_integer:
      out += std::to_string(node.get<std::int64_t>());
      break;
    case nlohmann::detail::value_t::number_unsigned:
      out += std::to_string(node.get<std::uint64_t>());
      break;
    case nlohmann::detail::value_t::number_float: out += format_double(node.get<double>()); break;
    case nlohmann::detail::value_t::string: append_escaped(out, node.get<std::string>()); break;
    case nlohmann::detail::value_t::array: {
      if (node.empty()) {
        out += "[]";
        break;
      }
      // scalar-only arrays stay on one line
      const bool flat = std::all_of(node.begin(), node.end(),
                                    [](const OrderedJson& v) { return !v.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& item : node) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) {
          out += '\n';
          out += pad_in;
        }
        dump_node(item, out, depth + 1);
        first = false;
      }
      if (!flat) {
        out += '\n';
        out += pad;
      }
      out += ']';
      break;
    }
    case nlohmann::detail::value_t::object: {
      if (node.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : node.items()) {
        if (!first) out += ',';
        out += '\n';
        out += pad_in;
        append_escaped(out, key);
        out += ": ";
        dump_node(value, out, depth + 1);
        first = false;
      }
      out += '\n';
      out += pad;
      out += '}';
      break;
    }
    default: out += "null";
  }
}

}  // namespace

std::string dump_json(const OrderedJson& doc) {
  std::string out;
  dump_node(doc, out, 0);
  out += '\n';
  return out;
}

OrderedJson parse_json(std::string_view text) {
  OrderedJson doc = OrderedJson::parse(text, nullptr, false);
  if (doc.is_discarded()) raise(errc::parse_error, "malformed JSON");
  return doc;
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4)
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int k) { return (x >> k) | (x << (32 - k)); }

void sha256_block(std::array<std::uint32_t, 8>& h, const unsigned char* p) {
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i)
    w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
           (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
  for (int i = 16; i < 64; ++i) {
    const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  auto [a, b, c, d, e, f, g, hh] = h;
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    const std::uint32_t ch = (e & f) ^ (~e & g);
    const std::uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
    const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    const std::uint32_t t2 = s0 + maj;
    hh = g; g = f; f = e; e = d + t1;
    d = c; c = b; b = a; a = t1 + t2;
  }
  h[0] += a; h[1] += b; h[2] += c; h[3] += d;
  h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                    0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t len = bytes.size();
  std::size_t offset = 0;
  for (; offset + 64 <= len; offset += 64) sha256_block(h, data + offset);

  unsigned char tail[128] = {0};
  const std::size_t rem = len - offset;
  std::memcpy(tail, data + offset, rem);
  tail[rem] = 0x80;
  const std::size_t tail_len = (rem + 9 <= 64) ? 64 : 128;
  const std::uint64_t bits = static_cast<std::uint64_t>(len) * 8;
  for (int i = 0; i < 8; ++i) tail[tail_len - 1 - i] = static_cast<unsigned char>(bits >> (8 * i));
  sha256_block(h, tail);
  if (tail_len == 128) sha256_block(h, tail + 64);

  std::string out(64, '0');
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 4; ++j) {
      const unsigned byte = (h[i] >> (24 - 8 * j)) & 0xFF;
      out[8 * i + 2 * j] = hex[byte >> 4];
      out[8 * i + 2 * j + 1] = hex[byte & 0xF];
    }
  return out;
}

void ArtifactSet::add(std::string name, std::string content) {
  artifacts.push_back({std::move(name), std::move(content)});
}

const Artifact* ArtifactSet::find(const std::string& name) const {
  for (const auto& a : artifacts)
    if (a.name == name) return &a;
  return nullptr;
}

void write_artifacts(const ArtifactSet& set, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(errc::io_error, "cannot create output directory '" + out_dir + "'");

  std::vector<const Artifact*> sorted;
  for (const auto& a : set.artifacts) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(),
            [](const Artifact* a, const Artifact* b) { return a->name < b->name; });

  OrderedJson manifest;
  manifest["schema"] = "specfilter-manifest-v1";
  manifest["artifacts"] = OrderedJson::array();
  for (const Artifact* a : sorted) {
    const fs::path path = fs::path(out_dir) / a->name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_error, "cannot write '" + path.string() + "'");
    out.write(a->content.data(), static_cast<std::streamsize>(a->content.size()));
    out.close();
    OrderedJson entry;
    entry["name"] = a->name;
    entry["bytes"] = a->content.size();
    entry["sha256"] = sha256_hex(a->content);
    manifest["artifacts"].push_back(std::move(entry));
  }
  const std::string manifest_text = dump_json(manifest);
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::io_error, "cannot write '" + manifest_path.string() + "'");
  out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DenseMatrix load_matrix_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) raise(errc::parse_error, "empty matrix CSV");

  const auto parse_fields = [](const std::string& row) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const auto comma = row.find(',', pos);
      fields.push_back(row.substr(pos, comma == std::string::npos ? row.npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return fields;
  };

  const auto header = parse_fields(line);
  if (header.size() != 2) raise(errc::parse_error, "matrix CSV header must be 'rows,cols'");
  DenseMatrix m;
  try {
    m.rows = std::stoi(header[0]);
    m.cols = std::stoi(header[1]);
  } catch (const std::exception&) {
    raise(errc::parse_error, "matrix CSV header must be 'rows,cols'");
  }
  if (m.rows <= 0 || m.cols <= 0) raise(errc::parse_error, "matrix dimensions must be positive");

  m.data.reserve(static_cast<std::size_t>(m.rows) * m.cols);
  int row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= m.rows) raise(errc::parse_error, "matrix CSV has more rows than declared");
    const auto fields = parse_fields(line);
    if (static_cast<int>(fields.size()) != m.cols)
      raise(errc::parse_error, "matrix CSV row " + std::to_string(row + 1) + " has " +
                                   std::to_string(fields.size()) + " fields, expected " +
                                   std::to_string(m.cols));
    for (const auto& f : fields) {
      try {
        m.data.push_back(std::stod(f));
      } catch (const std::exception&) {
        raise(errc::parse_error, "bad matrix entry '" + f + "'");
      }
    }
    ++row;
  }
  if (row != m.rows) raise(errc::parse_error, "matrix CSV has fewer rows than declared");
  return m;
}

}  // namespace specfilter
