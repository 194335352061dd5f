#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "specfilter/core/error.hpp"

namespace specfilter {

// Insertion-ordered document tree; combined with the fixed float format below
// this makes every serialized report byte-deterministic.
using OrderedJson = nlohmann::ordered_json;

// %.17g — 17 significant digits round-trip any double exactly.
std::string format_double(double v);

// Deterministic dump: 2-space indent, floats through format_double,
// non-finite floats as null, trailing newline.
std::string dump_json(const OrderedJson& doc);

OrderedJson parse_json(std::string_view text);  // errc::parse_error on failure

std::string sha256_hex(std::string_view bytes);

struct Artifact {
  std::string name;
  std::string content;
};

// Named output files of one command run, a manifest away from disk.
struct ArtifactSet {
  std::vector<Artifact> artifacts;
  // false when any bound report or tail certificate in the run failed;
  // drives the CLI's --strict exit code
  bool all_satisfied = true;

  void add(std::string name, std::string content);
  const Artifact* find(const std::string& name) const;
};

// Writes every artifact under out_dir plus a manifest.json listing
// name/bytes/sha256, sorted by name.
void write_artifacts(const ArtifactSet& set, const std::string& out_dir);

std::string read_file(const std::string& path);

struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major
};

// Operator input format: header line "rows,cols", then rows lines of cols
// comma-separated values.
DenseMatrix load_matrix_csv(std::string_view text);

}  // namespace specfilter
