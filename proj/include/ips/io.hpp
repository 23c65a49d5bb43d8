#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ips/graph.hpp"
#include "ips/rates.hpp"

namespace ips {

using Json = nlohmann::json;

// Graph files:
//   {"vertices":[{"id":int,"state":int,"mark":[...]}],
//    "edges":[{"u":int,"v":int,"mark":[...]}], "root":int|null}
// Vertex ids become labels and noise keys; "state" and "mark" are optional.

/// Parses and validates a graph document. Throws InvalidGraph naming the
/// offending entry.
MarkedGraph graph_from_json(const Json& doc);
/// Materialized part of `g`, ids taken from labels.
Json graph_to_json(const MarkedGraph& g);
MarkedGraph load_graph(const std::filesystem::path& path);

/// One JSON Lines record per vertex: {"v":label,"x0":int,"jumps":[[t,j],...]}.
/// `replica`, when non-negative, is added as a field.
std::string trajectories_jsonl(const MarkedGraph& g, std::span<const Trajectory> trajectories,
                               long long replica = -1);

/// Shortest decimal form of a double that reads back exactly.
std::string format_double(double x);

/// Comma-separated table with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  class Row {
   public:
    Row& operator<<(double x);
    Row& operator<<(bool b);
    Row& operator<<(std::string_view s);
    Row& operator<<(const char* s) { return *this << std::string_view(s); }
    template <class Int>
      requires std::is_integral_v<Int>
    Row& operator<<(Int x) {
      return cell(std::to_string(x));
    }
    ~Row();
   private:
    friend class CsvTable;
    explicit Row(CsvTable& t) : table_(t) {}
    Row& cell(std::string s);
    CsvTable& table_;
    std::vector<std::string> cells_;
  };
  Row row() { return Row(*this); }
  std::size_t rows() const { return rows_; }
  const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Writes `content` to a temporary sibling, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ips
