#include "ips/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <system_error>
#include <unistd.h>

namespace ips {

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidGraph, where + ": " + what);
}

Mark read_mark(const Json& obj, const std::string& where) {
  if (!obj.contains("mark")) return {};
  const Json& m = obj.at("mark");
  if (!m.is_array()) invalid(where + "/mark", "expected an array of numbers");
  Mark out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i].is_number()) invalid(where + "/mark/" + std::to_string(i), "expected a number");
    out.push_back(m[i].get<double>());
  }
  return out;
}

std::int64_t read_int(const Json& obj, const char* field, const std::string& where) {
  if (!obj.contains(field)) invalid(where, std::string("missing \"") + field + "\"");
  const Json& x = obj.at(field);
  if (!x.is_number_integer()) invalid(where + "/" + field, "expected an integer");
  return x.get<std::int64_t>();
}

}  // namespace

MarkedGraph graph_from_json(const Json& doc) {
  if (!doc.is_object()) invalid("", "expected an object");
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) invalid("/vertices", "expected an array");
  MarkedGraph g;
  std::map<std::int64_t, VertexId> index;
  const Json& vs = doc["vertices"];
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string where = "/vertices/" + std::to_string(i);
    if (!vs[i].is_object()) invalid(where, "expected an object");
    const std::int64_t id = read_int(vs[i], "id", where);
    if (id < 0) invalid(where + "/id", "ids must be nonnegative");
    if (index.contains(id)) invalid(where + "/id", "duplicate id " + std::to_string(id));
    State state = 0;
    if (vs[i].contains("state")) state = static_cast<State>(read_int(vs[i], "state", where));
    const auto label = static_cast<VertexLabel>(id);
    index[id] = g.add_vertex(state, read_mark(vs[i], where), label, label);
  }
  if (doc.contains("edges")) {
    const Json& es = doc["edges"];
    if (!es.is_array()) invalid("/edges", "expected an array");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const std::string where = "/edges/" + std::to_string(i);
      if (!es[i].is_object()) invalid(where, "expected an object");
      const auto u = read_int(es[i], "u", where), v = read_int(es[i], "v", where);
      if (!index.contains(u)) invalid(where + "/u", "unknown vertex " + std::to_string(u));
      if (!index.contains(v)) invalid(where + "/v", "unknown vertex " + std::to_string(v));
      if (u == v) invalid(where, "self-loop");
      if (!g.try_add_edge(index[u], index[v], read_mark(es[i], where))) invalid(where, "duplicate edge");
    }
  }
  if (doc.contains("root") && !doc["root"].is_null()) {
    const auto r = read_int(doc, "root", "");
    if (!index.contains(r)) invalid("/root", "unknown vertex " + std::to_string(r));
    g.set_root(index[r]);
  }
  g.validate();
  return g;
}

Json graph_to_json(const MarkedGraph& g) {
  Json vs = Json::array(), es = Json::array();
  for (VertexId v = 0; v < g.size(); ++v) {
    Json entry{{"id", g.label(v)}, {"state", g.state(v)}};
    if (!g.vertex_mark(v).empty()) entry["mark"] = g.vertex_mark(v);
    vs.push_back(std::move(entry));
  }
  for (VertexId v = 0; v < g.size(); ++v) {
    const auto nbrs = g.neighbors(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (nbrs[i] < v) continue;
      Json entry{{"u", g.label(v)}, {"v", g.label(nbrs[i])}};
      if (!g.edge_mark_at(v, i).empty()) entry["mark"] = g.edge_mark_at(v, i);
      es.push_back(std::move(entry));
    }
  }
  Json doc{{"vertices", std::move(vs)}, {"edges", std::move(es)}};
  doc["root"] = g.root() ? Json(g.label(*g.root())) : Json(nullptr);
  return doc;
}

MarkedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open graph file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidGraph, path.string() + ": " + e.what());
  }
  return graph_from_json(doc);
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trajectories_jsonl(const MarkedGraph& g, std::span<const Trajectory> trajectories, long long replica) {
  std::string out;
  for (VertexId v = 0; v < trajectories.size(); ++v) {
    if (replica >= 0) out += "{\"replica\":" + std::to_string(replica) + ",";
    else out += "{";
    out += "\"v\":" + std::to_string(g.label(v)) + ",\"x0\":" + std::to_string(trajectories[v].x0) + ",\"jumps\":[";
    bool first = true;
    for (const Jump& j : trajectories[v].jumps) {
      if (!first) out += ",";
      first = false;
      out += "[" + format_double(j.t) + "," + std::to_string(j.j) + "]";
    }
    out += "]}\n";
  }
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\n";
}

CsvTable::Row& CsvTable::Row::cell(std::string s) {
  cells_.push_back(std::move(s));
  return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(double x) { return cell(format_double(x)); }
CsvTable::Row& CsvTable::Row::operator<<(bool b) { return cell(b ? "true" : "false"); }

CsvTable::Row& CsvTable::Row::operator<<(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return cell(std::string(s));
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return cell(q + "\"");
}

CsvTable::Row::~Row() {
  cells_.resize(table_.columns_);
  for (std::size_t i = 0; i < cells_.size(); ++i) table_.text_ += (i ? "," : "") + cells_[i];
  table_.text_ += "\n";
  ++table_.rows_;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace ips
