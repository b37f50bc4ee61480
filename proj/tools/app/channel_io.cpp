#include "channel_io.hpp"

#include <fstream>
#include <sstream>

namespace entcost::app {

using nlohmann::json;

std::vector<std::string> default_labels(std::size_t n) {
  switch (n) {
    case 0: return {};
    case 1: return {"A"};
    case 2: return {"A", "B"};
    case 4: return {"A", "A'", "B", "B'"};
    default: throw FileError("no default labels for " + std::to_string(n) + " subsystems; give in_labels/out_labels");
  }
}

namespace {

DimSpec dims_from(const json& j, const char* dims_key, const char* labels_key, const std::string& origin) {
  if (!j.contains(dims_key) || !j[dims_key].is_array()) throw FileError(origin + ": missing array '" + dims_key + "'");
  std::vector<int> dims;
  for (const auto& d : j[dims_key]) {
    if (!d.is_number_integer() || d.get<int>() < 1) throw FileError(origin + ": dims must be positive integers");
    dims.push_back(d.get<int>());
  }
  std::vector<std::string> labels;
  if (j.contains(labels_key)) {
    labels = j[labels_key].get<std::vector<std::string>>();
    if (labels.size() != dims.size()) throw FileError(origin + ": '" + labels_key + "' does not match dims");
  } else {
    labels = default_labels(dims.size());
  }
  std::vector<Subsystem> subs;
  for (std::size_t i = 0; i < dims.size(); ++i) subs.push_back({labels[i], dims[i]});
  return DimSpec(subs);
}

}  // namespace

json matrix_to_json(const CMat& m) {
  json entries = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

CMat matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("entries"))
    throw FileError(what + ": matrix needs 'rows' and 'entries'");
  const auto rows = j["rows"].get<Eigen::Index>();
  const auto& e = j["entries"];
  if (rows < 1 || !e.is_array()) throw FileError(what + ": bad matrix");
  const Eigen::Index cols = j.contains("cols") ? j["cols"].get<Eigen::Index>() : rows;
  if (static_cast<Eigen::Index>(e.size()) != rows * cols)
    throw FileError(what + ": expected " + std::to_string(rows * cols) + " entries, found " + std::to_string(e.size()));
  CMat m(rows, cols);
  for (Eigen::Index k = 0; k < rows * cols; ++k) {
    const auto& p = e[k];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw FileError(what + ": entries must be [re, im] pairs");
    m(k / cols, k % cols) = cplx(p[0].get<double>(), p[1].get<double>());
  }
  return m;
}

ChannelFile parse_channel(const json& j, const std::string& origin) {
  if (!j.is_object()) throw FileError(origin + ": top level must be an object");
  ChannelFile f;
  f.name = j.value("name", std::string{});
  f.description = j.value("description", std::string{});
  const DimSpec in = dims_from(j, "in_dims", "in_labels", origin);
  const DimSpec out = dims_from(j, "out_dims", "out_labels", origin);
  const bool has_choi = j.contains("choi"), has_kraus = j.contains("kraus");
  if (has_choi == has_kraus) throw FileError(origin + ": exactly one of 'choi' and 'kraus' is required");
  try {
    if (has_choi) {
      f.channel = ChoiChannel(in, out, matrix_from_json(j["choi"], origin + ": choi"));
    } else {
      std::vector<CMat> ops;
      for (const auto& k : j["kraus"]) ops.push_back(matrix_from_json(k, origin + ": kraus"));
      f.channel = choi_from_kraus(ops, in, out);
    }
  } catch (const FileError&) {
    throw;
  } catch (const InputError& e) {
    throw FileError(origin + ": " + e.what());
  }
  for (const auto& [key, value] : j.items())
    if (key != "name" && key != "description" && key != "in_dims" && key != "out_dims" && key != "in_labels" &&
        key != "out_labels" && key != "choi" && key != "kraus")
      f.extra[key] = value;
  return f;
}

json to_json(const ChannelFile& f) {
  const auto& ch = f.channel;
  json j = {{"name", f.name},
            {"description", f.description},
            {"in_dims", ch.in_dims().dims()},
            {"out_dims", ch.out_dims().dims()},
            {"in_labels", ch.in_dims().labels()},
            {"out_labels", ch.out_dims().labels()}};
  json choi = matrix_to_json(ch.choi());
  choi.erase("cols");
  j["choi"] = choi;
  for (const auto& [key, value] : f.extra.items()) j[key] = value;
  return j;
}

ChannelFile read_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open channel file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FileError("'" + path + "' is not valid JSON: " + e.what());
  }
  try {
    auto f = parse_channel(j, path);
    if (f.name.empty()) f.name = path;
    return f;
  } catch (const json::exception& e) {
    throw FileError(path + ": " + e.what());
  }
}

void write_channel(const std::string& path, const ChannelFile& f) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write '" + path + "'");
  out << to_json(f).dump(1) << '\n';
}

}  // namespace entcost::app
