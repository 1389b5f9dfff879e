#include "pdlsl/trace.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pdlsl/errors.hpp"

namespace pdlsl {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) return std::nullopt;
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') return std::nullopt;
  return v;
}

struct ColumnPlan {
  int frame = -1;
  int t_ms = -1;
  int scale = -1;
  struct ArtCols {
    int x = -1, y = -1, z = -1, cfg = -1;
  };
  std::map<std::string, ArtCols> arts;  // articulator id -> columns
  bool has_z = false;
};

ColumnPlan plan_columns(const std::vector<std::string>& header,
                        const std::string& origin, const Catalogs& catalogs) {
  ColumnPlan plan;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    int idx = static_cast<int>(i);
    if (h == "frame") {
      plan.frame = idx;
      continue;
    }
    if (h == "t_ms") {
      plan.t_ms = idx;
      continue;
    }
    if (h == "scale" || h == "HEAD_w") {
      plan.scale = idx;
      continue;
    }
    auto us = h.rfind('_');
    if (us == std::string::npos || us == 0 || us + 1 >= h.size())
      throw DataError(origin + ": unrecognized column '" + h + "'");
    std::string art = h.substr(0, us);
    std::string suffix = h.substr(us + 1);
    if (suffix != "x" && suffix != "y" && suffix != "z" && suffix != "cfg")
      throw DataError(origin + ": unrecognized column '" + h + "'");
    if (!catalogs.has_articulator(art))
      throw DataError(origin + ": unknown articulator column '" + h + "'");
    auto& cols = plan.arts[art];
    if (suffix == "x") cols.x = idx;
    else if (suffix == "y") cols.y = idx;
    else if (suffix == "z") {
      cols.z = idx;
      plan.has_z = true;
    } else {
      cols.cfg = idx;
    }
  }
  if (plan.frame < 0 || plan.t_ms < 0)
    throw DataError(origin + ": missing header (need 'frame' and 't_ms')");
  for (const auto& [art, cols] : plan.arts)
    if (cols.x < 0 || cols.y < 0)
      throw DataError(origin + ": articulator '" + art +
                      "' needs both _x and _y columns");
  if (plan.arts.empty())
    throw DataError(origin + ": no articulator columns declared");
  return plan;
}

void finalize(Trace& t, const std::string& origin) {
  if (t.frames.empty()) throw DataError(origin + ": zero frames");
  for (size_t i = 0; i < t.frames.size(); ++i) {
    t.frames[i].index = static_cast<int>(i);
    if (t.frames[i].scale <= 0.0)
      throw DataError(origin + ": non-positive body scale at frame " +
                      std::to_string(i));
    if (i > 0 && t.frames[i].t_ms <= t.frames[i - 1].t_ms)
      throw DataError(origin + ": non-monotone timestamps at frame " +
                      std::to_string(i));
  }
  if (t.frames.size() > 1) {
    double span = t.frames.back().t_ms - t.frames.front().t_ms;
    t.frame_rate = 1000.0 * static_cast<double>(t.frames.size() - 1) / span;
  }
}

}  // namespace

Trace parse_trace_csv(const std::string& text, const std::string& origin,
                      const TraceLoadOptions& opts, const Catalogs& catalogs) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line))
    throw DataError(origin + ": missing header (empty file)");
  ColumnPlan plan = plan_columns(split_csv_line(line), origin, catalogs);

  Trace t;
  t.source = origin;
  t.dims = plan.has_z ? 3 : 2;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    auto cell = [&](int idx) -> std::string {
      return idx >= 0 && idx < static_cast<int>(cells.size()) ? cells[idx]
                                                              : "";
    };
    Frame f;
    auto time = parse_number(cell(plan.t_ms));
    if (!time)
      throw DataError(origin + ": bad t_ms value '" + cell(plan.t_ms) +
                      "' at data row " + std::to_string(t.frames.size() + 1));
    f.t_ms = *time;
    f.scale = opts.default_scale;
    if (plan.scale >= 0)
      if (auto s = parse_number(cell(plan.scale))) f.scale = *s;
    for (const auto& [art, cols] : plan.arts) {
      auto x = parse_number(cell(cols.x));
      auto y = parse_number(cell(cols.y));
      std::optional<double> z;
      bool z_ok = true;
      if (cols.z >= 0) {
        z = parse_number(cell(cols.z));
        z_ok = z.has_value();
      }
      if (x && y && z_ok)
        f.positions[art] = Position{*x, *y, z.value_or(0.0)};
      std::string label = cell(cols.cfg);
      if (!label.empty()) {
        if (!catalogs.has_config(label))
          throw DataError(origin + ": unknown config label '" + label +
                          "' for " + art);
        f.config_labels[art] = label;
      }
    }
    t.frames.push_back(std::move(f));
  }
  finalize(t, origin);
  return t;
}

Trace parse_trace_json(const std::string& text, const std::string& origin,
                       const TraceLoadOptions& opts, const Catalogs& catalogs) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ": bad JSON trace: " + e.what());
  }
  if (!j.is_array()) throw DataError(origin + ": JSON trace must be an array");

  Trace t;
  t.source = origin;
  bool has_z = false;
  for (const auto& row : j) {
    if (!row.is_object())
      throw DataError(origin + ": JSON trace rows must be objects");
    if (!row.contains("t_ms") || !row.contains("frame"))
      throw DataError(origin + ": missing header (rows need frame and t_ms)");
    Frame f;
    f.t_ms = row["t_ms"].get<double>();
    f.scale = opts.default_scale;
    if (row.contains("scale") && row["scale"].is_number())
      f.scale = row["scale"].get<double>();
    else if (row.contains("HEAD_w") && row["HEAD_w"].is_number())
      f.scale = row["HEAD_w"].get<double>();
    for (const std::string& art : catalogs.articulators) {
      auto num = [&](const std::string& key) -> std::optional<double> {
        auto it = row.find(key);
        if (it == row.end() || !it->is_number()) return std::nullopt;
        return it->get<double>();
      };
      auto x = num(art + "_x");
      auto y = num(art + "_y");
      auto z = num(art + "_z");
      if (row.contains(art + "_z")) has_z = true;
      bool z_ok = !row.contains(art + "_z") || z.has_value();
      if (x && y && z_ok) f.positions[art] = Position{*x, *y, z.value_or(0.0)};
      auto lbl = row.find(art + "_cfg");
      if (lbl != row.end() && lbl->is_string()) {
        std::string label = lbl->get<std::string>();
        if (!catalogs.has_config(label))
          throw DataError(origin + ": unknown config label '" + label +
                          "' for " + art);
        f.config_labels[art] = label;
      }
    }
    t.frames.push_back(std::move(f));
  }
  t.dims = has_z ? 3 : 2;
  finalize(t, origin);
  return t;
}

Trace load_trace(const std::string& path, const TraceLoadOptions& opts,
                 const Catalogs& catalogs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  std::string format = opts.format;
  if (format == "auto") {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
      format = "json";
    else if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
      format = "csv";
    else {
      auto first = text.find_first_not_of(" \t\r\n");
      format = (first != std::string::npos && text[first] == '[') ? "json"
                                                                  : "csv";
    }
  }
  if (format == "json") return parse_trace_json(text, path, opts, catalogs);
  if (format == "csv") return parse_trace_csv(text, path, opts, catalogs);
  throw DataError("unknown trace format '" + format + "'");
}

Trace project_2d(const Trace& t) {
  if (t.dims != 3)
    throw DataError("project_2d needs a 3D trace (dims=" +
                    std::to_string(t.dims) + ")");
  Trace out = t;
  out.dims = 2;
  for (auto& f : out.frames)
    for (auto& [art, pos] : f.positions) pos.z = 0.0;
  return out;
}

Trace fill_gaps(const Trace& t, int max_gap) {
  if (max_gap < 0) throw DataError("max_gap must be >= 0");
  Trace out = t;
  if (max_gap == 0 || out.frames.size() < 3) return out;

  std::set<std::string> arts;
  for (const auto& f : out.frames)
    for (const auto& [a, p] : f.positions) arts.insert(a);

  const int n = static_cast<int>(out.frames.size());
  for (const auto& art : arts) {
    int prev_known = -1;
    for (int i = 0; i < n; ++i) {
      if (!out.frames[i].position_of(art)) continue;
      if (prev_known >= 0 && i - prev_known > 1 &&
          i - prev_known - 1 <= max_gap) {
        const Position a = *out.frames[prev_known].position_of(art);
        const Position b = *out.frames[i].position_of(art);
        for (int k = prev_known + 1; k < i; ++k) {
          double u = static_cast<double>(k - prev_known) /
                     static_cast<double>(i - prev_known);
          out.frames[k].positions[art] =
              Position{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y),
                       a.z + u * (b.z - a.z)};
        }
      }
      prev_known = i;
    }
  }
  return out;
}

}  // namespace pdlsl
