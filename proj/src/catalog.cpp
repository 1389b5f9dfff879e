#include "pdlsl/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pdlsl/errors.hpp"

namespace pdlsl {

namespace {

const char* const kSortNames[] = {"Articulator", "Direction", "Place",
                                  "Config", "Posture"};
const char* const kDirNames[] = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void check_unique(const std::vector<std::string>& ids, const char* what,
                  const std::string& origin) {
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end())
    throw DataError(origin + ": duplicate " + what + " id '" + *dup + "'");
}

}  // namespace

const char* sort_name(Sort s) { return kSortNames[static_cast<int>(s)]; }

std::optional<Sort> sort_from_name(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kSortNames[i]) return static_cast<Sort>(i);
  return std::nullopt;
}

const char* direction_name(Direction d) {
  return kDirNames[static_cast<int>(d)];
}

std::optional<Direction> direction_from_name(const std::string& name) {
  for (int i = 0; i < kDirectionCount; ++i)
    if (name == kDirNames[i]) return static_cast<Direction>(i);
  return std::nullopt;
}

Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 4) % kDirectionCount);
}

std::optional<Direction> sector_of(double dx, double dy) {
  if (dx == 0.0 && dy == 0.0) return std::nullopt;
  // Flip y so angles follow the usual counterclockwise convention with N up.
  double deg = std::atan2(-dy, dx) * 180.0 / M_PI;  // (-180, 180]
  int k = static_cast<int>(std::floor((deg + 22.5) / 45.0));
  k = ((k % 8) + 8) % 8;
  // Enum order matches 45-degree steps counterclockwise from E.
  return static_cast<Direction>(k);
}

bool Catalogs::has_articulator(const std::string& id) const {
  return std::find(articulators.begin(), articulators.end(), id) !=
         articulators.end();
}

bool Catalogs::has_place(const std::string& id) const {
  return std::find(places.begin(), places.end(), id) != places.end();
}

bool Catalogs::has_config(const std::string& id) const {
  return std::find(configs.begin(), configs.end(), id) != configs.end();
}

std::string Catalogs::canonical_text() const {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += v[i];
    }
    return s;
  };
  std::string dirs;
  for (size_t i = 0; i < directions.size(); ++i) {
    if (i) dirs += ",";
    dirs += direction_name(directions[i]);
  }
  return "articulators=" + join(articulators) + "\ndirections=" + dirs +
         "\nplaces=" + join(places) + "\nconfigs=" + join(configs) + "\n";
}

std::uint64_t Catalogs::hash() const {
  // FNV-1a.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Catalogs Catalogs::defaults() {
  Catalogs c;
  c.articulators = {"RH", "LH", "HEAD"};
  c.directions = {Direction::E,  Direction::NE, Direction::N, Direction::NW,
                  Direction::W,  Direction::SW, Direction::S, Direction::SE};
  c.places = {"HEAD",         "TORSE",         "CENTEROFBODY",
              "L_SIDEOFBODY", "R_SIDEOFBODY",  "L_SIDEOFHEAD",
              "R_SIDEOFHEAD"};
  c.configs = {"L_FORM",      "FIST_FORM",   "L_CONFIG",
               "KEY_CONFIG",  "BEAK_CONFIG", "OPENPALM_CONFIG"};
  return c;
}

Catalogs Catalogs::parse(const std::string& text, const std::string& origin) {
  Catalogs c;
  std::string body = trim(text);
  if (!body.empty() && body[0] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(origin + ": bad JSON catalog: " + e.what());
    }
    for (const auto& a : j.value("articulators", nlohmann::json::array()))
      c.articulators.push_back(a.get<std::string>());
    for (const auto& d : j.value("directions", nlohmann::json::array())) {
      auto dir = direction_from_name(d.get<std::string>());
      if (!dir)
        throw DataError(origin + ": unknown direction '" +
                        d.get<std::string>() + "'");
      c.directions.push_back(*dir);
    }
    for (const auto& p : j.value("places", nlohmann::json::array()))
      c.places.push_back(p.get<std::string>());
    for (const auto& f : j.value("configs", nlohmann::json::array()))
      c.configs.push_back(f.get<std::string>());
  } else {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw DataError(origin + ": expected 'key = values' line, got '" +
                        line + "'");
      std::string key = trim(line.substr(0, eq));
      auto values = split_list(line.substr(eq + 1));
      if (key == "articulators") {
        c.articulators = values;
      } else if (key == "directions") {
        for (const auto& v : values) {
          auto dir = direction_from_name(v);
          if (!dir) throw DataError(origin + ": unknown direction '" + v + "'");
          c.directions.push_back(*dir);
        }
      } else if (key == "places") {
        c.places = values;
      } else if (key == "configs") {
        c.configs = values;
      } else {
        throw DataError(origin + ": unknown catalog key '" + key + "'");
      }
    }
  }
  if (c.articulators.empty())
    throw DataError(origin + ": catalog declares no articulators");
  if (c.directions.empty()) {
    for (int i = 0; i < kDirectionCount; ++i)
      c.directions.push_back(static_cast<Direction>(i));
  }
  check_unique(c.articulators, "articulator", origin);
  check_unique(c.places, "place", origin);
  check_unique(c.configs, "config", origin);
  return c;
}

Catalogs Catalogs::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace pdlsl
