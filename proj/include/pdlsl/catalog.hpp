#pragma once

// Sort catalogs and the eight-sector direction algebra shared by every stage.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdlsl {

enum class Sort { Articulator, Direction, Place, Config, Posture };

const char* sort_name(Sort s);
std::optional<Sort> sort_from_name(const std::string& name);

// Image-plane compass directions from the annotator's viewpoint, in y-down
// pixel coordinates (N is up on screen). Enum order is the canonical
// expansion order used by the `moves` macro.
enum class Direction { E, NE, N, NW, W, SW, S, SE };

inline constexpr int kDirectionCount = 8;

const char* direction_name(Direction d);
std::optional<Direction> direction_from_name(const std::string& name);

// Involution: opposite(opposite(d)) == d.
Direction opposite(Direction d);

// Sector of a nonzero displacement (dx, dy), y-down coordinates. Sectors are
// 45 degrees wide and centred on the compass directions; a boundary angle
// belongs to the counterclockwise neighbour. The zero vector has no sector.
std::optional<Direction> sector_of(double dx, double dy);

// The symbol universe formulas and models are built over. Ids are unique per
// sort; comparison is by id.
struct Catalogs {
  std::vector<std::string> articulators;
  std::vector<Direction> directions;
  std::vector<std::string> places;
  std::vector<std::string> configs;

  bool has_articulator(const std::string& id) const;
  bool has_place(const std::string& id) const;
  bool has_config(const std::string& id) const;

  // Stable textual form; basis for the hash embedded in model metadata.
  std::string canonical_text() const;
  std::uint64_t hash() const;

  static Catalogs defaults();
  // Accepts the key/value text format or a JSON object with the same keys.
  static Catalogs parse(const std::string& text,
                        const std::string& origin = "<catalog>");
  static Catalogs load_file(const std::string& path);
};

}  // namespace pdlsl
