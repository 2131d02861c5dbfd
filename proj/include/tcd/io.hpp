#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcd/axial2d.hpp"
#include "tcd/cart3d.hpp"
#include "tcd/radial.hpp"

namespace tcd {

inline constexpr const char* kCodeVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Key/value configuration with [section] headers.  Errors carry the offending
// field path ("section.key") so misconfigurations are actionable.
// ---------------------------------------------------------------------------

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "");

  bool has(const std::string& path) const;
  std::string get_str(const std::string& path, const std::string& fallback) const;
  double get_num(const std::string& path, double fallback) const;
  int get_int(const std::string& path, int fallback) const;
  bool get_bool(const std::string& path, bool fallback) const;
  std::vector<double> get_list(const std::string& path,
                               const std::vector<double>& fallback) const;

  // All keys, as "section.key" -> raw value, sorted (the canonical form).
  const std::map<std::string, std::string>& entries() const { return entries_; }
  // FNV-1a over the canonical "section.key=value\n" serialization.
  std::uint64_t hash() const;
  // Reject keys outside the known schema; throws ConfigError.
  void check_known_keys() const;

 private:
  std::map<std::string, std::string> entries_;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class RunMode { kStationary, kCollide1D, kCollide2D, kCollide3D, kSweep };

const char* run_mode_name(RunMode m);

struct RunConfig {
  RunMode mode = RunMode::kStationary;
  std::string lane = "1d";  // sweep lane: 1d | 2d | 3d
  std::string tier = "desk";

  double z_target = 92.0;
  double z_proj = 92.0;
  NuclearModel model = NuclearModel::kPoint;
  double mev_per_u = 6.0;

  std::vector<double> b_fm;  // filled with tier defaults when empty
  int steps = 0;             // 0 = tier default
  bool with_pbar = true;
  int timeseries_stride = 0;

  RadialGridParams grid1d;  // zeros = per-Z defaults
  AxialGrid grid2d;
  double z_target_2d_fm = -5000.0;
  CartGrid grid3d;

  std::string out_dir = ".";
  std::string checkpoint_write_path;
  int checkpoint_write_step = -1;
  std::string checkpoint_resume_path;

  std::uint64_t config_hash = 0;

  // Parse + validate; tier/out overrides come from the command line.
  static RunConfig load(const Config& cfg, RunMode mode,
                        const std::string& tier_override = "",
                        const std::string& out_override = "");
  void validate() const;          // throws ConfigError with field paths
  void apply_tier_defaults();     // fills steps/b list per mode + tier
};

// ---------------------------------------------------------------------------
// Result tables: CSV (RFC 4180, '#' provenance preamble), JSON mirror,
// whitespace plot data.  All writers embed provenance.
// ---------------------------------------------------------------------------

struct Provenance {
  std::uint64_t config_hash = 0;
  std::string code_version = kCodeVersion;
};

struct Table {
  std::vector<std::string> columns;
  // A cell is numeric, text, or absent (null).
  struct Cell {
    std::optional<double> num;
    std::optional<std::string> text;
    Cell() = default;
    Cell(double v) : num(v) {}
    Cell(const std::string& s) : text(s) {}
    Cell(const char* s) : text(std::string(s)) {}
    bool null() const { return !num && !text; }
  };
  std::vector<std::vector<Cell>> rows;
};

std::string csv_quote(const std::string& field);
void write_table_csv(const std::string& path, const Table& t, const Provenance& p);
void write_table_json(const std::string& path, const Table& t, const Provenance& p);
void write_series_csv(const std::string& path, const std::vector<TimePoint>& series,
                      const Provenance& p);
void write_plot_data(const std::string& path,
                     const std::vector<std::pair<double, double>>& xy,
                     const Provenance& p);
std::vector<std::pair<double, double>> read_plot_data(const std::string& path);

// ---------------------------------------------------------------------------
// Binary checkpoints: fixed header (magic, version, grid descriptor, time,
// step index) followed by the raw little-endian complex state vector.
// Loading refuses files whose descriptor mismatches the expectation.
// ---------------------------------------------------------------------------

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridDescriptor {
  std::uint32_t mode = 0;  // 1 = radial, 2 = axial, 3 = cartesian
  std::array<std::int32_t, 4> dims{};
  std::array<double, 6> extents{};
  bool operator==(const GridDescriptor&) const = default;
};

GridDescriptor axial_descriptor(const AxialGrid& g, double z_target_fm);
GridDescriptor cart_descriptor(const CartGrid& g);

struct CheckpointData {
  GridDescriptor grid;
  std::int64_t step = 0;
  double time = 0.0;
  Eigen::VectorXcd state;
};

void checkpoint_save(const std::string& path, const GridDescriptor& grid,
                     std::int64_t step, double time, const Eigen::VectorXcd& state);
CheckpointData checkpoint_load(const std::string& path);
CheckpointData checkpoint_load(const std::string& path, const GridDescriptor& expect);

}  // namespace tcd
