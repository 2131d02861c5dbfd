#include "tcd/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tcd {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Shortest decimal form that round-trips a double.
std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const std::string where = origin.empty() ? "config" : origin;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where + ":" + std::to_string(lineno) +
                          ": malformed section header '" + line + "'");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty())
        throw ConfigError(where + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(where + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError(where + ":" + std::to_string(lineno) + ": key '" + key +
                        "' outside any [section]");
    const std::string path = section + "." + key;
    if (cfg.entries_.count(path))
      throw ConfigError(where + ":" + std::to_string(lineno) + ": duplicate key '" +
                        path + "'");
    cfg.entries_[path] = value;
  }
  return cfg;
}

bool Config::has(const std::string& path) const { return entries_.count(path) > 0; }

std::string Config::get_str(const std::string& path, const std::string& fallback) const {
  const auto it = entries_.find(path);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_num(const std::string& path, double fallback) const {
  const auto it = entries_.find(path);
  if (it == entries_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw ConfigError(path + ": expected a number, got '" + it->second + "'");
  return v;
}

int Config::get_int(const std::string& path, int fallback) const {
  const auto it = entries_.find(path);
  if (it == entries_.end()) return fallback;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw ConfigError(path + ": expected an integer, got '" + it->second + "'");
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& path, bool fallback) const {
  const auto it = entries_.find(path);
  if (it == entries_.end()) return fallback;
  const std::string v = lower(it->second);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(path + ": expected a boolean, got '" + it->second + "'");
}

std::vector<double> Config::get_list(const std::string& path,
                                     const std::vector<double>& fallback) const {
  const auto it = entries_.find(path);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::string item;
  std::istringstream in(it->second);
  while (std::getline(in, item, ',')) {
    std::istringstream sub(item);
    std::string tok;
    while (sub >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw ConfigError(path + ": expected a number list, got '" + it->second + "'");
      out.push_back(v);
    }
  }
  if (out.empty())
    throw ConfigError(path + ": expected a non-empty number list");
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : entries_) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  return h;
}

void Config::check_known_keys() const {
  static const std::set<std::string> known = {
      "run.mode", "run.lane", "run.tier", "run.out",
      "system.z_target", "system.z_projectile", "system.model",
      "system.energy_mev_u",
      "collision.b_fm", "collision.steps", "collision.with_pbar",
      "collision.timeseries_stride",
      "grid1d.r_min", "grid1d.r_max", "grid1d.n_tail", "grid1d.eta", "grid1d.xi",
      "grid2d.rho_max_fm", "grid2d.z_min_fm", "grid2d.z_max_fm", "grid2d.n_rho",
      "grid2d.n_z", "grid2d.z_target_fm",
      "grid3d.lx_fm", "grid3d.ly_fm", "grid3d.lz_fm", "grid3d.nx_splines",
      "grid3d.ny_splines", "grid3d.nz_splines", "grid3d.z_target_fm",
      "checkpoint.write_path", "checkpoint.write_at_step", "checkpoint.resume_path",
  };
  for (const auto& [k, v] : entries_)
    if (!known.count(k)) throw ConfigError(k + ": unknown configuration key");
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::kStationary: return "stationary";
    case RunMode::kCollide1D: return "collide1d";
    case RunMode::kCollide2D: return "collide2d";
    case RunMode::kCollide3D: return "collide3d";
    case RunMode::kSweep: return "sweep";
  }
  return "?";
}

RunConfig RunConfig::load(const Config& cfg, RunMode mode,
                          const std::string& tier_override,
                          const std::string& out_override) {
  cfg.check_known_keys();
  RunConfig rc;
  rc.mode = mode;
  rc.lane = lower(cfg.get_str("run.lane", "1d"));
  rc.tier = lower(cfg.get_str("run.tier", "desk"));
  if (!tier_override.empty()) rc.tier = lower(tier_override);
  rc.out_dir = cfg.get_str("run.out", ".");
  if (!out_override.empty()) rc.out_dir = out_override;

  rc.z_target = cfg.get_num("system.z_target", 92.0);
  rc.z_proj = cfg.get_num("system.z_projectile", 92.0);
  const std::string model = lower(cfg.get_str("system.model", "point"));
  if (model == "point")
    rc.model = NuclearModel::kPoint;
  else if (model == "sphere")
    rc.model = NuclearModel::kSphere;
  else
    throw ConfigError("system.model: expected 'point' or 'sphere', got '" + model + "'");
  rc.mev_per_u = cfg.get_num("system.energy_mev_u", 6.0);

  rc.b_fm = cfg.get_list("collision.b_fm", {});
  rc.steps = cfg.get_int("collision.steps", 0);
  rc.with_pbar = cfg.get_bool("collision.with_pbar", true);
  rc.timeseries_stride = cfg.get_int("collision.timeseries_stride", 0);

  rc.grid1d.r_min = cfg.get_num("grid1d.r_min", 0.0);
  rc.grid1d.r_max = cfg.get_num("grid1d.r_max", 0.0);
  rc.grid1d.n_tail = cfg.get_int("grid1d.n_tail", 97);
  rc.grid1d.eta = cfg.get_num("grid1d.eta", 0.0);
  rc.grid1d.xi = cfg.get_num("grid1d.xi", 1.0);

  rc.grid2d.rho_max_fm = cfg.get_num("grid2d.rho_max_fm", 5000.0);
  rc.grid2d.z_min_fm = cfg.get_num("grid2d.z_min_fm", -10000.0);
  rc.grid2d.z_max_fm = cfg.get_num("grid2d.z_max_fm", 10000.0);
  rc.z_target_2d_fm = cfg.get_num("grid2d.z_target_fm", -5000.0);

  rc.grid3d.lx_fm = cfg.get_num("grid3d.lx_fm", 6900.0);
  rc.grid3d.ly_fm = cfg.get_num("grid3d.ly_fm", 6900.0);
  rc.grid3d.lz_fm = cfg.get_num("grid3d.lz_fm", 13800.0);
  rc.grid3d.z_target_fm = cfg.get_num("grid3d.z_target_fm", -3450.0);

  // Grid sizes are configured in splines per direction (2 per interior node).
  const auto splines_to_nodes = [](int splines, const char* path) {
    if (splines < 4 || splines % 2 != 0)
      throw ConfigError(std::string(path) +
                        ": spline count must be an even number >= 4");
    return splines / 2 + 2;
  };
  const bool paper = rc.tier == "paper";
  rc.grid2d.n_rho = cfg.get_int("grid2d.n_rho", paper ? 26 : 11);
  rc.grid2d.n_z = cfg.get_int("grid2d.n_z", paper ? 100 : 40);
  rc.grid3d.nx_nodes = splines_to_nodes(
      cfg.get_int("grid3d.nx_splines", paper ? 40 : 16), "grid3d.nx_splines");
  rc.grid3d.ny_nodes = splines_to_nodes(
      cfg.get_int("grid3d.ny_splines", paper ? 40 : 16), "grid3d.ny_splines");
  rc.grid3d.nz_nodes = splines_to_nodes(
      cfg.get_int("grid3d.nz_splines", paper ? 80 : 32), "grid3d.nz_splines");

  rc.checkpoint_write_path = cfg.get_str("checkpoint.write_path", "");
  rc.checkpoint_write_step = cfg.get_int("checkpoint.write_at_step", -1);
  rc.checkpoint_resume_path = cfg.get_str("checkpoint.resume_path", "");

  rc.config_hash = cfg.hash();
  rc.apply_tier_defaults();
  rc.validate();
  return rc;
}

void RunConfig::apply_tier_defaults() {
  const bool paper = tier == "paper";
  if (b_fm.empty()) {
    if (mode == RunMode::kSweep && (lane == "2d" || lane == "3d"))
      b_fm = {25.0, 47.6, 75.0};
    else
      b_fm = {15.0, 20.0, 30.0, 40.0, 50.0};
  }
  if (steps <= 0) {
    switch (mode) {
      case RunMode::kStationary: steps = 0; break;
      case RunMode::kCollide1D: steps = paper ? 20000 : 8000; break;
      case RunMode::kCollide2D: steps = paper ? 15000 : 400; break;
      case RunMode::kCollide3D: steps = paper ? 1024 : 256; break;
      case RunMode::kSweep:
        if (lane == "1d") steps = paper ? 20000 : 8000;
        else if (lane == "2d") steps = paper ? 15000 : 400;
        else steps = paper ? 1024 : 256;
        break;
    }
  }
}

void RunConfig::validate() const {
  if (tier != "desk" && tier != "paper")
    throw ConfigError("run.tier: expected 'desk' or 'paper', got '" + tier + "'");
  if (mode == RunMode::kSweep && lane != "1d" && lane != "2d" && lane != "3d")
    throw ConfigError("run.lane: expected '1d', '2d' or '3d', got '" + lane + "'");
  if (z_target <= 0.0 || z_target >= kSpeedOfLight)
    throw ConfigError("system.z_target: must be in (0, " +
                      std::to_string(kSpeedOfLight) + ")");
  if (z_proj < 0.0)
    throw ConfigError("system.z_projectile: must be >= 0");
  if (mev_per_u <= 0.0)
    throw ConfigError("system.energy_mev_u: must be positive");
  for (double b : b_fm)
    if (b < 0.0)
      throw ConfigError("collision.b_fm: impact parameters must be non-negative, got " +
                        format_double(b));
  if (mode != RunMode::kStationary && steps < 2)
    throw ConfigError("collision.steps: must be >= 2");
  if (timeseries_stride < 0)
    throw ConfigError("collision.timeseries_stride: must be >= 0");
  if (grid1d.n_tail < 3)
    throw ConfigError("grid1d.n_tail: must be >= 3");
  if (grid2d.n_rho < 2 || grid2d.n_z < 2)
    throw ConfigError("grid2d.n_rho/n_z: must be >= 2");
  if (grid2d.z_min_fm >= grid2d.z_max_fm)
    throw ConfigError("grid2d.z_min_fm: must be below grid2d.z_max_fm");
  if (z_target_2d_fm <= grid2d.z_min_fm || z_target_2d_fm >= grid2d.z_max_fm)
    throw ConfigError("grid2d.z_target_fm: target must sit inside the z box");
  if (grid3d.lx_fm <= 0 || grid3d.ly_fm <= 0 || grid3d.lz_fm <= 0)
    throw ConfigError("grid3d.lx_fm/ly_fm/lz_fm: box extents must be positive");
  if (std::abs(grid3d.z_target_fm) >= 0.5 * grid3d.lz_fm)
    throw ConfigError("grid3d.z_target_fm: target must sit inside the z box");
  if (checkpoint_write_step >= 0 && checkpoint_write_path.empty())
    throw ConfigError("checkpoint.write_path: required when write_at_step is set");
}

// ---------------------------------------------------------------------------
// Table writers
// ---------------------------------------------------------------------------

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

namespace {

void write_provenance_comments(std::ofstream& out, const Provenance& p) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(p.config_hash));
  out << "# config_hash=" << hash << "\n";
  out << "# code_version=" << p.code_version << "\n";
  out << "# c_au=" << format_double(kSpeedOfLight) << "\n";
  out << "# fm_per_au=" << format_double(kFmPerAu) << "\n";
  out << "# amu_mev=" << format_double(kAmuC2MeV) << "\n";
}

nlohmann::json provenance_json(const Provenance& p) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(p.config_hash));
  return nlohmann::json{{"config_hash", hash},
                        {"code_version", p.code_version},
                        {"constants",
                         {{"c_au", kSpeedOfLight},
                          {"fm_per_au", kFmPerAu},
                          {"amu_mev", kAmuC2MeV}}}};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: deterministic newlines
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_table_csv(const std::string& path, const Table& t, const Provenance& p) {
  std::ofstream out = open_out(path);
  write_provenance_comments(out, p);
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    out << (i ? "," : "") << csv_quote(t.columns[i]);
  out << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (row[i].num) out << format_double(*row[i].num);
      else if (row[i].text) out << csv_quote(*row[i].text);
    }
    out << "\r\n";
  }
}

void write_table_json(const std::string& path, const Table& t, const Provenance& p) {
  nlohmann::json j;
  j["provenance"] = provenance_json(p);
  j["columns"] = t.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) {
      if (cell.num) r.push_back(*cell.num);
      else if (cell.text) r.push_back(*cell.text);
      else r.push_back(nullptr);
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_series_csv(const std::string& path, const std::vector<TimePoint>& series,
                      const Provenance& p) {
  std::ofstream out = open_out(path);
  write_provenance_comments(out, p);
  out << "t_au,norm,energy_au\r\n";
  for (const auto& tp : series)
    out << format_double(tp.t) << "," << format_double(tp.norm) << ","
        << format_double(tp.energy) << "\r\n";
}

void write_plot_data(const std::string& path,
                     const std::vector<std::pair<double, double>>& xy,
                     const Provenance& p) {
  std::ofstream out = open_out(path);
  write_provenance_comments(out, p);
  out << "# b_fm  P_ct\n";
  for (const auto& [x, y] : xy)
    out << format_double(x) << "  " << format_double(y) << "\n";
}

std::vector<std::pair<double, double>> read_plot_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plot data file: " + path);
  std::vector<std::pair<double, double>> xy;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ss(t);
    double x = 0.0, y = 0.0;
    if (!(ss >> x >> y))
      throw std::runtime_error(path + ": malformed plot data line '" + line + "'");
    xy.emplace_back(x, y);
  }
  return xy;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kCkptMagic[8] = {'T', 'C', 'D', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCkptVersion = 1;

struct CkptHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t mode;
  std::int32_t dims[4];
  double extents[6];
  std::int64_t step;
  double time;
  std::uint64_t count;  // complex<double> entries
};
static_assert(sizeof(CkptHeader) == 8 + 4 + 4 + 16 + 48 + 8 + 8 + 8);

}  // namespace

GridDescriptor axial_descriptor(const AxialGrid& g, double z_target_fm) {
  GridDescriptor d;
  d.mode = 2;
  d.dims = {g.n_rho, g.n_z, 0, 0};
  d.extents = {g.rho_max_fm, g.z_min_fm, g.z_max_fm, z_target_fm, 0.0, 0.0};
  return d;
}

GridDescriptor cart_descriptor(const CartGrid& g) {
  GridDescriptor d;
  d.mode = 3;
  d.dims = {g.nx_nodes, g.ny_nodes, g.nz_nodes, 0};
  d.extents = {g.lx_fm, g.ly_fm, g.lz_fm, g.z_target_fm, 0.0, 0.0};
  return d;
}

void checkpoint_save(const std::string& path, const GridDescriptor& grid,
                     std::int64_t step, double time, const Eigen::VectorXcd& state) {
  CkptHeader h{};
  std::memcpy(h.magic, kCkptMagic, 8);
  h.version = kCkptVersion;
  h.mode = grid.mode;
  std::copy(grid.dims.begin(), grid.dims.end(), h.dims);
  std::copy(grid.extents.begin(), grid.extents.end(), h.extents);
  h.step = step;
  h.time = time;
  h.count = static_cast<std::uint64_t>(state.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  out.write(reinterpret_cast<const char*>(state.data()),
            static_cast<std::streamsize>(state.size() * sizeof(std::complex<double>)));
  if (!out) throw CheckpointError("short write to checkpoint: " + path);
}

CheckpointData checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  CkptHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!in || std::memcmp(h.magic, kCkptMagic, 8) != 0)
    throw CheckpointError(path + ": not a checkpoint file");
  if (h.version != kCkptVersion)
    throw CheckpointError(path + ": unsupported checkpoint version " +
                          std::to_string(h.version));
  CheckpointData d;
  d.grid.mode = h.mode;
  std::copy(h.dims, h.dims + 4, d.grid.dims.begin());
  std::copy(h.extents, h.extents + 6, d.grid.extents.begin());
  d.step = h.step;
  d.time = h.time;
  d.state.resize(static_cast<Eigen::Index>(h.count));
  in.read(reinterpret_cast<char*>(d.state.data()),
          static_cast<std::streamsize>(h.count * sizeof(std::complex<double>)));
  if (!in) throw CheckpointError(path + ": truncated checkpoint payload");
  return d;
}

CheckpointData checkpoint_load(const std::string& path, const GridDescriptor& expect) {
  CheckpointData d = checkpoint_load(path);
  if (!(d.grid == expect))
    throw CheckpointError(path + ": checkpoint grid descriptor does not match the run");
  return d;
}

}  // namespace tcd
