#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "tcd/io.hpp"

using namespace tcd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() / "tcd_io_test";
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("config parsing: sections, comments, trimming, types") {
  const Config c = Config::parse_string(
      "# leading comment\n"
      "[run]\n"
      "mode = sweep   # trailing comment\n"
      "tier=paper\n"
      "\n"
      "[collision]\n"
      "b_fm = 15, 20.5  30\n"
      "steps = 400\n"
      "with_pbar = off\n");
  CHECK(c.get_str("run.mode", "") == "sweep");
  CHECK(c.get_str("run.tier", "") == "paper");
  CHECK(c.get_int("collision.steps", 0) == 400);
  CHECK_FALSE(c.get_bool("collision.with_pbar", true));
  const auto list = c.get_list("collision.b_fm", {});
  REQUIRE(list.size() == 3);
  CHECK(list[0] == 15.0);
  CHECK(list[1] == 20.5);
  CHECK(list[2] == 30.0);
  CHECK(c.has("run.mode"));
  CHECK_FALSE(c.has("run.out"));
  CHECK(c.get_num("system.energy_mev_u", 6.0) == 6.0);  // fallback
}

TEST_CASE("config parsing rejects malformed input with located errors") {
  CHECK_THROWS_AS(Config::parse_string("key = 1\n"), ConfigError);       // no section
  CHECK_THROWS_AS(Config::parse_string("[run\nmode=x\n"), ConfigError);  // bad header
  CHECK_THROWS_AS(Config::parse_string("[run]\nmode\n"), ConfigError);   // no '='
  CHECK_THROWS_AS(Config::parse_string("[run]\nmode=a\nmode=b\n"), ConfigError);
  const Config c = Config::parse_string("[collision]\nsteps = soon\nb_fm = 1, x\n");
  CHECK_THROWS_WITH_AS(c.get_int("collision.steps", 0),
                       doctest::Contains("collision.steps"), ConfigError);
  CHECK_THROWS_AS(c.get_list("collision.b_fm", {}), ConfigError);
}

TEST_CASE("unknown keys are rejected, known schema passes") {
  CHECK_THROWS_WITH_AS(
      Config::parse_string("[system]\nz_traget = 92\n").check_known_keys(),
      doctest::Contains("z_traget"), ConfigError);
  Config::parse_string("[system]\nz_target = 92\n[grid3d]\nnx_splines = 16\n")
      .check_known_keys();
}

TEST_CASE("config hash depends on content only") {
  const Config a = Config::parse_string("[run]\nmode = sweep\n[system]\nz_target=92\n");
  const Config b = Config::parse_string("[system]\nz_target=92\n[run]\nmode=sweep\n");
  const Config c = Config::parse_string("[system]\nz_target=93\n[run]\nmode=sweep\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("run config applies tier defaults and validates with field paths") {
  const Config cfg = Config::parse_string("[run]\nlane = 2d\n");
  const RunConfig rc = RunConfig::load(cfg, RunMode::kSweep);
  CHECK(rc.steps == 400);                 // desk 2D default
  CHECK(rc.b_fm.size() == 3);             // desk 2D sweep default list
  const RunConfig rp = RunConfig::load(cfg, RunMode::kSweep, "paper");
  CHECK(rp.steps == 15000);
  CHECK(rp.grid2d.n_rho == 26);

  const Config bad = Config::parse_string("[collision]\nsteps = 1\n");
  CHECK_THROWS_WITH_AS(RunConfig::load(bad, RunMode::kCollide1D),
                       doctest::Contains("collision.steps"), ConfigError);
  const Config badb = Config::parse_string("[collision]\nb_fm = -3\n");
  CHECK_THROWS_WITH_AS(RunConfig::load(badb, RunMode::kCollide1D),
                       doctest::Contains("collision.b_fm"), ConfigError);
  const Config badg = Config::parse_string("[grid3d]\nnx_splines = 7\n");
  CHECK_THROWS_WITH_AS(RunConfig::load(badg, RunMode::kCollide3D),
                       doctest::Contains("grid3d.nx_splines"), ConfigError);
}

TEST_CASE("grid sizes are configured in splines and stored as node counts") {
  const Config cfg = Config::parse_string(
      "[grid3d]\nnx_splines = 16\nny_splines = 16\nnz_splines = 32\n");
  const RunConfig rc = RunConfig::load(cfg, RunMode::kCollide3D);
  CHECK(rc.grid3d.nx_nodes == 10);
  CHECK(rc.grid3d.ny_nodes == 10);
  CHECK(rc.grid3d.nz_nodes == 18);
  // Paper tier defaults: 40 x 40 x 80 splines = 512000 unknowns.
  const RunConfig rp = RunConfig::load(Config(), RunMode::kCollide3D, "paper");
  CHECK(rp.grid3d.nx_nodes == 22);
  CHECK(rp.grid3d.ny_nodes == 22);
  CHECK(rp.grid3d.nz_nodes == 42);
}

TEST_CASE("CSV writer quotes per RFC 4180 and embeds provenance") {
  TempDir tmp;
  Table t;
  t.columns = {"name", "value", "note"};
  t.rows.push_back({Table::Cell("plain"), Table::Cell(1.5), Table::Cell()});
  t.rows.push_back({Table::Cell("a,b"), Table::Cell(0.1), Table::Cell("say \"hi\"")});
  Provenance prov;
  prov.config_hash = 0xdeadbeef12345678ULL;
  const std::string path = tmp / "t.csv";
  write_table_csv(path, t, prov);
  const std::string text = slurp(path);
  CHECK(text.find("# config_hash=deadbeef12345678\n") != std::string::npos);
  CHECK(text.find("# c_au=137.035999\n") != std::string::npos);
  CHECK(text.find("name,value,note\r\n") != std::string::npos);
  CHECK(text.find("plain,1.5,\r\n") != std::string::npos);
  CHECK(text.find("\"a,b\",0.1,\"say \"\"hi\"\"\"\r\n") != std::string::npos);
  // Deterministic output: a second write is byte-identical.
  const std::string path2 = tmp / "t2.csv";
  write_table_csv(path2, t, prov);
  CHECK(slurp(path2) == text);
}

TEST_CASE("JSON mirror round-trips the table") {
  TempDir tmp;
  Table t;
  t.columns = {"b_fm", "p_ct"};
  t.rows.push_back({Table::Cell(47.6), Table::Cell(0.2131519)});
  t.rows.push_back({Table::Cell(75.0), Table::Cell()});
  Provenance prov;
  prov.config_hash = 7;
  const std::string path = tmp / "t.json";
  write_table_json(path, t, prov);
  const nlohmann::json j = nlohmann::json::parse(slurp(path));
  CHECK(j["columns"] == nlohmann::json({"b_fm", "p_ct"}));
  CHECK(j["rows"][0][1].get<double>() == doctest::Approx(0.2131519).epsilon(1e-15));
  CHECK(j["rows"][1][1].is_null());
  CHECK(j["provenance"]["config_hash"] == "0000000000000007");
  CHECK(j["provenance"]["constants"]["c_au"].get<double>() == 137.035999);
}

TEST_CASE("plot data round-trips exactly") {
  TempDir tmp;
  const std::vector<std::pair<double, double>> xy = {
      {15.0, 1.0 / 3.0}, {47.6, 0.21315190123456789}, {75.0, 1e-300}};
  const std::string path = tmp / "pct.dat";
  write_plot_data(path, xy, Provenance{});
  const auto back = read_plot_data(path);
  REQUIRE(back.size() == xy.size());
  for (std::size_t i = 0; i < xy.size(); ++i) {
    CHECK(back[i].first == xy[i].first);
    CHECK(back[i].second == xy[i].second);
  }
}

TEST_CASE("series CSV carries t, norm and energy") {
  TempDir tmp;
  const std::vector<TimePoint> s = {{-1.0, 1.0, -4861.0}, {0.0, 0.99999999, -5200.0}};
  const std::string path = tmp / "series.csv";
  write_series_csv(path, s, Provenance{});
  const std::string text = slurp(path);
  CHECK(text.find("t_au,norm,energy_au\r\n") != std::string::npos);
  CHECK(text.find("-1,1,-4861\r\n") != std::string::npos);
  // Shortest round-trip form: -5200 renders in exponent notation.
  CHECK(text.find("0,0.99999999,-5.2e+03\r\n") != std::string::npos);
}

TEST_CASE("checkpoints round-trip bit for bit and refuse mismatches") {
  TempDir tmp;
  GridDescriptor g;
  g.mode = 3;
  g.dims = {10, 10, 18, 0};
  g.extents = {6900.0, 6900.0, 13800.0, -3450.0, 0.0, 0.0};
  Eigen::VectorXcd state = Eigen::VectorXcd::Random(257);
  const std::string path = tmp / "run.ckpt";
  checkpoint_save(path, g, 128, 0.0421, state);

  const CheckpointData d = checkpoint_load(path, g);
  CHECK(d.step == 128);
  CHECK(d.time == 0.0421);
  REQUIRE(d.state.size() == state.size());
  CHECK((d.state - state).cwiseAbs().maxCoeff() == 0.0);  // exact

  GridDescriptor other = g;
  other.dims[2] = 20;
  CHECK_THROWS_AS(checkpoint_load(path, other), CheckpointError);
  GridDescriptor shifted = g;
  shifted.extents[3] = -3000.0;
  CHECK_THROWS_AS(checkpoint_load(path, shifted), CheckpointError);

  // Corrupt magic and truncated payload are both refused.
  const std::string bad = tmp / "bad.ckpt";
  std::ofstream(bad, std::ios::binary) << "NOTACKPT";
  CHECK_THROWS_AS(checkpoint_load(bad), CheckpointError);
  const std::string text = slurp(path);
  std::ofstream(tmp / "trunc.ckpt", std::ios::binary)
      << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(checkpoint_load(tmp / "trunc.ckpt"), CheckpointError);
}

TEST_CASE("checkpoint descriptors reflect the grids") {
  AxialGrid ag;
  const GridDescriptor da = axial_descriptor(ag, -5000.0);
  CHECK(da.mode == 2);
  CHECK(da.dims[0] == ag.n_rho);
  CHECK(da.extents[3] == -5000.0);
  CartGrid cg;
  const GridDescriptor dc = cart_descriptor(cg);
  CHECK(dc.mode == 3);
  CHECK(dc.dims[2] == cg.nz_nodes);
  CHECK(dc.extents[2] == cg.lz_fm);
}
