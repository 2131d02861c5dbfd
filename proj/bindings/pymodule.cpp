// Python bindings: a thin functional layer over the C++ solvers returning
// plain dicts, which keeps scripting and smoke testing friction-free.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tcd/axial2d.hpp"
#include "tcd/cart3d.hpp"
#include "tcd/constants.hpp"
#include "tcd/io.hpp"
#include "tcd/radial.hpp"

namespace py = pybind11;
using namespace tcd;

namespace {

NuclearModel model_from(const std::string& s) {
  if (s == "point") return NuclearModel::kPoint;
  if (s == "sphere") return NuclearModel::kSphere;
  throw py::value_error("model must be 'point' or 'sphere'");
}

py::list series_to_list(const std::vector<TimePoint>& series) {
  py::list out;
  for (const auto& tp : series) {
    py::dict d;
    d["t"] = tp.t;
    d["norm"] = tp.norm;
    d["energy"] = tp.energy;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-center Dirac bound states and collisions in cubic Hermite bases";
  m.attr("__version__") = kCodeVersion;
  m.attr("SPEED_OF_LIGHT_AU") = kSpeedOfLight;
  m.attr("FM_PER_AU") = kFmPerAu;

  m.def("sommerfeld_1s", &sommerfeld_1s, py::arg("z"),
        "Analytic point-nucleus Dirac 1s energy (a.u.)");
  m.def("projectile_speed", &projectile_speed, py::arg("mev_per_u"),
        "Relativistic projectile speed in a.u. for a kinetic energy in MeV/u");

  m.def(
      "stationary_1s",
      [](double z, const std::string& model) {
        const StationaryResult r = stationary_1s(z, model_from(model));
        py::dict d;
        d["e_1s"] = r.e_1s;
        d["n_eigenvalues"] = static_cast<int>(r.eps.size());
        return d;
      },
      py::arg("z"), py::arg("model") = "point",
      "Target-only 1s eigenvalue in the monopole radial basis");

  m.def(
      "collide_1d",
      [](double b_fm, const std::string& model, double z_target, double z_proj,
         double mev_per_u, int steps, bool with_pbar, int timeseries_stride) {
        CollideParams p;
        p.z_target = z_target;
        p.z_proj = z_proj;
        p.target_model = model_from(model);
        p.b_fm = b_fm;
        p.mev_per_u = mev_per_u;
        p.steps = steps;
        p.with_pbar = with_pbar;
        p.timeseries_stride = timeseries_stride;
        const CollideResult r = collide_monopole(p);
        py::dict d;
        d["e_min_over_mc2_plus_1"] = r.e_min_over_mc2;
        d["p_1s"] = r.p_1s;
        d["p_minus"] = r.p_minus;
        if (with_pbar) d["p_bar_1s"] = r.p_bar_1s;
        d["norm_final"] = r.norm_final;
        d["e_1s_initial"] = r.e_1s_initial;
        d["series"] = series_to_list(r.series);
        return d;
      },
      py::arg("b_fm"), py::arg("model") = "point", py::arg("z_target") = 92.0,
      py::arg("z_proj") = 92.0, py::arg("mev_per_u") = 6.0, py::arg("steps") = 8000,
      py::arg("with_pbar") = false, py::arg("timeseries_stride") = 0,
      "Monopole-approximation collision");

  m.def(
      "collide_2d",
      [](double b_fm, double z_target, double z_proj, double mev_per_u, int steps,
         int n_rho, int n_z, double rho_max_fm, double z_min_fm, double z_max_fm,
         double z_target_fm, int timeseries_stride) {
        AxialCollideParams p;
        p.grid.rho_max_fm = rho_max_fm;
        p.grid.z_min_fm = z_min_fm;
        p.grid.z_max_fm = z_max_fm;
        p.grid.n_rho = n_rho;
        p.grid.n_z = n_z;
        p.z_target_fm = z_target_fm;
        p.z_target = z_target;
        p.z_proj = z_proj;
        p.b_fm = b_fm;
        p.mev_per_u = mev_per_u;
        p.steps = steps;
        p.timeseries_stride = timeseries_stride;
        const AxialCollideResult r = collide_axial(p);
        py::dict d;
        d["e_initial"] = r.e_initial;
        d["p_1s"] = r.p_survival;
        d["p_ct"] = r.p_ct;
        d["norm_final"] = r.norm_final;
        d["z_divide_fm"] = r.z_divide_fm;
        d["series"] = series_to_list(r.series);
        return d;
      },
      py::arg("b_fm"), py::arg("z_target") = 92.0, py::arg("z_proj") = 92.0,
      py::arg("mev_per_u") = 6.0, py::arg("steps") = 400, py::arg("n_rho") = 11,
      py::arg("n_z") = 40, py::arg("rho_max_fm") = 5000.0,
      py::arg("z_min_fm") = -10000.0, py::arg("z_max_fm") = 10000.0,
      py::arg("z_target_fm") = -5000.0, py::arg("timeseries_stride") = 0,
      "Axially symmetric collision on the cylindrical tensor grid");

  m.def(
      "collide_3d",
      [](double b_fm, double z_target, double z_proj, double mev_per_u, int steps,
         int nx_splines, int ny_splines, int nz_splines, double lx_fm, double ly_fm,
         double lz_fm, double z_target_fm, bool purify_initial,
         int timeseries_stride) {
        auto nodes = [](int splines) {
          if (splines < 4 || splines % 2 != 0)
            throw py::value_error("spline counts must be even and >= 4");
          return splines / 2 + 2;
        };
        Cart3DParams p;
        p.grid.lx_fm = lx_fm;
        p.grid.ly_fm = ly_fm;
        p.grid.lz_fm = lz_fm;
        p.grid.nx_nodes = nodes(nx_splines);
        p.grid.ny_nodes = nodes(ny_splines);
        p.grid.nz_nodes = nodes(nz_splines);
        p.grid.z_target_fm = z_target_fm;
        p.z_target = z_target;
        p.z_proj = z_proj;
        p.b_fm = b_fm;
        p.mev_per_u = mev_per_u;
        p.steps = steps;
        p.purify_initial = purify_initial;
        p.timeseries_stride = timeseries_stride;
        const Cart3DResult r = collide_cart3d(p);
        py::dict d;
        d["e_interp"] = r.e_interp;
        d["e_initial"] = r.e_initial;
        d["p_1s"] = r.p_survival;
        d["p_ct"] = r.p_ct;
        d["norm_final"] = r.norm_final;
        d["z_divide_fm"] = r.z_divide_fm;
        d["avg_solver_iters"] = r.avg_bicg_iters;
        d["series"] = series_to_list(r.series);
        return d;
      },
      py::arg("b_fm"), py::arg("z_target") = 92.0, py::arg("z_proj") = 92.0,
      py::arg("mev_per_u") = 6.0, py::arg("steps") = 256, py::arg("nx_splines") = 20,
      py::arg("ny_splines") = 20, py::arg("nz_splines") = 44,
      py::arg("lx_fm") = 6900.0, py::arg("ly_fm") = 6900.0, py::arg("lz_fm") = 13800.0,
      py::arg("z_target_fm") = -3450.0, py::arg("purify_initial") = true,
      py::arg("timeseries_stride") = 0,
      "Full Cartesian collision (matrix-free Crank-Nicolson + BiCGSTAB)");
}
