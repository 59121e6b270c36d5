#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stx/config.hpp"
#include "stx/detect.hpp"
#include "stx/grid.hpp"
#include "stx/io.hpp"
#include "stx/pipeline.hpp"
#include "stx/powerlaw.hpp"
#include "stx/preprocess.hpp"
#include "stx/stats.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& a) { return {a.data(), a.data() + a.size()}; }

template <class T>
py::array_t<T> to_array(const std::vector<T>& v, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<py::ssize_t> shape_of(const stx::Grid3D& g) {
  return {static_cast<py::ssize_t>(g.ntime()), static_cast<py::ssize_t>(g.nlat()),
          static_cast<py::ssize_t>(g.nlon())};
}

stx::Grid3D make_grid(const DoubleArray& values, std::vector<double> lat_edges, std::vector<double> lon_edges,
                      const std::string& start, const std::string& units, const std::string& name) {
  if (values.ndim() != 3) throw stx::DomainError("grid values must be a 3-d array (time, lat, lon)");
  stx::Grid3D g;
  g.variable_name = name;
  g.units = units;
  g.axes = stx::LatLonAxes::from_edges(std::move(lat_edges), std::move(lon_edges));
  g.time = stx::Grid3D::month_range(stx::MonthIndex::parse(start), static_cast<std::size_t>(values.shape(0)));
  g.values = to_vector(values);
  g.validate();
  if (static_cast<std::size_t>(values.shape(1)) != g.nlat() || static_cast<std::size_t>(values.shape(2)) != g.nlon()) {
    throw stx::DomainError("grid values do not match the axis edges");
  }
  return g;
}

stx::ExtremeMask mask_from_array(const MaskArray& a, bool lon_global) {
  if (a.ndim() != 3) throw stx::DomainError("mask must be a 3-d array (time, lat, lon)");
  std::vector<std::uint8_t> flags(a.data(), a.data() + a.size());
  for (auto& f : flags) f = f ? 1 : 0;
  return stx::ExtremeMask::from_flags(a.shape(0), a.shape(1), a.shape(2), std::move(flags), lon_global);
}

py::dict stats_dict(const stx::ComponentStats& s) {
  py::dict d;
  d["id"] = s.id;
  d["rank"] = s.rank;
  d["voxels"] = s.voxel_count;
  d["carbon_pg"] = s.carbon_integral;
  d["affected_area_m2"] = s.affected_area;
  d["voxel_month_area_m2"] = s.voxel_month_area;
  d["duration"] = s.duration;
  d["start"] = s.start.to_string();
  return d;
}

py::dict fit_dict(const stx::PowerLawFit& f) {
  py::dict d;
  d["gamma"] = f.gamma;
  d["log_c"] = f.log_c;
  d["r_squared"] = f.r_squared;
  d["method"] = stx::to_string(f.method);
  d["n_lo"] = f.n_lo;
  d["n_hi"] = f.n_hi;
  return d;
}

const char* group_name(stx::SsaGroup g) {
  return g == stx::SsaGroup::Trend ? "trend" : g == stx::SsaGroup::Annual ? "annual" : "anomaly";
}

}  // namespace

PYBIND11_MODULE(_stx, m) {
  m.doc() = "Spatiotemporal extremes of carbon flux anomalies";
  m.attr("__version__") = std::string(stx::kVersion);

  auto base = py::register_exception<stx::Error>(m, "Error");
  py::register_exception<stx::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<stx::FormatError>(m, "FormatError", base.ptr());
  py::register_exception<stx::CorruptionError>(m, "CorruptionError", base.ptr());
  py::register_exception<stx::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<stx::ConfigError>(m, "ConfigError", base.ptr());

  py::class_<stx::Grid3D>(m, "Grid")
      .def(py::init(&make_grid), py::arg("values"), py::arg("lat_edges"), py::arg("lon_edges"),
           py::arg("start") = "2000-01", py::arg("units") = "", py::arg("name") = "")
      .def_readwrite("units", &stx::Grid3D::units)
      .def_readwrite("name", &stx::Grid3D::variable_name)
      .def_property_readonly("shape", [](const stx::Grid3D& g) { return py::tuple(py::cast(shape_of(g))); })
      .def_property_readonly("values", [](const stx::Grid3D& g) { return to_array(g.values, shape_of(g)); })
      .def_property_readonly("lat_edges", [](const stx::Grid3D& g) { return g.axes.lat_edges; })
      .def_property_readonly("lon_edges", [](const stx::Grid3D& g) { return g.axes.lon_edges; })
      .def_property_readonly("months", [](const stx::Grid3D& g) {
        std::vector<std::string> out;
        for (const auto& t : g.time) out.push_back(t.to_string());
        return out;
      })
      .def("area_integral", &stx::area_integral);

  m.def("read_grid", &stx::load_grid, py::arg("path"), "Reads an STXG or CSV grid.");
  m.def("write_grid", [](const stx::Grid3D& g, const std::filesystem::path& p) { stx::write_grid_file(g, p); },
        py::arg("grid"), py::arg("path"));

  m.def("percentile", [](const DoubleArray& v, double p) { return stx::percentile(to_vector(v), p); },
        py::arg("values"), py::arg("p"));
  m.def("cell_area", &stx::cell_area, py::arg("lat_lo"), py::arg("lat_hi"), py::arg("lon_width"));
  m.def("month_seconds", [](int y, int mo) { return stx::month_seconds(stx::MonthIndex::from_year_month(y, mo)); },
        py::arg("year"), py::arg("month"));

  m.def(
      "ssa_decompose",
      [](const DoubleArray& series, std::size_t window) {
        stx::SsaOptions o;
        o.window = window;
        const auto d = stx::ssa_decompose(to_vector(series), o);
        const py::ssize_t n = static_cast<py::ssize_t>(d.trend.size());
        std::vector<double> eig;
        std::vector<std::string> groups;
        for (const auto& e : d.spectrum) {
          eig.push_back(e.eigenvalue);
          groups.emplace_back(group_name(e.group));
        }
        py::dict out;
        out["trend"] = to_array(d.trend, {n});
        out["annual"] = to_array(d.annual, {n});
        out["anomaly"] = to_array(d.anomaly, {n});
        out["window"] = d.window_length;
        out["eigenvalues"] = to_array(eig, {static_cast<py::ssize_t>(eig.size())});
        out["groups"] = groups;
        return out;
      },
      py::arg("series"), py::arg("window") = 0);
  m.def("compute_anomalies", [](const stx::Grid3D& g) { return stx::compute_anomalies(g); }, py::arg("grid"));

  m.def(
      "threshold_mask",
      [](const stx::Grid3D& anomalies, double percentile, const std::string& tail, bool split_tails) {
        stx::ThresholdSpec spec;
        spec.percentile_total = percentile;
        spec.tail = stx::parse_tail(tail);
        spec.split_tails = split_tails;
        const auto mask = stx::threshold_mask(anomalies, spec);
        py::dict out;
        out["mask"] = to_array(mask.flags, shape_of(anomalies));
        out["q_low"] = mask.q_low;
        out["q_high"] = mask.q_high;
        out["count"] = mask.count();
        return out;
      },
      py::arg("anomalies"), py::arg("percentile") = 10.0, py::arg("tail") = "neg", py::arg("split_tails") = true);

  m.def(
      "label_components",
      [](const MaskArray& mask, const std::string& structure, bool wrap_lon, int lesd_connectivity) {
        const auto l = stx::label_components(mask_from_array(mask, wrap_lon),
                                             stx::neighborhood(structure, lesd_connectivity), wrap_lon);
        const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(l.ntime), static_cast<py::ssize_t>(l.nlat),
                                             static_cast<py::ssize_t>(l.nlon)};
        return py::make_tuple(to_array(l.labels, shape), l.components.size());
      },
      py::arg("mask"), py::arg("structure") = "6n", py::arg("wrap_lon") = false, py::arg("lesd_connectivity") = 8);

  m.def(
      "component_stats",
      [](const stx::Grid3D& anomalies, const MaskArray& mask, const std::string& structure, bool wrap_lon) {
        const auto l = stx::label_components(mask_from_array(mask, wrap_lon), stx::neighborhood(structure), wrap_lon);
        py::list out;
        for (const auto& s : stx::component_metrics(l, anomalies)) out.append(stats_dict(s));
        return out;
      },
      py::arg("anomalies"), py::arg("mask"), py::arg("structure") = "6n", py::arg("wrap_lon") = false,
      "Labels the mask and returns per-component metrics ordered by id.");

  m.def(
      "powerlaw_fit",
      [](const std::vector<std::size_t>& sizes, const std::string& method) {
        return fit_dict(stx::powerlaw_fit(stx::SizeDistribution::from_sizes(sizes), stx::parse_fit_method(method)));
      },
      py::arg("sizes"), py::arg("method") = "logbin");
  m.def("natural_cutoff", &stx::natural_cutoff, py::arg("n_min"), py::arg("m"), py::arg("gamma"));
  m.def(
      "tls_fit",
      [](const DoubleArray& x, const DoubleArray& y) {
        const auto f = stx::tls_fit(to_vector(x), to_vector(y));
        return py::make_tuple(f.slope, f.intercept);
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        auto cfg = stx::load_config(config);
        if (out) cfg.out = *out;
        stx::RunSummary summary;
        {
          py::gil_scoped_release release;
          summary = stx::run_pipeline(cfg);
        }
        py::dict result;
        result["out"] = cfg.out;
        result["extreme_voxels"] = summary.mask.count();
        py::list structures;
        for (const auto& r : summary.structures) {
          py::dict d;
          d["structure"] = r.structure;
          d["components"] = r.stats.size();
          d["fit_status"] = r.fit_status;
          d["fit"] = r.fit ? py::object(fit_dict(*r.fit)) : py::none();
          structures.append(d);
        }
        result["structures"] = structures;
        return result;
      },
      py::arg("config"), py::arg("out") = py::none(), "Runs every stage and writes the artifacts; returns a summary.");
}
