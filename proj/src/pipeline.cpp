#include "stx/pipeline.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "format.hpp"
#include "stx/errors.hpp"
#include "stx/io.hpp"
#include "stx/preprocess.hpp"
#include "stx/svg.hpp"

namespace stx {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using detail::fmt_num;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs `f`, converting library errors into StageError for `stage`.
template <class F>
auto in_stage(const char* stage, F&& f, int domain_code = kExitNumeric) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(stage, kExitConfig, e.what());
  } catch (const DomainError& e) {
    throw StageError(stage, domain_code, e.what());
  } catch (const Error& e) {
    throw StageError(stage, kExitData, e.what());
  } catch (const fs::filesystem_error& e) {
    throw StageError(stage, kExitConfig, e.what());
  } catch (const json::exception& e) {
    throw StageError(stage, kExitData, e.what());
  }
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::size_t valid_count(const Grid3D& g) {
  return static_cast<std::size_t>(
      std::count_if(g.values.begin(), g.values.end(), [](double v) { return !is_missing(v); }));
}

std::string structure_path(const std::string& structure, const char* file) {
  return structure + "/" + file;
}

Grid3D load_input(const fs::path& path, const PipelineConfig& cfg) {
  Grid3D g = load_grid(path);
  g.validate();
  if (cfg.start || cfg.end) {
    g = subset_time(g, cfg.start.value_or(g.time.front()), cfg.end.value_or(g.time.back()));
  }
  if (cfg.target_grid) g = regrid_conservative(g, cfg.target_grid->axes());
  return g;
}

// Puts a driver on the GPP time axis and grid.
Grid3D align_driver(Grid3D d, const Grid3D& gpp, const char* what) {
  if (d.time.empty() || d.time.front() > gpp.time.front() || d.time.back() < gpp.time.back()) {
    throw ValidationError(std::string(what) + " does not cover the GPP study period");
  }
  d = subset_time(d, gpp.time.front(), gpp.time.back());
  if (!(d.axes == gpp.axes)) d = regrid_conservative(d, gpp.axes);
  return d;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DomainError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  return kExitFailure;
}

bool resolve_wrap(WrapMode mode, bool lon_global) {
  switch (mode) {
    case WrapMode::Auto: return lon_global;
    case WrapMode::Off: return false;
    case WrapMode::On:
      if (!lon_global) throw ConfigError("wrap_lon=on requires longitude edges spanning 360 degrees");
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Files

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ValidationError("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OutputDir::OutputDir(fs::path root, std::set<std::string> formats)
    : root_(std::move(root)), formats_(std::move(formats)) {}

void OutputDir::write(const std::string& rel, const std::string& text) {
  const auto ext = fs::path(rel).extension().string();
  if (ext.size() > 1 && (ext == ".csv" || ext == ".json" || ext == ".svg") && !enabled(ext.substr(1))) return;
  write_text_file(root_ / rel, text);
  record(rel, text);
}

void OutputDir::write_grid(const std::string& rel, const Grid3D& g) {
  const auto bytes = stx::write_grid(g);
  const auto path = root_ / rel;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  record(rel, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void OutputDir::record(const std::string& rel, std::string_view bytes) {
  const auto hash = fnv1a_hex(bytes);
  for (auto& f : files_) {
    if (f.first == rel) {
      f.second = hash;
      return;
    }
  }
  files_.emplace_back(rel, hash);
}

// ---------------------------------------------------------------------------
// Mask and label grids

Grid3D mask_to_grid(const ExtremeMask& mask, const Grid3D& like) {
  if (like.ntime() != mask.ntime || like.nlat() != mask.nlat || like.nlon() != mask.nlon) {
    throw DomainError("mask_to_grid: mask and template shapes differ");
  }
  Grid3D g = like.like(0.0);
  g.variable_name = "extreme_mask";
  g.units = "1";
  g.storage = DType::Float32;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = is_missing(like.values[i]) ? kNaN : static_cast<double>(mask.flags[i]);
  }
  return g;
}

ExtremeMask mask_from_grid(const Grid3D& g) {
  std::vector<std::uint8_t> flags(g.size(), 0);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const double v = g.values[i];
    if (is_missing(v) || v == 0.0) continue;
    if (v != 1.0) throw ValidationError("mask grid values must be 0, 1 or missing");
    flags[i] = 1;
  }
  return ExtremeMask::from_flags(g.ntime(), g.nlat(), g.nlon(), std::move(flags), g.axes.is_lon_global());
}

Grid3D labels_to_grid(const Labeling& l, const Grid3D& like) {
  if (like.ntime() != l.ntime || like.nlat() != l.nlat || like.nlon() != l.nlon) {
    throw DomainError("labels_to_grid: labeling and template shapes differ");
  }
  Grid3D g = like.like(0.0);
  g.variable_name = "component_id_" + l.structure;
  g.units = "1";
  g.storage = DType::Float64;
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = static_cast<double>(l.labels[i]);
  return g;
}

Labeling labeling_from_grid(const Grid3D& g, const std::string& structure) {
  Labeling l;
  l.ntime = g.ntime();
  l.nlat = g.nlat();
  l.nlon = g.nlon();
  l.structure = structure;
  l.labels.assign(g.size(), 0);
  constexpr double kMaxId = static_cast<double>(std::numeric_limits<std::uint32_t>::max());
  std::uint32_t max_id = 0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double v = g.values[i];
    if (is_missing(v) || v == 0.0) continue;
    if (v < 0.0 || v > kMaxId || v != std::floor(v)) throw ValidationError("label grid values must be ids >= 0");
    l.labels[i] = static_cast<std::uint32_t>(v);
    max_id = std::max(max_id, l.labels[i]);
  }
  l.components.resize(max_id);
  for (std::uint32_t id = 1; id <= max_id; ++id) {
    auto& c = l.components[id - 1];
    c.id = id;
    c.min_lat = c.min_lon = std::numeric_limits<std::size_t>::max();
  }
  for (std::size_t i = 0; i < l.labels.size(); ++i) {
    if (l.labels[i] == 0) continue;
    auto& c = l.components[l.labels[i] - 1];
    const std::size_t x = i % l.nlon, y = (i / l.nlon) % l.nlat, t = i / (l.nlon * l.nlat);
    if (c.voxel_count++ == 0) {
      c.first_voxel = i;
      c.min_t = t;
    }
    c.min_lat = std::min(c.min_lat, y);
    c.min_lon = std::min(c.min_lon, x);
  }
  for (const auto& c : l.components) {
    if (c.voxel_count == 0) throw ValidationError("label ids must run from 1 without gaps");
  }
  return l;
}

// ---------------------------------------------------------------------------
// Tables

std::string components_csv(const std::vector<ComponentStats>& stats) {
  std::string s =
      "# units: carbon_integral=Pg C (negative = loss); affected_area=m2; voxel_month_area=m2; "
      "duration=months; start=YYYY-MM; index columns are 0-based voxel indices\n"
      "rank,id,voxel_count,carbon_integral,affected_area,voxel_month_area,duration,start,"
      "t_min,t_max,lat_min,lat_max,lon_min,lon_max\n";
  for (const auto& c : stats) {
    s += std::to_string(c.rank) + ',' + std::to_string(c.id) + ',' + std::to_string(c.voxel_count) + ',' +
         fmt_num(c.carbon_integral) + ',' + fmt_num(c.affected_area) + ',' + fmt_num(c.voxel_month_area) + ',' +
         std::to_string(c.duration) + ',' + c.start.to_string() + ',' + std::to_string(c.t_min) + ',' +
         std::to_string(c.t_max) + ',' + std::to_string(c.lat_min) + ',' + std::to_string(c.lat_max) + ',' +
         std::to_string(c.lon_min) + ',' + std::to_string(c.lon_max) + '\n';
  }
  return s;
}

std::vector<std::size_t> component_sizes_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::ptrdiff_t column = -1;
  std::vector<std::size_t> sizes;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (column < 0) {
      const auto it = std::find(cells.begin(), cells.end(), "voxel_count");
      if (it == cells.end()) throw FormatError("components table has no voxel_count column");
      column = it - cells.begin();
      continue;
    }
    if (static_cast<std::size_t>(column) >= cells.size()) throw FormatError("short row in components table");
    const auto& cell = cells[static_cast<std::size_t>(column)];
    std::size_t n = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), n);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || n == 0) {
      throw FormatError("bad voxel_count '" + cell + "'");
    }
    sizes.push_back(n);
  }
  if (column < 0) throw FormatError("components table has no header");
  return sizes;
}

std::string cumulative_csv(const std::vector<CumulativePoint>& curve) {
  std::string s = "# units: share=fraction of total |carbon_integral|; cumulative=Pg C (signed)\nk,share,cumulative\n";
  for (const auto& p : curve) s += std::to_string(p.k) + ',' + fmt_num(p.share) + ',' + fmt_num(p.cumulative) + '\n';
  return s;
}

std::string map_csv(const Map2D& map, const LatLonAxes& axes, const std::string& column) {
  std::string s = "# units: lat=degrees_north; lon=degrees_east; " + column + "=" +
                  (map.units.empty() ? std::string("1") : map.units) + "\nlat,lon," + column + '\n';
  for (std::size_t y = 0; y < map.nlat; ++y) {
    for (std::size_t x = 0; x < map.nlon; ++x) {
      s += fmt_num(axes.lat_centers[y]) + ',' + fmt_num(axes.lon_centers[x]) + ',' + fmt_num(map.at(y, x)) + '\n';
    }
  }
  return s;
}

std::string powerlaw_csv(const SizeDistribution& d) {
  std::string s = "# units: size=voxels; count=components; probability=fraction of components\nsize,count,probability\n";
  for (const auto& [n, c] : d.counts) {
    s += std::to_string(n) + ',' + std::to_string(c) + ',' +
         fmt_num(static_cast<double>(c) / static_cast<double>(d.total)) + '\n';
  }
  return s;
}

std::string powerlaw_fit_json(const std::optional<SizeDistribution>& d, const std::optional<PowerLawFit>& fit,
                              const std::string& status, const std::string& structure) {
  json j;
  j["structure"] = structure;
  j["status"] = status;
  j["units"] = {{"size", "voxels"}, {"probability", "per unit size"}, {"natural_cutoff", "voxels"}};
  j["components"] = d ? d->total : 0;
  j["n_min"] = d ? d->n_min : 0;
  j["n_max"] = d ? d->n_max : 0;
  if (fit) {
    j["method"] = to_string(fit->method);
    j["gamma"] = num(fit->gamma);
    j["log_c"] = num(fit->log_c);
    j["r_squared"] = num(fit->r_squared);
    j["n_lo"] = fit->n_lo;
    j["n_hi"] = fit->n_hi;
    double cutoff = kNaN;
    if (fit->gamma > 1.0 && d) {
      cutoff = natural_cutoff(static_cast<double>(d->n_min), static_cast<double>(d->total), fit->gamma);
    }
    j["natural_cutoff"] = num(cutoff);
    json pts = json::array();
    for (const auto& p : fit->points) {
      pts.push_back({{"size", num(p.size)}, {"probability", num(p.probability)}, {"count", p.count}});
    }
    j["points"] = pts;
  }
  return json_text(j);
}

std::string attribution_csv(const AttributionTable& t) {
  std::string s =
      "# units: lag=months; tas=standardised anomaly (1); pr=normalised precipitation (1); "
      "coverage=fraction of member voxels\n"
      "rank,component,lag,tas_median,tas_coverage,tas_q_low,tas_q_high,pr_median,pr_coverage,pr_q_low,pr_q_high,"
      "hot,cold,dry,wet\n";
  for (const auto& r : t.records) {
    for (const auto& l : r.lags) {
      s += std::to_string(r.rank) + ',' + std::to_string(r.component) + ',' + std::to_string(l.lag) + ',' +
           fmt_num(l.tas.median) + ',' + fmt_num(l.tas.coverage) + ',' + fmt_num(l.tas_ref.low) + ',' +
           fmt_num(l.tas_ref.high) + ',' + fmt_num(l.pr.median) + ',' + fmt_num(l.pr.coverage) + ',' +
           fmt_num(l.pr_ref.low) + ',' + fmt_num(l.pr_ref.high) + ',' + (l.hot ? '1' : '0') + ',' +
           (l.cold ? '1' : '0') + ',' + (l.dry ? '1' : '0') + ',' + (l.wet ? '1' : '0') + '\n';
    }
  }
  return s;
}

std::string attribution_table_json(const AttributionTable& t) {
  json j;
  j["structure"] = t.structure;
  j["status"] = "ok";
  j["units"] = {{"counts", "components"}, {"lag", "months"}};
  j["top_k_requested"] = t.top_k_requested;
  j["components_used"] = t.components_used;
  j["note"] = t.note;
  json cats;
  for (std::size_t d = 0; d < kDriverNames.size(); ++d) {
    const auto& c = t.categories[d];
    cats[kDriverNames[d]] = {{"per_lag", c.per_lag}, {"mean", num(c.mean)}, {"rounded", c.rounded}};
  }
  j["categories"] = cats;
  return json_text(j);
}

namespace {

json threshold_fields(const ExtremeMask& mask, std::size_t valid_voxels) {
  json j;
  j["shape"] = {mask.ntime, mask.nlat, mask.nlon};
  j["tail"] = std::string(to_string(mask.spec.tail));
  j["percentile_total"] = num(mask.spec.percentile_total);
  j["tail_budget"] = mask.spec.split_tails ? "split" : "single";
  j["q_low"] = num(mask.q_low);
  j["q_high"] = num(mask.q_high);
  j["valid_voxels"] = valid_voxels;
  j["extreme_voxels"] = mask.count();
  j["extreme_fraction"] =
      num(valid_voxels == 0 ? kNaN : static_cast<double>(mask.count()) / static_cast<double>(valid_voxels));
  j["lon_global"] = mask.lon_global;
  return j;
}

}  // namespace

std::string threshold_json(const ExtremeMask& mask, std::size_t valid_voxels) {
  json j;
  j["units"] = {{"q_low", "anomaly units"}, {"q_high", "anomaly units"}, {"extreme_fraction", "1"}};
  j.update(threshold_fields(mask, valid_voxels));
  return json_text(j);
}

std::string mask_summary_json(const ExtremeMask& mask, std::size_t valid_voxels, const StructureResult& r) {
  json j;
  j["structure"] = r.structure;
  j["units"] = {{"q_low", "kg m-2 s-1"},
                {"q_high", "kg m-2 s-1"},
                {"carbon_integral", "Pg C"},
                {"largest_component", "voxels"}};
  j.update(threshold_fields(mask, valid_voxels));
  j["components"] = r.stats.size();
  double total = 0.0;
  std::size_t largest = 0;
  for (const auto& c : r.stats) {
    total += c.carbon_integral;
    largest = std::max(largest, c.voxel_count);
  }
  j["carbon_integral"] = num(total);
  j["largest_component"] = largest;
  return json_text(j);
}

// ---------------------------------------------------------------------------
// Charts

std::string loss_area_svg(const StructureResult& r) {
  ChartSpec spec;
  spec.title = "Ranked extremes (" + r.structure + ")";
  spec.x_label = "rank";
  spec.y_label = "loss of carbon uptake (Pg C)";
  spec.y2_label = "affected area (km^2)";
  ChartSeries loss{"|carbon integral|", {}, {}, SeriesStyle::Line, false, "#1f77b4"};
  ChartSeries area{"affected area", {}, {}, SeriesStyle::Points, true, "#d62728"};
  const std::size_t n = std::min<std::size_t>(r.stats.size(), 50);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(r.stats[i].rank);
    loss.x.push_back(x);
    loss.y.push_back(std::abs(r.stats[i].carbon_integral));
    area.x.push_back(x);
    area.y.push_back(r.stats[i].affected_area * 1e-6);
  }
  spec.series = {loss, area};
  return render_svg(spec);
}

std::string cumulative_svg(const StructureResult& r) {
  ChartSpec spec;
  spec.title = "Cumulative share of loss (" + r.structure + ")";
  spec.x_label = "number of extremes (ranked)";
  spec.y_label = "share of total loss";
  spec.y2_label = "cumulative loss (Pg C)";
  ChartSeries share{"share", {}, {}, SeriesStyle::Line, false, "#1f77b4"};
  ChartSeries abs_loss{"cumulative |loss|", {}, {}, SeriesStyle::Line, true, "#ff7f0e"};
  double running = 0.0;
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    const double x = static_cast<double>(r.curve[i].k);
    running += std::abs(r.stats[i].carbon_integral);
    share.x.push_back(x);
    share.y.push_back(r.curve[i].share);
    abs_loss.x.push_back(x);
    abs_loss.y.push_back(running);
  }
  spec.series = {share, abs_loss};
  return render_svg(spec);
}

std::string powerlaw_svg(const StructureResult& r) {
  ChartSpec spec;
  spec.title = "Size distribution (" + r.structure + ")";
  spec.x_label = "size n (voxels)";
  spec.y_label = "p(n)";
  spec.log_x = spec.log_y = true;
  if (r.sizes) {
    ChartSeries raw{"observed", {}, {}, SeriesStyle::Points, false, "#7f7f7f"};
    for (const auto& [n, c] : r.sizes->counts) {
      raw.x.push_back(static_cast<double>(n));
      raw.y.push_back(static_cast<double>(c) / static_cast<double>(r.sizes->total));
    }
    spec.series.push_back(raw);
  }
  if (r.fit) {
    ChartSeries pts{"fitted points", {}, {}, SeriesStyle::Points, false, "#1f77b4"};
    for (const auto& p : r.fit->points) {
      pts.x.push_back(p.size);
      pts.y.push_back(p.probability);
    }
    if (!pts.x.empty()) spec.series.push_back(pts);
    ChartSeries line{"gamma = " + detail::fmt_fixed(r.fit->gamma, 3), {}, {}, SeriesStyle::Line, false, "#d62728"};
    const double lo = static_cast<double>(std::max<std::size_t>(r.fit->n_lo, 1));
    const double hi = static_cast<double>(std::max(r.fit->n_hi, r.fit->n_lo));
    for (int i = 0; i <= 32; ++i) {
      const double n = lo * std::pow(hi / lo, i / 32.0);
      line.x.push_back(n);
      line.y.push_back(std::exp(r.fit->log_c) * std::pow(n, -r.fit->gamma));
    }
    spec.series.push_back(line);
  }
  return render_svg(spec);
}

// ---------------------------------------------------------------------------
// Stages

Inputs ingest(const PipelineConfig& cfg) {
  return in_stage(
      "ingest",
      [&] {
        cfg.validate();
        Inputs in;
        in.gpp = load_input(cfg.gpp, cfg);
        if (in.gpp.units.empty()) in.gpp.units = units::kFluxSI;
        in.gpp = convert_units(in.gpp, units::kFluxSI);
        if (!cfg.tas.empty()) {
          in.tas = align_driver(load_input(cfg.tas, cfg), in.gpp, "tas");
          in.pr = align_driver(load_input(cfg.pr, cfg), in.gpp, "pr");
        }
        return in;
      },
      kExitData);
}

Prepared preprocess_inputs(const Inputs& in, const PipelineConfig& cfg) {
  return in_stage("preprocess", [&] {
    Prepared p;
    if (!cfg.preprocess) {
      p.anomalies = in.gpp;
      p.tas = in.tas;
      p.pr = in.pr;
      return p;
    }
    SsaOptions opts;
    opts.window = cfg.ssa_window;
    p.anomalies = compute_anomalies(in.gpp, opts);
    if (in.tas) {
      auto t = scale_temperature(*in.tas, opts);
      p.tas = std::move(t.grid);
      p.tas_flagged = std::move(t.flagged_cells);
      auto r = normalize_precip(*in.pr, opts);
      p.pr = std::move(r.grid);
      p.pr_flagged = std::move(r.flagged_cells);
    }
    return p;
  });
}

Prepared stage_preprocess(const PipelineConfig& cfg, OutputDir& out) {
  Prepared p = preprocess_inputs(ingest(cfg), cfg);
  in_stage("preprocess", [&] {
    p.anomalies.storage = DType::Float64;
    out.write_grid(kAnomaliesFile, p.anomalies);
    if (p.tas) {
      p.tas->storage = DType::Float64;
      p.pr->storage = DType::Float64;
      out.write_grid(kTasFile, *p.tas);
      out.write_grid(kPrFile, *p.pr);
    }
    json j;
    j["units"] = {{"anomalies", p.anomalies.units}, {"flagged_cells", "row-major (lat, lon) cell index"}};
    j["preprocess"] = cfg.preprocess;
    j["ssa_window"] = cfg.preprocess ? (cfg.ssa_window ? cfg.ssa_window : default_ssa_window(p.anomalies.ntime()))
                                     : std::size_t{0};
    j["months"] = p.anomalies.ntime();
    j["first_month"] = p.anomalies.time.empty() ? std::string() : p.anomalies.time.front().to_string();
    j["tas_flagged_cells"] = p.tas_flagged;
    j["pr_flagged_cells"] = p.pr_flagged;
    out.write("preprocess.json", json_text(j));
    out.write("iav_map.csv", map_csv(iav_map(p.anomalies), p.anomalies.axes, "iav"));
  });
  return p;
}

Prepared load_prepared(const fs::path& dir) {
  return in_stage("preprocess", [&] {
    Prepared p;
    p.anomalies = read_grid_file(dir / kAnomaliesFile);
    if (fs::exists(dir / kTasFile) && fs::exists(dir / kPrFile)) {
      p.tas = read_grid_file(dir / kTasFile);
      p.pr = read_grid_file(dir / kPrFile);
    }
    return p;
  });
}

ExtremeMask stage_detect(const Prepared& data, const PipelineConfig& cfg, OutputDir& out) {
  return in_stage("detect", [&] {
    ExtremeMask mask = threshold_mask(data.anomalies, cfg.threshold);
    out.write_grid(kMaskFile, mask_to_grid(mask, data.anomalies));
    out.write("threshold.json", threshold_json(mask, valid_count(data.anomalies)));
    return mask;
  });
}

ExtremeMask load_mask(const fs::path& dir) {
  return in_stage("detect", [&] {
    ExtremeMask mask = mask_from_grid(read_grid_file(dir / kMaskFile));
    const auto meta = dir / "threshold.json";
    if (fs::exists(meta)) {
      const auto j = json::parse(read_text_file(meta));
      const auto q = [](const json& v) { return v.is_number() ? v.get<double>() : kNaN; };
      mask.spec.tail = parse_tail(j.at("tail").get<std::string>());
      mask.spec.percentile_total = j.at("percentile_total").get<double>();
      mask.spec.split_tails = j.at("tail_budget").get<std::string>() == "split";
      mask.q_low = q(j.at("q_low"));
      mask.q_high = q(j.at("q_high"));
    }
    return mask;
  });
}

Labeling stage_label(const std::string& structure, const ExtremeMask& mask, const Grid3D& like,
                     const PipelineConfig& cfg, OutputDir& out) {
  return in_stage("label", [&] {
    if (!is_structure_name(structure)) throw ConfigError("unknown structure '" + structure + "'");
    const bool wrap = resolve_wrap(cfg.wrap_lon, mask.lon_global);
    Labeling l = label_components(mask, neighborhood(structure, cfg.lesd_connectivity), wrap);
    out.write_grid(structure_path(structure, kLabelsFile), labels_to_grid(l, like));
    return l;
  });
}

Labeling load_labeling(const fs::path& dir, const std::string& structure) {
  return in_stage("label", [&] {
    return labeling_from_grid(read_grid_file(dir / structure / kLabelsFile), structure);
  });
}

StructureResult stage_stats(Labeling labeling, const ExtremeMask& mask, const Prepared& data, OutputDir& out) {
  return in_stage("stats", [&] {
    StructureResult r;
    r.structure = labeling.structure;
    r.stats = component_metrics(labeling, data.anomalies);
    r.curve = cumulative_curve(r.stats);
    r.loss_map = spatial_loss_map(mask, data.anomalies);
    r.labeling = std::move(labeling);
    const auto& s = r.structure;
    out.write(structure_path(s, "mask_summary.json"), mask_summary_json(mask, valid_count(data.anomalies), r));
    out.write(structure_path(s, "components.csv"), components_csv(r.stats));
    out.write(structure_path(s, "cumulative.csv"), cumulative_csv(r.curve));
    out.write(structure_path(s, "loss_map.csv"), map_csv(r.loss_map, data.anomalies.axes, "loss"));
    if (out.enabled("svg")) {
      out.write(structure_path(s, "loss_area.svg"), loss_area_svg(r));
      out.write(structure_path(s, "cumulative.svg"), cumulative_svg(r));
    }
    return r;
  });
}

void stage_powerlaw(StructureResult& r, std::span<const std::size_t> sizes, const PipelineConfig& cfg,
                    OutputDir& out) {
  in_stage("powerlaw", [&] {
    r.sizes.reset();
    r.fit.reset();
    if (sizes.empty()) {
      r.fit_status = "no components";
    } else {
      r.sizes = SizeDistribution::from_sizes(sizes);
      if (r.structure == "sesd" && !cfg.fit_sesd) {
        r.fit_status = "skipped: sesd components are single voxels";
      } else {
        try {
          r.fit = powerlaw_fit(*r.sizes, cfg.fit_method);
          r.fit_status = "ok";
        } catch (const DomainError& e) {
          r.fit_status = std::string("no fit: ") + e.what();
        }
      }
    }
    if (r.sizes) out.write(structure_path(r.structure, "powerlaw.csv"), powerlaw_csv(*r.sizes));
    out.write(structure_path(r.structure, "powerlaw_fit.json"),
              powerlaw_fit_json(r.sizes, r.fit, r.fit_status, r.structure));
    if (out.enabled("svg")) out.write(structure_path(r.structure, "powerlaw.svg"), powerlaw_svg(r));
  });
}

void stage_attribute(StructureResult& r, const Prepared& data, const PipelineConfig& cfg, OutputDir& out) {
  in_stage("attribute", [&] {
    const auto path = structure_path(r.structure, "attribution_table.json");
    if (!data.tas || !data.pr) {
      json j;
      j["structure"] = r.structure;
      j["status"] = "skipped: no tas/pr inputs";
      j["units"] = {{"counts", "components"}, {"lag", "months"}};
      out.write(path, json_text(j));
      return;
    }
    r.attribution = attribution_table(r.labeling, r.stats, *data.tas, *data.pr, cfg.attribution);
    out.write(structure_path(r.structure, "attribution.csv"), attribution_csv(*r.attribution));
    out.write(path, attribution_table_json(*r.attribution));
  });
}

void write_manifest(const PipelineConfig& cfg, OutputDir& out) {
  in_stage("write", [&] {
    json j;
    j["tool"] = "stx";
    j["version"] = kVersion;
    j["versions"] = {{"stxg", kStxgVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    j["units"] = {{"fnv1a", "FNV-1a 64-bit digest, hex"}};
    j["config_hash"] = cfg.hash();
    json lines = json::array();
    std::istringstream cs(cfg.canonical_text());
    for (std::string line; std::getline(cs, line);) lines.push_back(line);
    j["config"] = lines;
    json inputs = json::array();
    const std::pair<const char*, const fs::path*> roles[] = {{"gpp", &cfg.gpp}, {"tas", &cfg.tas}, {"pr", &cfg.pr}};
    for (const auto& [role, path] : roles) {
      if (path->empty()) continue;
      inputs.push_back({{"role", role}, {"path", path->string()}, {"fnv1a", fnv1a_hex(read_text_file(*path))}});
    }
    j["inputs"] = inputs;
    auto files = out.files();
    std::sort(files.begin(), files.end());
    json outputs = json::array();
    for (const auto& [rel, hash] : files) outputs.push_back({{"file", rel}, {"fnv1a", hash}});
    j["outputs"] = outputs;
    write_text_file(out.root() / "manifest.json", json_text(j));
  });
}

RunSummary run_pipeline(const PipelineConfig& cfg) {
  in_stage("config", [&] { cfg.validate(); });
  OutputDir out(cfg.out, cfg.formats);
  RunSummary summary;
  const Prepared data = stage_preprocess(cfg, out);
  summary.mask = stage_detect(data, cfg, out);
  for (const auto& s : cfg.structures) {
    Labeling l = stage_label(s, summary.mask, data.anomalies, cfg, out);
    StructureResult r = stage_stats(std::move(l), summary.mask, data, out);
    std::vector<std::size_t> sizes;
    sizes.reserve(r.stats.size());
    for (const auto& c : r.stats) sizes.push_back(c.voxel_count);
    stage_powerlaw(r, sizes, cfg, out);
    stage_attribute(r, data, cfg, out);
    summary.structures.push_back(std::move(r));
  }
  write_manifest(cfg, out);
  return summary;
}

}  // namespace stx
