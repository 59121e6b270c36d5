// stx: spatiotemporal extremes pipeline driver.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stx/config.hpp"
#include "stx/errors.hpp"
#include "stx/io.hpp"
#include "stx/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string in;
  std::vector<std::string> structures;
  std::string percentile, tail, wrap_lon, top_k, lags, out, format;
};

void add_common(CLI::App* cmd, Overrides& o, bool needs_config) {
  auto* c = cmd->add_option("--config", o.config, "key=value configuration file");
  if (needs_config) c->required();
  cmd->add_option("--structure", o.structures, "neighborhood structure (repeatable)");
  cmd->add_option("--percentile", o.percentile, "extremes budget in percent");
  cmd->add_option("--tail", o.tail, "neg|pos|both");
  cmd->add_option("--wrap-lon", o.wrap_lon, "on|off");
  cmd->add_option("--top-k", o.top_k, "components to attribute");
  cmd->add_option("--lags", o.lags, "maximum driver lag in months");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--format", o.format, "comma-separated subset of csv,json,svg");
}

stx::PipelineConfig build_config(const Overrides& o) {
  stx::PipelineConfig cfg = o.config.empty() ? stx::PipelineConfig{} : stx::load_config(o.config);
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) stx::apply_setting(cfg, key, v);
  };
  if (!o.structures.empty()) {
    std::string joined;
    for (const auto& s : o.structures) joined += (joined.empty() ? "" : ",") + s;
    set("structures", joined);
  }
  set("percentile", o.percentile);
  set("tail", o.tail);
  set("wrap_lon", o.wrap_lon);
  set("top_k", o.top_k);
  set("lags", o.lags);
  set("out", o.out);
  set("format", o.format);
  for (const auto& s : cfg.structures) {
    if (!stx::is_structure_name(s)) throw stx::ConfigError("unknown structure '" + s + "'");
  }
  return cfg;
}

// Directory holding the previous stage's artifacts.
std::filesystem::path input_dir(const Overrides& o, const stx::PipelineConfig& cfg) {
  return o.in.empty() ? cfg.out : std::filesystem::path(o.in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal extremes in gridded carbon-flux data"};
  app.require_subcommand(1);
  Overrides o;

  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write the full bundle");
  auto* preprocess = app.add_subcommand("preprocess", "ingest inputs and compute anomalies");
  auto* detect = app.add_subcommand("detect", "threshold anomalies into an extremes mask");
  auto* label = app.add_subcommand("label", "label connected extremes per structure");
  auto* stats = app.add_subcommand("stats", "component integrals, ranking and loss maps");
  auto* powerlaw = app.add_subcommand("powerlaw", "fit the component size distribution");
  auto* attribute = app.add_subcommand("attribute", "classify top components by climate driver");
  add_common(pipeline, o, true);
  add_common(preprocess, o, true);
  for (auto* cmd : {detect, label, stats, powerlaw, attribute}) {
    add_common(cmd, o, false);
    cmd->add_option("--in", o.in, "directory written by the previous stage (default: --out)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : stx::kExitConfig;
  }

  try {
    stx::PipelineConfig cfg;
    try {
      cfg = build_config(o);
    } catch (const stx::Error& e) {
      throw stx::StageError("config", stx::kExitConfig, e.what());
    }
    stx::OutputDir out(cfg.out, cfg.formats);
    const auto in = input_dir(o, cfg);

    if (pipeline->parsed()) {
      const auto summary = stx::run_pipeline(cfg);
      for (const auto& r : summary.structures) {
        std::cout << r.structure << ": " << r.stats.size() << " components";
        if (r.fit) std::cout << ", gamma " << r.fit->gamma;
        std::cout << '\n';
      }
    } else if (preprocess->parsed()) {
      stx::stage_preprocess(cfg, out);
    } else if (detect->parsed()) {
      const auto data = stx::load_prepared(in);
      const auto mask = stx::stage_detect(data, cfg, out);
      std::cout << mask.count() << " extreme voxels\n";
    } else if (label->parsed()) {
      const auto mask = stx::load_mask(in);
      const auto like = stx::read_grid_file(in / stx::kMaskFile);
      for (const auto& s : cfg.structures) {
        const auto l = stx::stage_label(s, mask, like, cfg, out);
        std::cout << s << ": " << l.components.size() << " components\n";
      }
    } else if (stats->parsed()) {
      const auto data = stx::load_prepared(in);
      const auto mask = stx::load_mask(in);
      for (const auto& s : cfg.structures) stx::stage_stats(stx::load_labeling(in, s), mask, data, out);
    } else if (powerlaw->parsed()) {
      for (const auto& s : cfg.structures) {
        std::vector<std::size_t> sizes;
        try {
          sizes = stx::component_sizes_from_csv(stx::read_text_file(in / s / "components.csv"));
        } catch (const stx::Error& e) {
          throw stx::StageError("powerlaw", stx::kExitData, e.what());
        }
        stx::StructureResult r;
        r.structure = s;
        stx::stage_powerlaw(r, sizes, cfg, out);
        std::cout << s << ": " << r.fit_status;
        if (r.fit) std::cout << ", gamma " << r.fit->gamma;
        std::cout << '\n';
      }
    } else if (attribute->parsed()) {
      const auto data = stx::load_prepared(in);
      const auto mask = stx::load_mask(in);
      for (const auto& s : cfg.structures) {
        stx::OutputDir scratch(cfg.out, {});
        auto r = stx::stage_stats(stx::load_labeling(in, s), mask, data, scratch);
        stx::stage_attribute(r, data, cfg, out);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "stx: " << e.what() << '\n';
    return stx::exit_code_for(e);
  }
  return 0;
}
