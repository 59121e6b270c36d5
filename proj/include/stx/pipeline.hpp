#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <string>
#include <vector>

#include "stx/attribution.hpp"
#include "stx/config.hpp"
#include "stx/detect.hpp"
#include "stx/grid.hpp"
#include "stx/powerlaw.hpp"
#include "stx/stats.hpp"

namespace stx {

inline constexpr const char* kVersion = "1.0.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

/// Error raised by a pipeline stage, carrying the stage name and exit code.
class StageError : public Error {
public:
  StageError(std::string stage, int exit_code, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)), exit_code_(exit_code) {}

  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

private:
  std::string stage_;
  int exit_code_;
};

/// Exit code for any exception escaping a command.
int exit_code_for(const std::exception& e);

struct Inputs {
  Grid3D gpp;
  std::optional<Grid3D> tas, pr;
};

/// Loads inputs, trims the study period, regrids to the target grid and
/// converts GPP to kg m-2 s-1.
Inputs ingest(const PipelineConfig& cfg);

struct Prepared {
  Grid3D anomalies;  // kg m-2 s-1
  std::optional<Grid3D> tas, pr;
  std::vector<std::size_t> tas_flagged, pr_flagged;
};

Prepared preprocess_inputs(const Inputs& in, const PipelineConfig& cfg);

/// Wrap decision for a grid; throws ConfigError when wrap is forced on a
/// regional grid.
bool resolve_wrap(WrapMode mode, bool lon_global);

struct StructureResult {
  std::string structure;
  Labeling labeling;
  std::vector<ComponentStats> stats;
  std::vector<CumulativePoint> curve;
  Map2D loss_map;
  std::optional<SizeDistribution> sizes;
  std::optional<PowerLawFit> fit;
  std::string fit_status;  // "ok" or why no fit was made
  std::optional<AttributionTable> attribution;
};

/// Writes artifacts below a root directory, honouring the enabled formats
/// and remembering what was written (path relative to the root, FNV-1a).
class OutputDir {
public:
  OutputDir(std::filesystem::path root, std::set<std::string> formats);

  const std::filesystem::path& root() const { return root_; }
  bool enabled(const std::string& format) const { return formats_.count(format) != 0; }
  /// Skipped silently when the extension's format is disabled.
  void write(const std::string& rel, const std::string& text);
  void write_grid(const std::string& rel, const Grid3D& g);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

private:
  void record(const std::string& rel, std::string_view bytes);

  std::filesystem::path root_;
  std::set<std::string> formats_;
  std::vector<std::pair<std::string, std::string>> files_;
};

// Intermediate artifact names, relative to the output directory.
inline constexpr const char* kAnomaliesFile = "anomalies.stxg";
inline constexpr const char* kTasFile = "tas_scaled.stxg";
inline constexpr const char* kPrFile = "pr_normalized.stxg";
inline constexpr const char* kMaskFile = "mask.stxg";
inline constexpr const char* kLabelsFile = "labels.stxg";

// Stages. Each one writes its artifacts through `out` and wraps failures in
// StageError. The load_* helpers read what an earlier stage wrote.
Prepared stage_preprocess(const PipelineConfig& cfg, OutputDir& out);
Prepared load_prepared(const std::filesystem::path& dir);
ExtremeMask stage_detect(const Prepared& data, const PipelineConfig& cfg, OutputDir& out);
ExtremeMask load_mask(const std::filesystem::path& dir);
/// `like` supplies the axes written alongside the labels.
Labeling stage_label(const std::string& structure, const ExtremeMask& mask, const Grid3D& like,
                     const PipelineConfig& cfg, OutputDir& out);
Labeling load_labeling(const std::filesystem::path& dir, const std::string& structure);
StructureResult stage_stats(Labeling labeling, const ExtremeMask& mask, const Prepared& data, OutputDir& out);
void stage_powerlaw(StructureResult& r, std::span<const std::size_t> sizes, const PipelineConfig& cfg,
                    OutputDir& out);
void stage_attribute(StructureResult& r, const Prepared& data, const PipelineConfig& cfg, OutputDir& out);
void write_manifest(const PipelineConfig& cfg, OutputDir& out);

struct RunSummary {
  std::vector<StructureResult> structures;
  ExtremeMask mask;
};

/// Full pipeline: ingest, preprocess, detect, then label / stats / powerlaw /
/// attribute per structure, writing every artifact under cfg.out plus
/// manifest.json. Throws StageError.
RunSummary run_pipeline(const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Serialized stage artifacts

/// 1/0 per voxel, NaN where `like` is missing.
Grid3D mask_to_grid(const ExtremeMask& mask, const Grid3D& like);
ExtremeMask mask_from_grid(const Grid3D& g);
/// Component ids as values, 0 for background.
Grid3D labels_to_grid(const Labeling& l, const Grid3D& like);
/// Rebuilds a labeling from a label grid; ids must be 1..N with none absent.
Labeling labeling_from_grid(const Grid3D& g, const std::string& structure);

std::string components_csv(const std::vector<ComponentStats>& stats);
std::vector<std::size_t> component_sizes_from_csv(const std::string& text);
std::string cumulative_csv(const std::vector<CumulativePoint>& curve);
std::string map_csv(const Map2D& map, const LatLonAxes& axes, const std::string& column);
std::string powerlaw_csv(const SizeDistribution& d);
std::string powerlaw_fit_json(const std::optional<SizeDistribution>& d, const std::optional<PowerLawFit>& fit,
                              const std::string& status, const std::string& structure);
std::string attribution_csv(const AttributionTable& t);
std::string attribution_table_json(const AttributionTable& t);
std::string threshold_json(const ExtremeMask& mask, std::size_t valid_voxels);
std::string mask_summary_json(const ExtremeMask& mask, std::size_t valid_voxels, const StructureResult& r);

std::string loss_area_svg(const StructureResult& r);
std::string cumulative_svg(const StructureResult& r);
std::string powerlaw_svg(const StructureResult& r);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace stx
