#include "stx/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "format.hpp"

namespace stx {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
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

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("'" + key + "' expects on|off, got '" + v + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

MonthIndex to_month(const std::string& key, const std::string& v) {
  try {
    return MonthIndex::parse(v);
  } catch (const DomainError&) {
    throw ConfigError("'" + key + "' expects YYYY-MM, got '" + v + "'");
  }
}

}  // namespace

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir) {
  const std::string v = trim(value);
  if (key == "gpp") {
    cfg.gpp = resolve(base_dir, v);
  } else if (key == "tas") {
    cfg.tas = v.empty() ? std::filesystem::path{} : resolve(base_dir, v);
  } else if (key == "pr") {
    cfg.pr = v.empty() ? std::filesystem::path{} : resolve(base_dir, v);
  } else if (key == "start") {
    cfg.start = to_month(key, v);
  } else if (key == "end") {
    cfg.end = to_month(key, v);
  } else if (key == "target_grid") {
    const auto parts = split_list(v);
    if (parts.size() != 6) throw ConfigError("target_grid expects lat_lo,lat_hi,nlat,lon_lo,lon_hi,nlon");
    TargetGrid tg;
    tg.lat_lo = to_double(key, parts[0]);
    tg.lat_hi = to_double(key, parts[1]);
    tg.nlat = to_size(key, parts[2]);
    tg.lon_lo = to_double(key, parts[3]);
    tg.lon_hi = to_double(key, parts[4]);
    tg.nlon = to_size(key, parts[5]);
    cfg.target_grid = tg;
  } else if (key == "preprocess") {
    cfg.preprocess = to_bool(key, v);
  } else if (key == "ssa_window") {
    cfg.ssa_window = to_size(key, v);
  } else if (key == "percentile") {
    cfg.threshold.percentile_total = to_double(key, v);
  } else if (key == "tail") {
    try {
      cfg.threshold.tail = parse_tail(v);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "tail_budget") {
    if (v == "split") {
      cfg.threshold.split_tails = true;
    } else if (v == "single") {
      cfg.threshold.split_tails = false;
    } else {
      throw ConfigError("tail_budget expects split|single, got '" + v + "'");
    }
  } else if (key == "structures" || key == "structure") {
    cfg.structures = split_list(v);
  } else if (key == "lesd_connectivity") {
    cfg.lesd_connectivity = static_cast<int>(to_size(key, v));
  } else if (key == "wrap_lon") {
    if (v == "auto") {
      cfg.wrap_lon = WrapMode::Auto;
    } else {
      cfg.wrap_lon = to_bool(key, v) ? WrapMode::On : WrapMode::Off;
    }
  } else if (key == "top_k") {
    cfg.attribution.top_k = to_size(key, v);
  } else if (key == "lags") {
    cfg.attribution.max_lag = to_size(key, v);
  } else if (key == "reference") {
    try {
      cfg.attribution.reference = parse_reference_mode(v);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "fit_method") {
    try {
      cfg.fit_method = parse_fit_method(v);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "fit_sesd") {
    cfg.fit_sesd = to_bool(key, v);
  } else if (key == "out") {
    cfg.out = resolve(base_dir, v);
  } else if (key == "format") {
    const auto items = split_list(v);
    cfg.formats = std::set<std::string>(items.begin(), items.end());
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void PipelineConfig::validate() const {
  if (gpp.empty()) throw ConfigError("no gpp input configured");
  for (const auto& p : {gpp, tas, pr}) {
    if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError("input file not found: " + p.string());
  }
  if (tas.empty() != pr.empty()) throw ConfigError("tas and pr must be given together");
  if (structures.empty()) throw ConfigError("no neighborhood structures configured");
  for (const auto& s : structures) {
    if (!is_structure_name(s)) {
      throw ConfigError("unknown structure '" + s + "' (expected sesd, seld, lesd, 6n, 18n or leld)");
    }
  }
  if (lesd_connectivity != 4 && lesd_connectivity != 8) throw ConfigError("lesd_connectivity must be 4 or 8");
  if (!(threshold.percentile_total > 0.0 && threshold.percentile_total < 100.0)) {
    throw ConfigError("percentile must lie strictly between 0 and 100");
  }
  if (attribution.top_k < 1) throw ConfigError("top_k must be at least 1");
  if (start && end && *end < *start) throw ConfigError("end precedes start");
  if (ssa_window != 0 && ssa_window < 12) throw ConfigError("ssa_window must be 0 (auto) or at least 12");
  for (const auto& f : formats) {
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
  }
  if (target_grid && (target_grid->nlat == 0 || target_grid->nlon == 0)) {
    throw ConfigError("target_grid needs at least one cell per axis");
  }
}

std::string PipelineConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["gpp"] = gpp.generic_string();
  kv["tas"] = tas.generic_string();
  kv["pr"] = pr.generic_string();
  kv["start"] = start ? start->to_string() : "";
  kv["end"] = end ? end->to_string() : "";
  if (target_grid) {
    const auto& t = *target_grid;
    kv["target_grid"] = detail::fmt_num(t.lat_lo) + "," + detail::fmt_num(t.lat_hi) + "," + std::to_string(t.nlat) +
                        "," + detail::fmt_num(t.lon_lo) + "," + detail::fmt_num(t.lon_hi) + "," +
                        std::to_string(t.nlon);
  }
  kv["preprocess"] = preprocess ? "on" : "off";
  kv["ssa_window"] = std::to_string(ssa_window);
  kv["percentile"] = detail::fmt_num(threshold.percentile_total);
  kv["tail"] = std::string(to_string(threshold.tail));
  kv["tail_budget"] = threshold.split_tails ? "split" : "single";
  std::string s;
  for (const auto& n : structures) s += (s.empty() ? "" : ",") + n;
  kv["structures"] = s;
  kv["lesd_connectivity"] = std::to_string(lesd_connectivity);
  kv["wrap_lon"] = wrap_lon == WrapMode::Auto ? "auto" : wrap_lon == WrapMode::On ? "on" : "off";
  kv["top_k"] = std::to_string(attribution.top_k);
  kv["lags"] = std::to_string(attribution.max_lag);
  kv["reference"] = to_string(attribution.reference);
  kv["fit_method"] = to_string(fit_method);
  kv["fit_sesd"] = fit_sesd ? "on" : "off";
  std::string f;
  for (const auto& x : formats) f += (f.empty() ? "" : ",") + x;
  kv["format"] = f;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string PipelineConfig::hash() const { return fnv1a_hex(canonical_text()); }

}  // namespace stx
