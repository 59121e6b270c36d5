#include "stx/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace stx {

namespace {

constexpr std::uint64_t kCanonicalNaN64 = 0x7ff8000000000000ull;
constexpr std::uint32_t kCanonicalNaN32 = 0x7fc00000u;

class ByteWriter {
public:
  template <typename U>
  void put_uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void put_f64(double v) {
    put_uint<std::uint64_t>(std::isnan(v) ? kCanonicalNaN64 : std::bit_cast<std::uint64_t>(v));
  }
  void put_f32(double v) {
    const auto f = static_cast<float>(v);
    put_uint<std::uint32_t>(std::isnan(f) ? kCanonicalNaN32 : std::bit_cast<std::uint32_t>(f));
  }
  void put_text(const std::string& s) {
    if (s.size() > 0xffff) throw DomainError("text field longer than 65535 bytes");
    put_uint<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void put_bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CorruptionError("STXG payload is truncated");
  }
  template <typename U>
  U get_uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }
  double get_f64() { return std::bit_cast<double>(get_uint<std::uint64_t>()); }
  double get_f32() { return static_cast<double>(std::bit_cast<float>(get_uint<std::uint32_t>())); }
  std::string get_text() {
    const auto n = get_uint<std::uint16_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> get_f64s(std::size_t n) {
    need(n * 8);
    std::vector<double> v(n);
    for (auto& x : v) x = get_f64();
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> write_grid(const Grid3D& g) {
  g.validate();
  ByteWriter w;
  w.put_bytes("STXG");
  w.put_uint<std::uint32_t>(kStxgVersion);
  w.put_uint<std::uint32_t>(static_cast<std::uint32_t>(g.ntime()));
  w.put_uint<std::uint32_t>(static_cast<std::uint32_t>(g.nlat()));
  w.put_uint<std::uint32_t>(static_cast<std::uint32_t>(g.nlon()));
  w.put_uint<std::uint8_t>(static_cast<std::uint8_t>(g.storage));
  w.put_text(g.units);
  w.put_text(g.variable_name);
  for (MonthIndex m : g.time) w.put_uint<std::uint32_t>(static_cast<std::uint32_t>(m.raw()));
  for (double v : g.axes.lat_edges) w.put_f64(v);
  for (double v : g.axes.lat_centers) w.put_f64(v);
  for (double v : g.axes.lon_edges) w.put_f64(v);
  for (double v : g.axes.lon_centers) w.put_f64(v);
  if (g.storage == DType::Float32) {
    for (double v : g.values) w.put_f32(v);
  } else {
    for (double v : g.values) w.put_f64(v);
  }
  return w.take();
}

Grid3D read_grid(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "STXG", 4) != 0) {
    throw FormatError("not an STXG container (bad magic)");
  }
  ByteReader r(bytes.subspan(4));
  const auto version = r.get_uint<std::uint32_t>();
  if (version != kStxgVersion) {
    throw FormatError("unsupported STXG version " + std::to_string(version));
  }
  const std::size_t nt = r.get_uint<std::uint32_t>();
  const std::size_t ny = r.get_uint<std::uint32_t>();
  const std::size_t nx = r.get_uint<std::uint32_t>();
  const auto dtype = r.get_uint<std::uint8_t>();
  if (dtype > 1) throw FormatError("unknown STXG dtype code " + std::to_string(dtype));

  Grid3D g;
  g.storage = static_cast<DType>(dtype);
  g.units = r.get_text();
  g.variable_name = r.get_text();

  const std::size_t elem = dtype == 0 ? 4 : 8;
  if (ny != 0 && nx != 0 && nt > r.remaining() / (ny * nx)) {
    throw CorruptionError("STXG declared dimensions exceed the payload");
  }
  const std::size_t expected = nt * 4 + (2 * ny + 1) * 8 + (2 * nx + 1) * 8 + nt * ny * nx * elem;
  if (r.remaining() != expected) {
    throw CorruptionError("STXG payload holds " + std::to_string(r.remaining()) +
                          " bytes, declared dimensions need " + std::to_string(expected));
  }
  g.time.resize(nt);
  for (auto& m : g.time) m = MonthIndex(static_cast<std::int32_t>(r.get_uint<std::uint32_t>()));
  g.axes.lat_edges = r.get_f64s(ny + 1);
  g.axes.lat_centers = r.get_f64s(ny);
  g.axes.lon_edges = r.get_f64s(nx + 1);
  g.axes.lon_centers = r.get_f64s(nx);
  g.values.resize(nt * ny * nx);
  for (auto& v : g.values) v = dtype == 0 ? r.get_f32() : r.get_f64();
  g.validate();
  return g;
}

Grid3D read_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_grid(bytes);
}

void write_grid_file(const Grid3D& g, const std::filesystem::path& path) {
  const auto bytes = write_grid(g);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// CSV fixtures

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view tok) {
  if (tok == "NA" || tok == "NaN" || tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ValidationError("cannot parse number '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<double> parse_numbers(std::string_view list) {
  std::vector<double> out;
  for (auto tok : split(list, ',')) out.push_back(parse_number(tok));
  return out;
}

std::string shortest(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

Grid3D read_csv_grid(std::string_view text) {
  Grid3D g;
  std::vector<double> lat_edges, lon_edges;
  bool have_lat = false, have_lon = false, have_t0 = false;
  MonthIndex t0;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t width = 0;

  for (auto raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line = trim(line.substr(1));
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = trim(line.substr(0, eq));
      const auto val = trim(line.substr(eq + 1));
      if (key == "var") {
        g.variable_name = std::string(val);
      } else if (key == "units") {
        g.units = std::string(val);
      } else if (key == "lat_edges") {
        lat_edges = parse_numbers(val);
        have_lat = true;
      } else if (key == "lon_edges") {
        lon_edges = parse_numbers(val);
        have_lon = true;
      } else if (key == "t0") {
        try {
          t0 = MonthIndex::parse(std::string(val));
        } catch (const DomainError& e) {
          throw ValidationError(e.what());
        }
        have_t0 = true;
      }
      continue;
    }
    const auto cols = split(line, ',');
    if (width == 0) width = cols.size();
    if (cols.size() != width) throw ValidationError("CSV rows have inconsistent column counts");
    for (auto tok : cols) values.push_back(parse_number(tok));
    ++rows;
  }

  if (!have_lat) throw ValidationError("CSV grid is missing the '# lat_edges=' header");
  if (!have_lon) throw ValidationError("CSV grid is missing the '# lon_edges=' header");
  if (!have_t0) throw ValidationError("CSV grid is missing the '# t0=' header");
  if (lat_edges.size() < 2 || lon_edges.size() < 2) throw ValidationError("CSV grid needs at least two edges per axis");

  g.axes = LatLonAxes::from_edges(std::move(lat_edges), std::move(lon_edges));
  const std::size_t ny = g.nlat(), nx = g.nlon();
  if (rows == 0 || rows % ny != 0) {
    throw ValidationError("CSV row count must be a positive multiple of nlat");
  }
  if (width != nx) throw ValidationError("CSV column count must equal nlon");
  g.time = Grid3D::month_range(t0, rows / ny);
  g.values = std::move(values);
  g.validate();
  return g;
}

std::string write_csv_grid(const Grid3D& g) {
  g.validate();
  std::ostringstream os;
  auto join = [&os](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << shortest(v[i]);
  };
  os << "# var=" << g.variable_name << "\n# units=" << g.units << "\n# lat_edges=";
  join(g.axes.lat_edges);
  os << "\n# lon_edges=";
  join(g.axes.lon_edges);
  os << "\n# t0=" << g.time.front().to_string() << "\n";
  for (std::size_t t = 0; t < g.ntime(); ++t) {
    for (std::size_t y = 0; y < g.nlat(); ++y) {
      for (std::size_t x = 0; x < g.nlon(); ++x) os << (x ? "," : "") << shortest(g.at(t, y, x));
      os << "\n";
    }
  }
  return os.str();
}

Grid3D load_grid(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return read_csv_grid(ss.str());
  }
  return read_grid_file(path);
}

// ---------------------------------------------------------------------------
// Time handling

Grid3D subset_time(const Grid3D& g, MonthIndex start, MonthIndex end) {
  if (end < start) throw DomainError("subset_time: end precedes start");
  if (g.time.empty() || start < g.time.front() || end > g.time.back()) {
    throw DomainError("subset_time: window " + start.to_string() + ".." + end.to_string() +
                      " is outside the grid's time axis");
  }
  const auto offset = static_cast<std::size_t>(start - g.time.front());
  const auto n = static_cast<std::size_t>(end - start + 1);
  Grid3D out;
  out.variable_name = g.variable_name;
  out.units = g.units;
  out.axes = g.axes;
  out.storage = g.storage;
  out.time = Grid3D::month_range(start, n);
  const std::size_t nc = g.ncells();
  out.values.assign(g.values.begin() + static_cast<std::ptrdiff_t>(offset * nc),
                    g.values.begin() + static_cast<std::ptrdiff_t>((offset + n) * nc));
  return out;
}

}  // namespace stx
