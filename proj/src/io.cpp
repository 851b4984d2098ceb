#include "holosim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "holosim/errors.hpp"

namespace holosim {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw DataError("cannot open '" + path + "' for reading");
  return f;
}

void finish_write(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw DataError("short write to '" + path + "'");
}

double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad number '" + tok + "' in " + where);
  }
}

std::int64_t parse_int(const std::string& tok, const std::string& where) {
  std::int64_t v = 0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError("bad integer '" + tok + "' in " + where);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_tags_binary(const std::string& path, const TimeTagStream& stream) {
  if (stream.channel < 0 || stream.channel > 255)
    throw ConfigError("channel label must fit in one byte");
  std::ofstream f = open_out(path, true);
  unsigned char rec[9];
  rec[0] = static_cast<unsigned char>(stream.channel);
  for (const TimeTag t : stream.tags) {
    if (t < 0) throw DataError("negative timestamp cannot be stored");
    const std::uint64_t u = static_cast<std::uint64_t>(t);
    for (int i = 0; i < 8; ++i)
      rec[1 + i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    f.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  finish_write(f, path);
}

TimeTagStream read_tags_binary(const std::string& path) {
  std::ifstream f = open_in(path, true);
  f.seekg(0, std::ios::end);
  const std::int64_t size = f.tellg();
  f.seekg(0, std::ios::beg);
  if (size % 9 != 0)
    throw DataError("'" + path + "' is truncated: stray bytes at offset " +
                    std::to_string(size - size % 9));

  TimeTagStream out;
  out.channel = -1;
  unsigned char rec[9];
  TimeTag prev = -1;
  for (std::int64_t off = 0; off < size; off += 9) {
    f.read(reinterpret_cast<char*>(rec), sizeof(rec));
    if (!f) throw DataError("read failed at byte offset " + std::to_string(off));
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i)
      u |= static_cast<std::uint64_t>(rec[1 + i]) << (8 * i);
    const TimeTag t = static_cast<TimeTag>(u);
    if (out.channel < 0) out.channel = rec[0];
    else if (rec[0] != out.channel)
      throw DataError("'" + path + "' mixes channels at byte offset " +
                      std::to_string(off));
    if (t <= prev)
      throw DataError("'" + path + "' is not strictly ascending at byte offset " +
                      std::to_string(off));
    prev = t;
    out.tags.push_back(t);
  }
  if (out.channel < 0) out.channel = 0;

  // A sidecar pins the true run duration; without one the last tag serves.
  std::ifstream meta(path + ".meta.txt");
  out.duration_ps = out.tags.empty() ? 0 : out.tags.back();
  if (meta) {
    std::string line;
    while (std::getline(meta, line)) {
      const std::string key = "duration_ps=";
      if (line.rfind(key, 0) == 0)
        out.duration_ps = parse_int(line.substr(key.size()), path + ".meta.txt");
    }
  }
  return out;
}

void write_tags_sidecar(const std::string& bin_path, TimeTag duration_ps,
                        const std::vector<std::string>& channel_notes) {
  std::ofstream f = open_out(bin_path + ".meta.txt", false);
  f << "duration_ps=" << duration_ps << "\n";
  for (const std::string& note : channel_notes) f << note << "\n";
  finish_write(f, bin_path + ".meta.txt");
}

void write_tags_csv(const std::string& path, const TimeTagStream& stream) {
  std::ofstream f = open_out(path, false);
  f << "channel,timestamp_ps\n";
  for (const TimeTag t : stream.tags)
    f << stream.channel << ',' << t << '\n';
  finish_write(f, path);
}

TimeTagStream read_tags_csv(const std::string& path) {
  std::ifstream f = open_in(path, false);
  std::string line;
  if (!std::getline(f, line) || line != "channel,timestamp_ps")
    throw DataError("'" + path + "' line 1: expected header channel,timestamp_ps");
  TimeTagStream out;
  out.channel = -1;
  TimeTag prev = -1;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> tok = split(line, ',');
    const std::string where = "'" + path + "' line " + std::to_string(lineno);
    if (tok.size() != 2) throw DataError(where + ": expected 2 fields");
    const std::int64_t ch = parse_int(tok[0], where);
    const TimeTag t = parse_int(tok[1], where);
    if (out.channel < 0) out.channel = static_cast<int>(ch);
    else if (ch != out.channel) throw DataError(where + ": channel changed");
    if (t <= prev) throw DataError(where + ": timestamps not strictly ascending");
    prev = t;
    out.tags.push_back(t);
  }
  if (out.channel < 0) out.channel = 0;
  out.duration_ps = out.tags.empty() ? 0 : out.tags.back();
  return out;
}

namespace {

void write_counts_csv(const std::string& path, const Grid<std::int64_t>& counts,
                      double pixel_size_m, double integration_s,
                      const std::string& channel) {
  std::ofstream f = open_out(path, false);
  f << "# " << counts.width << ' ' << counts.height << ' '
    << format_double(pixel_size_m) << ' ' << format_double(integration_s)
    << ' ' << channel << '\n';
  for (int y = 0; y < counts.height; ++y) {
    for (int x = 0; x < counts.width; ++x) {
      if (x) f << ',';
      f << counts.at(x, y);
    }
    f << '\n';
  }
  finish_write(f, path);
}

struct CsvHeader {
  int width = 0;
  int height = 0;
  double pixel_size_m = 0.0;
  double integration_s = 0.0;
  std::string channel;
};

CsvHeader read_csv_header(std::ifstream& f, const std::string& path) {
  std::string line;
  if (!std::getline(f, line) || line.size() < 2 || line[0] != '#')
    throw DataError("'" + path + "' line 1: missing header");
  std::istringstream ss(line.substr(1));
  CsvHeader h;
  if (!(ss >> h.width >> h.height >> h.pixel_size_m >> h.integration_s >>
        h.channel))
    throw DataError("'" + path + "' line 1: malformed header");
  if (h.width <= 0 || h.height <= 0)
    throw DataError("'" + path + "' line 1: dimensions must be positive");
  return h;
}

}  // namespace

void write_frame_csv(const std::string& path, const HologramFrame& frame) {
  write_counts_csv(path, frame.counts, frame.pixel_size_m, frame.integration_s,
                   frame.channel.empty() ? "counts" : frame.channel);
}

HologramFrame read_frame_csv(const std::string& path) {
  std::ifstream f = open_in(path, false);
  const CsvHeader h = read_csv_header(f, path);
  HologramFrame frame;
  frame.pixel_size_m = h.pixel_size_m;
  frame.integration_s = h.integration_s;
  frame.channel = h.channel;
  frame.counts = Grid<std::int64_t>(h.width, h.height, 0);
  std::string line;
  for (int y = 0; y < h.height; ++y) {
    const std::string where = "'" + path + "' line " + std::to_string(y + 2);
    if (!std::getline(f, line)) throw DataError(where + ": missing row");
    const std::vector<std::string> tok = split(line, ',');
    if (static_cast<int>(tok.size()) != h.width)
      throw DataError(where + ": expected " + std::to_string(h.width) +
                      " columns, found " + std::to_string(tok.size()));
    for (int x = 0; x < h.width; ++x)
      frame.counts.at(x, y) = parse_int(tok[x], where);
  }
  return frame;
}

namespace {

void write_pgm(const std::string& path, const Grid<double>& values,
               int maxval) {
  if (maxval < 1 || maxval > 65535) throw ConfigError("PGM maxval out of range");
  double lo = 0.0, hi = 0.0;
  for (const double v : values.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  std::ofstream f = open_out(path, false);
  f << "P2\n" << values.width << ' ' << values.height << '\n' << maxval << '\n';
  for (int y = 0; y < values.height; ++y) {
    for (int x = 0; x < values.width; ++x) {
      const double rel = span > 0.0 ? (values.at(x, y) - lo) / span : 0.0;
      if (x) f << ' ';
      f << static_cast<int>(std::lround(rel * maxval));
    }
    f << '\n';
  }
  finish_write(f, path);
}

}  // namespace

void write_frame_pgm(const std::string& path, const HologramFrame& frame,
                     int maxval) {
  Grid<double> tmp(frame.counts.width, frame.counts.height);
  for (std::size_t i = 0; i < tmp.data.size(); ++i)
    tmp.data[i] = static_cast<double>(frame.counts.data[i]);
  write_pgm(path, tmp, maxval);
}

void write_grid_pgm(const std::string& path, const Grid<double>& values,
                    int maxval) {
  write_pgm(path, values, maxval);
}

void write_phase_pgm(const std::string& path, const Grid<cplx>& field) {
  std::ofstream f = open_out(path, false);
  f << "P2\n" << field.width << ' ' << field.height << "\n255\n";
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const double arg = std::arg(field.at(x, y));  // (-pi, pi]
      const int v = std::clamp(
          static_cast<int>(std::lround((arg + kPi) / (2.0 * kPi) * 255.0)), 0,
          255);
      if (x) f << ' ';
      f << v;
    }
    f << '\n';
  }
  finish_write(f, path);
}

void write_field(const std::string& stem, const ComplexField& field) {
  Grid<double> amp(field.field.width, field.field.height);
  Grid<double> phase(field.field.width, field.field.height);
  for (std::size_t i = 0; i < amp.data.size(); ++i) {
    amp.data[i] = std::abs(field.field.data[i]);
    phase.data[i] = std::arg(field.field.data[i]);
  }
  write_grid_csv(stem + "_amplitude.csv", amp, field.pixel_size_m, "amplitude");
  write_grid_csv(stem + "_phase.csv", phase, field.pixel_size_m, "phase_rad");
  write_grid_pgm(stem + "_amplitude.pgm", amp);
  write_phase_pgm(stem + "_phase.pgm", field.field);
}

void write_grid_csv(const std::string& path, const Grid<double>& grid,
                    double pixel_size_m, const std::string& quantity) {
  std::ofstream f = open_out(path, false);
  f << "# " << grid.width << ' ' << grid.height << ' '
    << format_double(pixel_size_m) << " 0 " << quantity << '\n';
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (x) f << ',';
      f << format_double(grid.at(x, y));
    }
    f << '\n';
  }
  finish_write(f, path);
}

Grid<double> read_grid_csv(const std::string& path, double* pixel_size_m) {
  std::ifstream f = open_in(path, false);
  const CsvHeader h = read_csv_header(f, path);
  if (pixel_size_m) *pixel_size_m = h.pixel_size_m;
  Grid<double> grid(h.width, h.height, 0.0);
  std::string line;
  for (int y = 0; y < h.height; ++y) {
    const std::string where = "'" + path + "' line " + std::to_string(y + 2);
    if (!std::getline(f, line)) throw DataError(where + ": missing row");
    const std::vector<std::string> tok = split(line, ',');
    if (static_cast<int>(tok.size()) != h.width)
      throw DataError(where + ": expected " + std::to_string(h.width) +
                      " columns, found " + std::to_string(tok.size()));
    for (int x = 0; x < h.width; ++x)
      grid.at(x, y) = parse_double(tok[x], where);
  }
  return grid;
}

void write_profile_csv(const std::string& path,
                       const std::vector<std::int64_t>& counts, int oversample,
                       double integration_s, const std::string& channel) {
  std::ofstream f = open_out(path, false);
  f << "# " << counts.size() << ' ' << oversample << ' '
    << format_double(integration_s) << ' ' << channel << '\n';
  for (const std::int64_t c : counts) f << c << '\n';
  finish_write(f, path);
}

std::vector<std::int64_t> read_profile_csv(const std::string& path,
                                           int* oversample,
                                           double* integration_s) {
  std::ifstream f = open_in(path, false);
  std::string line;
  if (!std::getline(f, line) || line.size() < 2 || line[0] != '#')
    throw DataError("'" + path + "' line 1: missing header");
  std::istringstream ss(line.substr(1));
  std::size_t n = 0;
  int os = 1;
  double t = 0.0;
  std::string channel;
  if (!(ss >> n >> os >> t >> channel))
    throw DataError("'" + path + "' line 1: malformed header");
  if (oversample) *oversample = os;
  if (integration_s) *integration_s = t;
  std::vector<std::int64_t> counts;
  counts.reserve(n);
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    counts.push_back(
        parse_int(line, "'" + path + "' line " + std::to_string(lineno)));
  }
  if (counts.size() != n)
    throw DataError("'" + path + "': header promises " + std::to_string(n) +
                    " samples, file holds " + std::to_string(counts.size()));
  return counts;
}

void write_g2_csv(const std::string& path, const std::vector<G2Report>& bins,
                  const G2Report* combined) {
  std::ofstream f = open_out(path, false);
  f << "N1,N12,N13,N123,window_ns,g2,g2_sigma\n";
  auto row = [&](const G2Report& r) {
    f << r.counts.n1 << ',' << r.counts.n12 << ',' << r.counts.n13 << ','
      << r.counts.n123 << ',' << format_double(r.counts.window_ns) << ',';
    if (r.defined)
      f << format_double(r.g2) << ',' << format_double(r.sigma) << '\n';
    else
      f << "nan,nan\n";
  };
  for (const G2Report& r : bins) row(r);
  if (combined) {
    f << "# pooled over all bins\n";
    row(*combined);
  }
  finish_write(f, path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed, const std::string& config_hash,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_fnv1a64"] = config_hash;
  j["outputs"] = outputs;
  std::ofstream f = open_out(path, false);
  f << j.dump(2) << '\n';
  finish_write(f, path);
}

}  // namespace holosim
