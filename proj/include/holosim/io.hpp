#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holosim/coincidence.hpp"
#include "holosim/grid.hpp"
#include "holosim/timetags.hpp"

namespace holosim {

// Time-tag binary format: little-endian records of (uint8 channel,
// uint64 timestamp_ps), sorted by timestamp, no header.  A text sidecar
// (same path + ".meta.txt") records the run duration and channel labels.
void write_tags_binary(const std::string& path, const TimeTagStream& stream);
TimeTagStream read_tags_binary(const std::string& path);

void write_tags_sidecar(const std::string& bin_path, TimeTag duration_ps,
                        const std::vector<std::string>& channel_notes);

// CSV alternative: header "channel,timestamp_ps", one record per line.
void write_tags_csv(const std::string& path, const TimeTagStream& stream);
TimeTagStream read_tags_csv(const std::string& path);

// Count-frame CSV: first line "# width height pixel_size_m integration_s
// channel", then height comma-separated rows.
void write_frame_csv(const std::string& path, const HologramFrame& frame);
HologramFrame read_frame_csv(const std::string& path);

// Plain-text PGM (P2) render, linearly scaled to the given maxval.
void write_frame_pgm(const std::string& path, const HologramFrame& frame,
                     int maxval = 65535);
void write_grid_pgm(const std::string& path, const Grid<double>& values,
                    int maxval = 65535);

// Phase render: (-pi, pi] maps linearly onto [0, 255].
void write_phase_pgm(const std::string& path, const Grid<cplx>& field);

// Complex field as amplitude CSV + phase CSV + both PGM renders.
// `stem` gets _amplitude.csv, _phase.csv, _amplitude.pgm, _phase.pgm.
void write_field(const std::string& stem, const ComplexField& field);

// Float grid CSV with the same header shape as frames (channel names the
// quantity).  Values print with enough digits to round-trip.
void write_grid_csv(const std::string& path, const Grid<double>& grid,
                    double pixel_size_m, const std::string& quantity);
Grid<double> read_grid_csv(const std::string& path, double* pixel_size_m = nullptr);

// 1D count profile CSV: "# n oversample integration_s channel" then one
// count per line.
void write_profile_csv(const std::string& path,
                       const std::vector<std::int64_t>& counts, int oversample,
                       double integration_s, const std::string& channel);
std::vector<std::int64_t> read_profile_csv(const std::string& path,
                                           int* oversample = nullptr,
                                           double* integration_s = nullptr);

// Coincidence report CSV line: N1,N12,N13,N123,window_ns,g2,g2_sigma.
void write_g2_csv(const std::string& path, const std::vector<G2Report>& bins,
                  const G2Report* combined);

// FNV-1a 64-bit over a byte string, hex encoded; used to fingerprint the
// configuration inside run manifests.
std::string fnv1a_hex(const std::string& bytes);

// Run manifest (JSON): command, seed, configuration hash, output list.
void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed, const std::string& config_hash,
                    const std::vector<std::string>& outputs);

}  // namespace holosim
