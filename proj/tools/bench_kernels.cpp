#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "holosim/coincidence.hpp"
#include "holosim/forward_model.hpp"
#include "holosim/scan.hpp"
#include "holosim/source_sim.hpp"

using namespace holosim;

namespace {

double time_of(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, double serial_s, double parallel_s, bool equal) {
  std::printf("%-22s %10.4f s %10.4f s %7.2fx   %s\n", name, serial_s,
              parallel_s, serial_s / parallel_s, equal ? "match" : "MISMATCH");
}

bool frames_equal(const ScanResult& a, const ScanResult& b) {
  return a.heralded.counts.data == b.heralded.counts.data &&
         a.nonheralded.counts.data == b.nonheralded.counts.data &&
         a.triples.counts.data == b.triples.counts.data;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: not enabled in this build\n");
#endif
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  int failures = 0;

  {
    const ObjectMap object = make_half_circles(512, 512, 30e-6);
    const BeamProfile beam = centred_beam(512, 512, 30e-6);
    const TiltConfig tilt = tilt_from_cycles(512, 512, 30e-6, 8.5, 4.0);
    Grid<double> ser, par;
    const double ts =
        time_of([&] { ser = intensity_map_serial(object, beam, tilt); });
    const double tp = time_of([&] { par = intensity_map(object, beam, tilt); });
    const bool ok = ser.data == par.data;
    row("intensity_map 512^2", ts, tp, ok);
    failures += !ok;
  }

  {
    ScanConfig scan;
    scan.width = 256;
    scan.height = 256;
    scan.integration_s = 5.0;
    const ObjectMap object = make_half_circles(256, 256, scan.pixel_size_m);
    const BeamProfile beam = centred_beam(256, 256, scan.pixel_size_m);
    const TiltConfig tilt =
        tilt_from_cycles(256, 256, scan.pixel_size_m, 8.5, 0.0);
    const Grid<double> intensity = intensity_map(object, beam, tilt);
    const RateCalibration cal;
    ScanResult ser, par;
    const double ts =
        time_of([&] { ser = acquire_serial(scan, intensity, cal, 7); });
    const double tp = time_of([&] { par = acquire(scan, intensity, cal, 7); });
    const bool ok = frames_equal(ser, par);
    row("acquire 256^2", ts, tp, ok);
    failures += !ok;
  }

  {
    ScanConfig scan;
    scan.width = 48;
    scan.height = 48;
    scan.integration_s = 0.02;
    scan.mode = ScanMode::full_event;
    const ObjectMap object = make_half_circles(48, 48, scan.pixel_size_m);
    const BeamProfile beam = centred_beam(48, 48, scan.pixel_size_m);
    const TiltConfig tilt =
        tilt_from_cycles(48, 48, scan.pixel_size_m, 8.5, 0.0);
    const Grid<double> intensity = intensity_map(object, beam, tilt);
    FullEventSetup setup;
    setup.source.pair_rate = 2e5;
    ScanResult ser, par;
    const double ts = time_of(
        [&] { ser = acquire_full_serial(scan, intensity, setup, 7); });
    const double tp =
        time_of([&] { par = acquire_full(scan, intensity, setup, 7); });
    const bool ok = frames_equal(ser, par);
    row("acquire_full 48^2", ts, tp, ok);
    failures += !ok;
  }

  {
    SourceConfig src;
    src.pair_rate = 2e5;
    src.multi_pair_prob = 5e-4;
    src.duration_s = 20.0;
    Rng rng(11);
    PairStreams pairs = generate_pairs(src, rng);
    Rng split_rng(12);
    auto [a, b] = split_beam(pairs.signal, 0.5, split_rng);
    const TimeTag dur = pairs.duration_ps;
    RollingG2 ser, par;
    const double ts = time_of([&] {
      ser = rolling_g2_serial(pairs.herald, a, b, dur, to_ps(1.0), 4000);
    });
    const double tp = time_of([&] {
      par = rolling_g2(pairs.herald, a, b, dur, to_ps(1.0), 4000);
    });
    bool ok = ser.bins.size() == par.bins.size() &&
              ser.combined.g2 == par.combined.g2;
    for (std::size_t i = 0; ok && i < ser.bins.size(); ++i)
      ok = ser.bins[i].g2 == par.bins[i].g2 &&
           ser.bins[i].counts.n123 == par.bins[i].counts.n123;
    row("rolling_g2 20 s", ts, tp, ok);
    failures += !ok;
  }

  if (failures) {
    std::fprintf(stderr, "%d kernel(s) disagree with the serial reference\n",
                 failures);
    return 1;
  }
  return 0;
}
