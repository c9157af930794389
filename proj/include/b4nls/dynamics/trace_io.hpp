#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "b4nls/dynamics/evolve.hpp"
#include "b4nls/spectral/snapshot.hpp"

namespace b4nls {

/// Seventeen significant digits, so every CSV value round-trips exactly.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace b4nls

namespace b4nls::dynamics {

inline void write_ledger_csv(std::ostream& os, const EvolutionTrace& trace) {
  os << "t,mass,energy,damping_flux\n";
  for (const auto& r : trace.ledger)
    os << format_real(r.t) << ',' << format_real(r.mass) << ',' << format_real(r.energy) << ','
       << format_real(r.damping_flux) << '\n';
}

/// Writes `ledger.csv`, `snapshots/state_NNNNNN.b4nls` and, for forced runs,
/// `controls/control_NNNNNN.b4nls` under `dir`.
inline void write_trace(const std::filesystem::path& dir, const EvolutionTrace& trace) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "snapshots");
  {
    std::ofstream os(dir / "ledger.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / "ledger.csv").string());
    write_ledger_csv(os, trace);
  }
  char name[48];
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    std::snprintf(name, sizeof name, "state_%06zu.b4nls", i);
    write_snapshot(dir / "snapshots" / name, trace.states[i]);
  }
  if (!trace.controls.empty()) {
    fs::create_directories(dir / "controls");
    for (std::size_t i = 0; i < trace.controls.size(); ++i) {
      std::snprintf(name, sizeof name, "control_%06zu.b4nls", i);
      write_snapshot(dir / "controls" / name, trace.controls[i]);
    }
  }
}

}  // namespace b4nls::dynamics
