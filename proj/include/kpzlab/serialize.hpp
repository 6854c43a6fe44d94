// Debug dumps: partition lattices as CSV with a provenance header, diffusion
// trajectories as a small versioned binary.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "kpzlab/diffusion.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/report.hpp"

namespace kpzlab {

inline std::string dump_lattice_csv(const Environment& env, const PartitionLattice& lat) {
  std::ostringstream out;
  out << "# m=" << env.m << " n=" << env.n << " seed=" << env.seed
      << " model=" << model_name(env.spec.model) << " theta=" << format_double(env.spec.theta)
      << " mu=" << format_double(env.spec.mu) << " beta=" << format_double(env.spec.beta)
      << " a=" << format_double(env.params.a) << " b=" << format_double(env.params.b) << "\n";
  for (int i = 0; i <= lat.m; ++i) {
    for (int j = 0; j <= lat.n; ++j) {
      if (j) out << ',';
      out << format_double(lat.z(i, j));
    }
    out << '\n';
  }
  return out.str();
}

inline constexpr char kTrajectoryMagic[8] = {'K', 'Z', 'T', 'R', 'A', 'J', '0', '1'};

inline void dump_trajectory(const Trajectory& traj, const std::string& descriptor,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trajectory file " + path);
  out.write(kTrajectoryMagic, sizeof(kTrajectoryMagic));
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u64(static_cast<std::uint64_t>(traj.n_coords));
  put_f64(traj.dt);
  put_f64(traj.t_end);
  put_f64(traj.eta);
  put_f64(traj.theta);
  put_u64(static_cast<std::uint64_t>(traj.level));
  put_u64(traj.seed);
  put_u64(traj.steps);
  put_u64(descriptor.size());
  out.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
  put_u64(traj.w.size());
  out.write(reinterpret_cast<const char*>(traj.w.data()),
            static_cast<std::streamsize>(traj.w.size() * 8));
  put_u64(traj.u.size());
  out.write(reinterpret_cast<const char*>(traj.u.data()),
            static_cast<std::streamsize>(traj.u.size() * 8));
}

inline Trajectory load_trajectory(const std::string& path, std::string* descriptor = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory file " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kTrajectoryMagic, 8) != 0) {
    throw IoError("not a trajectory file: " + path);
  }
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  Trajectory traj;
  traj.n_coords = static_cast<int>(get_u64());
  traj.dt = get_f64();
  traj.t_end = get_f64();
  traj.eta = get_f64();
  traj.theta = get_f64();
  traj.level = static_cast<int>(get_u64());
  traj.seed = get_u64();
  traj.steps = get_u64();
  std::string desc(get_u64(), '\0');
  in.read(desc.data(), static_cast<std::streamsize>(desc.size()));
  if (descriptor) *descriptor = desc;
  traj.w.resize(get_u64());
  in.read(reinterpret_cast<char*>(traj.w.data()), static_cast<std::streamsize>(traj.w.size() * 8));
  traj.u.resize(get_u64());
  in.read(reinterpret_cast<char*>(traj.u.data()), static_cast<std::streamsize>(traj.u.size() * 8));
  traj.stored = !traj.u.empty();
  if (!in) throw IoError("truncated trajectory file: " + path);
  return traj;
}

}  // namespace kpzlab
