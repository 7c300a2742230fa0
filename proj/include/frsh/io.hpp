#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "frsh/grid.hpp"
#include "frsh/propagator.hpp"

namespace frsh {

// FNV-1a, used for the config hash and artifact content hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("hash_file: cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

// Shortest decimal form that round-trips a double; keeps CSVs byte-stable.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- field snapshot format -------------------------------------------------
// little-endian: magic "FRSH", u32 version, u32 d, u32 N, f64 L, f64 alpha,
// then N^d (re, im) pairs of f64 in row-major order.

inline constexpr std::uint32_t kSnapshotVersion = 1;

inline void write_snapshot(const std::filesystem::path& path, const Field& f, double alpha) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_snapshot: cannot open " + path.string());
  out.write("FRSH", 4);
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(kSnapshotVersion);
  put_u32(static_cast<std::uint32_t>(f.grid.dim));
  put_u32(static_cast<std::uint32_t>(f.grid.n));
  put_f64(f.grid.half_width);
  put_f64(alpha);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(Complex)));
  if (!out) throw IoError("write_snapshot: write failed for " + path.string());
}

struct Snapshot {
  Field field;
  double alpha = 0.0;
};

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_snapshot: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FRSH", 4) != 0)
    throw IoError("read_snapshot: bad magic in " + path.string());
  auto get_u32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  const std::uint32_t version = get_u32();
  if (version != kSnapshotVersion)
    throw IoError("read_snapshot: unsupported version in " + path.string());
  const int dim = static_cast<int>(get_u32());
  const int n = static_cast<int>(get_u32());
  const double L = get_f64();
  Snapshot snap;
  snap.alpha = get_f64();
  snap.field.grid = Grid::make(dim, n, L);
  snap.field.values.resize(snap.field.grid.size());
  in.read(reinterpret_cast<char*>(snap.field.values.data()),
          static_cast<std::streamsize>(snap.field.values.size() * sizeof(Complex)));
  if (!in) throw IoError("read_snapshot: truncated file " + path.string());
  return snap;
}

// ---- trajectory CSV ----------------------------------------------------------

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                                 const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("write_trajectory_csv: cannot open " + path.string());
  out << "# config_hash=" << config_hash << "\n";
  out << "t,mass,energy,hseminorm,lqlr_partial,dt,event\n";
  for (const auto& r : traj.log)
    out << fmt_double(r.t) << ',' << fmt_double(r.mass) << ',' << fmt_double(r.energy)
        << ',' << fmt_double(r.hseminorm) << ',' << fmt_double(r.lqlr_partial) << ','
        << fmt_double(r.dt) << ',' << r.event << "\n";
  if (!out) throw IoError("write_trajectory_csv: write failed for " + path.string());
}

inline void write_concentration_csv(const std::filesystem::path& path,
                                    const std::vector<std::array<double, 3>>& rows,
                                    const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw IoError("write_concentration_csv: cannot open " + path.string());
  out << "# config_hash=" << config_hash << "\n";
  out << "t,R,fraction\n";
  for (const auto& r : rows)
    out << fmt_double(r[0]) << ',' << fmt_double(r[1]) << ',' << fmt_double(r[2]) << "\n";
}

}  // namespace frsh
