#pragma once

// Output plumbing shared by the CLI and tests: round-trip-safe number
// formatting, CSV assembly, and atomic file writes. CSV convention:
// '.' decimal point, ',' separator, LF line endings, 17 significant digits.

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "twsolve/errors.hpp"
#include "twsolve/integrate.hpp"

namespace twsolve {

/// Shortest 17-significant-digit representation; parses back bit-identical.
inline std::string format_double(double x) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  static std::atomic<std::uint64_t> counter{0};
  const std::uint64_t tag =
      (static_cast<std::uint64_t>(
           std::chrono::steady_clock::now().time_since_epoch().count())
       << 8) ^
      counter.fetch_add(1);
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(tag);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("atomic_write: cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("atomic_write: short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw Error("atomic_write: rename to " + path.string() + " failed: " +
                ec.message());
  }
}

/// Generic two-column CSV (e.g. `T,U` series profiles or `xi,u` wave dumps).
inline std::string two_column_csv(const std::string& col1,
                                  const std::string& col2,
                                  const std::vector<std::array<double, 2>>& rows) {
  std::string out = col1 + "," + col2 + "\n";
  for (const auto& r : rows)
    out += format_double(r[0]) + "," + format_double(r[1]) + "\n";
  return out;
}

/// Phase-plane trajectories, one block per trajectory:
/// header `trajectory_id,T,U,W`, nodes in integration order.
inline std::string trajectories_csv(const std::vector<Trajectory>& trajectories) {
  std::string out = "trajectory_id,T,U,W\n";
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    const Trajectory& tr = trajectories[id];
    for (std::size_t i = 0; i < tr.size(); ++i)
      out += std::to_string(id) + "," + format_double(tr.ts[i]) + "," +
             format_double(tr.ys[i].U) + "," + format_double(tr.ys[i].W) + "\n";
  }
  return out;
}

}  // namespace twsolve
