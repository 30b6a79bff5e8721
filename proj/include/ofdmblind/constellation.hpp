#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ofdmblind/types.hpp"

namespace ofdmblind {

enum class ModulationKind { Qam, Psk, Pam };

/// Unit-average-energy symbol alphabet with Gray labels.
struct ConstellationSpec {
  ModulationKind kind = ModulationKind::Qam;
  int order = 0;
  std::vector<cd> points;
  std::vector<std::uint32_t> labels;  // labels[i] is the bit pattern of points[i]

  int bits_per_symbol() const;
};

/// Supported orders: QAM 4/16/64, PSK 2/4/8, PAM 2/4/8. Throws ConfigError otherwise.
ConstellationSpec build_constellation(ModulationKind kind, int order);

/// Parses the `modulation` config value (qam16, psk4, pam8, ...).
ConstellationSpec constellation_from_name(std::string_view name);

enum class SplitMode { None, HalfI, HalfQ, Quadrant };

SplitMode split_mode_from_name(std::string_view name);
std::string to_string(SplitMode mode);

/// Partition of a constellation into phase-disjoint regions.
///
/// Region indices are zero-based. For quadrant mode region r holds the points
/// of quadrant r+1, numbered counter-clockwise from (+,+). HalfI splits on the
/// sign of the real part (region 0 = right half), HalfQ on the sign of the
/// imaginary part (region 0 = upper half). Mode None is a single region
/// holding every point.
struct RegionPartition {
  SplitMode mode = SplitMode::None;
  /// Point indices per region, sorted lexicographically by (real, imag).
  /// Position i within a region carries the in-region Gray label gray(i).
  std::vector<std::vector<std::size_t>> regions;
  std::vector<std::vector<cd>> region_points;  // same order as `regions`
  std::vector<double> centers;                 // arg of the region centroid
  std::vector<cd> centroids;
  double centered_variance = 0.0;  // mean |point - centroid|^2 within a region

  std::size_t num_regions() const { return regions.size(); }
  std::size_t points_per_region() const { return regions.front().size(); }
  bool active() const { return mode != SplitMode::None; }
  /// Data bits carried per symbol once the region is fixed by position.
  int bits_per_symbol() const;
};

RegionPartition split_constellation(const ConstellationSpec& c, SplitMode mode);

/// Subcarrier k uses region k mod (number of regions).
std::size_t region_of_subcarrier(std::size_t k, const RegionPartition& partition);

/// Maps bits (one value 0/1 per entry, MSB first) onto subcarrier k.
cd map_bits(std::span<const std::uint8_t> bits, std::size_t k, const ConstellationSpec& c,
            const RegionPartition& partition);

/// Same as map_bits with the bit pattern packed into `value`.
cd map_value(std::uint32_t value, std::size_t k, const ConstellationSpec& c,
             const RegionPartition& partition);

/// Nearest point of the given region (Euclidean).
cd hard_decide_in_region(cd z, std::size_t region, const RegionPartition& partition);

/// Per-subcarrier symbol mean under uniform data: centroid of the assigned region.
CVectorXd subcarrier_means(std::size_t n_subcarriers, const RegionPartition& partition);

}  // namespace ofdmblind
