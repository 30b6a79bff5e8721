#include "ofdmblind/constellation.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>

namespace ofdmblind {
namespace {

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

std::uint32_t gray_inverse(std::uint32_t g) {
  std::uint32_t i = 0;
  for (; g != 0; g >>= 1) i ^= g;
  return i;
}

int log2_exact(int n) { return std::countr_zero(static_cast<unsigned>(n)); }

void normalize_unit_energy(std::vector<cd>& points) {
  double energy = 0.0;
  for (const cd& p : points) energy += std::norm(p);
  const double scale = 1.0 / std::sqrt(energy / static_cast<double>(points.size()));
  for (cd& p : points) p *= scale;
}

int region_for_point(cd p, SplitMode mode) {
  switch (mode) {
    case SplitMode::None:
      return 0;
    case SplitMode::HalfI:
      if (p.real() == 0.0) throw SplittingError("point on the imaginary axis cannot be split by real sign");
      return p.real() > 0.0 ? 0 : 1;
    case SplitMode::HalfQ:
      if (p.imag() == 0.0) throw SplittingError("point on the real axis cannot be split by imaginary sign");
      return p.imag() > 0.0 ? 0 : 1;
    case SplitMode::Quadrant:
      if (p.real() == 0.0 || p.imag() == 0.0) throw SplittingError("point on a split axis");
      if (p.real() > 0.0) return p.imag() > 0.0 ? 0 : 3;
      return p.imag() > 0.0 ? 1 : 2;
  }
  return 0;
}

int regions_for_mode(SplitMode mode) {
  switch (mode) {
    case SplitMode::None:
      return 1;
    case SplitMode::HalfI:
    case SplitMode::HalfQ:
      return 2;
    case SplitMode::Quadrant:
      return 4;
  }
  return 1;
}

}  // namespace

int ConstellationSpec::bits_per_symbol() const { return log2_exact(order); }

int RegionPartition::bits_per_symbol() const {
  return log2_exact(static_cast<int>(points_per_region()));
}

ConstellationSpec build_constellation(ModulationKind kind, int order) {
  ConstellationSpec c;
  c.kind = kind;
  c.order = order;
  switch (kind) {
    case ModulationKind::Qam: {
      if (order != 4 && order != 16 && order != 64) throw ConfigError("unsupported QAM order " + std::to_string(order));
      const int side = static_cast<int>(std::lround(std::sqrt(order)));
      const int axis_bits = log2_exact(side);
      for (int i = 0; i < side; ++i) {
        for (int q = 0; q < side; ++q) {
          c.points.emplace_back(2.0 * i - side + 1, 2.0 * q - side + 1);
          c.labels.push_back((gray(i) << axis_bits) | gray(q));
        }
      }
      break;
    }
    case ModulationKind::Psk: {
      if (order != 2 && order != 4 && order != 8) throw ConfigError("unsupported PSK order " + std::to_string(order));
      // Rotated by pi/M so no point sits on an axis (BPSK stays on the real axis).
      const double offset = order == 2 ? 0.0 : kPi / order;
      for (int i = 0; i < order; ++i) {
        c.points.push_back(std::polar(1.0, offset + 2.0 * kPi * i / order));
        c.labels.push_back(gray(i));
      }
      break;
    }
    case ModulationKind::Pam: {
      if (order != 2 && order != 4 && order != 8) throw ConfigError("unsupported PAM order " + std::to_string(order));
      for (int i = 0; i < order; ++i) {
        c.points.emplace_back(2.0 * i - order + 1, 0.0);
        c.labels.push_back(gray(i));
      }
      break;
    }
  }
  normalize_unit_energy(c.points);
  return c;
}

ConstellationSpec constellation_from_name(std::string_view name) {
  ModulationKind kind;
  std::string_view digits;
  if (name.starts_with("qam")) {
    kind = ModulationKind::Qam;
  } else if (name.starts_with("psk")) {
    kind = ModulationKind::Psk;
  } else if (name.starts_with("pam")) {
    kind = ModulationKind::Pam;
  } else {
    throw ConfigError("unknown modulation '" + std::string(name) + "'");
  }
  digits = name.substr(3);
  int order = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), order);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw ConfigError("unknown modulation '" + std::string(name) + "'");
  }
  return build_constellation(kind, order);
}

SplitMode split_mode_from_name(std::string_view name) {
  if (name == "none") return SplitMode::None;
  if (name == "half_i") return SplitMode::HalfI;
  if (name == "half_q") return SplitMode::HalfQ;
  if (name == "quadrant") return SplitMode::Quadrant;
  throw ConfigError("unknown splitting mode '" + std::string(name) + "'");
}

std::string to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::None:
      return "none";
    case SplitMode::HalfI:
      return "half_i";
    case SplitMode::HalfQ:
      return "half_q";
    case SplitMode::Quadrant:
      return "quadrant";
  }
  return "none";
}

RegionPartition split_constellation(const ConstellationSpec& c, SplitMode mode) {
  RegionPartition part;
  part.mode = mode;
  const int n_regions = regions_for_mode(mode);
  part.regions.resize(n_regions);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    part.regions[region_for_point(c.points[i], mode)].push_back(i);
  }
  for (const auto& r : part.regions) {
    if (r.size() != part.regions.front().size() || r.empty()) {
      throw SplittingError("split produced unequal regions");
    }
  }

  double spread = 0.0;
  for (auto& r : part.regions) {
    std::sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
      const cd pa = c.points[a];
      const cd pb = c.points[b];
      return pa.real() != pb.real() ? pa.real() < pb.real() : pa.imag() < pb.imag();
    });
    std::vector<cd> pts;
    cd centroid{0.0, 0.0};
    for (std::size_t idx : r) {
      pts.push_back(c.points[idx]);
      centroid += c.points[idx];
    }
    centroid /= static_cast<double>(r.size());
    for (const cd& p : pts) spread += std::norm(p - centroid);
    part.centroids.push_back(centroid);
    part.centers.push_back(std::abs(centroid) > 0.0 ? std::arg(centroid) : 0.0);
    part.region_points.push_back(std::move(pts));
  }
  part.centered_variance = spread / static_cast<double>(c.points.size());
  return part;
}

std::size_t region_of_subcarrier(std::size_t k, const RegionPartition& partition) {
  return k % partition.num_regions();
}

cd map_value(std::uint32_t value, std::size_t k, const ConstellationSpec& c, const RegionPartition& partition) {
  if (!partition.active()) {
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      if (c.labels[i] == value) return c.points[i];
    }
    throw MappingError("bit pattern out of range");
  }
  const auto& pts = partition.region_points[region_of_subcarrier(k, partition)];
  const std::uint32_t pos = gray_inverse(value);
  if (pos >= pts.size()) throw MappingError("bit pattern out of range");
  return pts[pos];
}

cd map_bits(std::span<const std::uint8_t> bits, std::size_t k, const ConstellationSpec& c,
            const RegionPartition& partition) {
  const int expected = partition.active() ? partition.bits_per_symbol() : c.bits_per_symbol();
  if (static_cast<int>(bits.size()) != expected) {
    throw MappingError("expected " + std::to_string(expected) + " bits, got " + std::to_string(bits.size()));
  }
  std::uint32_t value = 0;
  for (std::uint8_t b : bits) value = (value << 1) | (b & 1u);
  return map_value(value, k, c, partition);
}

cd hard_decide_in_region(cd z, std::size_t region, const RegionPartition& partition) {
  const auto& pts = partition.region_points[region];
  cd best = pts.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const cd& p : pts) {
    const double d = std::norm(z - p);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

CVectorXd subcarrier_means(std::size_t n_subcarriers, const RegionPartition& partition) {
  CVectorXd mu(static_cast<Eigen::Index>(n_subcarriers));
  for (std::size_t k = 0; k < n_subcarriers; ++k) {
    mu[static_cast<Eigen::Index>(k)] = partition.centroids[region_of_subcarrier(k, partition)];
  }
  return mu;
}

}  // namespace ofdmblind
