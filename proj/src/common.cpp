#include <cmath>
#include <fstream>
#include <sstream>

#include "posh/binio.hpp"
#include "posh/errors.hpp"
#include "posh/geom.hpp"
#include "posh/rng.hpp"

namespace posh {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NoChainFound: return "NoChainFound";
    case Errc::ChainTooShort: return "ChainTooShort";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::BatchTooSmall: return "BatchTooSmall";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::DegeneratePointSet: return "DegeneratePointSet";
    case Errc::CorrespondenceTooShort: return "CorrespondenceTooShort";
    case Errc::WindowOutOfRange: return "WindowOutOfRange";
    case Errc::SingletonDataset: return "SingletonDataset";
    case Errc::NotEnoughNegatives: return "NotEnoughNegatives";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::EmptyDatabase: return "EmptyDatabase";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::NoPositives: return "NoPositives";
    case Errc::UsageError: return "UsageError";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

Mat3 rotation_about(const Coord3& axis, double angle) {
  const Coord3 u = normalized(axis);
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r;
  r.at(0, 0) = c + u.x * u.x * t;
  r.at(0, 1) = u.x * u.y * t - u.z * s;
  r.at(0, 2) = u.x * u.z * t + u.y * s;
  r.at(1, 0) = u.y * u.x * t + u.z * s;
  r.at(1, 1) = c + u.y * u.y * t;
  r.at(1, 2) = u.y * u.z * t - u.x * s;
  r.at(2, 0) = u.z * u.x * t - u.y * s;
  r.at(2, 1) = u.z * u.y * t + u.x * s;
  r.at(2, 2) = c + u.z * u.z * t;
  return r;
}

Mat3 random_rotation(Rng& rng) {
  // Uniform unit quaternion (Shoemake).
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double two_pi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double qx = a * std::sin(two_pi * u2);
  const double qy = a * std::cos(two_pi * u2);
  const double qz = b * std::sin(two_pi * u3);
  const double qw = b * std::cos(two_pi * u3);
  Mat3 r;
  r.at(0, 0) = 1 - 2 * (qy * qy + qz * qz);
  r.at(0, 1) = 2 * (qx * qy - qz * qw);
  r.at(0, 2) = 2 * (qx * qz + qy * qw);
  r.at(1, 0) = 2 * (qx * qy + qz * qw);
  r.at(1, 1) = 1 - 2 * (qx * qx + qz * qz);
  r.at(1, 2) = 2 * (qy * qz - qx * qw);
  r.at(2, 0) = 2 * (qx * qz - qy * qw);
  r.at(2, 1) = 2 * (qy * qz + qx * qw);
  r.at(2, 2) = 1 - 2 * (qx * qx + qy * qy);
  return r;
}

namespace binio {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::IoError, "cannot create " + path);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) raise(Errc::IoError, "short write to " + path);
}

}  // namespace binio
}  // namespace posh
