#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ntkmc {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Planar image with values in [0, 1]; one plane per channel (1 or 3).
struct Image {
  std::vector<Eigen::MatrixXd> planes;

  Eigen::Index rows() const { return planes.empty() ? 0 : planes.front().rows(); }
  Eigen::Index cols() const { return planes.empty() ? 0 : planes.front().cols(); }
  int channels() const { return static_cast<int>(planes.size()); }

  static Image gray(Eigen::MatrixXd plane) { return Image{{std::move(plane)}}; }
};

/// 8-bit gray or RGB PNG (alpha is dropped, palette expanded), scaled by
/// 1/255. Errors are FormatError.
Image read_png(const std::string& path);

/// Values are clipped to [0, 1] and rounded half-up to 8 bits.
void write_png(const std::string& path, const Image& image);

/// Mask PNG: zero pixels are missing (false), anything else observed. For
/// color masks a pixel is observed if any channel is nonzero.
BoolMatrix read_mask(const std::string& path);
void write_mask(const std::string& path, const BoolMatrix& mask);

/// Round-half-up 8-bit quantization used by write_png.
unsigned char quantize(double v);

}  // namespace ntkmc
