#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ntkmc/dual.hpp"

namespace ntkmc {

struct Layer {
  enum class Kind { Conv, Act, Down, UpNearest, UpBilinear };

  Kind kind = Kind::Conv;
  /// Filter size for Conv; odd.
  int q = 3;
  Activation act;

  static Layer conv(int q) { return {Kind::Conv, q, {}}; }
  static Layer activation(Activation a) { return {Kind::Act, 0, a}; }
  static Layer down() { return {Kind::Down, 0, {}}; }
  static Layer up_nearest() { return {Kind::UpNearest, 0, {}}; }
  static Layer up_bilinear() { return {Kind::UpBilinear, 0, {}}; }

  std::string to_string() const;
  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Infinite-width convolutional network with circular padding.
///
/// The first layer must be a conv (the input layer applied to the prior).
/// Every activation feeds the next conv; when the list ends after an
/// activation (possibly followed by sampling layers) a readout conv with the
/// last filter size is implied. Two convs with no activation between them
/// are rejected.
class ArchSpec {
 public:
  ArchSpec() = default;
  ArchSpec(Eigen::Index rows, Eigen::Index cols, std::vector<Layer> layers);

  /// Text format, one layer per line: `input 64x64`, `conv q=3`,
  /// `act relu`, `act leaky_relu slope=0.05`, `act linear`, `down`,
  /// `up nearest`, `up bilinear`. `#` starts a comment.
  static ArchSpec parse(const std::string& text);
  static ArchSpec from_file(const std::string& path);
  std::string to_text() const;

  /// conv q; s x (act, down, conv q); s x (act, up, conv q); then `extra`
  /// more (act, conv q) blocks; finally one act (readout implied).
  static ArchSpec encoder_decoder(Eigen::Index rows, Eigen::Index cols, int s, int q = 3,
                                  Activation act = Activation::relu(), bool bilinear = false, int extra = 0);
  /// conv q followed by `depth` x (act, conv q): a plain conv net with
  /// `depth` hidden layers.
  static ArchSpec plain(Eigen::Index rows, Eigen::Index cols, int depth, int q = 3,
                        Activation act = Activation::relu());

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Same layers at a different input resolution (not validated).
  ArchSpec with_input(Eigen::Index rows, Eigen::Index cols) const;

  /// Dry-run shape pass; ShapeError names the first offending layer.
  void validate() const;
  /// Output resolution after every layer.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes() const;

  int depth() const;
  int downsample_count() const;
  int upsample_count() const;
  bool has_bilinear() const;
  /// All downsamples precede all upsamples.
  bool downs_before_ups() const;

  /// SHA-256 of the canonical layer list (input size excluded, so a kernel
  /// expanded to another resolution keeps its hash).
  std::array<std::uint8_t, 32> hash() const;

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Layer> layers_;
};

}  // namespace ntkmc
