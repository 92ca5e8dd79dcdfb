#include "ntkmc/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ntkmc/errors.hpp"

namespace ntkmc {

namespace {

struct PngRead {
  png_image image;
  std::vector<png_byte> buffer;
};

PngRead load(const std::string& path) {
  PngRead r;
  std::memset(&r.image, 0, sizeof r.image);
  r.image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&r.image, path.c_str()))
    throw FormatError("cannot read PNG '" + path + "': " + r.image.message);
  r.image.format = (r.image.format & PNG_FORMAT_FLAG_COLOR) ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  r.buffer.resize(PNG_IMAGE_SIZE(r.image));
  if (!png_image_finish_read(&r.image, nullptr, r.buffer.data(), 0, nullptr)) {
    const std::string msg = r.image.message;
    png_image_free(&r.image);
    throw FormatError("cannot decode PNG '" + path + "': " + msg);
  }
  return r;
}

}  // namespace

unsigned char quantize(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
}

Image read_png(const std::string& path) {
  const PngRead r = load(path);
  const int channels = PNG_IMAGE_SAMPLE_CHANNELS(r.image.format);
  const Eigen::Index rows = r.image.height, cols = r.image.width;
  Image img;
  img.planes.assign(static_cast<std::size_t>(channels), Eigen::MatrixXd(rows, cols));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      for (int c = 0; c < channels; ++c)
        img.planes[static_cast<std::size_t>(c)](i, j) =
            r.buffer[static_cast<std::size_t>((i * cols + j) * channels + c)] / 255.0;
  return img;
}

void write_png(const std::string& path, const Image& image) {
  const int channels = image.channels();
  if (channels != 1 && channels != 3) throw ShapeError("PNG output needs 1 or 3 channels");
  for (const auto& p : image.planes)
    if (p.rows() != image.rows() || p.cols() != image.cols()) throw ShapeError("image planes differ in size");
  png_image out;
  std::memset(&out, 0, sizeof out);
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.cols());
  out.height = static_cast<png_uint_32>(image.rows());
  out.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(out));
  for (Eigen::Index i = 0; i < image.rows(); ++i)
    for (Eigen::Index j = 0; j < image.cols(); ++j)
      for (int c = 0; c < channels; ++c)
        buffer[static_cast<std::size_t>((i * image.cols() + j) * channels + c)] =
            quantize(image.planes[static_cast<std::size_t>(c)](i, j));
  if (!png_image_write_to_file(&out, path.c_str(), 0, buffer.data(), 0, nullptr))
    throw FormatError("cannot write PNG '" + path + "': " + out.message);
}

BoolMatrix read_mask(const std::string& path) {
  const Image img = read_png(path);
  BoolMatrix mask = BoolMatrix::Constant(img.rows(), img.cols(), false);
  for (const auto& p : img.planes) mask = mask.array() || (p.array() > 0.0);
  return mask;
}

void write_mask(const std::string& path, const BoolMatrix& mask) {
  write_png(path, Image::gray(mask.cast<double>()));
}

}  // namespace ntkmc
