#include "ntkmc/arch.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "ntkmc/errors.hpp"

namespace ntkmc {

std::string Layer::to_string() const {
  switch (kind) {
    case Kind::Conv:
      return "conv q=" + std::to_string(q);
    case Kind::Act: {
      if (act.kind == Activation::Kind::LeakyRelu) {
        const std::string text = act.to_string();
        return "act leaky_relu slope=" + text.substr(text.find(':') + 1);
      }
      return "act " + act.to_string();
    }
    case Kind::Down:
      return "down";
    case Kind::UpNearest:
      return "up nearest";
    case Kind::UpBilinear:
      return "up bilinear";
  }
  return {};
}

ArchSpec::ArchSpec(Eigen::Index rows, Eigen::Index cols, std::vector<Layer> layers)
    : rows_(rows), cols_(cols), layers_(std::move(layers)) {}

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& msg) {
  throw FormatError("arch line " + std::to_string(line) + ": " + msg);
}

// Reads `key=value`; returns false if the token has another key.
bool keyed(const std::string& token, const std::string& key, std::string& value) {
  if (token.rfind(key + "=", 0) != 0) return false;
  value = token.substr(key.size() + 1);
  return true;
}

double to_number(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  bad_line(line, "not a number: '" + text + "'");
}

}  // namespace

ArchSpec ArchSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  ArchSpec spec;
  bool have_input = false;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream words(raw);
    std::vector<std::string> tok;
    for (std::string w; words >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    const std::string& head = tok[0];
    if (head == "input") {
      if (tok.size() != 2) bad_line(line, "expected `input <rows>x<cols>`");
      const auto x = tok[1].find('x');
      if (x == std::string::npos) bad_line(line, "expected `input <rows>x<cols>`");
      const double r = to_number(tok[1].substr(0, x), line);
      const double c = to_number(tok[1].substr(x + 1), line);
      if (r < 1 || c < 1 || r != static_cast<Eigen::Index>(r) || c != static_cast<Eigen::Index>(c))
        bad_line(line, "input dimensions must be positive integers");
      spec.rows_ = static_cast<Eigen::Index>(r);
      spec.cols_ = static_cast<Eigen::Index>(c);
      have_input = true;
    } else if (head == "conv") {
      int q = 3;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        std::string v;
        if (!keyed(tok[k], "q", v)) bad_line(line, "unknown conv option '" + tok[k] + "'");
        const double qd = to_number(v, line);
        if (qd != static_cast<int>(qd)) bad_line(line, "q must be an integer");
        q = static_cast<int>(qd);
      }
      if (q < 1 || q % 2 == 0) bad_line(line, "conv filter size must be a positive odd integer");
      spec.layers_.push_back(Layer::conv(q));
    } else if (head == "act") {
      if (tok.size() < 2) bad_line(line, "expected `act <relu|leaky_relu|linear>`");
      Activation act;
      if (tok[1] == "relu" || tok[1] == "linear") {
        if (tok.size() != 2) bad_line(line, "unexpected options after " + tok[1]);
        act = Activation::parse(tok[1]);
      } else if (tok[1] == "leaky_relu") {
        double slope = 0.01;
        for (std::size_t k = 2; k < tok.size(); ++k) {
          std::string v;
          if (!keyed(tok[k], "slope", v)) bad_line(line, "unknown leaky_relu option '" + tok[k] + "'");
          slope = to_number(v, line);
        }
        try {
          act = Activation::leaky_relu(slope);
        } catch (const DomainError& e) {
          bad_line(line, e.what());
        }
      } else {
        bad_line(line, "unknown activation '" + tok[1] + "'");
      }
      spec.layers_.push_back(Layer::activation(act));
    } else if (head == "down") {
      if (tok.size() != 1) bad_line(line, "`down` takes no options");
      spec.layers_.push_back(Layer::down());
    } else if (head == "up") {
      if (tok.size() != 2) bad_line(line, "expected `up nearest` or `up bilinear`");
      if (tok[1] == "nearest")
        spec.layers_.push_back(Layer::up_nearest());
      else if (tok[1] == "bilinear")
        spec.layers_.push_back(Layer::up_bilinear());
      else
        bad_line(line, "unknown upsampling mode '" + tok[1] + "'");
    } else {
      bad_line(line, "unknown layer '" + head + "'");
    }
  }
  if (!have_input) throw FormatError("arch is missing the `input <rows>x<cols>` line");
  spec.validate();
  return spec;
}

ArchSpec ArchSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open arch file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string ArchSpec::to_text() const {
  std::ostringstream out;
  out << "input " << rows_ << 'x' << cols_ << '\n';
  for (const auto& l : layers_) out << l.to_string() << '\n';
  return out.str();
}

ArchSpec ArchSpec::encoder_decoder(Eigen::Index rows, Eigen::Index cols, int s, int q, Activation act, bool bilinear,
                                   int extra) {
  if (s < 0 || extra < 0) throw DomainError("layer counts must be nonnegative");
  std::vector<Layer> layers{Layer::conv(q)};
  for (int k = 0; k < s; ++k) {
    layers.push_back(Layer::activation(act));
    layers.push_back(Layer::down());
    layers.push_back(Layer::conv(q));
  }
  for (int k = 0; k < s; ++k) {
    layers.push_back(Layer::activation(act));
    layers.push_back(bilinear ? Layer::up_bilinear() : Layer::up_nearest());
    layers.push_back(Layer::conv(q));
  }
  for (int k = 0; k < extra; ++k) {
    layers.push_back(Layer::activation(act));
    layers.push_back(Layer::conv(q));
  }
  layers.push_back(Layer::activation(act));
  ArchSpec spec(rows, cols, std::move(layers));
  spec.validate();
  return spec;
}

ArchSpec ArchSpec::plain(Eigen::Index rows, Eigen::Index cols, int depth, int q, Activation act) {
  if (depth < 1) throw DomainError("plain conv net needs depth >= 1");
  std::vector<Layer> layers{Layer::conv(q)};
  for (int k = 0; k < depth; ++k) {
    layers.push_back(Layer::activation(act));
    layers.push_back(Layer::conv(q));
  }
  ArchSpec spec(rows, cols, std::move(layers));
  spec.validate();
  return spec;
}

ArchSpec ArchSpec::with_input(Eigen::Index rows, Eigen::Index cols) const { return ArchSpec(rows, cols, layers_); }

std::vector<std::pair<Eigen::Index, Eigen::Index>> ArchSpec::shapes() const {
  if (rows_ < 1 || cols_ < 1) throw ShapeError("arch input dimensions must be positive");
  if (layers_.empty() || layers_.front().kind != Layer::Kind::Conv)
    throw ShapeError("layer 0: the first layer must be a conv");
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index r = rows_, c = cols_;
  bool pending_conv = false;  // an activation is waiting for its conv
  bool saw_act = false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    const std::string where = "layer " + std::to_string(k) + " (" + l.to_string() + "): ";
    switch (l.kind) {
      case Layer::Kind::Conv:
        if (l.q < 1 || l.q % 2 == 0) throw ShapeError(where + "filter size must be odd");
        if (k > 0 && !pending_conv) throw ShapeError(where + "two convs without an activation between them");
        pending_conv = false;
        break;
      case Layer::Kind::Act:
        if (pending_conv) throw ShapeError(where + "two activations without a conv between them");
        pending_conv = true;
        saw_act = true;
        break;
      case Layer::Kind::Down:
        if (r % 2 || c % 2) {
          std::ostringstream msg;
          msg << where << "cannot downsample a " << r << " x " << c << " map";
          throw ShapeError(msg.str());
        }
        r /= 2;
        c /= 2;
        break;
      case Layer::Kind::UpNearest:
      case Layer::Kind::UpBilinear:
        r *= 2;
        c *= 2;
        break;
    }
    out.emplace_back(r, c);
  }
  if (!saw_act) throw ShapeError("arch has no activation layer");
  if (r != rows_ || c != cols_) {
    std::ostringstream msg;
    msg << "arch maps " << rows_ << " x " << cols_ << " inputs to " << r << " x " << c
        << " outputs; completion needs equal sizes";
    throw ShapeError(msg.str());
  }
  return out;
}

void ArchSpec::validate() const { (void)shapes(); }

int ArchSpec::depth() const {
  int d = 0;
  for (const auto& l : layers_) d += l.kind == Layer::Kind::Act;
  return d;
}

int ArchSpec::downsample_count() const {
  int d = 0;
  for (const auto& l : layers_) d += l.kind == Layer::Kind::Down;
  return d;
}

int ArchSpec::upsample_count() const {
  int d = 0;
  for (const auto& l : layers_) d += l.kind == Layer::Kind::UpNearest || l.kind == Layer::Kind::UpBilinear;
  return d;
}

bool ArchSpec::has_bilinear() const {
  for (const auto& l : layers_)
    if (l.kind == Layer::Kind::UpBilinear) return true;
  return false;
}

bool ArchSpec::downs_before_ups() const {
  bool seen_up = false;
  for (const auto& l : layers_) {
    if (l.kind == Layer::Kind::UpNearest || l.kind == Layer::Kind::UpBilinear) seen_up = true;
    if (l.kind == Layer::Kind::Down && seen_up) return false;
  }
  return true;
}

std::array<std::uint8_t, 32> ArchSpec::hash() const {
  std::string canonical;
  for (const auto& l : layers_) canonical += l.to_string() + '\n';
  std::array<std::uint8_t, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
    throw Error("SHA-256 digest failed");
  return digest;
}

}  // namespace ntkmc
