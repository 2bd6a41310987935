#include "kc/concepts/model.hpp"

#include "kc/numcore/error.hpp"
#include "kc/numcore/io.hpp"
#include "kc/numcore/kcmx.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

namespace kc::concepts {
namespace {

struct Shapes {
  std::vector<std::size_t> encoder_widths;
  std::vector<nn::Activation> encoder_acts;
  std::vector<std::size_t> decoder_widths;
  std::vector<nn::Activation> decoder_acts;
};

Shapes shapes_for(const Architecture& arch) {
  if (arch.input_dim == 0 || arch.latent_dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "Architecture: input and latent dimensions must be positive");
  }
  Shapes s;
  s.encoder_widths.push_back(arch.input_dim);
  s.decoder_widths.push_back(arch.latent_dim);
  for (std::size_t i = 0; i < arch.hidden_layers; ++i) {
    s.encoder_widths.push_back(arch.hidden_width);
    s.encoder_acts.push_back(nn::Activation::LeakyRelu);
    s.decoder_widths.push_back(arch.hidden_width);
    s.decoder_acts.push_back(nn::Activation::LeakyRelu);
  }
  s.encoder_widths.push_back(2 * arch.latent_dim);
  s.encoder_acts.push_back(nn::Activation::Identity);
  s.decoder_widths.push_back(arch.input_dim);
  s.decoder_acts.push_back(nn::Activation::Sigmoid);
  return s;
}

nlohmann::ordered_json describe(const nn::Mlp& net) {
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"in", l.in_dim()}, {"out", l.out_dim()}, {"activation", std::string(nn::to_string(l.activation))}});
  }
  return layers;
}

nn::Mlp restore(const nlohmann::json& layers, const std::filesystem::path& dir, const std::string& prefix) {
  std::vector<nn::DenseLayer> out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& spec = layers[i];
    nn::DenseLayer layer;
    layer.activation = nn::activation_from_string(spec.at("activation").get<std::string>());
    layer.weight = load_kcmx(dir / (prefix + "_" + std::to_string(i) + "_weight.kcmx"));
    const Matrix bias = load_kcmx(dir / (prefix + "_" + std::to_string(i) + "_bias.kcmx"));
    layer.bias = Eigen::Map<const Vector>(bias.data(), bias.size());
    if (layer.weight.rows() != spec.at("in").get<Eigen::Index>() ||
        layer.weight.cols() != spec.at("out").get<Eigen::Index>()) {
      throw Error(ErrorCode::FormatError, "checkpoint: layer shape disagrees with manifest");
    }
    out.push_back(std::move(layer));
  }
  return nn::Mlp(std::move(out));
}

void store(const nn::Mlp& net, const std::filesystem::path& dir, const std::string& prefix) {
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    save_kcmx(dir / (prefix + "_" + std::to_string(i) + "_weight.kcmx"), l.weight);
    save_kcmx(dir / (prefix + "_" + std::to_string(i) + "_bias.kcmx"), Matrix(l.bias.transpose()));
  }
}

}  // namespace

ConceptModel make_concept_model(const Architecture& arch, const MethodConfig& config, RngStream& rng) {
  validate(config);
  const Shapes s = shapes_for(arch);
  ConceptModel model;
  model.encoder = nn::Mlp::random(s.encoder_widths, s.encoder_acts, rng);
  model.decoder = nn::Mlp::random(s.decoder_widths, s.decoder_acts, rng);
  model.head.resize(static_cast<Eigen::Index>(arch.latent_dim));
  const double bound = 1.0 / std::sqrt(static_cast<double>(arch.latent_dim));
  for (Eigen::Index j = 0; j < model.head.size(); ++j) model.head(j) = rng.uniform(-bound, bound);
  model.config = config;
  return model;
}

ConceptModel make_zero_model(const Architecture& arch, const MethodConfig& config) {
  validate(config);
  const Shapes s = shapes_for(arch);
  ConceptModel model;
  model.encoder = nn::Mlp::zeros(s.encoder_widths, s.encoder_acts);
  model.decoder = nn::Mlp::zeros(s.decoder_widths, s.decoder_acts);
  model.head = Vector::Zero(static_cast<Eigen::Index>(arch.latent_dim));
  model.config = config;
  return model;
}

Encoding encode(const ConceptModel& model, const Matrix& x, EncodeMode mode, RngStream* rng) {
  if (x.cols() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "encode: expected " + std::to_string(model.input_dim()) +
                                                  " inputs, got " + std::to_string(x.cols()));
  }
  const Eigen::Index p = model.latent_dim();
  const Matrix out = model.encoder.forward(x);
  Encoding enc;
  enc.mean = out.leftCols(p);
  enc.logvar = out.rightCols(p).cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
  if (mode == EncodeMode::Deterministic) {
    enc.z = enc.mean;
  } else {
    if (rng == nullptr) throw Error(ErrorCode::InvalidArgument, "encode: sample mode needs a random stream");
    const Matrix noise = gaussian_draws(*rng, static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(p));
    enc.z = enc.mean.array() + (0.5 * enc.logvar.array()).exp() * noise.array();
  }
  return enc;
}

Matrix encode_mean(const ConceptModel& model, const Matrix& x) {
  return encode(model, x, EncodeMode::Deterministic).mean;
}

Matrix decode(const ConceptModel& model, const Matrix& z) {
  if (z.cols() != model.latent_dim()) throw Error(ErrorCode::DimensionMismatch, "decode: latent width mismatch");
  return model.decoder.forward(z);
}

Vector predict_label(const ConceptModel& model, const Matrix& z) {
  if (z.cols() != model.latent_dim()) throw Error(ErrorCode::DimensionMismatch, "predict_label: latent width mismatch");
  Vector logit = (z * model.head).array() + model.head_intercept;
  return logit.unaryExpr([](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

std::vector<std::pair<ParameterGroup, std::span<double>>> parameter_blocks(ConceptModel& model) {
  std::vector<std::pair<ParameterGroup, std::span<double>>> out;
  for (auto s : model.encoder.parameter_spans()) out.emplace_back(ParameterGroup::Encoder, s);
  for (auto s : model.decoder.parameter_spans()) out.emplace_back(ParameterGroup::Decoder, s);
  out.emplace_back(ParameterGroup::Head, std::span<double>(model.head.data(), static_cast<std::size_t>(model.head.size())));
  out.emplace_back(ParameterGroup::Head, std::span<double>(&model.head_intercept, 1));
  return out;
}

void save_checkpoint(const std::filesystem::path& dir, const ConceptModel& model) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "kc-concept-model";
  manifest["version"] = 1;
  manifest["method"] = model.config.name();
  const auto& w = model.config.weights;
  manifest["alpha"] = {w.reconstruction, w.kl, w.concept_term, w.label, w.sparsity};
  manifest["latent_dim"] = model.latent_dim();
  manifest["input_dim"] = model.input_dim();
  manifest["encoder"] = describe(model.encoder);
  manifest["decoder"] = describe(model.decoder);
  manifest["head_intercept"] = model.head_intercept;
  store(model.encoder, dir, "encoder");
  store(model.decoder, dir, "decoder");
  save_kcmx(dir / "head.kcmx", Matrix(model.head.transpose()));
  write_file_atomic(dir / "model.json", manifest.dump(2) + "\n");
}

ConceptModel load_checkpoint(const std::filesystem::path& dir) {
  ConceptModel model;
  try {
    const auto manifest = nlohmann::json::parse(read_file(dir / "model.json"));
    if (manifest.at("format").get<std::string>() != "kc-concept-model") {
      throw Error(ErrorCode::FormatError, "checkpoint: unexpected format tag");
    }
    model.config.method = method_from_string(manifest.at("method").get<std::string>());
    const auto alpha = manifest.at("alpha").get<std::vector<double>>();
    if (alpha.size() != 5) throw Error(ErrorCode::FormatError, "checkpoint: alpha must have five entries");
    model.config.weights = LossWeights{alpha[0], alpha[1], alpha[2], alpha[3], alpha[4]};
    model.encoder = restore(manifest.at("encoder"), dir, "encoder");
    model.decoder = restore(manifest.at("decoder"), dir, "decoder");
    const Matrix head = load_kcmx(dir / "head.kcmx");
    model.head = Eigen::Map<const Vector>(head.data(), head.size());
    model.head_intercept = manifest.at("head_intercept").get<double>();
    if (model.head.size() != manifest.at("latent_dim").get<Eigen::Index>() ||
        model.encoder.output_dim() != 2 * model.head.size() || model.decoder.input_dim() != model.head.size()) {
      throw Error(ErrorCode::FormatError, "checkpoint: latent dimension is inconsistent");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("checkpoint: ") + e.what());
  }
  validate(model.config);
  return model;
}

}  // namespace kc::concepts
