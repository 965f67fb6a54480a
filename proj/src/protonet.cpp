#include "monreco/protonet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "monreco/errors.hpp"
#include "monreco/rng.hpp"

namespace monreco {

namespace {

constexpr std::uint64_t kUpsampleSeedSalt = 0x9e3779b97f4a7c15ULL;

double activate(Activation activation, double x) {
    return activation == Activation::Sigmoid ? 1.0 / (1.0 + std::exp(-x)) : std::tanh(x);
}

// Derivative expressed through the activation output.
double activate_grad(Activation activation, double a) {
    return activation == Activation::Sigmoid ? a * (1.0 - a) : 1.0 - a * a;
}

void check_config(const NetworkConfig& config) {
    if (config.input_dim < 1 || config.latent_dim < 1 || config.prototype_count < 1)
        throw ConfigError("network config: dimensions must be positive");
    if (config.class_count < 2) throw ConfigError("network config: class_count must be at least 2");
    for (const int width : config.encoder_hidden)
        if (width < 1) throw ConfigError("network config: hidden widths must be positive");
    if (config.learning_rate <= 0.0) throw ConfigError("network config: learning rate must be positive");
    if (config.epochs < 1) throw ConfigError("network config: epochs must be positive");
    if (config.lambda_recon < 0.0 || config.lambda_r1 < 0.0 || config.lambda_r2 < 0.0)
        throw ConfigError("network config: lambdas must be nonnegative");
}

void check_batch(const PrototypeNetwork& net, const LabeledVectors& batch) {
    if (batch.inputs.empty()) throw DomainError("protonet: batch must be nonempty");
    if (batch.inputs.size() != batch.labels.size())
        throw LengthMismatch("protonet: inputs and labels differ in length");
    for (const auto& input : batch.inputs)
        if (input.size() != static_cast<std::size_t>(net.config.input_dim))
            throw DimensionMismatch("protonet: input length differs from input_dim");
    for (const int label : batch.labels)
        if (label < 0 || label >= net.config.class_count)
            throw DomainError("protonet: label outside [0, class_count)");
}

std::vector<double> layer_forward(const Layer& layer, Activation activation,
                                  const std::vector<double>& input) {
    std::vector<double> out = matvec(layer.weights, input);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = activate(activation, out[i] + layer.biases[i]);
    return out;
}

// Activations per stage, front is the input itself.
std::vector<std::vector<double>> stack_forward(const std::vector<Layer>& layers, Activation activation,
                                               const std::vector<double>& input) {
    std::vector<std::vector<double>> acts;
    acts.reserve(layers.size() + 1);
    acts.push_back(input);
    for (const auto& layer : layers) acts.push_back(layer_forward(layer, activation, acts.back()));
    return acts;
}

// Backpropagates d(loss)/d(stack output) through the stack, accumulating
// parameter gradients, and returns d(loss)/d(stack input).
std::vector<double> stack_backward(const std::vector<Layer>& layers, Activation activation,
                                   const std::vector<std::vector<double>>& acts,
                                   std::vector<double> delta, std::vector<Layer>& grads) {
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& out = acts[l + 1];
        const auto& in = acts[l];
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= activate_grad(activation, out[i]);
        for (std::size_t i = 0; i < delta.size(); ++i) {
            grads[l].biases[i] += delta[i];
            for (std::size_t j = 0; j < in.size(); ++j) grads[l].weights.at(i, j) += delta[i] * in[j];
        }
        delta = matvec_transposed(layers[l].weights, delta);
    }
    return delta;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - peak);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

double log_sum_exp(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (const double logit : logits) sum += std::exp(logit - peak);
    return peak + std::log(sum);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct SampleCache {
    std::vector<std::vector<double>> encoder_acts;
    std::vector<std::vector<double>> decoder_acts;
    std::vector<double> distances;
    std::vector<double> logits;
    std::vector<double> probabilities;
};

SampleCache run_sample(const PrototypeNetwork& net, const std::vector<double>& input) {
    SampleCache cache;
    cache.encoder_acts = stack_forward(net.encoder, net.config.activation, input);
    const auto& latent = cache.encoder_acts.back();
    cache.decoder_acts = stack_forward(net.decoder, net.config.activation, latent);
    const std::size_t q = latent.size();
    cache.distances.resize(net.prototypes.rows);
    for (std::size_t j = 0; j < net.prototypes.rows; ++j)
        cache.distances[j] = squared_distance(latent.data(), &net.prototypes.data[j * q], q);
    cache.logits = matvec(net.class_weights, cache.distances);
    cache.probabilities = softmax(cache.logits);
    return cache;
}

NetworkGradients zero_gradients(const PrototypeNetwork& net) {
    NetworkGradients grads;
    auto zero_like = [](const std::vector<Layer>& layers) {
        std::vector<Layer> out;
        out.reserve(layers.size());
        for (const auto& layer : layers)
            out.push_back({Matrix(layer.weights.rows, layer.weights.cols),
                           std::vector<double>(layer.biases.size(), 0.0)});
        return out;
    };
    grads.encoder = zero_like(net.encoder);
    grads.decoder = zero_like(net.decoder);
    grads.prototypes = Matrix(net.prototypes.rows, net.prototypes.cols);
    grads.class_weights = Matrix(net.class_weights.rows, net.class_weights.cols);
    return grads;
}

struct BackwardResult {
    LossParts parts;
    NetworkGradients grads;
};

BackwardResult backward(const PrototypeNetwork& net, const LabeledVectors& batch) {
    check_batch(net, batch);
    const std::size_t n = batch.size();
    const std::size_t mp = net.prototypes.rows;
    const std::size_t q = net.prototypes.cols;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_mp = 1.0 / static_cast<double>(mp);
    const NetworkConfig& cfg = net.config;

    BackwardResult result;
    result.grads = zero_gradients(net);
    auto& grads = result.grads;
    auto& parts = result.parts;

    std::vector<SampleCache> caches(n);
    for (std::size_t i = 0; i < n; ++i) caches[i] = run_sample(net, batch.inputs[i]);

    // d(loss)/d(latent_i), assembled from every loss term before the encoder
    // backward pass.
    std::vector<std::vector<double>> dlatent(n, std::vector<double>(q, 0.0));

    // Cross-entropy through the prototype classifier.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cache = caches[i];
        const int label = batch.labels[i];
        parts.cross_entropy += (log_sum_exp(cache.logits) - cache.logits[label]) * inv_n;
        std::vector<double> dlogits = cache.probabilities;
        dlogits[label] -= 1.0;
        for (double& v : dlogits) v *= inv_n;
        for (std::size_t k = 0; k < dlogits.size(); ++k)
            for (std::size_t j = 0; j < mp; ++j)
                grads.class_weights.at(k, j) += dlogits[k] * cache.distances[j];
        const std::vector<double> ddist = matvec_transposed(net.class_weights, dlogits);
        const auto& latent = cache.encoder_acts.back();
        for (std::size_t j = 0; j < mp; ++j) {
            const double scale = 2.0 * ddist[j];
            for (std::size_t c = 0; c < q; ++c) {
                const double diff = latent[c] - net.prototypes.at(j, c);
                dlatent[i][c] += scale * diff;
                grads.prototypes.at(j, c) -= scale * diff;
            }
        }
    }

    // Reconstruction term.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& reconstruction = caches[i].decoder_acts.back();
        double err = 0.0;
        for (std::size_t c = 0; c < reconstruction.size(); ++c) {
            const double diff = reconstruction[c] - batch.inputs[i][c];
            err += diff * diff;
        }
        parts.reconstruction += err * inv_n;
    }

    // Interpretability terms: r1 pulls each prototype toward its nearest
    // encoding, r2 pulls each encoding toward its nearest prototype. Ties
    // resolve to the first minimizer.
    std::vector<std::size_t> nearest_sample(mp, 0);
    for (std::size_t j = 0; j < mp; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = squared_distance(&net.prototypes.data[j * q],
                                              caches[i].encoder_acts.back().data(), q);
            if (d < best) {
                best = d;
                nearest_sample[j] = i;
            }
        }
        parts.r1 += best * inv_mp;
    }
    std::vector<std::size_t> nearest_prototype(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < mp; ++j) {
            if (caches[i].distances[j] < best) {
                best = caches[i].distances[j];
                nearest_prototype[i] = j;
            }
        }
        parts.r2 += best * inv_n;
    }
    for (std::size_t j = 0; j < mp; ++j) {
        const auto& latent = caches[nearest_sample[j]].encoder_acts.back();
        const double scale = 2.0 * cfg.lambda_r1 * inv_mp;
        for (std::size_t c = 0; c < q; ++c) {
            const double diff = net.prototypes.at(j, c) - latent[c];
            grads.prototypes.at(j, c) += scale * diff;
            dlatent[nearest_sample[j]][c] -= scale * diff;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = nearest_prototype[i];
        const auto& latent = caches[i].encoder_acts.back();
        const double scale = 2.0 * cfg.lambda_r2 * inv_n;
        for (std::size_t c = 0; c < q; ++c) {
            const double diff = latent[c] - net.prototypes.at(j, c);
            dlatent[i][c] += scale * diff;
            grads.prototypes.at(j, c) -= scale * diff;
        }
    }

    // Decoder and encoder backward passes.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cache = caches[i];
        const auto& reconstruction = cache.decoder_acts.back();
        std::vector<double> drecon(reconstruction.size());
        const double scale = 2.0 * cfg.lambda_recon * inv_n;
        for (std::size_t c = 0; c < reconstruction.size(); ++c)
            drecon[c] = scale * (reconstruction[c] - batch.inputs[i][c]);
        const std::vector<double> dlatent_from_decoder =
            stack_backward(net.decoder, cfg.activation, cache.decoder_acts, std::move(drecon),
                           grads.decoder);
        for (std::size_t c = 0; c < q; ++c) dlatent[i][c] += dlatent_from_decoder[c];
        stack_backward(net.encoder, cfg.activation, cache.encoder_acts, std::move(dlatent[i]),
                       grads.encoder);
    }

    parts.total = parts.cross_entropy + cfg.lambda_recon * parts.reconstruction +
                  cfg.lambda_r1 * parts.r1 + cfg.lambda_r2 * parts.r2;
    return result;
}

void apply_update(PrototypeNetwork& net, const NetworkGradients& grads, double learning_rate) {
    auto step_layers = [learning_rate](std::vector<Layer>& layers, const std::vector<Layer>& deltas) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            for (std::size_t i = 0; i < layers[l].weights.data.size(); ++i)
                layers[l].weights.data[i] -= learning_rate * deltas[l].weights.data[i];
            for (std::size_t i = 0; i < layers[l].biases.size(); ++i)
                layers[l].biases[i] -= learning_rate * deltas[l].biases[i];
        }
    };
    step_layers(net.encoder, grads.encoder);
    step_layers(net.decoder, grads.decoder);
    for (std::size_t i = 0; i < net.prototypes.data.size(); ++i)
        net.prototypes.data[i] -= learning_rate * grads.prototypes.data[i];
    for (std::size_t i = 0; i < net.class_weights.data.size(); ++i)
        net.class_weights.data[i] -= learning_rate * grads.class_weights.data[i];
}

bool finite(const LossParts& parts) {
    return std::isfinite(parts.total) && std::isfinite(parts.cross_entropy) &&
           std::isfinite(parts.reconstruction) && std::isfinite(parts.r1) && std::isfinite(parts.r2);
}

nlohmann::json layer_to_json(const Layer& layer) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < layer.weights.cols; ++c) row.push_back(layer.weights.at(r, c));
        rows.push_back(std::move(row));
    }
    return {{"weights", std::move(rows)}, {"biases", layer.biases}};
}

Matrix matrix_from_json(const nlohmann::json& rows, const char* field) {
    if (!rows.is_array() || rows.empty())
        throw ParseError(std::string("checkpoint: field '") + field + "' must be a non-empty array");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        const auto& row = rows[r];
        if (!row.is_array() || row.size() != m.cols)
            throw ParseError(std::string("checkpoint: ragged matrix in field '") + field + "'");
        for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = row[c].get<double>();
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Layer layer_from_json(const nlohmann::json& obj) {
    Layer layer;
    layer.weights = matrix_from_json(obj.at("weights"), "weights");
    layer.biases = obj.at("biases").get<std::vector<double>>();
    if (layer.biases.size() != layer.weights.rows)
        throw ParseError("checkpoint: bias length differs from weight rows");
    return layer;
}

} // namespace

std::string to_string(Activation activation) {
    return activation == Activation::Sigmoid ? "sigmoid" : "tanh";
}

std::optional<Activation> parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    return std::nullopt;
}

LabeledVectors upsample_balanced(const LabeledVectors& train, std::uint64_t seed) {
    if (train.inputs.size() != train.labels.size())
        throw LengthMismatch("upsample_balanced: inputs and labels differ in length");
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < train.labels.size(); ++i)
        (train.labels[i] == 1 ? positives : negatives).push_back(i);
    if (positives.empty() || negatives.empty())
        throw SingleClassError("upsample_balanced: both classes must be present");
    LabeledVectors out = train;
    const auto& minority = positives.size() < negatives.size() ? positives : negatives;
    const std::size_t majority = std::max(positives.size(), negatives.size());
    SeededRng rng(seed);
    for (std::size_t count = minority.size(); count < majority; ++count) {
        const std::size_t pick = minority[rng.uniform_index(minority.size())];
        out.inputs.push_back(train.inputs[pick]);
        out.labels.push_back(train.labels[pick]);
    }
    return out;
}

std::vector<double> build_input_features(ResourceClass cls, const SimilarityList& neighbors,
                                         const LabelMatrix& labels, int dim) {
    if (dim < 1) throw DomainError("build_input_features: dim must be positive");
    std::vector<double> features(static_cast<std::size_t>(dim), 0.0);
    const std::size_t column = static_cast<std::size_t>(cls);
    const std::size_t used = std::min<std::size_t>(neighbors.neighbors.size(), features.size());
    for (std::size_t j = 0; j < used; ++j) {
        const auto& neighbor = neighbors.neighbors[j];
        const auto row = labels.row_of(neighbor.service_id);
        if (!row)
            throw UnknownService("build_input_features: neighbor '" + neighbor.service_id +
                                 "' missing from the label matrix");
        features[j] = neighbor.similarity * labels.normalized[*row][column];
    }
    return features;
}

PrototypeNetwork init_network(const NetworkConfig& config, const LabeledVectors& train) {
    check_config(config);
    if (train.inputs.empty()) throw DomainError("init_network: training set must be nonempty");
    PrototypeNetwork net;
    net.config = config;
    SeededRng rng(config.seed);
    auto make_stack = [&rng](const std::vector<int>& dims) {
        std::vector<Layer> layers;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Layer layer;
            layer.weights = Matrix(dims[l + 1], dims[l]);
            for (double& w : layer.weights.data) w = rng.uniform_range(-0.5, 0.5);
            layer.biases.resize(dims[l + 1]);
            for (double& b : layer.biases) b = rng.uniform_range(-0.5, 0.5);
            layers.push_back(std::move(layer));
        }
        return layers;
    };
    std::vector<int> encoder_dims = {config.input_dim};
    encoder_dims.insert(encoder_dims.end(), config.encoder_hidden.begin(), config.encoder_hidden.end());
    encoder_dims.push_back(config.latent_dim);
    std::vector<int> decoder_dims(encoder_dims.rbegin(), encoder_dims.rend());
    net.encoder = make_stack(encoder_dims);
    net.decoder = make_stack(decoder_dims);
    net.class_weights = Matrix(config.class_count, config.prototype_count);
    for (double& w : net.class_weights.data) w = rng.uniform_range(-0.5, 0.5);

    // Prototypes start at encodings of training points, which keeps the
    // interpretability terms small from the first epoch.
    const std::size_t n = train.inputs.size();
    const std::size_t mp = static_cast<std::size_t>(config.prototype_count);
    std::vector<std::size_t> picks;
    if (n >= mp) {
        picks = rng.sample_distinct(n, mp);
    } else {
        for (std::size_t j = 0; j < mp; ++j) picks.push_back(rng.uniform_index(n));
    }
    net.prototypes = Matrix(mp, config.latent_dim);
    for (std::size_t j = 0; j < mp; ++j) {
        const auto acts = stack_forward(net.encoder, config.activation, train.inputs[picks[j]]);
        for (int c = 0; c < config.latent_dim; ++c) net.prototypes.at(j, c) = acts.back()[c];
    }
    return net;
}

ForwardResult forward(const PrototypeNetwork& net, const std::vector<double>& input) {
    if (input.size() != static_cast<std::size_t>(net.config.input_dim))
        throw DimensionMismatch("forward: input length differs from input_dim");
    const SampleCache cache = run_sample(net, input);
    ForwardResult result;
    result.latent = cache.encoder_acts.back();
    result.reconstruction = cache.decoder_acts.back();
    result.distances = cache.distances;
    result.probabilities = cache.probabilities;
    return result;
}

LossParts loss(const PrototypeNetwork& net, const LabeledVectors& batch) {
    return backward(net, batch).parts;
}

NetworkGradients gradients(const PrototypeNetwork& net, const LabeledVectors& batch) {
    return std::move(backward(net, batch).grads);
}

TrainResult train(const NetworkConfig& config, const LabeledVectors& train_set) {
    TrainResult result;
    result.net = init_network(config, train_set);
    result.history.reserve(config.epochs);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        BackwardResult step = backward(result.net, train_set);
        if (!finite(step.parts))
            throw DivergenceError("train: loss became non-finite at epoch " + std::to_string(epoch));
        result.history.push_back(step.parts);
        apply_update(result.net, step.grads, config.learning_rate);
    }
    return result;
}

double predict_proba(const PrototypeNetwork& net, const std::vector<double>& input) {
    return forward(net, input).probabilities[1];
}

std::vector<std::vector<double>> decode_prototypes(const PrototypeNetwork& net) {
    std::vector<std::vector<double>> decoded;
    decoded.reserve(net.prototypes.rows);
    for (std::size_t j = 0; j < net.prototypes.rows; ++j) {
        std::vector<double> latent(net.prototypes.cols);
        for (std::size_t c = 0; c < net.prototypes.cols; ++c) latent[c] = net.prototypes.at(j, c);
        decoded.push_back(stack_forward(net.decoder, net.config.activation, latent).back());
    }
    return decoded;
}

double default_threshold(ResourceClass cls) {
    switch (cls) {
        case ResourceClass::ServiceLevel: return 0.45;
        case ResourceClass::Api: return 0.30;
        case ResourceClass::Cpu: return 0.20;
        case ResourceClass::Container: return 0.40;
        case ResourceClass::Dependency: return 0.20;
        case ResourceClass::ComputeCluster: return 0.05;
        case ResourceClass::Storage: return 0.35;
        case ResourceClass::RamMemory: return 0.30;
        case ResourceClass::Certificate: return 0.50;
        case ResourceClass::CacheMemory: return 0.41;
        case ResourceClass::NoneOfTheAbove: return 0.40;
        case ResourceClass::Io:
        case ResourceClass::PagingMemory: return 0.50;  // no tuned value shipped
    }
    return 0.50;
}

void save_checkpoint(const std::filesystem::path& path, const PrototypeNetwork& net,
                     ResourceClass cls, FeatureKind kind, double threshold) {
    nlohmann::json doc;
    doc["format"] = "monreco-checkpoint";
    doc["format_version"] = 1;
    doc["class"] = to_string(cls);
    doc["feature_kind"] = to_string(kind);
    doc["threshold"] = threshold;
    doc["config"] = {
        {"input_dim", net.config.input_dim},
        {"latent_dim", net.config.latent_dim},
        {"prototype_count", net.config.prototype_count},
        {"class_count", net.config.class_count},
        {"encoder_hidden", net.config.encoder_hidden},
        {"activation", to_string(net.config.activation)},
        {"lambda_recon", net.config.lambda_recon},
        {"lambda_r1", net.config.lambda_r1},
        {"lambda_r2", net.config.lambda_r2},
        {"learning_rate", net.config.learning_rate},
        {"epochs", net.config.epochs},
        {"seed", net.config.seed},
    };
    nlohmann::json encoder = nlohmann::json::array();
    for (const auto& layer : net.encoder) encoder.push_back(layer_to_json(layer));
    nlohmann::json decoder = nlohmann::json::array();
    for (const auto& layer : net.decoder) decoder.push_back(layer_to_json(layer));
    doc["encoder"] = std::move(encoder);
    doc["decoder"] = std::move(decoder);
    doc["prototypes"] = matrix_to_json(net.prototypes);
    doc["class_weights"] = matrix_to_json(net.class_weights);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path.string());
    out << doc.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelNotFound("checkpoint not found: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ParseError("checkpoint " + path.string() + ": " + err.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "monreco-checkpoint")
            throw ParseError("checkpoint " + path.string() + ": unrecognized format tag");
        if (doc.at("format_version").get<int>() != 1)
            throw SchemaVersionError("checkpoint " + path.string() + ": unsupported format_version");
        Checkpoint checkpoint;
        const auto cls = parse_resource_class(doc.at("class").get<std::string>());
        if (!cls) throw ParseError("checkpoint " + path.string() + ": unknown class");
        checkpoint.cls = *cls;
        const auto kind = parse_feature_kind(doc.at("feature_kind").get<std::string>());
        if (!kind) throw ParseError("checkpoint " + path.string() + ": unknown feature kind");
        checkpoint.kind = *kind;
        checkpoint.threshold = doc.at("threshold").get<double>();
        const auto& cfg = doc.at("config");
        NetworkConfig config;
        config.input_dim = cfg.at("input_dim").get<int>();
        config.latent_dim = cfg.at("latent_dim").get<int>();
        config.prototype_count = cfg.at("prototype_count").get<int>();
        config.class_count = cfg.at("class_count").get<int>();
        config.encoder_hidden = cfg.at("encoder_hidden").get<std::vector<int>>();
        const auto activation = parse_activation(cfg.at("activation").get<std::string>());
        if (!activation) throw ParseError("checkpoint " + path.string() + ": unknown activation");
        config.activation = *activation;
        config.lambda_recon = cfg.at("lambda_recon").get<double>();
        config.lambda_r1 = cfg.at("lambda_r1").get<double>();
        config.lambda_r2 = cfg.at("lambda_r2").get<double>();
        config.learning_rate = cfg.at("learning_rate").get<double>();
        config.epochs = cfg.at("epochs").get<int>();
        config.seed = cfg.at("seed").get<std::uint64_t>();
        checkpoint.net.config = config;
        for (const auto& layer : doc.at("encoder")) checkpoint.net.encoder.push_back(layer_from_json(layer));
        for (const auto& layer : doc.at("decoder")) checkpoint.net.decoder.push_back(layer_from_json(layer));
        checkpoint.net.prototypes = matrix_from_json(doc.at("prototypes"), "prototypes");
        checkpoint.net.class_weights = matrix_from_json(doc.at("class_weights"), "class_weights");
        return checkpoint;
    } catch (const nlohmann::json::exception& err) {
        throw ParseError("checkpoint " + path.string() + ": " + err.what());
    }
}

ProtonetExperiment run_protonet_experiment(const Dataset& dataset, ResourceClass cls,
                                           FeatureKind kind, const SplitIndices& split,
                                           NetworkConfig config) {
    Dataset train_subset;
    std::vector<const ServiceRecord*> test_services;
    for (const auto& service : dataset.services) {
        if (split.train_ids.count(service.service_id))
            train_subset.services.push_back(service);
        else if (split.test_ids.count(service.service_id))
            test_services.push_back(&service);
    }
    if (train_subset.services.empty())
        throw EmptyTestSet("run_protonet_experiment: split has no train services");

    const FeatureSpace space = build_feature_space(train_subset, kind);
    const LabelMatrix labels = build_label_matrix(train_subset, ClassKind::Resource);
    std::vector<EncodedService> fleet;
    fleet.reserve(train_subset.services.size());
    for (const auto& service : train_subset.services)
        fleet.push_back({service.service_id, encode_service(service, space)});

    const std::size_t column = static_cast<std::size_t>(cls);
    const auto topn = static_cast<std::size_t>(config.input_dim);

    LabeledVectors train_set;
    for (std::size_t i = 0; i < train_subset.services.size(); ++i) {
        const SimilarityList neighbors =
            top_n_similar(train_subset.services[i].service_id, fleet, topn, kind);
        train_set.inputs.push_back(build_input_features(cls, neighbors, labels, config.input_dim));
        train_set.labels.push_back(labels.binary[i][column]);
    }

    ProtonetExperiment experiment;
    experiment.train_size = train_set.size();
    const LabeledVectors balanced = upsample_balanced(train_set, config.seed ^ kUpsampleSeedSalt);
    experiment.upsampled_size = balanced.size();

    TrainResult trained = train(config, balanced);
    experiment.net = std::move(trained.net);
    experiment.history = std::move(trained.history);

    for (const ServiceRecord* service : test_services) {
        std::vector<EncodedService> with_target = fleet;
        with_target.push_back({service->service_id, encode_service(*service, space)});
        const SimilarityList neighbors = top_n_similar(service->service_id, with_target, topn, kind);
        const std::vector<double> input = build_input_features(cls, neighbors, labels, config.input_dim);
        experiment.test_scores.scores.push_back(predict_proba(experiment.net, input));
        experiment.test_scores.labels.push_back(service_class_sets(*service).resource.count(cls) ? 1 : 0);
    }
    if (!experiment.test_scores.labels.empty()) {
        const bool has_positive = std::count(experiment.test_scores.labels.begin(),
                                             experiment.test_scores.labels.end(), 1) > 0;
        const bool has_negative = std::count(experiment.test_scores.labels.begin(),
                                             experiment.test_scores.labels.end(), 0) > 0;
        if (has_positive && has_negative) experiment.test_auc = auc(experiment.test_scores);
    }
    return experiment;
}

} // namespace monreco
