#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "monreco/cf_baseline.hpp"
#include "monreco/core_model.hpp"
#include "monreco/ingest.hpp"
#include "monreco/matrix.hpp"
#include "monreco/split.hpp"

namespace monreco {

enum class Activation { Sigmoid, Tanh };

std::string to_string(Activation activation);
std::optional<Activation> parse_activation(std::string_view name);

struct NetworkConfig {
    int input_dim = 5;
    int latent_dim = 3;
    int prototype_count = 4;
    int class_count = 2;  // per-class binary problems
    std::vector<int> encoder_hidden = {8};
    Activation activation = Activation::Sigmoid;
    double lambda_recon = 0.05;
    double lambda_r1 = 0.05;  // pulls each prototype toward some encoded point
    double lambda_r2 = 0.05;  // pulls each encoded point toward some prototype
    // Prototypes start on top of the encoded data, so early classifier
    // gradients are minuscule; full-batch descent needs this much step to
    // leave that plateau within the epoch budget.
    double learning_rate = 0.5;
    int epochs = 1500;
    std::uint64_t seed = 0;
};

struct Layer {
    Matrix weights;  // out x in
    std::vector<double> biases;
};

// Autoencoder plus prototype classifier. The encoder maps inputs to the
// latent space where prototypes live; the class weights turn squared latent
// distances into logits.
struct PrototypeNetwork {
    NetworkConfig config;
    std::vector<Layer> encoder;
    std::vector<Layer> decoder;
    Matrix prototypes;     // prototype_count x latent_dim
    Matrix class_weights;  // class_count x prototype_count
};

struct ForwardResult {
    std::vector<double> latent;
    std::vector<double> reconstruction;
    std::vector<double> distances;      // squared L2 to each prototype
    std::vector<double> probabilities;  // softmax over class logits
};

struct LossParts {
    double total = 0.0;
    double cross_entropy = 0.0;
    double reconstruction = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
};

struct LabeledVectors {
    std::vector<std::vector<double>> inputs;
    std::vector<int> labels;  // 0 / 1

    std::size_t size() const { return inputs.size(); }
};

// Gradients mirror the parameter layout of PrototypeNetwork.
struct NetworkGradients {
    std::vector<Layer> encoder;
    std::vector<Layer> decoder;
    Matrix prototypes;
    Matrix class_weights;
};

// Minority class resampled with replacement until counts are equal; all
// originals retained, duplicates appended.
LabeledVectors upsample_balanced(const LabeledVectors& train, std::uint64_t seed);

// R^input_dim feature for one (service, class) pair: component j is the j-th
// neighbor's similarity times its normalized class occurrence, zero-padded
// when fewer neighbors exist.
std::vector<double> build_input_features(ResourceClass cls, const SimilarityList& neighbors,
                                         const LabelMatrix& labels, int dim = 5);

// Seeded init: weights uniform in [-0.5, 0.5], prototypes at encodings of
// randomly chosen training points so the interpretability terms start small.
PrototypeNetwork init_network(const NetworkConfig& config, const LabeledVectors& train);

ForwardResult forward(const PrototypeNetwork& net, const std::vector<double>& input);

LossParts loss(const PrototypeNetwork& net, const LabeledVectors& batch);

// Exact analytic gradients of the four-term loss for every parameter.
NetworkGradients gradients(const PrototypeNetwork& net, const LabeledVectors& batch);

struct TrainResult {
    PrototypeNetwork net;
    std::vector<LossParts> history;  // one entry per epoch, pre-update loss
};

// Full-batch gradient descent; deterministic per (config, data).
TrainResult train(const NetworkConfig& config, const LabeledVectors& train_set);

double predict_proba(const PrototypeNetwork& net, const std::vector<double>& input);

// Decoded prototype vectors g(p_j), the explanation payload.
std::vector<std::vector<double>> decode_prototypes(const PrototypeNetwork& net);

// Per-class default decision thresholds shipped with the recommender; 0.5 for
// classes without a tuned value.
double default_threshold(ResourceClass cls);

// Inclusive decision rule shared by every consumer of a threshold.
inline bool decide(double probability, double threshold) { return probability >= threshold; }

void save_checkpoint(const std::filesystem::path& path, const PrototypeNetwork& net,
                     ResourceClass cls, FeatureKind kind, double threshold);

struct Checkpoint {
    PrototypeNetwork net;
    ResourceClass cls = ResourceClass::ServiceLevel;
    FeatureKind kind = FeatureKind::Components;
    double threshold = 0.5;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

// End-to-end single-class experiment: CF features from the training split,
// balanced upsampling, training, and test scoring.
struct ProtonetExperiment {
    PrototypeNetwork net;
    std::vector<LossParts> history;
    ScoredSet test_scores;          // empty when the test split is empty
    std::optional<double> test_auc;  // absent when the test truth is single-class
    std::size_t train_size = 0;
    std::size_t upsampled_size = 0;
};

ProtonetExperiment run_protonet_experiment(const Dataset& dataset, ResourceClass cls,
                                           FeatureKind kind, const SplitIndices& split,
                                           NetworkConfig config);

} // namespace monreco
