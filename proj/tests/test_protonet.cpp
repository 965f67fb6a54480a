#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "monreco/errors.hpp"
#include "monreco/protonet.hpp"
#include "monreco/rng.hpp"
#include "monreco/split.hpp"
#include "monreco/synth.hpp"

using namespace monreco;

namespace {

// Every trainable slot of the network, in the same order the gradient
// structure lays them out.
std::vector<double*> parameter_slots(PrototypeNetwork& net) {
    std::vector<double*> slots;
    auto add_layers = [&slots](std::vector<Layer>& layers) {
        for (auto& layer : layers) {
            for (double& w : layer.weights.data) slots.push_back(&w);
            for (double& b : layer.biases) slots.push_back(&b);
        }
    };
    add_layers(net.encoder);
    add_layers(net.decoder);
    for (double& p : net.prototypes.data) slots.push_back(&p);
    for (double& w : net.class_weights.data) slots.push_back(&w);
    return slots;
}

std::vector<double> flatten(const NetworkGradients& grads) {
    std::vector<double> flat;
    auto add_layers = [&flat](const std::vector<Layer>& layers) {
        for (const auto& layer : layers) {
            flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
            flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
        }
    };
    add_layers(grads.encoder);
    add_layers(grads.decoder);
    flat.insert(flat.end(), grads.prototypes.data.begin(), grads.prototypes.data.end());
    flat.insert(flat.end(), grads.class_weights.data.begin(), grads.class_weights.data.end());
    return flat;
}

LabeledVectors random_batch(SeededRng& rng, int input_dim, std::size_t n) {
    LabeledVectors batch;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(input_dim);
        for (double& v : x) v = rng.uniform();
        batch.inputs.push_back(std::move(x));
        batch.labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
    }
    if (batch.labels[0] == batch.labels[1]) batch.labels[1] = 1 - batch.labels[0];
    return batch;
}

double max_gradcheck_error(PrototypeNetwork& net, const LabeledVectors& batch) {
    const std::vector<double> analytic = flatten(gradients(net, batch));
    const std::vector<double*> slots = parameter_slots(net);
    REQUIRE(analytic.size() == slots.size());
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const double saved = *slots[i];
        *slots[i] = saved + h;
        const double up = loss(net, batch).total;
        *slots[i] = saved - h;
        const double down = loss(net, batch).total;
        *slots[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-4});
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / scale);
    }
    return worst;
}

NetworkConfig small_config(std::uint64_t seed) {
    NetworkConfig config;
    config.seed = seed;
    return config;  // defaults: p=5, q=3, mp=4, K=2, hidden [8]
}

} // namespace

TEST_SUITE("protonet") {

TEST_CASE("split cardinalities follow the rounding rule") {
    auto fleet = [](int n) {
        Dataset dataset;
        for (int i = 0; i < n; ++i) {
            ServiceRecord service;
            service.service_id = "svc-" + std::to_string(i);
            dataset.services.push_back(service);
        }
        return dataset;
    };
    const SplitIndices ten = split_dataset(fleet(10), 0.8, 4);
    CHECK(ten.train_ids.size() == 8);
    CHECK(ten.test_ids.size() == 2);
    const SplitIndices large = split_dataset(fleet(791), 0.8, 4);
    CHECK(large.train_ids.size() == 633);
    CHECK(large.test_ids.size() == 158);
}

TEST_CASE("splits are deterministic, disjoint, and exhaustive") {
    const Dataset dataset = generate([] {
        SynthConfig config = desk_preset(5);
        config.n_services = 37;
        return config;
    }());
    const SplitIndices a = split_dataset(dataset, 0.8, 123);
    const SplitIndices b = split_dataset(dataset, 0.8, 123);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.test_ids == b.test_ids);
    std::size_t overlap = 0;
    for (const auto& id : a.train_ids) overlap += a.test_ids.count(id);
    CHECK(overlap == 0);
    CHECK(a.train_ids.size() + a.test_ids.size() == dataset.services.size());
}

TEST_CASE("upsampling balances the minority class") {
    LabeledVectors train;
    for (int i = 0; i < 3; ++i) {
        train.inputs.push_back({double(i)});
        train.labels.push_back(1);
    }
    for (int i = 0; i < 7; ++i) {
        train.inputs.push_back({double(10 + i)});
        train.labels.push_back(0);
    }
    const LabeledVectors balanced = upsample_balanced(train, 9);
    std::size_t positives = 0, negatives = 0;
    for (const int label : balanced.labels) (label == 1 ? positives : negatives) += 1;
    CHECK(positives == 7);
    CHECK(negatives == 7);
    // Originals retained in order.
    for (std::size_t i = 0; i < train.inputs.size(); ++i)
        CHECK(balanced.inputs[i] == train.inputs[i]);
}

TEST_CASE("balanced input is returned unchanged") {
    LabeledVectors train;
    train.inputs = {{0.0}, {1.0}};
    train.labels = {0, 1};
    const LabeledVectors balanced = upsample_balanced(train, 1);
    CHECK(balanced.inputs == train.inputs);
    CHECK(balanced.labels == train.labels);
}

TEST_CASE("upsampling a single-class set fails") {
    LabeledVectors train;
    train.inputs = {{0.0}, {1.0}};
    train.labels = {1, 1};
    CHECK_THROWS_AS(upsample_balanced(train, 1), SingleClassError);
}

TEST_CASE("input features multiply similarity and occurrence, zero padded") {
    LabelMatrix labels;
    labels.kind = ClassKind::Resource;
    labels.class_names = canonical_class_names(ClassKind::Resource);
    labels.service_order = {"s1"};
    labels.binary.emplace_back(kResourceClassCount, 1);
    std::vector<double> row(kResourceClassCount, 0.0);
    row[static_cast<std::size_t>(ResourceClass::Cpu)] = 0.4;
    labels.normalized.push_back(row);
    labels.rebuild_index();

    SimilarityList neighbors;
    neighbors.target = "t";
    neighbors.neighbors = {{"s1", 1.0}};
    const std::vector<double> x = build_input_features(ResourceClass::Cpu, neighbors, labels, 5);
    CHECK(x == std::vector<double>{0.4, 0.0, 0.0, 0.0, 0.0});

    neighbors.neighbors = {{"ghost", 1.0}};
    CHECK_THROWS_AS(build_input_features(ResourceClass::Cpu, neighbors, labels, 5), UnknownService);
}

TEST_CASE("forward produces a normalized probability vector") {
    SeededRng rng(2);
    const LabeledVectors batch = random_batch(rng, 5, 6);
    const PrototypeNetwork net = init_network(small_config(7), batch);
    for (const auto& x : batch.inputs) {
        const ForwardResult result = forward(net, x);
        double sum = 0.0;
        for (const double p : result.probabilities) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
        for (const double d : result.distances) CHECK(d >= 0.0);
        CHECK(result.latent.size() == 3);
        CHECK(result.reconstruction.size() == 5);
    }
}

TEST_CASE("distance to a prototype placed at the encoding is zero") {
    SeededRng rng(3);
    const LabeledVectors batch = random_batch(rng, 5, 4);
    PrototypeNetwork net = init_network(small_config(11), batch);
    const ForwardResult before = forward(net, batch.inputs[0]);
    for (std::size_t c = 0; c < net.prototypes.cols; ++c)
        net.prototypes.at(0, c) = before.latent[c];
    const ForwardResult after = forward(net, batch.inputs[0]);
    CHECK(after.distances[0] == 0.0);
}

TEST_CASE("zero class weights give uniform probabilities") {
    SeededRng rng(4);
    const LabeledVectors batch = random_batch(rng, 5, 4);
    PrototypeNetwork net = init_network(small_config(13), batch);
    for (double& w : net.class_weights.data) w = 0.0;
    const ForwardResult result = forward(net, batch.inputs[0]);
    for (const double p : result.probabilities) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("with zero lambdas the loss is exactly the cross-entropy") {
    SeededRng rng(5);
    const LabeledVectors batch = random_batch(rng, 5, 8);
    NetworkConfig config = small_config(17);
    config.lambda_recon = config.lambda_r1 = config.lambda_r2 = 0.0;
    const PrototypeNetwork net = init_network(config, batch);
    const LossParts parts = loss(net, batch);
    CHECK(parts.total == parts.cross_entropy);
    CHECK(parts.cross_entropy > 0.0);
}

TEST_CASE("a prototype at the single training point zeroes both interpretability terms") {
    LabeledVectors batch;
    batch.inputs = {{0.2, 0.4, 0.6, 0.1, 0.3}, {0.9, 0.1, 0.2, 0.8, 0.5}};
    batch.labels = {1, 0};
    NetworkConfig config = small_config(23);
    config.prototype_count = 2;
    PrototypeNetwork net = init_network(config, batch);
    for (std::size_t j = 0; j < net.prototypes.rows; ++j) {
        const ForwardResult result = forward(net, batch.inputs[j]);
        for (std::size_t c = 0; c < net.prototypes.cols; ++c)
            net.prototypes.at(j, c) = result.latent[c];
    }
    const LossParts parts = loss(net, batch);
    CHECK(parts.r1 == 0.0);
    CHECK(parts.r2 == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    SeededRng rng(6);
    for (const std::uint64_t seed : {1ULL, 2ULL}) {
        const LabeledVectors batch = random_batch(rng, 5, 6);
        PrototypeNetwork net = init_network(small_config(seed), batch);
        CHECK(max_gradcheck_error(net, batch) < 1e-4);
    }
}

TEST_CASE("with zero lambdas and zero class weights only the classifier head has gradients") {
    SeededRng rng(8);
    const LabeledVectors batch = random_batch(rng, 5, 5);
    NetworkConfig config = small_config(29);
    config.lambda_recon = config.lambda_r1 = config.lambda_r2 = 0.0;
    PrototypeNetwork net = init_network(config, batch);
    for (double& w : net.class_weights.data) w = 0.0;
    const NetworkGradients grads = gradients(net, batch);
    double head = 0.0;
    for (const double g : grads.class_weights.data) head += std::fabs(g);
    CHECK(head > 0.0);
    double rest = 0.0;
    for (const auto& layer : grads.encoder) {
        for (const double g : layer.weights.data) rest += std::fabs(g);
        for (const double g : layer.biases) rest += std::fabs(g);
    }
    for (const auto& layer : grads.decoder) {
        for (const double g : layer.weights.data) rest += std::fabs(g);
        for (const double g : layer.biases) rest += std::fabs(g);
    }
    for (const double g : grads.prototypes.data) rest += std::fabs(g);
    CHECK(rest == 0.0);
    CHECK(max_gradcheck_error(net, batch) < 1e-4);
}

TEST_CASE("duplicating the batch leaves mean-reduced gradients unchanged") {
    SeededRng rng(9);
    const LabeledVectors batch = random_batch(rng, 5, 5);
    LabeledVectors doubled = batch;
    doubled.inputs.insert(doubled.inputs.end(), batch.inputs.begin(), batch.inputs.end());
    doubled.labels.insert(doubled.labels.end(), batch.labels.begin(), batch.labels.end());
    const PrototypeNetwork net = init_network(small_config(31), batch);
    const std::vector<double> single = flatten(gradients(net, batch));
    const std::vector<double> twice = flatten(gradients(net, doubled));
    REQUIRE(single.size() == twice.size());
    for (std::size_t i = 0; i < single.size(); ++i)
        CHECK(single[i] == doctest::Approx(twice[i]).epsilon(1e-12));
}

TEST_CASE("training is deterministic and reduces the loss on separable data") {
    LabeledVectors batch;
    SeededRng rng(10);
    for (int i = 0; i < 20; ++i) {
        const bool positive = i % 2 == 0;
        std::vector<double> x(5);
        for (double& v : x) v = (positive ? 0.7 : 0.1) + 0.05 * rng.uniform();
        batch.inputs.push_back(std::move(x));
        batch.labels.push_back(positive ? 1 : 0);
    }
    NetworkConfig config = small_config(37);
    config.epochs = 60;
    const TrainResult first = train(config, batch);
    const TrainResult second = train(config, batch);
    REQUIRE(first.history.size() == 60);
    for (std::size_t e = 0; e < first.history.size(); ++e)
        CHECK(first.history[e].total == second.history[e].total);  // bitwise identical
    CHECK(first.history[49].total < first.history[0].total);
}

TEST_CASE("training with a huge step diverges with the epoch reported") {
    SeededRng rng(11);
    const LabeledVectors batch = random_batch(rng, 5, 10);
    NetworkConfig config = small_config(47);
    config.learning_rate = 2000.0;
    CHECK_THROWS_WITH_AS(train(config, batch), doctest::Contains("epoch"), DivergenceError);
}

TEST_CASE("trained prototypes sit close to the encoded training set") {
    // With the prototype-pull term active, each prototype's nearest encoding
    // falls within the 10th percentile of pairwise latent distances. The pull
    // needs real weight here: the cross-entropy term is happy to park an
    // unused prototype away from the data.
    LabeledVectors batch;
    SeededRng rng(13);
    for (int i = 0; i < 30; ++i) {
        const bool positive = i % 2 == 0;
        std::vector<double> x(5);
        for (double& v : x) v = (positive ? 0.6 : 0.1) + 0.3 * rng.uniform();
        batch.inputs.push_back(std::move(x));
        batch.labels.push_back(positive ? 1 : 0);
    }
    NetworkConfig config = small_config(53);
    config.epochs = 800;
    config.lambda_r1 = 1.0;
    const TrainResult trained = train(config, batch);

    std::vector<std::vector<double>> encodings;
    for (const auto& x : batch.inputs) encodings.push_back(forward(trained.net, x).latent);
    auto squared = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
        return s;
    };
    std::vector<double> pairwise;
    for (std::size_t i = 0; i < encodings.size(); ++i)
        for (std::size_t j = i + 1; j < encodings.size(); ++j)
            pairwise.push_back(squared(encodings[i], encodings[j]));
    std::sort(pairwise.begin(), pairwise.end());
    const double percentile_10 = pairwise[pairwise.size() / 10];

    for (std::size_t p = 0; p < trained.net.prototypes.rows; ++p) {
        std::vector<double> prototype(trained.net.prototypes.cols);
        for (std::size_t c = 0; c < prototype.size(); ++c)
            prototype[c] = trained.net.prototypes.at(p, c);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& encoding : encodings) nearest = std::min(nearest, squared(prototype, encoding));
        CHECK(nearest <= percentile_10);
    }
}

TEST_CASE("decoded prototypes have the right shape") {
    SeededRng rng(12);
    const LabeledVectors batch = random_batch(rng, 5, 6);
    const PrototypeNetwork net = init_network(small_config(41), batch);
    const auto decoded = decode_prototypes(net);
    REQUIRE(decoded.size() == 4);
    for (const auto& vec : decoded) CHECK(vec.size() == 5);
}

TEST_CASE("shipped per-class default thresholds") {
    CHECK(default_threshold(ResourceClass::ServiceLevel) == 0.45);
    CHECK(default_threshold(ResourceClass::ComputeCluster) == 0.05);
    CHECK(default_threshold(ResourceClass::CacheMemory) == 0.41);
    CHECK(default_threshold(ResourceClass::NoneOfTheAbove) == 0.40);
    CHECK(decide(0.45, 0.45));
    CHECK_FALSE(decide(0.4499999, 0.45));
}

TEST_CASE("checkpoints round-trip through disk") {
    SeededRng rng(14);
    const LabeledVectors batch = random_batch(rng, 5, 6);
    NetworkConfig config = small_config(43);
    config.epochs = 5;
    const TrainResult trained = train(config, batch);
    const auto path = std::filesystem::temp_directory_path() / "monreco_ckpt.json";
    save_checkpoint(path, trained.net, ResourceClass::Cpu, FeatureKind::Components, 0.2);
    const Checkpoint loaded = load_checkpoint(path);
    CHECK(loaded.cls == ResourceClass::Cpu);
    CHECK(loaded.kind == FeatureKind::Components);
    CHECK(loaded.threshold == 0.2);
    const std::vector<double> probe = {0.1, 0.7, 0.3, 0.9, 0.2};
    CHECK(predict_proba(loaded.net, probe) == predict_proba(trained.net, probe));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path), ModelNotFound);
}

} // TEST_SUITE
