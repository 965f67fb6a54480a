// monreco: monitor-class recommendation toolkit.
//
// Subcommands: synth, analyze, baseline, ablate-svd, train, recommend.
// Every run writes its reports plus a manifest.json into --out; reports are
// byte-identical across reruns with the same inputs (only the manifest's
// duration varies).

#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "monreco/cf_baseline.hpp"
#include "monreco/core_model.hpp"
#include "monreco/errors.hpp"
#include "monreco/evalkit.hpp"
#include "monreco/ingest.hpp"
#include "monreco/protonet.hpp"
#include "monreco/report_io.hpp"
#include "monreco/split.hpp"
#include "monreco/stats.hpp"
#include "monreco/svd_ablation.hpp"
#include "monreco/synth.hpp"

namespace {

using namespace monreco;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// logging (MONRECO_LOG = debug | info | warn | error; default warn)

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("MONRECO_LOG");
        if (!env) return 2;
        const std::string value(env);
        if (value == "debug") return 0;
        if (value == "info") return 1;
        if (value == "warn") return 2;
        return 3;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() <= 1) std::cerr << "[info] " << message << '\n';
}

// ---------------------------------------------------------------------------
// shared plumbing

struct GlobalArgs {
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string out_dir = ".";
};

std::filesystem::path ensure_out_dir(const GlobalArgs& args) {
    std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

class ManifestScope {
public:
    ManifestScope(std::string subcommand, const GlobalArgs& args)
        : start_(std::chrono::steady_clock::now()), out_dir_(ensure_out_dir(args)) {
        manifest_.subcommand = std::move(subcommand);
        manifest_.seed = args.seed;
        manifest_.jobs = args.jobs;
    }

    void set_dataset(const std::string& path) {
        manifest_.dataset_path = path;
        manifest_.dataset_hash = fnv1a64_file(path);
    }

    void config(const std::string& key, const std::string& value) {
        manifest_.config.emplace_back(key, value);
    }

    const std::filesystem::path& dir() const { return out_dir_; }

    void wrote(const std::string& filename) { manifest_.outputs.push_back(filename); }

    void finish() {
        manifest_.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_manifest(out_dir_, manifest_);
    }

private:
    std::chrono::steady_clock::time_point start_;
    std::filesystem::path out_dir_;
    RunManifest manifest_;
};

void run_indexed(int jobs, std::size_t count, const std::function<void(std::size_t)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1)) work(i);
            } catch (...) {
                failures[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& thread : pool) thread.join();
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string preset = "desk";
    std::string dataset_name = "fleet.jsonl";
};

ordered_json rules_to_json(const SynthConfig& config, const std::string& preset) {
    ordered_json doc;
    doc["preset"] = preset;
    doc["seed"] = config.seed;
    doc["n_services"] = config.n_services;
    ordered_json rules = ordered_json::array();
    for (const auto& rule : config.rules) {
        ordered_json entry;
        entry["feature_kind"] = to_string(rule.kind);
        entry["trigger_token"] = rule.trigger_token;
        entry["resource_class"] = to_string(rule.cls);
        entry["p_given_trigger"] = rule.p_given_trigger;
        entry["p_without"] = rule.p_without;
        entry["monitors_per_hit"] = rule.monitors_per_hit;
        rules.push_back(std::move(entry));
    }
    doc["rules"] = std::move(rules);
    ordered_json noise = ordered_json::array();
    for (const auto cls : config.noise_classes) noise.push_back(to_string(cls));
    doc["noise_classes"] = std::move(noise);
    doc["noise_rate"] = config.noise_rate;
    doc["noise_monitors"] = config.noise_monitors;
    return doc;
}

int cmd_synth(const GlobalArgs& global, const SynthArgs& args) {
    ManifestScope manifest("synth", global);
    SynthConfig config;
    if (args.preset == "desk")
        config = desk_preset(global.seed);
    else if (args.preset == "paper-scale")
        config = paper_scale_preset(global.seed);
    else
        throw ConfigError("synth: unknown preset '" + args.preset + "'");
    manifest.config("preset", args.preset);
    log_info("generating " + std::to_string(config.n_services) + " services");
    const Dataset dataset = generate(config);
    save_dataset(manifest.dir() / args.dataset_name, dataset);
    manifest.wrote(args.dataset_name);
    write_text_file(manifest.dir() / "ground_truth.json",
                    rules_to_json(config, args.preset).dump(2) + "\n");
    manifest.wrote("ground_truth.json");
    manifest.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

json distribution_to_json(const Distribution& dist) {
    json doc;
    doc["labels"] = dist.labels;
    doc["counts"] = dist.counts;
    doc["fractions"] = dist.fractions;
    return doc;
}

int cmd_analyze(const GlobalArgs& global, const std::string& data_path) {
    ManifestScope manifest("analyze", global);
    manifest.set_dataset(data_path);
    const Dataset dataset = load_dataset(data_path);
    log_info("analyzing " + std::to_string(dataset.services.size()) + " services");

    json combined;

    // distributions.csv
    {
        std::ostringstream csv;
        csv << "class_kind,level,class,count,fraction\n";
        for (const ClassKind kind : {ClassKind::Resource, ClassKind::Slo}) {
            for (const CountLevel level : {CountLevel::Monitor, CountLevel::Service}) {
                const Distribution dist = class_distribution(dataset, kind, level);
                const std::string level_name = level == CountLevel::Monitor ? "monitor" : "service";
                for (std::size_t i = 0; i < dist.labels.size(); ++i)
                    csv << to_string(kind) << ',' << level_name << ',' << dist.labels[i] << ','
                        << dist.counts[i] << ',' << fmt_double(dist.fractions[i]) << '\n';
                combined["distributions"][to_string(kind)][level_name] = distribution_to_json(dist);
            }
        }
        write_text_file(manifest.dir() / "distributions.csv", csv.str());
        manifest.wrote("distributions.csv");
    }

    // slo_within_resource.csv
    const std::vector<Distribution> slo_table = slo_within_resource(dataset);
    {
        std::ostringstream csv;
        csv << "resource_class,slo_class,count,fraction\n";
        json rows = json::array();
        for (const ResourceClass cls : all_resource_classes()) {
            const Distribution& dist = slo_table[static_cast<std::size_t>(cls)];
            for (std::size_t i = 0; i < dist.labels.size(); ++i)
                csv << to_string(cls) << ',' << dist.labels[i] << ',' << dist.counts[i] << ','
                    << fmt_double(dist.fractions[i]) << '\n';
            json row = distribution_to_json(dist);
            row["resource_class"] = to_string(cls);
            rows.push_back(std::move(row));
        }
        combined["slo_within_resource"] = std::move(rows);
        write_text_file(manifest.dir() / "slo_within_resource.csv", csv.str());
        manifest.wrote("slo_within_resource.csv");
    }

    // phi_matrix.csv over service-level resource-class coexistence
    {
        const LabelMatrix labels = build_label_matrix(dataset, ClassKind::Resource);
        const Matrix phi = phi_matrix(labels);
        std::ostringstream csv;
        csv << "class";
        for (const auto& name : labels.class_names) csv << ',' << name;
        csv << '\n';
        json rows = json::array();
        for (std::size_t i = 0; i < phi.rows; ++i) {
            csv << labels.class_names[i];
            json row = json::array();
            for (std::size_t j = 0; j < phi.cols; ++j) {
                csv << ',' << fmt_double(phi.at(i, j));
                row.push_back(phi.at(i, j));
            }
            csv << '\n';
            rows.push_back(std::move(row));
        }
        combined["phi_matrix"]["classes"] = labels.class_names;
        combined["phi_matrix"]["values"] = std::move(rows);
        write_text_file(manifest.dir() / "phi_matrix.csv", csv.str());
        manifest.wrote("phi_matrix.csv");
    }

    // chi_squared.csv: per-resource-class goodness of fit against the pooled
    // SLO distribution, plus the full independence test in the JSON block.
    {
        const Distribution overall = class_distribution(dataset, ClassKind::Slo, CountLevel::Monitor);
        std::ostringstream csv;
        csv << "resource_class,statistic,dof,p_value,reject_at_5pct,low_expected_cells\n";
        json rows = json::array();
        for (const ResourceClass cls : all_resource_classes()) {
            const Distribution& observed_dist = slo_table[static_cast<std::size_t>(cls)];
            if (observed_dist.total() == 0) continue;
            std::vector<double> observed(observed_dist.counts.begin(), observed_dist.counts.end());
            json row;
            row["resource_class"] = to_string(cls);
            try {
                const ChiSquaredResult result = chi2_goodness_of_fit(observed, overall.fractions);
                csv << to_string(cls) << ',' << fmt_double(result.statistic) << ',' << result.dof
                    << ',' << fmt_double(result.p_value, 12) << ','
                    << (result.reject_at_5pct ? "true" : "false") << ',' << result.low_expected_cells
                    << '\n';
                row["statistic"] = result.statistic;
                row["dof"] = result.dof;
                row["p_value"] = result.p_value;
                row["reject_at_5pct"] = result.reject_at_5pct;
                row["low_expected_cells"] = result.low_expected_cells;
            } catch (const Error& err) {
                row["skipped"] = err.what();
            }
            rows.push_back(std::move(row));
        }
        combined["chi_squared"]["per_class"] = std::move(rows);
        Matrix contingency(kResourceClassCount, kSloClassCount);
        for (const ResourceClass cls : all_resource_classes()) {
            const Distribution& dist = slo_table[static_cast<std::size_t>(cls)];
            for (std::size_t s = 0; s < dist.counts.size(); ++s)
                contingency.at(static_cast<std::size_t>(cls), s) = static_cast<double>(dist.counts[s]);
        }
        try {
            const ChiSquaredResult independence = chi2_independence(contingency);
            combined["chi_squared"]["independence"] = {
                {"statistic", independence.statistic},
                {"dof", independence.dof},
                {"p_value", independence.p_value},
                {"reject_at_5pct", independence.reject_at_5pct},
                {"low_expected_cells", independence.low_expected_cells},
            };
        } catch (const Error& err) {
            combined["chi_squared"]["independence"] = {{"skipped", err.what()}};
        }
        write_text_file(manifest.dir() / "chi_squared.csv", csv.str());
        manifest.wrote("chi_squared.csv");
    }

    const ValidationReport report = validate(dataset);
    combined["validation"] = {{"violations", report.violations.size()},
                              {"external_ids", report.external_ids.size()}};

    write_text_file(manifest.dir() / "analyze.json", combined.dump(2) + "\n");
    manifest.wrote("analyze.json");
    manifest.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineArgs {
    std::string features = "upstream";
    int topn_max = 5;
    double prevalence_floor = 0.05;
    std::uint64_t split_seed = 42;
};

int cmd_baseline(const GlobalArgs& global, const std::string& data_path, const BaselineArgs& args) {
    ManifestScope manifest("baseline", global);
    manifest.set_dataset(data_path);
    manifest.config("features", args.features);
    manifest.config("topn_max", std::to_string(args.topn_max));
    manifest.config("prevalence_floor", fmt_double(args.prevalence_floor, 3));
    manifest.config("split_seed", std::to_string(args.split_seed));

    const auto kind = parse_feature_kind(args.features);
    if (!kind) throw ConfigError("baseline: unknown feature kind '" + args.features + "'");
    const Dataset dataset = load_dataset(data_path);
    const SplitIndices split = split_dataset(dataset, 0.8, args.split_seed);
    CfOptions options;
    options.topn_max = args.topn_max;
    options.prevalence_floor = args.prevalence_floor;
    const CfExperimentReport report = run_cf_experiment(dataset, *kind, split, options);

    // One row per class, one column group per Top-n, matching the published
    // table layout.
    std::ostringstream csv;
    csv << "feature_kind,resource_class";
    for (int n = 1; n <= report.topn_max; ++n)
        csv << ",top" << n << "_auc,top" << n << "_threshold,top" << n << "_precision,top" << n
            << "_recall";
    csv << '\n';
    for (std::size_t i = 0; i < report.cells.size(); i += report.topn_max) {
        csv << to_string(report.kind) << ',' << to_string(report.cells[i].cls);
        for (int n = 0; n < report.topn_max; ++n) {
            const CfCell& cell = report.cells[i + n];
            csv << ',' << fmt_double(cell.auc) << ',' << fmt_double(cell.youden_threshold) << ','
                << fmt_double(cell.precision) << ',' << fmt_double(cell.recall);
        }
        csv << '\n';
    }
    write_text_file(manifest.dir() / "baseline.csv", csv.str());
    manifest.wrote("baseline.csv");

    json doc;
    doc["feature_kind"] = to_string(report.kind);
    doc["notes"] = report.notes;
    write_text_file(manifest.dir() / "baseline_notes.json", doc.dump(2) + "\n");
    manifest.wrote("baseline_notes.json");
    manifest.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// ablate-svd

struct AblateArgs {
    std::string scenario = "all";
    int rank = 10;
    double prevalence_floor = 0.05;
    std::uint64_t split_seed = 42;
};

int cmd_ablate(const GlobalArgs& global, const std::string& data_path, const AblateArgs& args) {
    ManifestScope manifest("ablate-svd", global);
    manifest.set_dataset(data_path);
    manifest.config("scenario", args.scenario);
    manifest.config("rank", std::to_string(args.rank));
    manifest.config("split_seed", std::to_string(args.split_seed));

    AblationOptions options;
    options.rank = args.rank;
    options.prevalence_floor = args.prevalence_floor;
    if (args.scenario != "all") {
        const auto scenario = parse_scenario(args.scenario);
        if (!scenario) throw ConfigError("ablate-svd: unknown scenario '" + args.scenario + "'");
        options.only = scenario;
    }
    const Dataset dataset = load_dataset(data_path);
    const AblationReport report = run_ablation(dataset, args.split_seed, options);

    std::ostringstream csv;
    csv << "resource_class,upstream_only,components_only,both,"
           "ref_upstream_only,ref_components_only,ref_both\n";
    auto cell = [](const std::optional<double>& value) {
        return value ? fmt_double(*value) : std::string();
    };
    for (const AblationRow& row : report.rows) {
        csv << to_string(row.cls);
        for (std::size_t s = 0; s < kScenarioCount; ++s) csv << ',' << cell(row.auc[s]);
        for (std::size_t s = 0; s < kScenarioCount; ++s) csv << ',' << cell(row.reference_auc[s]);
        csv << '\n';
    }
    write_text_file(manifest.dir() / "ablation.csv", csv.str());
    manifest.wrote("ablation.csv");

    json doc;
    doc["rank"] = report.rank;
    doc["notes"] = report.notes;
    write_text_file(manifest.dir() / "ablation_notes.json", doc.dump(2) + "\n");
    manifest.wrote("ablation_notes.json");
    manifest.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::vector<std::string> classes;  // empty: every class above the floor
    std::string features = "components";
    std::string config_path;
    double prevalence_floor = 0.05;
    std::uint64_t split_seed = 42;
};

// Accepts either a JSON object or flat `key = value` lines.
NetworkConfig load_network_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    json doc;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            doc = json::parse(text);
        } catch (const json::exception& err) {
            throw ParseError("network config " + path + ": " + err.what());
        }
    } else {
        doc = json::object();
        std::istringstream lines(text);
        std::string line;
        std::size_t line_number = 0;
        while (std::getline(lines, line)) {
            ++line_number;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ParseError("network config " + path + ":" + std::to_string(line_number) +
                                     ": expected key = value");
                continue;
            }
            auto trim = [](std::string s) {
                const auto begin = s.find_first_not_of(" \t\r\"");
                const auto end = s.find_last_not_of(" \t\r\"");
                return begin == std::string::npos ? std::string() : s.substr(begin, end - begin + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "activation") {
                doc[key] = value;
            } else if (key == "encoder_hidden") {
                json widths = json::array();
                std::istringstream parts(value);
                std::string part;
                while (std::getline(parts, part, ','))
                    if (!part.empty()) widths.push_back(std::stoi(part));
                doc[key] = std::move(widths);
            } else if (key == "epochs" || key == "input_dim" || key == "latent_dim" ||
                       key == "prototype_count" || key == "class_count") {
                doc[key] = std::stoi(value);
            } else if (!key.empty()) {
                doc[key] = std::stod(value);
            }
        }
    }
    NetworkConfig config;
    try {
        config.input_dim = doc.value("input_dim", config.input_dim);
        config.latent_dim = doc.value("latent_dim", config.latent_dim);
        config.prototype_count = doc.value("prototype_count", config.prototype_count);
        config.class_count = doc.value("class_count", config.class_count);
        if (doc.contains("encoder_hidden"))
            config.encoder_hidden = doc["encoder_hidden"].get<std::vector<int>>();
        if (doc.contains("activation")) {
            const auto activation = parse_activation(doc["activation"].get<std::string>());
            if (!activation) throw ParseError("network config " + path + ": unknown activation");
            config.activation = *activation;
        }
        config.lambda_recon = doc.value("lambda_recon", config.lambda_recon);
        config.lambda_r1 = doc.value("lambda_r1", config.lambda_r1);
        config.lambda_r2 = doc.value("lambda_r2", config.lambda_r2);
        config.learning_rate = doc.value("learning_rate", config.learning_rate);
        config.epochs = doc.value("epochs", config.epochs);
    } catch (const json::exception& err) {
        throw ParseError("network config " + path + ": " + err.what());
    }
    return config;
}

void write_density_files(const std::filesystem::path& dir, ManifestScope& manifest,
                         ResourceClass cls, const ScoredSet& scores) {
    const DensityReport report = density_report(scores, 10);
    const auto emit = [&](const char* population, const std::vector<double>& density, bool empty) {
        std::ostringstream out;
        out << "# score-density histogram, class '" << to_string(cls) << "', " << population
            << " population\n";
        if (empty) out << "# population empty\n";
        out << "# bin_center density\n";
        for (std::size_t b = 0; b < density.size(); ++b) {
            const double center = 0.5 * (report.bin_edges[b] + report.bin_edges[b + 1]);
            out << fmt_double(center) << ' ' << fmt_double(density[b]) << '\n';
        }
        const std::string name = "density_" + slug(cls) + "_" + population + ".txt";
        write_text_file(dir / name, out.str());
        manifest.wrote(name);
    };
    emit("positive", report.positive_density, report.positives_empty);
    emit("negative", report.negative_density, report.negatives_empty);
}

int cmd_train(const GlobalArgs& global, const std::string& data_path, const TrainArgs& args) {
    ManifestScope manifest("train", global);
    manifest.set_dataset(data_path);
    manifest.config("features", args.features);
    manifest.config("split_seed", std::to_string(args.split_seed));
    if (!args.config_path.empty()) manifest.config("config", args.config_path);

    const auto kind = parse_feature_kind(args.features);
    if (!kind) throw ConfigError("train: unknown feature kind '" + args.features + "'");
    NetworkConfig base_config;
    if (!args.config_path.empty()) base_config = load_network_config(args.config_path);

    const Dataset dataset = load_dataset(data_path);
    const SplitIndices split = split_dataset(dataset, 0.8, args.split_seed);

    // Named classes, or every class above the prevalence floor in training.
    std::vector<ResourceClass> classes;
    if (!args.classes.empty()) {
        for (const auto& name : args.classes) {
            const auto cls = parse_resource_class(name);
            if (!cls) throw ConfigError("train: unknown resource class '" + name + "'");
            classes.push_back(*cls);
        }
    } else {
        std::size_t train_count = 0;
        std::array<std::size_t, kResourceClassCount> positives{};
        for (const auto& service : dataset.services) {
            if (!split.train_ids.count(service.service_id)) continue;
            ++train_count;
            for (const ResourceClass cls : service_class_sets(service).resource)
                ++positives[static_cast<std::size_t>(cls)];
        }
        for (const ResourceClass cls : all_resource_classes()) {
            const auto count = positives[static_cast<std::size_t>(cls)];
            if (train_count > 0 &&
                static_cast<double>(count) / static_cast<double>(train_count) > args.prevalence_floor)
                classes.push_back(cls);
        }
    }
    if (classes.empty()) throw ConfigError("train: no classes to train");

    struct PerClass {
        ResourceClass cls;
        std::optional<ProtonetExperiment> experiment;
        std::string note;
        NetworkConfig config;
    };
    std::vector<PerClass> results(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        results[i].cls = classes[i];
        results[i].config = base_config;
        // Stable per-class seed regardless of scheduling.
        results[i].config.seed = global.seed ^ fnv1a64(to_string(classes[i]));
    }
    run_indexed(global.jobs, classes.size(), [&](std::size_t i) {
        try {
            results[i].experiment =
                run_protonet_experiment(dataset, results[i].cls, *kind, split, results[i].config);
        } catch (const SingleClassError& err) {
            results[i].note = err.what();
        }
    });

    // Shared context for `recommend`: the training fleet's encodings and
    // normalized label rows.
    {
        Dataset train_subset;
        for (const auto& service : dataset.services)
            if (split.train_ids.count(service.service_id)) train_subset.services.push_back(service);
        const FeatureSpace space = build_feature_space(train_subset, *kind);
        const LabelMatrix labels = build_label_matrix(train_subset, ClassKind::Resource);
        ordered_json context;
        context["format"] = "monreco-context";
        context["format_version"] = 1;
        context["feature_kind"] = to_string(*kind);
        context["vocabulary"] = space.vocabulary;
        ordered_json services = ordered_json::array();
        for (std::size_t i = 0; i < train_subset.services.size(); ++i) {
            ordered_json entry;
            entry["id"] = labels.service_order[i];
            entry["bits"] = encode_service(train_subset.services[i], space).set_bits;
            entry["binary"] = labels.binary[i];
            entry["normalized"] = labels.normalized[i];
            services.push_back(std::move(entry));
        }
        context["services"] = std::move(services);
        write_text_file(manifest.dir() / "context.json", context.dump() + "\n");
        manifest.wrote("context.json");
    }

    std::ostringstream csv;
    csv << "resource_class,feature_kind,train_size,upsampled_size,epochs,final_loss,test_auc,"
           "threshold,note\n";
    for (const PerClass& result : results) {
        const double threshold = default_threshold(result.cls);
        csv << to_string(result.cls) << ',' << to_string(*kind) << ',';
        if (result.experiment) {
            const auto& experiment = *result.experiment;
            const std::string checkpoint_name = slug(result.cls) + ".json";
            save_checkpoint(manifest.dir() / checkpoint_name, experiment.net, result.cls, *kind,
                            threshold);
            manifest.wrote(checkpoint_name);
            if (!experiment.test_scores.scores.empty())
                write_density_files(manifest.dir(), manifest, result.cls, experiment.test_scores);
            csv << experiment.train_size << ',' << experiment.upsampled_size << ','
                << experiment.history.size() << ',' << fmt_double(experiment.history.back().total)
                << ',' << (experiment.test_auc ? fmt_double(*experiment.test_auc) : std::string())
                << ',' << fmt_double(threshold, 2) << ",\n";
            log_info("trained class '" + to_string(result.cls) + "'" +
                     (experiment.test_auc ? " test AUC " + fmt_double(*experiment.test_auc, 3) : ""));
        } else {
            csv << ",,,,," << fmt_double(threshold, 2) << ",skipped: " << result.note << '\n';
        }
    }
    write_text_file(manifest.dir() / "train_report.csv", csv.str());
    manifest.wrote("train_report.csv");
    manifest.finish();
    return 0;
}

// ---------------------------------------------------------------------------
// recommend

ServiceRecord load_service_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open service descriptor: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& err) {
        throw ParseError("service descriptor " + path + ": " + err.what());
    }
    if (!doc.is_object() || !doc.contains("service_id") || !doc["service_id"].is_string())
        throw ParseError("service descriptor " + path + ": missing string field 'service_id'");
    ServiceRecord service;
    service.service_id = doc["service_id"].get<std::string>();
    auto read_set = [&](const char* field) {
        std::set<std::string> out;
        if (!doc.contains(field)) return out;
        if (!doc[field].is_array())
            throw ParseError("service descriptor " + path + ": field '" + std::string(field) +
                             "' must be an array of strings");
        for (const auto& item : doc[field]) {
            if (!item.is_string())
                throw ParseError("service descriptor " + path + ": field '" + std::string(field) +
                                 "' must contain only strings");
            out.insert(item.get<std::string>());
        }
        return out;
    };
    service.upstream = read_set("upstream");
    service.downstream = read_set("downstream");
    service.components = read_set("components");
    return service;
}

struct RecommendContext {
    FeatureSpace space;
    std::vector<EncodedService> fleet;
    LabelMatrix labels;
};

RecommendContext load_context(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelNotFound("context not found: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& err) {
        throw ParseError("context " + path.string() + ": " + err.what());
    }
    RecommendContext context;
    try {
        if (doc.at("format").get<std::string>() != "monreco-context")
            throw ParseError("context " + path.string() + ": unrecognized format tag");
        if (doc.at("format_version").get<int>() != 1)
            throw SchemaVersionError("context " + path.string() + ": unsupported format_version");
        const auto kind = parse_feature_kind(doc.at("feature_kind").get<std::string>());
        if (!kind) throw ParseError("context " + path.string() + ": unknown feature kind");
        context.space.kind = *kind;
        context.space.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < context.space.vocabulary.size(); ++i)
            context.space.index.emplace(context.space.vocabulary[i], i);
        context.labels.kind = ClassKind::Resource;
        context.labels.class_names = canonical_class_names(ClassKind::Resource);
        for (const auto& entry : doc.at("services")) {
            BinaryVector vec;
            vec.dimension = context.space.vocabulary.size();
            vec.set_bits = entry.at("bits").get<std::vector<std::size_t>>();
            const std::string id = entry.at("id").get<std::string>();
            context.fleet.push_back({id, std::move(vec)});
            context.labels.service_order.push_back(id);
            context.labels.binary.push_back(entry.at("binary").get<std::vector<std::uint8_t>>());
            context.labels.normalized.push_back(entry.at("normalized").get<std::vector<double>>());
        }
        context.labels.rebuild_index();
    } catch (const json::exception& err) {
        throw ParseError("context " + path.string() + ": " + err.what());
    }
    return context;
}

int cmd_recommend(const GlobalArgs& global, const std::string& service_path,
                  const std::string& models_dir) {
    ManifestScope manifest("recommend", global);
    manifest.config("service", service_path);
    manifest.config("models", models_dir);

    const ServiceRecord service = load_service_descriptor(service_path);
    const std::filesystem::path models(models_dir);
    if (!std::filesystem::is_directory(models))
        throw ModelNotFound("model directory not found: " + models_dir);
    const RecommendContext context = load_context(models / "context.json");

    std::vector<Checkpoint> checkpoints;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(models))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        const std::string name = file.filename().string();
        if (name == "context.json" || name == "manifest.json" || name == "train_report.csv") continue;
        if (!parse_resource_class(file.stem().string())) continue;  // not a class checkpoint
        checkpoints.push_back(load_checkpoint(file));
    }
    if (checkpoints.empty())
        throw ModelNotFound("no class checkpoints in directory: " + models_dir);
    std::sort(checkpoints.begin(), checkpoints.end(), [](const Checkpoint& a, const Checkpoint& b) {
        return static_cast<int>(a.cls) < static_cast<int>(b.cls);
    });

    std::vector<EncodedService> fleet = context.fleet;
    fleet.push_back({service.service_id, encode_service(service, context.space)});

    ordered_json doc;
    doc["service_id"] = service.service_id;
    ordered_json recommendations = ordered_json::array();
    for (const Checkpoint& checkpoint : checkpoints) {
        const SimilarityList neighbors =
            top_n_similar(service.service_id, fleet,
                          static_cast<std::size_t>(checkpoint.net.config.input_dim), context.space.kind);
        const std::vector<double> input = build_input_features(
            checkpoint.cls, neighbors, context.labels, checkpoint.net.config.input_dim);
        const double probability = predict_proba(checkpoint.net, input);
        ordered_json entry;
        entry["resource_class"] = to_string(checkpoint.cls);
        entry["probability"] = probability;
        entry["threshold"] = checkpoint.threshold;
        entry["recommended"] = decide(probability, checkpoint.threshold);
        ordered_json neighbors_json = ordered_json::array();
        for (const Neighbor& neighbor : neighbors.neighbors)
            neighbors_json.push_back({{"service_id", neighbor.service_id},
                                      {"similarity", neighbor.similarity}});
        entry["neighbors"] = std::move(neighbors_json);
        entry["decoded_prototypes"] = decode_prototypes(checkpoint.net);
        recommendations.push_back(std::move(entry));
    }
    doc["recommendations"] = std::move(recommendations);
    write_text_file(manifest.dir() / "recommendation.json", doc.dump(2) + "\n");
    manifest.wrote("recommendation.json");
    manifest.finish();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"monitor-class recommendation toolkit"};
    app.require_subcommand(1);

    GlobalArgs global;
    app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
    app.add_option("--jobs", global.jobs, "worker threads for per-class work")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", global.out_dir, "output directory")->capture_default_str();

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic fleet");
    synth_cmd->add_option("--preset", synth_args.preset, "desk | paper-scale")->capture_default_str();

    std::string data_path;
    auto* analyze_cmd = app.add_subcommand("analyze", "distributions, phi matrix, chi-squared tests");
    analyze_cmd->add_option("--data", data_path, "dataset JSONL")->required();

    BaselineArgs baseline_args;
    auto* baseline_cmd =
        app.add_subcommand("baseline", "similarity-based collaborative-filtering experiment");
    baseline_cmd->add_option("--data", data_path, "dataset JSONL")->required();
    baseline_cmd->add_option("--features", baseline_args.features,
                             "upstream | downstream | components | both")
        ->capture_default_str();
    baseline_cmd->add_option("--topn-max", baseline_args.topn_max, "largest neighbor count")
        ->capture_default_str();
    baseline_cmd->add_option("--prevalence-floor", baseline_args.prevalence_floor,
                             "skip classes at or below this training prevalence")
        ->capture_default_str();
    baseline_cmd->add_option("--split-seed", baseline_args.split_seed, "80:20 split seed")
        ->capture_default_str();

    AblateArgs ablate_args;
    auto* ablate_cmd = app.add_subcommand("ablate-svd", "SVD feature-ablation experiment");
    ablate_cmd->add_option("--data", data_path, "dataset JSONL")->required();
    ablate_cmd->add_option("--scenario", ablate_args.scenario,
                           "all | upstream-only | components-only | both")
        ->capture_default_str();
    ablate_cmd->add_option("--rank", ablate_args.rank, "factorization rank")->capture_default_str();
    ablate_cmd->add_option("--prevalence-floor", ablate_args.prevalence_floor,
                           "skip classes at or below this training prevalence")
        ->capture_default_str();
    ablate_cmd->add_option("--split-seed", ablate_args.split_seed, "80:20 split seed")
        ->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train per-class prototype networks");
    train_cmd->add_option("--data", data_path, "dataset JSONL")->required();
    train_cmd->add_option("--class", train_args.classes,
                          "resource class to train (repeatable; default: all above the floor)");
    train_cmd->add_option("--features", train_args.features,
                          "upstream | downstream | components | both")
        ->capture_default_str();
    train_cmd->add_option("--config", train_args.config_path,
                          "network config file (JSON object or key = value lines)");
    train_cmd->add_option("--prevalence-floor", train_args.prevalence_floor,
                          "class selection floor when --class is omitted")
        ->capture_default_str();
    train_cmd->add_option("--split-seed", train_args.split_seed, "80:20 split seed")
        ->capture_default_str();

    std::string service_path, models_dir;
    auto* recommend_cmd =
        app.add_subcommand("recommend", "score a service descriptor against trained checkpoints");
    recommend_cmd->add_option("--service", service_path, "service descriptor JSON")->required();
    recommend_cmd->add_option("--models", models_dir, "checkpoint directory from `train`")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;  // nonzero parse outcomes are usage errors
    }

    // Split seeds follow the global seed unless given explicitly.
    if (baseline_cmd->get_option("--split-seed")->count() == 0) baseline_args.split_seed = global.seed;
    if (ablate_cmd->get_option("--split-seed")->count() == 0) ablate_args.split_seed = global.seed;
    if (train_cmd->get_option("--split-seed")->count() == 0) train_args.split_seed = global.seed;

    try {
        if (synth_cmd->parsed()) return cmd_synth(global, synth_args);
        if (analyze_cmd->parsed()) return cmd_analyze(global, data_path);
        if (baseline_cmd->parsed()) return cmd_baseline(global, data_path, baseline_args);
        if (ablate_cmd->parsed()) return cmd_ablate(global, data_path, ablate_args);
        if (train_cmd->parsed()) return cmd_train(global, data_path, train_args);
        if (recommend_cmd->parsed()) return cmd_recommend(global, service_path, models_dir);
    } catch (const Error& err) {
        const json payload = {{"error", {{"code", err.code()}, {"message", err.what()}}}};
        std::cerr << payload.dump() << '\n';
        return 1;
    } catch (const std::exception& err) {
        const json payload = {{"error", {{"code", "InternalError"}, {"message", err.what()}}}};
        std::cerr << payload.dump() << '\n';
        return 1;
    }
    return 2;
}
