// End-to-end checks of the monreco binary: exit codes, report files, and
// byte-identical reruns. The binary path arrives via MONRECO_BIN.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void expect(bool condition, const std::string& message) {
    if (!condition) {
        ++g_failures;
        std::cerr << "FAILED: " << message << '\n';
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run(const std::string& binary, const std::string& args, const fs::path& scratch) {
    const fs::path out_file = scratch / "stdout.txt";
    const fs::path err_file = scratch / "stderr.txt";
    const std::string command =
        binary + " " + args + " >" + out_file.string() + " 2>" + err_file.string();
    const int status = std::system(command.c_str());
    RunResult result;
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    result.out = read_file(out_file);
    result.err = read_file(err_file);
    return result;
}

} // namespace

int main() {
    const char* binary_env = std::getenv("MONRECO_BIN");
    if (!binary_env) {
        std::cerr << "MONRECO_BIN not set\n";
        return 1;
    }
    const std::string binary(binary_env);

    char scratch_template[] = "/tmp/monreco_cli_XXXXXX";
    const char* scratch_dir = mkdtemp(scratch_template);
    if (!scratch_dir) {
        std::cerr << "cannot create scratch directory\n";
        return 1;
    }
    const fs::path scratch(scratch_dir);

    // --- usage errors ------------------------------------------------------
    expect(run(binary, "frobnicate", scratch).exit_code == 2, "unknown subcommand exits 2");
    expect(run(binary, "analyze", scratch).exit_code == 2, "missing required flag exits 2");
    expect(run(binary, "--help", scratch).exit_code == 0, "--help exits 0");

    // --- synth: determinism and outputs ------------------------------------
    const fs::path synth_a = scratch / "synth_a";
    const fs::path synth_b = scratch / "synth_b";
    RunResult result = run(binary,
                           "--seed 7 --out " + synth_a.string() + " synth --preset desk", scratch);
    expect(result.exit_code == 0, "synth exits 0: " + result.err);
    expect(fs::exists(synth_a / "fleet.jsonl"), "synth writes fleet.jsonl");
    expect(fs::exists(synth_a / "ground_truth.json"), "synth writes ground_truth.json");
    expect(fs::exists(synth_a / "manifest.json"), "synth writes manifest.json");
    run(binary, "--seed 7 --out " + synth_b.string() + " synth --preset desk", scratch);
    expect(read_file(synth_a / "fleet.jsonl") == read_file(synth_b / "fleet.jsonl"),
           "same-seed synth reruns are byte-identical");
    const std::string fleet = (synth_a / "fleet.jsonl").string();

    {
        const auto truth = nlohmann::json::parse(read_file(synth_a / "ground_truth.json"));
        expect(truth["rules"].size() == 3, "ground truth lists the planted rules");
        expect(truth["seed"].get<std::uint64_t>() == 7, "ground truth records the seed");
    }

    // --- analyze: reports and byte-identical reruns ------------------------
    const fs::path analyze_a = scratch / "analyze_a";
    const fs::path analyze_b = scratch / "analyze_b";
    result = run(binary, "--out " + analyze_a.string() + " analyze --data " + fleet, scratch);
    expect(result.exit_code == 0, "analyze exits 0: " + result.err);
    for (const char* name : {"distributions.csv", "slo_within_resource.csv", "phi_matrix.csv",
                             "chi_squared.csv", "analyze.json", "manifest.json"})
        expect(fs::exists(analyze_a / name), std::string("analyze writes ") + name);
    run(binary, "--out " + analyze_b.string() + " analyze --data " + fleet, scratch);
    for (const char* name :
         {"distributions.csv", "slo_within_resource.csv", "phi_matrix.csv", "chi_squared.csv",
          "analyze.json"})
        expect(read_file(analyze_a / name) == read_file(analyze_b / name),
               std::string("analyze rerun reproduces ") + name);
    {
        const std::string distributions = read_file(analyze_a / "distributions.csv");
        expect(distributions.rfind("class_kind,level,class,count,fraction\n", 0) == 0,
               "distributions.csv header");
        const auto manifest = nlohmann::json::parse(read_file(analyze_a / "manifest.json"));
        expect(manifest["subcommand"] == "analyze", "manifest names the subcommand");
        expect(manifest.contains("dataset") && manifest["dataset"].contains("fnv1a64"),
               "manifest carries the dataset content hash");
    }

    // --- baseline -----------------------------------------------------------
    const fs::path baseline_dir = scratch / "baseline";
    result = run(binary,
                 "--out " + baseline_dir.string() + " baseline --data " + fleet +
                     " --features components --topn-max 3 --split-seed 7",
                 scratch);
    expect(result.exit_code == 0, "baseline exits 0: " + result.err);
    {
        const std::string csv = read_file(baseline_dir / "baseline.csv");
        expect(csv.rfind("feature_kind,resource_class,top1_auc,top1_threshold,top1_precision,"
                         "top1_recall,top2_auc",
                         0) == 0,
               "baseline.csv mirrors the class-by-topn table layout");
        expect(csv.find("components,cache-memory,") != std::string::npos,
               "baseline covers the planted class");
    }

    // --- ablate-svd ----------------------------------------------------------
    const fs::path ablate_dir = scratch / "ablate";
    result = run(binary,
                 "--out " + ablate_dir.string() + " ablate-svd --data " + fleet +
                     " --rank 6 --split-seed 7",
                 scratch);
    expect(result.exit_code == 0, "ablate-svd exits 0: " + result.err);
    {
        const std::string csv = read_file(ablate_dir / "ablation.csv");
        expect(csv.find("cache-memory,") != std::string::npos, "ablation.csv covers cache-memory");
        expect(csv.find("0.830000") != std::string::npos,
               "ablation.csv carries the reference annotation for cache-memory");
    }

    // --- train ---------------------------------------------------------------
    const fs::path config_file = scratch / "net.cfg";
    {
        std::ofstream cfg(config_file);
        cfg << "# small run for the cli test\n"
            << "epochs = 120\n"
            << "learning_rate = 0.05\n"
            << "encoder_hidden = 8\n";
    }
    const fs::path train_dir = scratch / "train";
    result = run(binary,
                 "--seed 7 --out " + train_dir.string() + " train --data " + fleet +
                     " --class cpu --features components --split-seed 7 --config " +
                     config_file.string(),
                 scratch);
    expect(result.exit_code == 0, "train exits 0: " + result.err);
    expect(fs::exists(train_dir / "cpu.json"), "train writes the class checkpoint");
    expect(fs::exists(train_dir / "context.json"), "train writes the shared context");
    expect(fs::exists(train_dir / "train_report.csv"), "train writes the report");
    expect(fs::exists(train_dir / "density_cpu_positive.txt") &&
               fs::exists(train_dir / "density_cpu_negative.txt"),
           "train writes the two-column density histograms");
    {
        const std::string density = read_file(train_dir / "density_cpu_positive.txt");
        expect(density.find("# bin_center density") != std::string::npos,
               "density file announces its columns");
        const auto checkpoint = nlohmann::json::parse(read_file(train_dir / "cpu.json"));
        expect(checkpoint["threshold"].get<double>() == 0.20,
               "cpu checkpoint ships the published threshold");
        expect(checkpoint["config"]["epochs"].get<int>() == 120, "config file epochs honored");
    }

    // --- train rerun and --jobs determinism ------------------------------------
    const fs::path train_b = scratch / "train_b";
    run(binary,
        "--seed 7 --out " + train_b.string() + " train --data " + fleet +
            " --class cpu --features components --split-seed 7 --config " + config_file.string(),
        scratch);
    expect(read_file(train_dir / "cpu.json") == read_file(train_b / "cpu.json"),
           "train rerun reproduces the checkpoint byte for byte");
    const fs::path train_jobs = scratch / "train_jobs";
    result = run(binary,
                 "--seed 7 --jobs 3 --out " + train_jobs.string() + " train --data " + fleet +
                     " --class cpu --class cache-memory --features components --split-seed 7"
                     " --config " + config_file.string(),
                 scratch);
    expect(result.exit_code == 0, "parallel train exits 0: " + result.err);
    expect(read_file(train_dir / "cpu.json") == read_file(train_jobs / "cpu.json"),
           "--jobs does not change per-class results");

    // --- recommend -------------------------------------------------------------
    const fs::path descriptor = scratch / "new_service.json";
    {
        std::ofstream out(descriptor);
        out << R"({"service_id": "new-svc", "upstream": ["node-001"], "downstream": [],)"
            << R"( "components": ["vm-pool", "comp-030", "comp-031"]})" << "\n";
    }
    const fs::path recommend_dir = scratch / "recommend";
    result = run(binary,
                 "--out " + recommend_dir.string() + " recommend --service " + descriptor.string() +
                     " --models " + train_dir.string(),
                 scratch);
    expect(result.exit_code == 0, "recommend exits 0: " + result.err);
    {
        const auto doc = nlohmann::json::parse(read_file(recommend_dir / "recommendation.json"));
        expect(doc["service_id"] == "new-svc", "recommendation echoes the service id");
        expect(doc["recommendations"].size() == 1, "one checkpoint yields one block");
        const auto& block = doc["recommendations"][0];
        expect(block["resource_class"] == "cpu", "block names its class");
        expect(block["threshold"].get<double>() == 0.20, "block applies the shipped threshold");
        const double probability = block["probability"].get<double>();
        expect(block["recommended"].get<bool>() == (probability >= 0.20),
               "decision equals probability >= threshold");
        expect(block["decoded_prototypes"].size() == 4, "explanation carries decoded prototypes");
    }

    // --- module errors surface as exit 1 with machine-readable codes -----------
    result = run(binary,
                 "--out " + (scratch / "err1").string() + " recommend --service " +
                     descriptor.string() + " --models " + (scratch / "missing").string(),
                 scratch);
    expect(result.exit_code == 1, "missing checkpoint directory exits 1");
    expect(result.err.find("ModelNotFound") != std::string::npos,
           "stderr carries the ModelNotFound code");

    result = run(binary, "--out " + (scratch / "err2").string() + " analyze --data /no/such/file",
                 scratch);
    expect(result.exit_code == 1, "missing dataset exits 1");
    expect(result.err.find("IoError") != std::string::npos, "stderr carries the IoError code");

    const fs::path bad_dataset = scratch / "bad.jsonl";
    {
        std::ofstream out(bad_dataset);
        out << "{\"schema_version\": 1}\n"
            << R"({"service_id": "a", "monitors": [{"monitor_id": "m", "functionality_group": "f",)"
            << R"( "metric": "m", "alerting_logic": "x", "resource_class": "gpu", "slo_class": "capacity"}]})"
            << "\n";
    }
    result = run(binary,
                 "--out " + (scratch / "err3").string() + " analyze --data " + bad_dataset.string(),
                 scratch);
    expect(result.exit_code == 1, "unknown class exits 1");
    expect(result.err.find("ParseError") != std::string::npos &&
               result.err.find("gpu") != std::string::npos,
           "stderr names the unknown class");

    std::error_code cleanup;
    fs::remove_all(scratch, cleanup);

    if (g_failures == 0) {
        std::cout << "cli tests passed\n";
        return 0;
    }
    std::cerr << g_failures << " cli check(s) failed\n";
    return 1;
}
