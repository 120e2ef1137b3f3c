#include "pcc/experiment.hpp"

#include "pcc/bound.hpp"
#include "pcc/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <thread>

namespace pcc {

namespace {

using nlohmann::json;

enum Salt : std::uint64_t { kInit = 101, kStage1 = 201, kContinuation = 301, kStage2 = 401 };

} // namespace

ExperimentConfig default_experiment_config() {
    ExperimentConfig c;
    c.synth.num_items = 2000;
    c.synth.latent_dim = 8;
    c.synth.feature_dim = 32;
    c.synth.observation_noise = 0.8;
    c.synth.score_noise = 0.3;
    c.synth.num_pairs = 10000;

    c.encoder = EncoderShape{32, 64, 32};

    c.stage1.stage = Stage::I;
    c.stage1.learning_rate = 1e-3;
    c.stage1.batch_size = 64;
    c.stage1.epochs = 10;
    c.stage1.temperature = 0.05;

    c.continuation = c.stage1;
    c.continuation.epochs = 10;

    c.stage2.stage = Stage::II;
    c.stage2.learning_rate = 1e-3;
    c.stage2.batch_size = 200;
    c.stage2.epochs = 30;
    c.stage2.temperature.reset();
    return c;
}

std::vector<double> ExperimentReport::scores(const std::string& arm) const {
    std::vector<double> out;
    for (const ArmResult& r : rows) {
        if (r.arm == arm) {
            out.push_back(r.test_spearman_x100);
        }
    }
    return out;
}

std::vector<ArmResult> run_ceiling_seed(const ExperimentConfig& config, std::uint64_t seed) {
    SynthConfig synth = config.synth;
    synth.seed = seed;
    const SynthDataset data = synth_generate(synth);
    const FeatureStore features(data.items);

    EncoderShape shape = config.encoder;
    shape.input_dim = static_cast<Eigen::Index>(synth.feature_dim);
    const EncoderParams init = init_encoder(shape, derive_seed(seed, kInit));

    const EvalSets dev = {{"dev", data.dev}};
    const EvalSets test = {{"test", data.test}};
    const double ceiling = 100.0 * bound::max_spearman(static_cast<std::int64_t>(data.test.size()));

    const auto arm = [&](const char* name, const TrainResult& r) {
        return ArmResult{name,
                         seed,
                         evaluate(r.params, features, test).average,
                         evaluate(r.params, features, dev).average,
                         ceiling,
                         r.log.empty() ? 0.0 : r.log.back().loss,
                         static_cast<std::size_t>(r.params.step)};
    };

    StageConfig stage1 = config.stage1;
    stage1.seed = derive_seed(seed, kStage1);
    const TrainResult first = train_stage1(init, features, data.triplets, stage1);

    StageConfig cont = config.continuation;
    cont.seed = derive_seed(seed, kContinuation);
    const std::vector<Triplet> positives = to_contrastive(data.train, config.continuation_threshold);
    const TrainResult continued = train_stage1(first.params, features, positives, cont);

    StageConfig stage2 = config.stage2;
    stage2.seed = derive_seed(seed, kStage2);
    const TrainResult tuned = train_stage2(first.params, features, data.train, stage2);

    return {arm(kArmStage1, first), arm(kArmContrastive, continued), arm(kArmPearson, tuned)};
}

ExperimentReport run_ceiling_experiment(const ExperimentConfig& config) {
    unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, config.seeds.size())));

    std::vector<std::vector<ArmResult>> per_seed(config.seeds.size());
    for (std::size_t start = 0; start < config.seeds.size(); start += threads) {
        std::vector<std::future<std::vector<ArmResult>>> running;
        const std::size_t end = std::min(config.seeds.size(), start + threads);
        for (std::size_t i = start; i < end; ++i) {
            running.push_back(std::async(std::launch::async, run_ceiling_seed, std::cref(config), config.seeds[i]));
        }
        for (std::size_t i = start; i < end; ++i) {
            per_seed[i] = running[i - start].get();
        }
    }

    ExperimentReport report;
    const auto test_fraction = config.synth.test_fraction;
    report.n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(config.synth.num_pairs)));
    for (auto& rows : per_seed) {
        for (ArmResult& r : rows) {
            report.ceiling_x100 = r.ceiling_x100;
            report.rows.push_back(std::move(r));
        }
    }
    return report;
}

void write_experiment_csv(std::ostream& out, const ExperimentReport& report) {
    out << "arm,test_spearman_x100,ceiling_x100,seed\n";
    char buf[128];
    for (const ArmResult& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%llu\n", r.arm.c_str(), r.test_spearman_x100, r.ceiling_x100,
                      static_cast<unsigned long long>(r.seed));
        out << buf;
    }
}

std::string experiment_report_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const ArmResult& r : report.rows) {
        rows.push_back({{"arm", r.arm},
                        {"seed", r.seed},
                        {"test_spearman_x100", r.test_spearman_x100},
                        {"dev_spearman_x100", r.dev_spearman_x100},
                        {"ceiling_x100", r.ceiling_x100},
                        {"final_loss", r.final_loss},
                        {"steps", r.steps}});
    }
    json summary = json::object();
    for (const char* arm : {kArmStage1, kArmContrastive, kArmPearson}) {
        auto s = report.scores(arm);
        if (s.empty()) {
            continue;
        }
        std::sort(s.begin(), s.end());
        const double median = s.size() % 2 == 1 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
        summary[arm] = {{"median_test_spearman_x100", median}, {"min", s.front()}, {"max", s.back()}};
    }
    json j = {{"rows", rows}, {"summary", summary}, {"n_test", report.n_test}, {"ceiling_x100", report.ceiling_x100}};
    return j.dump(2);
}

} // namespace pcc
