#include "cli.hpp"

#include "pcc/bound.hpp"
#include "pcc/checkpoint.hpp"
#include "pcc/config.hpp"
#include "pcc/data.hpp"
#include "pcc/errors.hpp"
#include "pcc/experiment.hpp"
#include "pcc/pipeline.hpp"
#include "pcc/synth.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

namespace pcc::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::int64_t parse_int(std::string_view text, const char* what) {
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw UsageError(std::string(what) + ": '" + std::string(text) + "' is not an integer");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto pos = text.find(sep);
        out.push_back(text.substr(0, pos));
        if (pos == std::string_view::npos) break;
        text.remove_prefix(pos + 1);
    }
    return out;
}

// "a:b" every integer, "a:b:step" arithmetic, "a:b:log" ten points per decade.
std::vector<std::int64_t> parse_n_range(std::string_view spec) {
    const auto parts = split(spec, ':');
    if (parts.size() < 2 || parts.size() > 3) {
        throw UsageError("--n-range expects start:stop[:log|:step]");
    }
    const std::int64_t start = parse_int(parts[0], "--n-range start");
    const std::int64_t stop = parse_int(parts[1], "--n-range stop");
    if (start < 2 || stop < start) {
        throw UsageError("--n-range needs 2 <= start <= stop");
    }
    std::vector<std::int64_t> out;
    if (parts.size() == 3 && parts[2] == "log") {
        const double decades = std::log10(static_cast<double>(stop) / static_cast<double>(start));
        const int points = static_cast<int>(std::ceil(decades * 10.0));
        for (int j = 0; j <= points; ++j) {
            const auto n = static_cast<std::int64_t>(
                std::llround(static_cast<double>(start) * std::pow(10.0, static_cast<double>(j) / 10.0)));
            const std::int64_t clamped = std::min(n, stop);
            if (out.empty() || clamped > out.back()) out.push_back(clamped);
        }
        if (out.back() != stop) out.push_back(stop);
        return out;
    }
    const std::int64_t step = parts.size() == 3 ? parse_int(parts[2], "--n-range step") : 1;
    if (step < 1) {
        throw UsageError("--n-range step must be positive");
    }
    if ((stop - start) / step > 10'000'000) {
        throw UsageError("--n-range would produce more than ten million rows");
    }
    for (std::int64_t n = start; n <= stop; n += step) out.push_back(n);
    return out;
}

fs::path output_dir(const std::string& flag, const char* subcommand) {
    if (!flag.empty()) return flag;
    const char* root = std::getenv(kOutputRootEnv);
    return fs::path(root != nullptr && *root != '\0' ? root : "pcc_out") / subcommand;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
    out << text;
}

// Config file (optional) overridden by --set key=value assignments.
ConfigMap gather_config(const std::string& file, const std::vector<std::string>& assignments) {
    ConfigMap config = file.empty() ? ConfigMap{} : ConfigMap::load(file);
    for (const std::string& a : assignments) config.set_assignment(a);
    return config;
}

FeatureStore features_for(const SynthDataset& data) { return FeatureStore(data.items); }

struct Options {
    // bound
    std::string n_list;
    std::string n_range;
    // filter
    std::string train;
    std::vector<std::string> tests;
    std::string format;
    std::string kept_out;
    std::string removed_out;
    // shared
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::string data;
    std::string checkpoint;
    std::string eval_sets = "dev,test";
    std::string timestamp;
    std::int64_t seed = -1;
    std::string seeds;
    unsigned threads = 0;
};

int cmd_bound(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.n_list.empty() == o.n_range.empty()) {
        throw UsageError("bound: give exactly one of --n-list or --n-range");
    }
    std::vector<std::int64_t> ns;
    if (!o.n_list.empty()) {
        for (auto part : split(o.n_list, ',')) ns.push_back(parse_int(part, "--n-list"));
    } else {
        ns = parse_n_range(o.n_range);
    }
    for (std::int64_t n : ns) {
        if (n < 2) throw UsageError("bound: every n must be >= 2, got " + std::to_string(n));
    }
    const auto rows = bound::bound_sweep(ns);
    if (o.out.empty()) {
        bound::write_sweep_csv(out, rows);
    } else {
        std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
        if (!file) throw InvalidInput("cannot open '" + o.out + "' for writing");
        bound::write_sweep_csv(file, rows);
        err << "wrote " << rows.size() << " rows to " << o.out << '\n';
    }
    err << "binary-classifier Spearman ceiling: max rho = (7n^2 - 4) / (8(n^2 - 1)) -> 7/8 = 0.875 as n grows\n";
    return kSuccess;
}

int cmd_filter(const Options& o, std::ostream& out, std::ostream& err) {
    const auto fmt_for = [&](const std::string& path) {
        return o.format.empty() ? pair_format_for(path) : parse_pair_format(o.format);
    };
    const auto train = load_pairs(o.train, fmt_for(o.train));
    std::vector<std::vector<ScoredPair>> tests;
    for (const std::string& t : o.tests) tests.push_back(load_pairs(t, fmt_for(t)));

    const FilterResult result = filter_overlap(train, tests);
    const PairFormat out_format = fmt_for(o.train);
    if (!o.kept_out.empty()) save_pairs(o.kept_out, result.kept, out_format);
    if (!o.removed_out.empty()) save_pairs(o.removed_out, result.removed, out_format);

    out << o.train << ": " << train.size() << " → " << result.kept.size() << " (removed "
        << result.removed.size() << ")\n";
    err << "compared against " << tests.size() << " test set(s)\n";
    return kSuccess;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
    ConfigMap config = gather_config(o.config, o.sets);
    if (o.seed >= 0) config.set("synth.seed", std::to_string(o.seed));
    const ExperimentConfig effective = experiment_config_from(config);

    const fs::path dir = output_dir(o.out, "synth");
    err << "generating " << effective.synth.num_pairs << " pairs over " << effective.synth.num_items
        << " items (seed " << effective.synth.seed << ")\n";
    const SynthDataset data = synth_generate(effective.synth);
    save_synth_dataset(dir, data);
    write_text(dir / "effective_config.json", to_config_map(effective).to_json() + "\n");
    out << "train " << data.train.size() << ", dev " << data.dev.size() << ", test " << data.test.size()
        << ", triplets " << data.triplets.size() << " -> " << dir.string() << '\n';
    return kSuccess;
}

void write_training_outputs(const fs::path& dir, const TrainResult& result, const ConfigMap& effective) {
    fs::create_directories(dir);
    write_checkpoint_file(dir / "checkpoint.bin", result.params);
    std::ostringstream log;
    write_train_log(log, result.log);
    write_text(dir / "train_log.jsonl", log.str());
    std::ostringstream timing;
    write_train_timing(timing, result.log);
    write_text(dir / "train_timing.jsonl", timing.str());
    write_text(dir / "effective_config.json", effective.to_json() + "\n");
}

int cmd_train1(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.data.empty()) throw UsageError("train1: --data is required");
    ConfigMap config = gather_config(o.config, o.sets);
    if (o.seed >= 0) config.set("stage1.seed", std::to_string(o.seed));
    const ExperimentConfig effective = experiment_config_from(config);

    const SynthDataset data = load_synth_dataset(o.data);
    const FeatureStore features = features_for(data);
    EncoderShape shape = effective.encoder;
    shape.input_dim = features.dim();
    const EncoderParams init = init_encoder(shape, effective.stage1.seed);

    err << "stage I: " << data.triplets.size() << " triplets, " << effective.stage1.epochs << " epoch(s)\n";
    const TrainResult result = train_stage1(init, features, data.triplets, effective.stage1);
    const fs::path dir = output_dir(o.out, "train1");
    write_training_outputs(dir, result, to_config_map(effective));
    out << "stage I done: " << result.log.size() << " steps, final loss "
        << (result.log.empty() ? 0.0 : result.log.back().loss) << " -> " << (dir / "checkpoint.bin").string() << '\n';
    return kSuccess;
}

int cmd_train2(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.data.empty()) throw UsageError("train2: --data is required");
    if (o.checkpoint.empty()) throw UsageError("train2: --from-checkpoint is required");
    if (!fs::exists(o.checkpoint)) throw UsageError("train2: checkpoint '" + o.checkpoint + "' does not exist");
    ConfigMap config = gather_config(o.config, o.sets);
    if (o.seed >= 0) config.set("stage2.seed", std::to_string(o.seed));
    const ExperimentConfig effective = experiment_config_from(config);

    const SynthDataset data = load_synth_dataset(o.data);
    const FeatureStore features = features_for(data);
    const EncoderParams start = read_checkpoint_file(o.checkpoint);

    err << "stage II: " << data.train.size() << " pairs, " << effective.stage2.epochs << " epoch(s)\n";
    const TrainResult result = train_stage2(start, features, data.train, effective.stage2);
    const fs::path dir = output_dir(o.out, "train2");
    write_training_outputs(dir, result, to_config_map(effective));
    out << "stage II done: " << result.log.size() << " steps, final loss "
        << (result.log.empty() ? 0.0 : result.log.back().loss) << " -> " << (dir / "checkpoint.bin").string() << '\n';
    return kSuccess;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.checkpoint.empty()) throw UsageError("eval: --checkpoint is required");
    if (!fs::exists(o.checkpoint)) throw UsageError("eval: checkpoint '" + o.checkpoint + "' does not exist");
    if (o.data.empty()) throw UsageError("eval: --data is required");

    const SynthDataset data = load_synth_dataset(o.data);
    const FeatureStore features = features_for(data);
    const EncoderParams params = read_checkpoint_file(o.checkpoint);

    EvalSets sets;
    for (auto name : split(o.eval_sets, ',')) {
        if (name == "train") sets.emplace_back("train", data.train);
        else if (name == "dev") sets.emplace_back("dev", data.dev);
        else if (name == "test") sets.emplace_back("test", data.test);
        else throw UsageError("eval: unknown set '" + std::string(name) + "' (train, dev, test)");
    }
    EvalReport report = evaluate(params, features, sets, checkpoint_id(params));
    report.timestamp = o.timestamp.empty() ? utc_timestamp() : o.timestamp;

    const fs::path dir = output_dir(o.out, "eval");
    fs::create_directories(dir);
    write_text(dir / "eval_report.json", eval_report_json(report) + "\n");
    for (const auto& [name, score] : report.per_dataset) {
        out << name << ": " << score << '\n';
    }
    out << "average: " << report.average << '\n';
    err << "report -> " << (dir / "eval_report.json").string() << '\n';
    return kSuccess;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
    ConfigMap config = gather_config(o.config, o.sets);
    if (!o.seeds.empty()) config.set("experiment.seeds", o.seeds);
    if (o.threads != 0) config.set("experiment.threads", std::to_string(o.threads));
    const ExperimentConfig effective = experiment_config_from(config);

    err << "running " << effective.seeds.size() << " seed(s), three arms each\n";
    const ExperimentReport report = run_ceiling_experiment(effective);

    const fs::path dir = output_dir(o.out, "experiment");
    fs::create_directories(dir);
    std::ostringstream csv;
    write_experiment_csv(csv, report);
    write_text(dir / "experiment.csv", csv.str());
    write_text(dir / "experiment.json", experiment_report_json(report) + "\n");
    ConfigMap echoed = to_config_map(effective);
    echoed.set("experiment.threads", "0");  // scheduling does not affect results
    write_text(dir / "effective_config.json", echoed.to_json() + "\n");
    out << csv.str();
    return kSuccess;
}

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spearman-ceiling analysis and two-stage (contrastive + Pearson) fine-tuning toolkit", "pcc"};
    app.require_subcommand(1);
    Options o;

    auto* bound = app.add_subcommand("bound", "Binary-classifier Spearman ceiling sweep (CSV)");
    bound->add_option("--n-list", o.n_list, "Comma-separated n values");
    bound->add_option("--n-range", o.n_range, "start:stop[:log|:step]");
    bound->add_option("--out", o.out, "CSV path (default: stdout)");

    auto* filter = app.add_subcommand("filter", "Remove train pairs that also occur in test sets, in either order");
    filter->add_option("--train", o.train, "Train pairs (TSV or JSONL)")->required();
    filter->add_option("--test", o.tests, "Test set(s)")->required()->expected(1, -1);
    filter->add_option("--format", o.format, "tsv or jsonl (default: by extension)");
    filter->add_option("--out", o.kept_out, "Where to write kept pairs");
    filter->add_option("--removed-out", o.removed_out, "Where to write removed pairs");

    const auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Config file (JSON or key = value)");
        sub->add_option("--set", o.sets, "key=value override, repeatable");
        sub->add_option("--out", o.out, std::string("Output directory (default: $") + kOutputRootEnv + "/<cmd>)");
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic fine-grained similarity dataset");
    add_config(synth);
    synth->add_option("--seed", o.seed, "Dataset seed");

    auto* train1 = app.add_subcommand("train1", "Stage I: contrastive training on triplets");
    add_config(train1);
    train1->add_option("--data", o.data, "Dataset directory written by `synth`");
    train1->add_option("--seed", o.seed, "Stage seed (also the encoder init seed)");

    auto* train2 = app.add_subcommand("train2", "Stage II: Pearson fine-tuning from a stage-I checkpoint");
    add_config(train2);
    train2->add_option("--data", o.data, "Dataset directory written by `synth`");
    train2->add_option("--from-checkpoint", o.checkpoint, "Stage-I checkpoint");
    train2->add_option("--seed", o.seed, "Stage seed");

    auto* eval = app.add_subcommand("eval", "Spearman x 100 of a checkpoint on dataset splits");
    eval->add_option("--checkpoint", o.checkpoint, "Checkpoint to evaluate");
    eval->add_option("--data", o.data, "Dataset directory written by `synth`");
    eval->add_option("--sets", o.eval_sets, "Comma-separated splits (default dev,test)");
    eval->add_option("--timestamp", o.timestamp, "Report timestamp (default: now, UTC)");
    eval->add_option("--out", o.out, "Output directory");

    auto* experiment = app.add_subcommand("experiment", "Stage I vs. contrastive continuation vs. Pearson stage II");
    add_config(experiment);
    experiment->add_option("--seeds", o.seeds, "Comma-separated seeds");
    experiment->add_option("--threads", o.threads, "Concurrent seeds (0 = all cores)");

    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    const std::vector<std::pair<CLI::App*, std::function<int(const Options&, std::ostream&, std::ostream&)>>>
        handlers = {{bound, cmd_bound},   {filter, cmd_filter}, {synth, cmd_synth},           {train1, cmd_train1},
                    {train2, cmd_train2}, {eval, cmd_eval},     {experiment, cmd_experiment}};
    for (const auto& [sub, handler] : handlers) {
        if (!sub->parsed()) continue;
        try {
            return handler(o, out, err);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n\n" << sub->help();
            return kUsageError;
        } catch (const TrainingDiverged& e) {
            err << "numeric failure: " << e.what() << '\n';
            return kNumericFailure;
        } catch (const DegenerateInput& e) {
            err << "numeric failure: " << e.what() << '\n';
            return kNumericFailure;
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kUsageError;
        } catch (const std::filesystem::filesystem_error& e) {
            err << "error: " << e.what() << '\n';
            return kUsageError;
        }
    }
    return kUsageError;
}

} // namespace pcc::cli
