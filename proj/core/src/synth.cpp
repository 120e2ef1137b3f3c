#include "pcc/synth.hpp"

#include "pcc/errors.hpp"
#include "pcc/rng.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

namespace pcc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using nlohmann::json;

constexpr double kScoreMax = 5.0;

// Stream salts, one per independent use of randomness.
enum Salt : std::uint64_t { kLatents = 1, kMixing, kObservation, kPairs, kScores, kSplit, kNegatives, kScale };

void validate(const SynthConfig& c) {
    if (c.num_items < 2 || c.latent_dim < 2 || c.feature_dim < 2) {
        throw InvalidInput("synth: num_items, latent_dim and feature_dim must be >= 2");
    }
    if (c.num_pairs < 2) {
        throw InvalidInput("synth: num_pairs must be >= 2");
    }
    const double distinct = 0.5 * static_cast<double>(c.num_items) * static_cast<double>(c.num_items - 1);
    if (static_cast<double>(c.num_pairs) > 0.5 * distinct) {
        throw InvalidInput("synth: num_pairs exceeds half the number of distinct item pairs");
    }
    if (!(c.observation_noise >= 0.0) || !(c.score_noise >= 0.0)) {
        throw InvalidInput("synth: noise levels must be non-negative");
    }
    if (!(c.dev_fraction >= 0.0) || !(c.test_fraction >= 0.0) || c.dev_fraction + c.test_fraction >= 1.0) {
        throw InvalidInput("synth: dev_fraction + test_fraction must lie in [0, 1)");
    }
    if (!(c.positive_threshold >= 0.0 && c.positive_threshold <= kScoreMax) ||
        !(c.negative_threshold >= 0.0 && c.negative_threshold <= kScoreMax)) {
        throw InvalidInput("synth: thresholds must lie in [0, 5]");
    }
    if (!(c.secondary_scale_fraction >= 0.0 && c.secondary_scale_fraction <= 1.0) ||
        !(c.secondary_scale_gamma > 0.0)) {
        throw InvalidInput("synth: secondary scale fraction must lie in [0, 1] and gamma be positive");
    }
}

std::string item_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "item_%06zu", i);
    return buf;
}

double clean_score(double cos) { return 0.5 * kScoreMax * (cos + 1.0); }

// Clean score plus Gaussian noise, resampled until it lands on [0, 5].
double noisy_score(double cos, double sigma, Rng& rng) {
    const double clean = clean_score(cos);
    if (sigma == 0.0) {
        return std::clamp(clean, 0.0, kScoreMax);
    }
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double s = clean + sigma * rng.normal();
        if (s >= 0.0 && s <= kScoreMax) {
            return s;
        }
    }
    return std::clamp(clean, 0.0, kScoreMax);
}

std::uint32_t file_crc(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

json config_to_json(const SynthConfig& c) {
    return json{{"num_items", c.num_items},
                {"latent_dim", c.latent_dim},
                {"feature_dim", c.feature_dim},
                {"observation_noise", c.observation_noise},
                {"score_noise", c.score_noise},
                {"num_pairs", c.num_pairs},
                {"seed", c.seed},
                {"dev_fraction", c.dev_fraction},
                {"test_fraction", c.test_fraction},
                {"positive_threshold", c.positive_threshold},
                {"negative_threshold", c.negative_threshold},
                {"secondary_scale_fraction", c.secondary_scale_fraction},
                {"secondary_scale_gamma", c.secondary_scale_gamma}};
}

SynthConfig config_from_json(const json& j) {
    SynthConfig c;
    c.num_items = j.at("num_items").get<std::size_t>();
    c.latent_dim = j.at("latent_dim").get<std::size_t>();
    c.feature_dim = j.at("feature_dim").get<std::size_t>();
    c.observation_noise = j.at("observation_noise").get<double>();
    c.score_noise = j.at("score_noise").get<double>();
    c.num_pairs = j.at("num_pairs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.dev_fraction = j.at("dev_fraction").get<double>();
    c.test_fraction = j.at("test_fraction").get<double>();
    c.positive_threshold = j.at("positive_threshold").get<double>();
    c.negative_threshold = j.at("negative_threshold").get<double>();
    c.secondary_scale_fraction = j.value("secondary_scale_fraction", 0.0);
    c.secondary_scale_gamma = j.value("secondary_scale_gamma", 0.7);
    return c;
}

} // namespace

SynthDataset synth_generate(const SynthConfig& config) {
    validate(config);
    const auto n_items = static_cast<Index>(config.num_items);
    const auto latent = static_cast<Index>(config.latent_dim);
    const auto features = static_cast<Index>(config.feature_dim);

    SynthDataset data;
    data.config = config;

    Rng latent_rng(derive_seed(config.seed, kLatents));
    data.latents.resize(n_items, latent);
    for (Index i = 0; i < n_items; ++i) {
        for (Index k = 0; k < latent; ++k) {
            data.latents(i, k) = latent_rng.normal();
        }
    }

    Rng mixing_rng(derive_seed(config.seed, kMixing));
    data.mixing.resize(features, latent);
    const double mix_scale = 1.0 / std::sqrt(static_cast<double>(latent));
    for (Index j = 0; j < latent; ++j) {
        for (Index i = 0; i < features; ++i) {
            data.mixing(i, j) = mix_scale * mixing_rng.normal();
        }
    }

    Rng obs_rng(derive_seed(config.seed, kObservation));
    const MatrixXd clean_features = data.latents * data.mixing.transpose();
    data.items.reserve(config.num_items);
    for (Index i = 0; i < n_items; ++i) {
        ItemFeatures item{item_id(static_cast<std::size_t>(i)), std::vector<double>(config.feature_dim)};
        for (Index f = 0; f < features; ++f) {
            double v = clean_features(i, f);
            if (config.observation_noise > 0.0) {
                v += config.observation_noise * obs_rng.normal();
            }
            item.features[static_cast<std::size_t>(f)] = v;
        }
        data.items.push_back(std::move(item));
    }

    MatrixXd unit = data.latents;
    for (Index i = 0; i < n_items; ++i) {
        unit.row(i).normalize();
    }
    const MatrixXd cos = unit * unit.transpose();

    // Pair selection: a random anchor and a random target cosine; the partner
    // is the unused item whose cosine with the anchor is closest to the target.
    Rng pair_rng(derive_seed(config.seed, kPairs));
    Rng score_rng(derive_seed(config.seed, kScores));
    Rng scale_rng(derive_seed(config.seed, kScale));
    std::set<std::pair<Index, Index>> used;
    std::vector<ScoredPair> pairs;
    pairs.reserve(config.num_pairs);
    const std::size_t max_attempts = 50 * config.num_pairs + 1000;
    std::size_t attempts = 0;
    while (pairs.size() < config.num_pairs) {
        if (++attempts > max_attempts) {
            throw GenerationError("synth: could only place " + std::to_string(pairs.size()) + " of " +
                                  std::to_string(config.num_pairs) + " distinct pairs after " +
                                  std::to_string(max_attempts) + " attempts");
        }
        const auto a = static_cast<Index>(pair_rng.below(config.num_items));
        const double target = pair_rng.uniform(-1.0, 1.0);
        Index best = -1;
        double best_gap = 0.0;
        for (Index b = 0; b < n_items; ++b) {
            if (b == a) {
                continue;
            }
            const double gap = std::abs(cos(a, b) - target);
            if ((best < 0 || gap < best_gap) && !used.contains({std::min(a, b), std::max(a, b)})) {
                best = b;
                best_gap = gap;
            }
        }
        if (best < 0) {
            continue;
        }
        used.emplace(std::min(a, best), std::max(a, best));

        double gs = noisy_score(cos(a, best), config.score_noise, score_rng);
        std::string source = "synthetic";
        if (config.secondary_scale_fraction > 0.0 && scale_rng.uniform() < config.secondary_scale_fraction) {
            // Second annotation scale: [1, 5] with a monotone distortion, mapped back.
            const double unit_score = gs / kScoreMax;
            const double label = 1.0 + 4.0 * std::pow(unit_score, config.secondary_scale_gamma);
            gs = rescale_sick(std::clamp(label, 1.0, 5.0));
            source = "synthetic-secondary";
        }
        pairs.push_back(ScoredPair{data.items[static_cast<std::size_t>(a)].id,
                                   data.items[static_cast<std::size_t>(best)].id, gs, std::move(source)});
    }

    Rng split_rng(derive_seed(config.seed, kSplit));
    split_rng.shuffle(std::span<ScoredPair>(pairs));
    const auto n_test = static_cast<std::size_t>(std::floor(config.test_fraction * static_cast<double>(pairs.size())));
    const auto n_dev = static_cast<std::size_t>(std::floor(config.dev_fraction * static_cast<double>(pairs.size())));
    data.test.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_test));
    data.dev.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_test),
                    pairs.begin() + static_cast<std::ptrdiff_t>(n_test + n_dev));
    data.train.assign(pairs.begin() + static_cast<std::ptrdiff_t>(n_test + n_dev), pairs.end());
    for (auto* split : {&data.train, &data.dev, &data.test}) {
        for (ScoredPair& p : *split) {
            p.source += split == &data.train ? "-train" : split == &data.dev ? "-dev" : "-test";
        }
    }

    const std::vector<std::vector<ScoredPair>> held_out = {data.dev, data.test};
    if (!filter_overlap(data.train, held_out).removed.empty()) {
        throw GenerationError("synth: train split overlaps dev/test");
    }

    // Contrastive triplets from the thresholded train pairs; the hard negative
    // is an item whose clean score with the anchor is below negative_threshold.
    std::vector<Triplet> triplets = to_contrastive(data.train, config.positive_threshold);
    if (triplets.size() < 2) {
        throw GenerationError("synth: only " + std::to_string(triplets.size()) +
                              " train pairs score above the positive threshold " +
                              std::to_string(config.positive_threshold));
    }
    Rng neg_rng(derive_seed(config.seed, kNegatives));
    const auto index_of = [](const std::string& id) { return static_cast<Index>(std::stoul(id.substr(5))); };
    for (Triplet& t : triplets) {
        const Index anchor = index_of(t.anchor);
        const Index positive = index_of(t.positive);
        bool found = false;
        for (int attempt = 0; attempt < 20000 && !found; ++attempt) {
            const auto cand = static_cast<Index>(neg_rng.below(config.num_items));
            if (cand == anchor || cand == positive) {
                continue;
            }
            if (clean_score(cos(anchor, cand)) < config.negative_threshold) {
                t.hard_negative = data.items[static_cast<std::size_t>(cand)].id;
                found = true;
            }
        }
        if (!found) {
            throw GenerationError("synth: no hard negative scoring below " +
                                  std::to_string(config.negative_threshold) + " for anchor " + t.anchor);
        }
    }
    data.triplets = std::move(triplets);
    return data;
}

void save_items(const std::filesystem::path& path, const std::vector<ItemFeatures>& items) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InvalidInput("cannot open '" + path.string() + "' for writing");
    }
    for (const ItemFeatures& item : items) {
        out << json{{"id", item.id}, {"features", item.features}}.dump() << '\n';
    }
}

std::vector<ItemFeatures> load_items(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    std::vector<ItemFeatures> items;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        try {
            const json obj = json::parse(line);
            items.push_back(ItemFeatures{obj.at("id").get<std::string>(), obj.at("features").get<std::vector<double>>()});
        } catch (const json::exception& e) {
            throw ParseError(path.string(), number, e.what());
        }
        if (items.size() > 1 && items.back().features.size() != items.front().features.size()) {
            throw ParseError(path.string(), number, "feature dimension differs from the first item");
        }
    }
    return items;
}

void save_synth_dataset(const std::filesystem::path& dir, const SynthDataset& data) {
    std::filesystem::create_directories(dir);
    save_items(dir / "items.jsonl", data.items);
    save_pairs(dir / "train.jsonl", data.train, PairFormat::Jsonl);
    save_pairs(dir / "dev.jsonl", data.dev, PairFormat::Jsonl);
    save_pairs(dir / "test.jsonl", data.test, PairFormat::Jsonl);
    save_triplets(dir / "triplets.jsonl", data.triplets);

    json checksums = json::object();
    for (const char* name : {"items.jsonl", "train.jsonl", "dev.jsonl", "test.jsonl", "triplets.jsonl"}) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%08x", file_crc(dir / name));
        checksums[name] = buf;
    }
    json manifest = {
        {"format", "pcc-synth/1"},
        {"config", config_to_json(data.config)},
        {"seed", data.config.seed},
        {"counts",
         {{"items", data.items.size()},
          {"train", data.train.size()},
          {"dev", data.dev.size()},
          {"test", data.test.size()},
          {"triplets", data.triplets.size()}}},
        {"checksums_crc32", checksums},
    };
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
}

SynthDataset load_synth_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) {
        throw ParseError(manifest_path.string(), 0, "cannot open dataset manifest");
    }
    SynthDataset data;
    json checksums;
    try {
        const json manifest = json::parse(in);
        data.config = config_from_json(manifest.at("config"));
        checksums = manifest.at("checksums_crc32");
    } catch (const json::exception& e) {
        throw ParseError(manifest_path.string(), 0, e.what());
    }
    for (const char* name : {"items.jsonl", "train.jsonl", "dev.jsonl", "test.jsonl", "triplets.jsonl"}) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%08x", file_crc(dir / name));
        if (!checksums.contains(name) || checksums[name] != buf) {
            throw ParseError(manifest_path.string(), 0, std::string("checksum mismatch for ") + name);
        }
    }
    data.items = load_items(dir / "items.jsonl");
    data.train = load_pairs(dir / "train.jsonl", PairFormat::Jsonl);
    data.dev = load_pairs(dir / "dev.jsonl", PairFormat::Jsonl);
    data.test = load_pairs(dir / "test.jsonl", PairFormat::Jsonl);
    data.triplets = load_triplets(dir / "triplets.jsonl");
    return data;
}

} // namespace pcc
