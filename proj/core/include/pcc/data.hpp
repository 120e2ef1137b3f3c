#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcc {

/// Two texts and a fine-grained human similarity score on [0, 5].
struct ScoredPair {
    std::string s;
    std::string s_prime;
    double gs = 0.0;
    std::string source;

    bool operator==(const ScoredPair&) const = default;
};

/// Anchor / positive / optional hard negative for contrastive training.
struct Triplet {
    std::string anchor;
    std::string positive;
    std::optional<std::string> hard_negative;

    bool operator==(const Triplet&) const = default;
};

enum class PairFormat { Tsv, Jsonl };

/// Parses "tsv" or "jsonl"; throws InvalidInput otherwise.
PairFormat parse_pair_format(std::string_view name);

/// Guesses from the extension: .jsonl/.json is JSONL, anything else TSV.
PairFormat pair_format_for(const std::filesystem::path& path);

/// TSV: `sentence1 TAB sentence2 TAB score`, no header. JSONL: objects with
/// keys s, s_prime, gs and optional source. Empty lines are skipped.
/// `source_name` labels errors and fills ScoredPair::source when absent.
/// Throws ParseError naming the 1-based line on malformed rows.
std::vector<ScoredPair> read_pairs(std::istream& in, PairFormat format, const std::string& source_name);
std::vector<ScoredPair> load_pairs(const std::filesystem::path& path, PairFormat format);
std::vector<ScoredPair> load_pairs(const std::filesystem::path& path);

/// Scores are written with the shortest round-trip representation.
void write_pairs(std::ostream& out, std::span<const ScoredPair> pairs, PairFormat format);
void save_pairs(const std::filesystem::path& path, std::span<const ScoredPair> pairs, PairFormat format);

/// JSONL with keys anchor, positive and optional hard_negative.
std::vector<Triplet> read_triplets(std::istream& in, const std::string& source_name);
std::vector<Triplet> load_triplets(const std::filesystem::path& path);
void write_triplets(std::ostream& out, std::span<const Triplet> triplets);
void save_triplets(const std::filesystem::path& path, std::span<const Triplet> triplets);

struct FilterResult {
    std::vector<ScoredPair> kept;
    std::vector<ScoredPair> removed;
};

/// Drops every train pair whose texts match some test pair in either order,
/// whatever the two scores are. Texts are compared after normalize_text().
/// Kept pairs stay in input order.
FilterResult filter_overlap(std::span<const ScoredPair> train,
                            std::span<const std::vector<ScoredPair>> test_sets);

/// SICK-R relatedness [1, 5] onto the STS-B scale: 5 (label - 1) / 4.
/// Throws InvalidInput outside [1, 5].
double rescale_sick(double label);

/// Anchor/positive triplets (no hard negative) for every pair with
/// gs strictly greater than `threshold`. Throws InvalidInput unless
/// threshold is in [0, 5].
std::vector<Triplet> to_contrastive(std::span<const ScoredPair> pairs, double threshold);

/// A group of dataset row indices.
struct Batch {
    std::size_t epoch = 0;
    std::size_t index = 0;  // within the epoch
    std::vector<std::size_t> rows;
};

/// Each epoch is an independent seeded shuffle of [0, dataset_size) cut into
/// consecutive groups of `batch_size`. A short final group is dropped unless
/// `keep_last` is set. Throws InvalidInput when batch_size < 2 or the
/// dataset is smaller than one batch.
std::vector<Batch> make_batches(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                                std::size_t epochs, bool keep_last = false);

} // namespace pcc
