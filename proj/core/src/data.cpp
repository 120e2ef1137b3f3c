#include "pcc/data.hpp"

#include "pcc/errors.hpp"
#include "pcc/rng.hpp"
#include "pcc/text.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <utility>

namespace pcc {

namespace {

using nlohmann::json;

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t") == std::string::npos; }

std::string format_score(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_score(std::string_view text, const std::string& source, std::size_t line) {
    while (!text.empty() && (text.front() == ' ')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ')) {
        text.remove_suffix(1);
    }
    if (text.empty()) {
        throw ParseError(source, line, "empty score");
    }
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError(source, line, "score '" + std::string(text) + "' is not a number");
    }
    if (!std::isfinite(v)) {
        throw ParseError(source, line, "score is not finite");
    }
    return v;
}

ScoredPair parse_tsv_row(const std::string& row, const std::string& source, std::size_t line) {
    std::vector<std::string_view> fields;
    std::string_view rest = row;
    while (true) {
        const auto tab = rest.find('\t');
        fields.push_back(rest.substr(0, tab));
        if (tab == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(tab + 1);
    }
    if (fields.size() != 3) {
        throw ParseError(source, line,
                         "expected 3 tab-separated columns (sentence1, sentence2, score), found " +
                             std::to_string(fields.size()));
    }
    return ScoredPair{std::string(fields[0]), std::string(fields[1]), parse_score(fields[2], source, line), source};
}

std::string require_string(const json& obj, const char* key, const std::string& source, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(source, line, std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
}

json parse_json_object(const std::string& row, const std::string& source, std::size_t line) {
    json obj;
    try {
        obj = json::parse(row);
    } catch (const json::parse_error& e) {
        throw ParseError(source, line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw ParseError(source, line, "expected a JSON object");
    }
    return obj;
}

ScoredPair parse_jsonl_row(const std::string& row, const std::string& source, std::size_t line) {
    const json obj = parse_json_object(row, source, line);
    ScoredPair p;
    p.s = require_string(obj, "s", source, line);
    p.s_prime = require_string(obj, "s_prime", source, line);
    const auto gs = obj.find("gs");
    if (gs == obj.end() || !gs->is_number()) {
        throw ParseError(source, line, "missing numeric field 'gs'");
    }
    p.gs = gs->get<double>();
    if (!std::isfinite(p.gs)) {
        throw ParseError(source, line, "score is not finite");
    }
    const auto src = obj.find("source");
    p.source = (src != obj.end() && src->is_string()) ? src->get<std::string>() : source;
    return p;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InvalidInput("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

} // namespace

PairFormat parse_pair_format(std::string_view name) {
    if (name == "tsv") {
        return PairFormat::Tsv;
    }
    if (name == "jsonl") {
        return PairFormat::Jsonl;
    }
    throw InvalidInput("unknown pair format '" + std::string(name) + "' (expected tsv or jsonl)");
}

PairFormat pair_format_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return (ext == ".jsonl" || ext == ".json") ? PairFormat::Jsonl : PairFormat::Tsv;
}

std::vector<ScoredPair> read_pairs(std::istream& in, PairFormat format, const std::string& source_name) {
    std::vector<ScoredPair> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        strip_cr(line);
        if (blank(line)) {
            continue;
        }
        out.push_back(format == PairFormat::Tsv ? parse_tsv_row(line, source_name, number)
                                                : parse_jsonl_row(line, source_name, number));
    }
    return out;
}

std::vector<ScoredPair> load_pairs(const std::filesystem::path& path, PairFormat format) {
    auto in = open_input(path);
    auto pairs = read_pairs(in, format, path.string());
    // rows without their own tag are labelled by file name, not the full path
    const std::string full = path.string();
    const std::string tag = path.filename().string();
    for (ScoredPair& p : pairs) {
        if (p.source == full) p.source = tag;
    }
    return pairs;
}

std::vector<ScoredPair> load_pairs(const std::filesystem::path& path) { return load_pairs(path, pair_format_for(path)); }

void write_pairs(std::ostream& out, std::span<const ScoredPair> pairs, PairFormat format) {
    for (const ScoredPair& p : pairs) {
        if (format == PairFormat::Tsv) {
            if (p.s.find_first_of("\t\n") != std::string::npos ||
                p.s_prime.find_first_of("\t\n") != std::string::npos) {
                throw InvalidInput("write_pairs: text contains a tab or newline and cannot be written as TSV");
            }
            out << p.s << '\t' << p.s_prime << '\t' << format_score(p.gs) << '\n';
        } else {
            json obj = json::object();
            obj["s"] = p.s;
            obj["s_prime"] = p.s_prime;
            obj["gs"] = p.gs;
            if (!p.source.empty()) {
                obj["source"] = p.source;
            }
            out << obj.dump() << '\n';
        }
    }
}

void save_pairs(const std::filesystem::path& path, std::span<const ScoredPair> pairs, PairFormat format) {
    auto out = open_output(path);
    write_pairs(out, pairs, format);
}

std::vector<Triplet> read_triplets(std::istream& in, const std::string& source_name) {
    std::vector<Triplet> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        strip_cr(line);
        if (blank(line)) {
            continue;
        }
        const json obj = parse_json_object(line, source_name, number);
        Triplet t;
        t.anchor = require_string(obj, "anchor", source_name, number);
        t.positive = require_string(obj, "positive", source_name, number);
        const auto neg = obj.find("hard_negative");
        if (neg != obj.end() && !neg->is_null()) {
            if (!neg->is_string()) {
                throw ParseError(source_name, number, "'hard_negative' must be a string");
            }
            t.hard_negative = neg->get<std::string>();
        }
        if (t.anchor.empty() || t.positive.empty() || (t.hard_negative && t.hard_negative->empty())) {
            throw ParseError(source_name, number, "triplet fields must be non-empty");
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Triplet> load_triplets(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_triplets(in, path.string());
}

void write_triplets(std::ostream& out, std::span<const Triplet> triplets) {
    for (const Triplet& t : triplets) {
        json obj = json::object();
        obj["anchor"] = t.anchor;
        obj["positive"] = t.positive;
        if (t.hard_negative) {
            obj["hard_negative"] = *t.hard_negative;
        }
        out << obj.dump() << '\n';
    }
}

void save_triplets(const std::filesystem::path& path, std::span<const Triplet> triplets) {
    auto out = open_output(path);
    write_triplets(out, triplets);
}

FilterResult filter_overlap(std::span<const ScoredPair> train, std::span<const std::vector<ScoredPair>> test_sets) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& set : test_sets) {
        for (const ScoredPair& p : set) {
            std::string a = normalize_text(p.s);
            std::string b = normalize_text(p.s_prime);
            seen.emplace(b, a);
            seen.emplace(std::move(a), std::move(b));
        }
    }

    FilterResult result;
    for (const ScoredPair& p : train) {
        if (seen.contains({normalize_text(p.s), normalize_text(p.s_prime)})) {
            result.removed.push_back(p);
        } else {
            result.kept.push_back(p);
        }
    }
    return result;
}

double rescale_sick(double label) {
    if (!(label >= 1.0 && label <= 5.0)) {
        throw InvalidInput("rescale_sick: label " + format_score(label) + " outside [1, 5]");
    }
    return 5.0 * (label - 1.0) / 4.0;
}

std::vector<Triplet> to_contrastive(std::span<const ScoredPair> pairs, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 5.0)) {
        throw InvalidInput("to_contrastive: threshold must lie in [0, 5]");
    }
    std::vector<Triplet> out;
    for (const ScoredPair& p : pairs) {
        if (p.gs > threshold) {
            out.push_back(Triplet{p.s, p.s_prime, std::nullopt});
        }
    }
    return out;
}

std::vector<Batch> make_batches(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed,
                                std::size_t epochs, bool keep_last) {
    if (batch_size < 2) {
        throw InvalidInput("make_batches: batch size must be at least 2");
    }
    if (dataset_size < batch_size) {
        throw InvalidInput("make_batches: dataset of " + std::to_string(dataset_size) +
                           " rows is smaller than batch size " + std::to_string(batch_size));
    }
    std::vector<Batch> out;
    std::vector<std::size_t> order(dataset_size);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, epoch));
        rng.shuffle(std::span<std::size_t>(order));
        std::size_t index = 0;
        for (std::size_t start = 0; start < dataset_size; start += batch_size) {
            const std::size_t end = std::min(dataset_size, start + batch_size);
            if (end - start < batch_size && !keep_last) {
                break;
            }
            if (end - start < 2) {
                break;  // a single row carries no correlation signal
            }
            out.push_back(Batch{epoch, index++, std::vector<std::size_t>(order.begin() + start, order.begin() + end)});
        }
    }
    return out;
}

} // namespace pcc
