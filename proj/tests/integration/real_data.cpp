// Overlap-filter counts on the real STS-B / SICK-R training sets.
//
// Expects $PCC_REAL_DATA_DIR laid out as
//   train/stsb.tsv    sentence1 \t sentence2 \t score in [0, 5]
//   train/sickr.tsv   sentence1 \t sentence2 \t label in [1, 5]
//   test/*.tsv        the seven benchmark test sets, same three columns
// Exits 77 (skipped) when the variable is unset or the layout is missing.

#include "pcc/data.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

int main() {
    const char* root_env = std::getenv("PCC_REAL_DATA_DIR");
    if (root_env == nullptr || *root_env == '\0') {
        std::cout << "PCC_REAL_DATA_DIR not set; skipping\n";
        return 77;
    }
    const fs::path root = root_env;
    if (!fs::exists(root / "train" / "stsb.tsv") || !fs::exists(root / "train" / "sickr.tsv") ||
        !fs::is_directory(root / "test")) {
        std::cout << "real data layout incomplete under " << root << "; skipping\n";
        return 77;
    }

    std::vector<std::vector<pcc::ScoredPair>> tests;
    for (const auto& entry : fs::directory_iterator(root / "test")) {
        if (entry.path().extension() == ".tsv") tests.push_back(pcc::load_pairs(entry.path(), pcc::PairFormat::Tsv));
    }
    const auto stsb = pcc::filter_overlap(pcc::load_pairs(root / "train" / "stsb.tsv", pcc::PairFormat::Tsv), tests);
    auto sick_raw = pcc::load_pairs(root / "train" / "sickr.tsv", pcc::PairFormat::Tsv);
    for (auto& p : sick_raw) p.gs = pcc::rescale_sick(p.gs);
    const auto sick = pcc::filter_overlap(sick_raw, tests);

    std::vector<pcc::ScoredPair> combined = stsb.kept;
    combined.insert(combined.end(), sick.kept.begin(), sick.kept.end());
    const auto positives = pcc::to_contrastive(combined, 4.0);

    std::cout << tests.size() << " test sets\n"
              << "stsb " << stsb.kept.size() + stsb.removed.size() << " → " << stsb.kept.size() << '\n'
              << "sickr " << sick.kept.size() + sick.removed.size() << " → " << sick.kept.size() << '\n'
              << "combined " << combined.size() << ", above 4.0: " << positives.size() << '\n';

    const bool ok = tests.size() == 7 && stsb.kept.size() == 991 && sick.kept.size() == 4407 &&
                    combined.size() == 5398 && positives.size() == 1543;
    std::cout << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? 0 : 1;
}
