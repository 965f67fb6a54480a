#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "monreco/core_model.hpp"

namespace monreco {

struct SplitIndices {
    std::set<std::string> train_ids;
    std::set<std::string> test_ids;
    std::uint64_t seed = 0;
};

// Seeded uniform shuffle followed by a prefix split; |train| = round(ratio * n).
SplitIndices split_dataset(const Dataset& dataset, double ratio, std::uint64_t seed);

inline SplitIndices split_dataset(const Dataset& dataset, std::uint64_t seed) {
    return split_dataset(dataset, 0.8, seed);
}

} // namespace monreco
