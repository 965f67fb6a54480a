#include "monreco/split.hpp"

#include <cmath>

#include "monreco/errors.hpp"
#include "monreco/rng.hpp"

namespace monreco {

SplitIndices split_dataset(const Dataset& dataset, double ratio, std::uint64_t seed) {
    if (ratio <= 0.0 || ratio >= 1.0) throw DomainError("split_dataset: ratio must be in (0, 1)");
    if (dataset.services.size() < 2) throw DomainError("split_dataset: needs at least two services");
    const std::size_t n = dataset.services.size();
    SeededRng rng(seed);
    const std::vector<std::size_t> order = rng.sample_distinct(n, n);  // full shuffle
    const auto train_count =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    SplitIndices split;
    split.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& id = dataset.services[order[i]].service_id;
        if (i < train_count)
            split.train_ids.insert(id);
        else
            split.test_ids.insert(id);
    }
    return split;
}

} // namespace monreco
