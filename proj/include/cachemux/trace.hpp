#pragma once

#include <optional>
#include <string>

#include "cachemux/catalog.hpp"

namespace cachemux {

/// Builds a catalog from a recorded cost trace.
///
/// Format: CSV with header `query_id,model_index,cost`, one row per observed
/// request. Query ids must densely cover [0, max_id] and every
/// (query, model) pair needs at least one row. Query frequency is taken
/// proportional to the per-query row count; expected costs are the per-pair
/// sample means, and requests replay the recorded samples in file order
/// (cycling unless strict replay is requested).
///
/// When explicit bounds are given every cost is validated against them;
/// otherwise bounds are the hull of the recorded costs.
QueryCatalog load_trace(const std::string& path,
                        std::optional<CostBounds> bounds = std::nullopt,
                        bool strict_replay = false);

}  // namespace cachemux
