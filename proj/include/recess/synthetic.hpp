#pragma once

#include <cstdint>

#include "recess/series_ingest.hpp"

namespace recess::synthetic {

/// Shape of a generated labor-market history.
struct SyntheticSpec {
    MonthIndex start = MonthIndex::from_year_month(1929, 4);
    std::size_t months = 1113;
    std::size_t recessions = 15;
    std::uint64_t seed = 1;
    double noise = 0.015;       ///< sd of month-to-month log noise
    std::int32_t min_gap = 40;  ///< minimum months between recession starts
};

/**
 * Unemployment and vacancy rates with recession-like cycles: in every event
 * unemployment climbs and vacancies slump over several months, then both
 * revert during a long expansion. Expansions carry milder, shorter slowdowns
 * that are not events. The calendar holds the true event starts
 * and ends. Same spec, same output.
 */
[[nodiscard]] ingest::Dataset generate(const SyntheticSpec& spec = {});

}  // namespace recess::synthetic
