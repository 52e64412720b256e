#ifndef TRIQ_RECORD_HPP
#define TRIQ_RECORD_HPP

#include <optional>
#include <string>

#include "json.hpp"
#include "triq/kfield.hpp"
#include "triq/triquad.hpp"

namespace triq {

// Flattened, serialization-friendly view of one classified pair. All big
// integers are decimal strings so no consumer ever loses precision.
struct ResultRecord {
    UnitGroupReport report;
    Int denom_bound;
    long max_precision = 0;
    std::optional<long> wall_time_ms;  // omitted in scan output (determinism)

    nlohmann::ordered_json to_json() const;
    std::string to_json_line() const;
    std::string to_csv_row() const;
    static std::string csv_header();
};

ResultRecord make_record(const UnitGroupReport& report, const SquareTestConfig& cfg);

std::string format_text_report(const ResultRecord& rec);

}  // namespace triq

#endif
