#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace matchnet::cli {

using Cell = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;

/// Rectangular result set rendered as CSV or as a JSON array of objects.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
    void write_csv(std::ostream& os) const;
    nlohmann::json to_json() const;
};

/// 17 significant digits, "nan"/"inf" spelled out.
std::string format_number(double x);

nlohmann::json cell_json(const Cell& c);

}  // namespace matchnet::cli
