#include "output.hpp"

#include <cmath>
#include <cstdio>

namespace matchnet::cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::string cell_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return format_number(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return csv_field(v);
            else return std::to_string(v);
        },
        c);
}

}  // namespace

nlohmann::json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
            }
            return v;
        },
        c);
}

void Table::write_csv(std::ostream& os) const {
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << csv_field(header[k]);
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << cell_text(row[k]);
        os << '\n';
    }
}

nlohmann::json Table::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t k = 0; k < header.size() && k < row.size(); ++k) obj[header[k]] = cell_json(row[k]);
        arr.push_back(std::move(obj));
    }
    return arr;
}

}  // namespace matchnet::cli
