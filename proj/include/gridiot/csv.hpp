#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace gridiot {

/// Shortest text that reads back to the same double.
inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size())
    {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    template <class... Ts>
    void row(const Ts&... fields)
    {
        static_assert(sizeof...(Ts) > 0);
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cell(fields)), ...);
        out_ << '\n';
    }

    std::size_t columns() const { return columns_; }

private:
    template <class T>
    static std::string cell(const T& v)
    {
        if constexpr (std::is_same_v<T, bool>) return v ? "1" : "0";
        else if constexpr (std::is_floating_point_v<T>) return format_number(static_cast<double>(v));
        else if constexpr (std::is_integral_v<T>) return std::to_string(v);
        else return std::string(std::string_view(v));
    }

    std::ostream& out_;
    std::size_t columns_;
};

} // namespace gridiot
