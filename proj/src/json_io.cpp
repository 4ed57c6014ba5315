#include "defres/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace defres {

namespace {

void quote(std::string& out, const std::string& s)
{
    // nlohmann's own escaping keeps strings valid UTF-8 JSON.
    out += Json(s).dump();
}

void emit(std::string& out, const Json& j, int indent)
{
    const std::string pad(2 * (indent + 1), ' ');
    const std::string close(2 * indent, ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) out += ",\n";
            first = false;
            out += pad;
            quote(out, key);
            out += ": ";
            emit(out, value, indent + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& v : j)
            if (v.is_structured()) flat = false;
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += flat ? ", " : ",\n";
            first = false;
            if (!flat) out += pad;
            emit(out, v, indent + 1);
        }
        out += flat ? "]" : "\n" + close + "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? format_number(v) : "null";
        return;
    }
    case Json::value_t::string: quote(out, j.get<std::string>()); return;
    default: out += j.dump(); return;
    }
}

}  // namespace

std::string to_text(const Json& j)
{
    std::string out;
    emit(out, j, 0);
    out += "\n";
    return out;
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace defres
