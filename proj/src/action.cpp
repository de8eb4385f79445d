#include "deixis/action.hpp"

#include <array>
#include <charconv>

namespace deixis {

std::string format_number(double v) {
    if (v == 0.0) return "0";  // also folds -0
    std::array<char, 512> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

std::string format_step(const ActionStep& step) {
    std::string out = step.primitive + "(";
    for (std::size_t i = 0; i < step.args.size(); ++i) {
        if (i != 0) out += ", ";
        out += step.args[i].name + "=" + format_number(step.args[i].value);
    }
    out += ")";
    return out;
}

std::string serialize_plan(const ActionSequence& seq) {
    std::string out;
    for (const auto& s : seq.steps) {
        out += format_step(s);
        out += '\n';
    }
    return out;
}

}  // namespace deixis
