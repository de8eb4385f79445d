#include "deixis/planner.hpp"
#include "planner_internal.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

namespace deixis {

namespace {

class LineCursor {
public:
    LineCursor(std::string_view text, std::size_t line_no) : s_(text), line_(line_no) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool at_end() const { return pos_ >= s_.size(); }
    bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string identifier() {
        const std::size_t start = pos_;
        if (pos_ >= s_.size() || !(std::islower(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            fail("expected a lowercase identifier");
        }
        while (pos_ < s_.size() &&
               (std::islower(static_cast<unsigned char>(s_[pos_])) || std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                s_[pos_] == '_')) {
            ++pos_;
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    // -?digits(.digits)?
    double number() {
        const std::size_t start = pos_;
        if (peek('-')) ++pos_;
        const std::size_t int_start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == int_start) fail("expected a decimal number");
        if (peek('.')) {
            ++pos_;
            const std::size_t frac_start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == frac_start) fail("expected digits after '.'");
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v, std::chars_format::fixed);
        if (ec != std::errc{} || ptr != s_.data() + pos_ || !std::isfinite(v)) fail("number out of range");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SyntaxError, "line " + std::to_string(line_) + ", column " + std::to_string(pos_ + 1) +
                                                ": " + what)
            .at_line(line_);
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

ActionStep parse_line(std::string_view line, std::size_t line_no) {
    LineCursor cur(line, line_no);
    cur.skip_ws();
    ActionStep step;
    step.primitive = cur.identifier();
    cur.skip_ws();
    cur.expect('(');
    cur.skip_ws();
    if (!cur.peek(')')) {
        while (true) {
            cur.skip_ws();
            Arg a;
            a.name = cur.identifier();
            cur.skip_ws();
            cur.expect('=');
            cur.skip_ws();
            a.value = cur.number();
            step.args.push_back(std::move(a));
            cur.skip_ws();
            if (cur.peek(',')) {
                cur.expect(',');
                continue;
            }
            break;
        }
    }
    cur.expect(')');
    cur.skip_ws();
    if (!cur.at_end()) cur.fail("unexpected trailing content");
    return step;
}

}  // namespace

ActionStep parse_call_line(std::string_view line, std::size_t line_no) { return parse_line(line, line_no); }

std::optional<std::string> argument_problem(const ActionStep& step, const PrimitiveSpec& spec) {
    std::set<std::string> seen;
    for (const auto& a : step.args) {
        const ParamSpec* p = nullptr;
        for (const auto& candidate : spec.params) {
            if (candidate.name == a.name) p = &candidate;
        }
        if (p == nullptr) return step.primitive + " has no parameter '" + a.name + "'";
        if (!seen.insert(a.name).second) return "parameter '" + a.name + "' given twice";
        if (!std::isfinite(a.value) || a.value < p->min || a.value > p->max) {
            return a.name + "=" + format_number(a.value) + " outside [" + format_number(p->min) + ", " +
                   format_number(p->max) + "]";
        }
    }
    for (const auto& p : spec.params) {
        if (seen.count(p.name) == 0) return step.primitive + " is missing parameter '" + p.name + "'";
    }
    return std::nullopt;
}

ActionSequence parse_plan(std::string_view text, const ApiSpec& api) {
    ActionSequence seq;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;

        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        if (line[first] == '#') continue;

        ActionStep step = parse_line(line, line_no);
        const PrimitiveSpec* spec = api.find(step.primitive);
        if (spec == nullptr) {
            throw Error(ErrorCode::UnknownPrimitive, "line " + std::to_string(line_no) + ": '" + step.primitive +
                                                         "' is not an API call")
                .at_line(line_no);
        }
        if (auto problem = argument_problem(step, *spec)) {
            throw Error(ErrorCode::ArgumentSchemaMismatch, "line " + std::to_string(line_no) + ": " + *problem)
                .at_line(line_no);
        }
        seq.steps.push_back(std::move(step));
        if (end == text.size()) break;
    }
    if (seq.steps.empty()) throw Error(ErrorCode::SyntaxError, "plan contains no calls");
    return seq;
}

}  // namespace deixis
