#include <doctest.h>

#include "deixis/config.hpp"
#include "deixis/grammar.hpp"

using namespace deixis;

namespace {

const Lexicon& lex() {
    static const Lexicon l = load_config().lexicon;
    return l;
}

WordToken word(std::string text, double t = 0.0) { return WordToken{std::move(text), t, t + 0.2, 1.0}; }

ErrorCode metric_error(std::vector<WordToken> words) {
    try {
        parse_metric(words, lex());
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected MalformedMetric");
    return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("classify covers the five categories") {
    CHECK(classify(word("pick"), lex()).kind == TokenKind::Action);
    CHECK(classify(word("pick"), lex()).name == "pick");
    CHECK(classify(word("initial"), lex()).name == "home");
    CHECK(classify(word("cup"), lex()).kind == TokenKind::Class);
    CHECK(classify(word("this"), lex()).kind == TokenKind::Pronoun);
    CHECK(classify(word("finish"), lex()).kind == TokenKind::Finish);
    CHECK(classify(word("banana"), lex()).kind == TokenKind::Unknown);
    CHECK(classify(word("degrees"), lex()).kind == TokenKind::MetricUnit);

    const CommandToken near = classify(word("near"), lex());
    CHECK(near.kind == TokenKind::Metric);
    CHECK(near.metric.unit == UnitKind::Spatial);
    CHECK(near.metric.qualifier == "near");

    const CommandToken fast = classify(word("fast"), lex());
    CHECK(fast.metric.unit == UnitKind::SpeedLevel);
    CHECK(fast.metric.value == 3.0);
}

TEST_CASE("classify ignores case") {
    CHECK(classify(word("PiCk"), lex()).kind == TokenKind::Action);
    CHECK(classify(word("THIS"), lex()).kind == TokenKind::Pronoun);
}

TEST_CASE("every lexicon word classifies to its own set and nothing else is known") {
    const Lexicon& l = lex();
    for (const auto& [w, a] : l.action_words) {
        CHECK(classify(word(w), l).kind == TokenKind::Action);
        CHECK(classify(classify(word(w), l).source.front(), l).name == a);
    }
    for (const auto& [w, c] : l.class_words) CHECK(classify(word(w), l).name == c);
    for (const auto& w : l.pronoun_words) CHECK(classify(word(w), l).kind == TokenKind::Pronoun);
    for (const auto& w : l.finish_words) CHECK(classify(word(w), l).kind == TokenKind::Finish);
    for (const auto& [w, k] : l.metric_units) {
        const auto kind = classify(word(w), l).kind;
        CHECK((kind == TokenKind::Metric || kind == TokenKind::MetricUnit));
    }
    for (const char* w : {"the", "please", "robot", "x", "cupboard"}) {
        CHECK(classify(word(w), l).kind == TokenKind::Unknown);
    }
}

TEST_CASE("parse_metric") {
    const CommandToken m = parse_metric(std::vector<WordToken>{word("90"), word("degrees")}, lex());
    CHECK(m.metric.unit == UnitKind::Degrees);
    CHECK(m.metric.value == 90.0);
    CHECK(parse_metric(std::vector<WordToken>{word("ninety"), word("deg")}, lex()).metric.value == 90.0);
    CHECK(parse_metric(std::vector<WordToken>{word("12.5"), word("degree")}, lex()).metric.value == 12.5);
    CHECK(parse_metric(std::vector<WordToken>{word("near")}, lex()).metric.qualifier == "near");

    CHECK(metric_error({word("degrees")}) == ErrorCode::MalformedMetric);
    CHECK(metric_error({word("90")}) == ErrorCode::MalformedMetric);
    CHECK(metric_error({word("cup"), word("degrees")}) == ErrorCode::MalformedMetric);
    CHECK(metric_error({word("90"), word("near")}) == ErrorCode::MalformedMetric);
    CHECK(metric_error({word("1e3"), word("degrees")}) == ErrorCode::MalformedMetric);
    CHECK(metric_error({word("90"), word("degrees"), word("now")}) == ErrorCode::MalformedMetric);
}

TEST_CASE("command stream pairs numbers with units") {
    CommandStream stream(lex());
    CHECK(stream.push(word("pour", 0.0)).tokens.size() == 1);
    auto a = stream.push(word("90", 1.0));
    CHECK(a.tokens.empty());
    auto b = stream.push(word("degrees", 1.3));
    REQUIRE(b.tokens.size() == 1);
    CHECK(b.tokens[0].kind == TokenKind::Metric);
    CHECK(b.tokens[0].metric.value == 90.0);
    CHECK(b.tokens[0].t_start() == 1.0);
    CHECK(b.tokens[0].t_end() == doctest::Approx(1.5));

    auto c = stream.push(word("45", 2.0));
    auto d = stream.push(word("finish", 2.5));
    CHECK(d.diagnostics.size() == 1);
    CHECK(d.diagnostics[0].code() == ErrorCode::MalformedMetric);
    CHECK(d.tokens.size() == 1);

    auto e = stream.push(word("degrees", 3.0));
    CHECK(e.tokens.empty());
    CHECK(e.diagnostics.size() == 1);

    stream.push(word("7", 4.0));
    CHECK(stream.flush().diagnostics.size() == 1);
    CHECK(stream.flush().diagnostics.empty());
}

TEST_CASE("lexicon rejects overlapping or malformed vocabularies") {
    nlohmann::json base = lex().to_json();
    CHECK_NOTHROW(Lexicon::from_json(base));

    auto code_of = [](const nlohmann::json& j) {
        try {
            Lexicon::from_json(j);
        } catch (const Error& e) {
            return e.code();
        }
        FAIL("expected InvalidLexicon");
        return ErrorCode::InvalidConfig;
    };
    nlohmann::json overlap = base;
    overlap["class_words"]["this"] = "thing";
    CHECK(code_of(overlap) == ErrorCode::InvalidLexicon);

    nlohmann::json upper = base;
    upper["pronoun_words"].push_back("That");
    CHECK(code_of(upper) == ErrorCode::InvalidLexicon);

    nlohmann::json dup = base;
    dup["finish_words"].push_back("finish");
    CHECK(code_of(dup) == ErrorCode::InvalidLexicon);

    nlohmann::json empty = base;
    empty["action_words"][""] = "pick";
    CHECK(code_of(empty) == ErrorCode::InvalidLexicon);

    nlohmann::json speed = base;
    speed["speed_scale"].push_back("near");
    CHECK(code_of(speed) == ErrorCode::InvalidLexicon);

    nlohmann::json unit = base;
    unit["metric_units"]["cm"] = "length";
    CHECK(code_of(unit) == ErrorCode::InvalidLexicon);
}

TEST_CASE("lexicon actions exist in the action catalog") {
    const Config cfg = load_config();
    for (const auto& a : cfg.lexicon.action_names()) CHECK(cfg.catalog.find(a) != nullptr);

    nlohmann::json bad = nlohmann::json::object();
    bad["lexicon"]["action_words"]["levitate"] = "levitate";
    CHECK_THROWS_AS(load_config(bad), Error);
}
